#pragma once

// Blocked three-stream evaluation shared by the network and the loss kernels.
//
// Every layer carries a width x 3B matrix: columns [0, B) are values,
// [B, 2B) first time derivatives, [2B, 3B) second time derivatives.

#include <Eigen/Dense>
#include <vector>

#include "vdpctl/mlp.hpp"

namespace vdpctl::detail {

struct BlockCache {
    Eigen::Index cols = 0;
    /// streams[l] enters linear map l; streams[0] is the input row.
    std::vector<Eigen::MatrixXd> streams;
    /// Pre-activations of hidden layer l (output of linear map l).
    std::vector<Eigen::MatrixXd> pre;
    /// 1 - tanh^2 of hidden layer l.
    std::vector<Eigen::ArrayXXd> slope;
    /// Output layer, 1 x 3B.
    Eigen::MatrixXd out;
};

void forward_block(const MlpParams& p, const double* t, Eigen::Index n, BlockCache& c);

/// Backpropagates `upstream` (1 x 3B gradients of the output streams) and
/// accumulates parameter gradients into `grad` in flatten() order.
void backward_block(const MlpParams& p, const BlockCache& c, const Eigen::MatrixXd& upstream, double* grad);

}  // namespace vdpctl::detail
