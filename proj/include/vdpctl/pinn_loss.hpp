#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vdpctl/dynamics.hpp"
#include "vdpctl/mlp.hpp"

namespace vdpctl {

/// Positions of the unforced oscillator sampled on a strictly increasing grid.
/// Sample 0 is the initial point used by the initial-position term.
struct TrainingData {
    std::vector<double> t;
    std::vector<double> x_train;

    std::size_t size() const noexcept { return t.size(); }
    /// Throws contract_error when empty or mismatched, config_error when the
    /// grid is not strictly increasing.
    void validate() const;
    /// Every `stride`-th sample, always keeping sample 0.
    TrainingData subsample(std::size_t stride) const;
};

struct LossBreakdown {
    double mse_nn = 0.0;
    double mse_i = 0.0;
    double mse_d = 0.0;
    double total = 0.0;

    bool operator==(const LossBreakdown&) const = default;
};

/// How the trajectory residual is squared.
enum class DynamicsResidual {
    /// mean[((xd'' - x'') + (xd - x))^2]
    joint,
    /// mean[(xd'' - x'')^2] + mean[(xd - x)^2]
    separated,
};

struct LossOptions {
    DynamicsResidual residual = DynamicsResidual::joint;
};

struct LossGradient {
    LossBreakdown loss;
    /// d total / d params in MlpParams::flatten() order.
    Eigen::VectorXd grad;
};

/// Physics-informed control loss:
///   mse_nn = mean[(x_train - x/L)^2]
///   mse_i  = mean over the batch of (x(t_0) - xd(t_0))^2
///   mse_d  = see DynamicsResidual
/// where x, x'' are network outputs and L the desired amplitude.
LossBreakdown loss_eval(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                        const LossOptions& opts = {});

/// Loss and exact parameter gradient. Samples are processed in fixed blocks
/// (OpenMP-parallel when enabled) and reduced in block order, so the result
/// does not depend on the thread count.
LossGradient loss_grad(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                       const LossOptions& opts = {});

/// Serial per-sample implementation of loss_grad, kept as a cross-check for
/// the blocked kernel.
LossGradient loss_grad_reference(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                                 const LossOptions& opts = {});

}  // namespace vdpctl
