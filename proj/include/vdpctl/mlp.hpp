#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace vdpctl {

/// Dense network t -> x with tanh on hidden layers and an identity output.
///
/// The scalar input is first mapped by `input_scale * t + input_shift`; this
/// fixed affine map is not trained and defaults to the identity.
/// `weights[l]` is widths[l+1] x widths[l].
struct MlpParams {
    std::vector<int> widths;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double input_scale = 1.0;
    double input_shift = 0.0;

    static MlpParams zeros(const std::vector<int>& widths);
    /// Uniform Glorot weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
    static MlpParams glorot(const std::vector<int>& widths, std::uint64_t seed);

    std::size_t layer_count() const noexcept { return weights.size(); }
    std::size_t parameter_count() const;
    /// Layer by layer: W (column-major) then b.
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);
    /// Maps [t0, t1] onto [-1, 1].
    void set_input_range(double t0, double t1);
    /// Throws config_error on inconsistent shapes, invalid_state_error on
    /// non-finite entries.
    void validate() const;
};

/// 1 -> depth x width -> 1.
std::vector<int> hidden_widths(int depth, int width);

struct TimeDerivs {
    double x = 0.0;
    double dx = 0.0;
    double ddx = 0.0;
};

double mlp_forward(const MlpParams& p, double t);

/// Exact output value and first two derivatives with respect to t.
TimeDerivs mlp_time_derivs(const MlpParams& p, double t);

/// Batched mlp_time_derivs; all spans must have the same length.
void mlp_time_derivs(const MlpParams& p, std::span<const double> t, std::span<double> x, std::span<double> dx,
                     std::span<double> ddx);

}  // namespace vdpctl
