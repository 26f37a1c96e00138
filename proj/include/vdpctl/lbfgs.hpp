#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

namespace vdpctl {

struct LbfgsConfig {
    std::size_t max_iterations = 200'000;
    /// Number of stored curvature pairs.
    std::size_t history = 50;
    /// Stop when max|g| <= grad_tol.
    double grad_tol = 1e-10;
    /// Stop when (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= rel_tol.
    double rel_tol = 2.220446049250313e-16;
    /// Sufficient-decrease and curvature constants of the strong Wolfe test.
    double c1 = 1e-4;
    double c2 = 0.9;
    std::size_t max_line_search = 40;

    void validate() const;
};

enum class StopReason {
    max_iterations,
    gradient_tolerance,
    relative_decrease,
    line_search_failure,
};

std::string_view to_string(StopReason r);

/// Returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Called after every accepted step with the iteration number (1-based), the
/// new point and its objective value.
using IterationCallback = std::function<void(std::size_t iteration, const Eigen::VectorXd& x, double f)>;

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double initial_f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    StopReason reason = StopReason::max_iterations;
    /// Set when the line search failed and the best point so far was returned.
    bool degraded = false;
};

/// Limited-memory BFGS (two-loop recursion) with a strong Wolfe line search
/// (bracketing plus cubic-interpolation zoom). Accepted steps never increase f.
LbfgsResult lbfgs_minimize(const Objective& objective, const Eigen::VectorXd& start, const LbfgsConfig& cfg,
                           const IterationCallback& on_iteration = {});

}  // namespace vdpctl
