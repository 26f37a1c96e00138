#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vdpctl/dynamics.hpp"

namespace vdpctl {

struct IntegratorConfig {
    double rtol = 1e-6;
    double atol = 1e-10;
    double t0 = 0.0;
    double t1 = 50.0;
    std::size_t n_output = 5000;
    std::size_t max_steps = 10'000'000;

    void validate() const;
    /// Uniform output grid including both endpoints.
    std::vector<double> grid() const;
};

/// Uniformly sampled solution. `a` is the vector-field acceleration at each
/// sample and `f` the force applied there.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> a;
    std::vector<double> f;

    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }
    void resize(std::size_t n);
    State state(std::size_t i) const { return {x[i], v[i]}; }
};

/// Generic planar second-order system: vector field plus the force it
/// applies (reported in Trajectory::f). The force may be null, meaning zero.
struct PlanarSystem {
    std::function<StateDerivative(double t, const State& s)> field;
    std::function<double(double t, const State& s)> force;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

/// Dormand-Prince 5(4) with PI step-size control and the pair's 4th-order
/// continuous extension, sampled on cfg.grid().
///
/// Throws divergence_error when the step budget is exhausted or the step
/// size underflows, blowup_error when the state becomes non-finite.
Trajectory integrate_system(const PlanarSystem& system, const State& init, const IntegratorConfig& cfg,
                            IntegrationStats* stats = nullptr);

/// Forced van der Pol system. A null force means the unforced oscillator.
Trajectory integrate(const VdpParams& params, const ForcingFunction& force, const State& init,
                     const IntegratorConfig& cfg, IntegrationStats* stats = nullptr);

}  // namespace vdpctl
