#pragma once

#include <functional>

namespace vdpctl {

/// Parameters of the van der Pol oscillator x'' - mu (1 - x^2) x' + x = F.
struct VdpParams {
    double mu = 1.0;

    /// Throws invalid_state_error unless mu is finite and positive.
    void validate() const;
};

/// Phase-plane state: position and velocity.
struct State {
    double x = 0.0;
    double v = 0.0;
};

struct StateDerivative {
    double dx = 0.0;
    double dv = 0.0;
};

/// Desired sample (x_D, x_D', x_D'') at one time.
struct DesiredSample {
    double x = 0.0;
    double v = 0.0;
    double a = 0.0;
};

/// Circular target x_D(t) = amplitude * sin(t).
struct DesiredTrajectory {
    double amplitude = 5.0;

    void validate() const;
    DesiredSample eval(double t) const;
};

/// Force as a function of time and measured state. Feedforward laws ignore
/// the state argument. Must be deterministic.
using ForcingFunction = std::function<double(double t, const State& s)>;

/// Forced van der Pol vector field: (v, mu (1 - x^2) v - x + force).
/// Throws invalid_state_error on non-finite input.
StateDerivative rhs(const VdpParams& params, const State& s, double force);

/// Same as rhs() without input validation, for inner integration loops.
inline StateDerivative rhs_unchecked(const VdpParams& params, const State& s, double force) noexcept {
    return {s.v, params.mu * (1.0 - s.x * s.x) * s.v - s.x + force};
}

inline DesiredSample desired_eval(const DesiredTrajectory& d, double t) { return d.eval(t); }

}  // namespace vdpctl
