#include "vdpctl/dynamics.hpp"

#include <cmath>
#include <string>

#include "vdpctl/errors.hpp"

namespace vdpctl {

void VdpParams::validate() const {
    if (!std::isfinite(mu) || mu <= 0.0) {
        throw invalid_state_error("van der Pol mu must be finite and positive, got " + std::to_string(mu));
    }
}

void DesiredTrajectory::validate() const {
    if (!std::isfinite(amplitude) || amplitude <= 0.0) {
        throw invalid_state_error("desired amplitude must be finite and positive, got " +
                                  std::to_string(amplitude));
    }
}

DesiredSample DesiredTrajectory::eval(double t) const {
    const double s = std::sin(t);
    const double c = std::cos(t);
    const double x = amplitude * s;
    return {x, amplitude * c, -x};
}

StateDerivative rhs(const VdpParams& params, const State& s, double force) {
    if (!std::isfinite(params.mu) || !std::isfinite(s.x) || !std::isfinite(s.v) || !std::isfinite(force)) {
        throw invalid_state_error("rhs: non-finite input");
    }
    return rhs_unchecked(params, s, force);
}

}  // namespace vdpctl
