#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "vdpctl/dynamics.hpp"
#include "vdpctl/integrator.hpp"

namespace vdpctl {

/// Default start of the evaluation window.
inline constexpr double kDefaultTransientCutoff = 25.0;
/// Default zero guard, as a fraction of the desired amplitude.
inline constexpr double kDefaultGuardFraction = 1e-3;

/// Mean absolute relative tracking error over the evaluation window.
struct ErrorReport {
    double mean_abs_rel_error = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
    double transient_cutoff = kDefaultTransientCutoff;

    bool operator==(const ErrorReport&) const = default;
};

/// mean |x - xd| / |xd| over samples with t >= cutoff and |xd| > guard.
/// Throws undefined_metric_error when every sample in the window is excluded,
/// contract_error when the cutoff lies outside the trajectory.
ErrorReport rel_error(const Trajectory& traj, const DesiredTrajectory& d, double transient_cutoff, double guard);

/// Same with guard = kDefaultGuardFraction * amplitude.
ErrorReport rel_error(const Trajectory& traj, const DesiredTrajectory& d,
                      double transient_cutoff = kDefaultTransientCutoff);

/// Phase-plane radius sqrt(x^2 + v^2) over t >= cutoff.
struct RadiusStats {
    double mean = 0.0;
    /// max |r - target| / target
    double max_rel_deviation = 0.0;
    /// mean |r - target| / target
    double mean_rel_deviation = 0.0;
    std::size_t samples = 0;

    bool operator==(const RadiusStats&) const = default;
};

RadiusStats radius_stats(const Trajectory& traj, double target, double transient_cutoff = kDefaultTransientCutoff);

struct TimingRecord {
    double wall_seconds = 0.0;
    /// Wall time relative to the feedforward run of the same cell; empty
    /// when that run is unavailable.
    std::optional<double> relative_time;

    bool operator==(const TimingRecord&) const = default;
};

/// Runs `work` on a fresh dedicated thread and returns its steady-clock wall
/// time. Exceptions thrown by `work` are rethrown in the caller.
double timed_wall_seconds(const std::function<void()>& work);

/// Wall time of `work`; relative_time filled when ff_seconds is given.
TimingRecord timing_capture(const std::function<void()>& work, std::optional<double> ff_seconds = std::nullopt);

/// Normalizes against a feedforward wall time.
TimingRecord relative_to(double wall_seconds, double ff_seconds);

}  // namespace vdpctl
