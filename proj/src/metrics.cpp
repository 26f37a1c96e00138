#include "vdpctl/metrics.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "vdpctl/errors.hpp"

namespace vdpctl {

ErrorReport rel_error(const Trajectory& traj, const DesiredTrajectory& d, double transient_cutoff, double guard) {
    if (traj.empty()) throw contract_error("rel_error: empty trajectory");
    if (!(guard >= 0.0)) throw contract_error("rel_error: guard must be non-negative");
    if (!(transient_cutoff >= traj.t.front() && transient_cutoff <= traj.t.back())) {
        throw contract_error("rel_error: cutoff outside the trajectory span");
    }
    ErrorReport r;
    r.transient_cutoff = transient_cutoff;
    double sum = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.t[i] < transient_cutoff) continue;
        const double xd = d.eval(traj.t[i]).x;
        if (std::abs(xd) > guard) {
            sum += std::abs(traj.x[i] - xd) / std::abs(xd);
            ++r.n_used;
        } else {
            ++r.n_excluded;
        }
    }
    if (r.n_used == 0) throw undefined_metric_error("rel_error: every sample in the window was excluded");
    r.mean_abs_rel_error = sum / static_cast<double>(r.n_used);
    return r;
}

ErrorReport rel_error(const Trajectory& traj, const DesiredTrajectory& d, double transient_cutoff) {
    return rel_error(traj, d, transient_cutoff, kDefaultGuardFraction * d.amplitude);
}

RadiusStats radius_stats(const Trajectory& traj, double target, double transient_cutoff) {
    if (!(target > 0.0)) throw contract_error("radius_stats: target must be positive");
    RadiusStats s;
    double sum = 0.0, dev_sum = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.t[i] < transient_cutoff) continue;
        const double r = std::hypot(traj.x[i], traj.v[i]);
        const double dev = std::abs(r - target) / target;
        sum += r;
        dev_sum += dev;
        s.max_rel_deviation = std::max(s.max_rel_deviation, dev);
        ++s.samples;
    }
    if (s.samples == 0) throw contract_error("radius_stats: no samples after the cutoff");
    s.mean = sum / static_cast<double>(s.samples);
    s.mean_rel_deviation = dev_sum / static_cast<double>(s.samples);
    return s;
}

double timed_wall_seconds(const std::function<void()>& work) {
    double seconds = 0.0;
    std::exception_ptr failure;
    std::thread worker([&] {
        const auto start = std::chrono::steady_clock::now();
        try {
            work();
        } catch (...) {
            failure = std::current_exception();
        }
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    worker.join();
    if (failure) std::rethrow_exception(failure);
    // Clock granularity can report zero for trivial work.
    return std::max(seconds, 1e-9);
}

TimingRecord relative_to(double wall_seconds, double ff_seconds) {
    if (!(wall_seconds > 0.0) || !(ff_seconds > 0.0)) throw contract_error("timing: wall times must be positive");
    return {wall_seconds, wall_seconds / ff_seconds};
}

TimingRecord timing_capture(const std::function<void()>& work, std::optional<double> ff_seconds) {
    const double secs = timed_wall_seconds(work);
    if (ff_seconds) return relative_to(secs, *ff_seconds);
    return {secs, std::nullopt};
}

}  // namespace vdpctl
