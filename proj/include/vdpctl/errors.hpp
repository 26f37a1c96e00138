#pragma once

#include <stdexcept>
#include <string>

namespace vdpctl {

/// Base for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state, parameter or input value is non-finite or out of its domain.
class invalid_state_error : public error {
public:
    using error::error;
};

/// Bad configuration: tolerances, shapes, grid sizes, unknown enum names.
class config_error : public error {
public:
    using error::error;
};

/// A documented precondition on the call was violated (e.g. empty data).
class contract_error : public error {
public:
    using error::error;
};

/// The integrator ran out of its step budget or its step size underflowed.
class divergence_error : public error {
public:
    divergence_error(const std::string& what, double last_time)
        : error(what), last_time_(last_time) {}
    double last_time() const noexcept { return last_time_; }

private:
    double last_time_;
};

/// The integrated state became non-finite. `last_good_time()` is the end of
/// the last accepted step.
class blowup_error : public error {
public:
    blowup_error(const std::string& what, double last_good_time)
        : error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// LQR synthesis failed (non-stabilizable pair, no PSD stabilizing solution).
class synthesis_error : public error {
public:
    using error::error;
};

/// Every sample was excluded from an error statistic.
class undefined_metric_error : public error {
public:
    using error::error;
};

}  // namespace vdpctl
