#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "vdpctl/errors.hpp"
#include "vdpctl/metrics.hpp"

using namespace vdpctl;

namespace {

Trajectory sampled(double amp, double scale, std::size_t n = 5000) {
    Trajectory tr;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 50.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        tr.t.push_back(t);
        tr.x.push_back(scale * DesiredTrajectory{amp}.eval(t).x);
        tr.v.push_back(scale * amp * std::cos(t));
        tr.a.push_back(-scale * amp * std::sin(t));
        tr.f.push_back(0.0);
    }
    return tr;
}

}  // namespace

TEST_CASE("exact tracking has zero error") {
    const auto r = rel_error(sampled(5.0, 1.0), {5.0});
    CHECK(r.mean_abs_rel_error == 0.0);
    CHECK(r.n_used > 0);
    CHECK(r.transient_cutoff == 25.0);
    CHECK(r.n_used + r.n_excluded == 2500);
}

TEST_CASE("resting at the origin has unit error") {
    auto tr = sampled(5.0, 0.0);
    const auto r = rel_error(tr, {5.0});
    CHECK(r.mean_abs_rel_error == 1.0);
}

TEST_CASE("zero guard excludes samples near the zeros of sin") {
    Trajectory tr;
    for (double t : {25.0, 8 * M_PI, 9 * M_PI, 30.0}) {
        tr.t.push_back(t);
        tr.x.push_back(0.0);
        tr.v.push_back(0.0);
        tr.a.push_back(0.0);
        tr.f.push_back(0.0);
    }
    const auto r = rel_error(tr, {1.0}, 25.0);
    CHECK(r.n_excluded == 2);
    CHECK(r.n_used == 2);
    CHECK(r.mean_abs_rel_error == 1.0);
}

TEST_CASE("property: agrees with the brute-force oracle") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (double amp : {1.0, 3.0, 9.0}) {
        auto tr = sampled(amp, 1.0);
        for (double& x : tr.x) x += noise(rng);
        const auto r = rel_error(tr, {amp});
        std::size_t used = 0;
        const double o = oracle::brute_rel_error(tr.t, tr.x, amp, 25.0, 1e-3 * amp, &used);
        CHECK(r.mean_abs_rel_error == doctest::Approx(o).epsilon(1e-12));
        CHECK(r.n_used == used);
    }
}

TEST_CASE("property: scaled tracking gives |1 - s|") {
    for (double amp : {1.0, 5.0, 9.0}) {
        for (double s : {0.0, 0.25, 0.5, 1.5, 3.0}) {
            const auto r = rel_error(sampled(amp, s), {amp});
            CHECK(r.mean_abs_rel_error == doctest::Approx(std::abs(1.0 - s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("cutoff and exclusion errors") {
    const auto tr = sampled(1.0, 1.0);
    CHECK_THROWS_AS(rel_error(tr, {1.0}, 60.0), contract_error);
    CHECK_THROWS_AS(rel_error(Trajectory{}, {1.0}), contract_error);
    CHECK_THROWS_AS(rel_error(tr, {1.0}, 25.0, 1e9), undefined_metric_error);
    const auto all = rel_error(tr, {1.0}, 0.0);
    CHECK(all.n_used + all.n_excluded == 5000);
}

TEST_CASE("phase-plane radius") {
    const auto rs = radius_stats(sampled(5.0, 1.0), 5.0);
    CHECK(rs.mean == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(rs.max_rel_deviation < 1e-14);
    CHECK(rs.samples == 2500);
    const auto half = radius_stats(sampled(5.0, 0.5), 5.0);
    CHECK(half.mean == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(half.mean_rel_deviation == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(half.max_rel_deviation == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(radius_stats(sampled(5.0, 1.0), 0.0), contract_error);
}

TEST_CASE("wall timing on a dedicated thread") {
    const auto caller = std::this_thread::get_id();
    std::thread::id worker;
    const double s = timed_wall_seconds([&] {
        worker = std::this_thread::get_id();
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
    });
    CHECK(worker != caller);
    CHECK(s >= 0.03);
    CHECK(s < 5.0);

    CHECK_THROWS_AS(timed_wall_seconds([] { throw config_error("boom"); }), config_error);
}

TEST_CASE("relative time") {
    const auto t = relative_to(3.0, 1.5);
    CHECK(t.wall_seconds == 3.0);
    REQUIRE(t.relative_time);
    CHECK(*t.relative_time == 2.0);
    CHECK(relative_to(1.5, 1.5).relative_time == 1.0);
    CHECK_FALSE(timing_capture([] {}).relative_time);
    CHECK(timing_capture([] {}, 1.0).relative_time.has_value());
    CHECK_THROWS_AS(relative_to(1.0, 0.0), contract_error);
}
