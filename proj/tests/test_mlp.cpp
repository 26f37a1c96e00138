#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "vdpctl/errors.hpp"
#include "vdpctl/mlp.hpp"

using namespace vdpctl;

namespace {

MlpParams single_unit(double w) {
    auto p = MlpParams::zeros({1, 1, 1});
    p.weights[0](0, 0) = w;
    p.weights[1](0, 0) = 1.0;
    return p;
}

MlpParams random_params(const std::vector<int>& widths, std::mt19937_64& rng) {
    auto p = MlpParams::glorot(widths, rng());
    std::normal_distribution<double> n(0.0, 0.3);
    for (auto& b : p.biases)
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
    return p;
}

}  // namespace

TEST_CASE("shapes and parameter count") {
    CHECK(hidden_widths(6, 30) == std::vector<int>{1, 30, 30, 30, 30, 30, 30, 1});
    const auto p = MlpParams::glorot(hidden_widths(6, 30), 1);
    CHECK(p.layer_count() == 7);
    CHECK(p.parameter_count() == 4741);
    CHECK(p.flatten().size() == 4741);
    CHECK(p.weights[0].rows() == 30);
    CHECK(p.weights[0].cols() == 1);
    CHECK(p.weights[6].rows() == 1);
}

TEST_CASE("zero network is the zero map") {
    const auto p = MlpParams::zeros(hidden_widths(3, 5));
    for (double t : {-10.0, 0.0, 0.5, 49.0}) {
        CHECK(mlp_forward(p, t) == 0.0);
        const auto d = mlp_time_derivs(p, t);
        CHECK(d.x == 0.0);
        CHECK(d.dx == 0.0);
        CHECK(d.ddx == 0.0);
    }
}

TEST_CASE("single hidden unit closed forms") {
    CHECK(mlp_forward(single_unit(1.0), 0.0) == 0.0);

    auto d = mlp_time_derivs(single_unit(1.0), 0.0);
    CHECK(d.x == 0.0);
    CHECK(d.dx == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.ddx == 0.0);

    d = mlp_time_derivs(single_unit(2.0), 0.3);
    const double th = std::tanh(0.6);
    const double sech2 = 1.0 - th * th;
    CHECK(d.x == doctest::Approx(th).epsilon(1e-15));
    CHECK(d.dx == doctest::Approx(2.0 * sech2).epsilon(1e-14));
    CHECK(d.ddx == doctest::Approx(-8.0 * sech2 * th).epsilon(1e-14));
}

TEST_CASE("input normalization maps the interval onto [-1, 1]") {
    auto p = single_unit(1.0);
    p.set_input_range(0.0, 50.0);
    CHECK(mlp_forward(p, 25.0) == doctest::Approx(0.0));
    CHECK(mlp_forward(p, 50.0) == doctest::Approx(std::tanh(1.0)));
    CHECK(mlp_forward(p, 0.0) == doctest::Approx(std::tanh(-1.0)));
    // Chain rule through the fixed map.
    const auto d = mlp_time_derivs(p, 25.0);
    CHECK(d.dx == doctest::Approx(1.0 / 25.0).epsilon(1e-14));
    CHECK_THROWS_AS(p.set_input_range(1.0, 1.0), config_error);
}

TEST_CASE("property: output bounded by output-layer magnitudes") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> t(-100.0, 100.0);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_params(hidden_widths(2, 7), rng);
        const double bound = p.weights.back().cwiseAbs().sum() + std::abs(p.biases.back()(0));
        for (int i = 0; i < 20; ++i) {
            const double y = mlp_forward(p, t(rng));
            CHECK(std::isfinite(y));
            CHECK(std::abs(y) <= bound + 1e-12);
        }
    }
}

TEST_CASE("property: time derivatives match central differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> tdist(0.0, 50.0);
    const double h = 1e-4;
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
        auto p = random_params(hidden_widths(6, 30), rng);
        p.set_input_range(0.0, 50.0);
        const double t = tdist(rng);
        const auto d = mlp_time_derivs(p, t);
        auto f = [&](double s) { return mlp_forward(p, s); };
        auto g = [&](double s) { return mlp_time_derivs(p, s).dx; };
        CHECK(d.x == mlp_forward(p, t));
        const double fd1 = oracle::central_diff(f, t, h);
        const double fd2 = oracle::central_diff(g, t, h);
        CAPTURE(k);
        CHECK(oracle::rel_diff(d.dx, fd1, 1e-3) < 1e-5);
        CHECK(oracle::rel_diff(d.ddx, fd2, 1e-3) < 1e-5);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("batched derivatives equal the scalar path") {
    std::mt19937_64 rng(7);
    auto p = random_params(hidden_widths(3, 11), rng);
    p.set_input_range(0.0, 50.0);
    std::vector<double> t(1000), x(1000), dx(1000), ddx(1000);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.05 * static_cast<double>(i);
    mlp_time_derivs(p, t, x, dx, ddx);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto d = mlp_time_derivs(p, t[i]);
        CHECK(x[i] == doctest::Approx(d.x).epsilon(1e-13));
        CHECK(dx[i] == doctest::Approx(d.dx).epsilon(1e-13));
        CHECK(ddx[i] == doctest::Approx(d.ddx).epsilon(1e-13));
    }
    std::vector<double> short_out(3);
    CHECK_THROWS_AS(mlp_time_derivs(p, t, short_out, dx, ddx), config_error);
}

TEST_CASE("flatten and assign round trip") {
    const auto p = MlpParams::glorot(hidden_widths(2, 4), 3);
    auto q = MlpParams::zeros(p.widths);
    q.assign(p.flatten());
    CHECK(q.flatten() == p.flatten());
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        CHECK(q.weights[l] == p.weights[l]);
        CHECK(q.biases[l] == p.biases[l]);
    }
    // W0 column-major, then b0.
    CHECK(p.flatten()(0) == p.weights[0](0, 0));
    CHECK(p.flatten()(4) == p.biases[0](0));
    CHECK_THROWS_AS(q.assign(Eigen::VectorXd::Zero(3)), config_error);
}

TEST_CASE("glorot initialization is seeded and bounded") {
    const auto widths = hidden_widths(6, 30);
    const auto a = MlpParams::glorot(widths, 99);
    const auto b = MlpParams::glorot(widths, 99);
    const auto c = MlpParams::glorot(widths, 100);
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        const double limit = std::sqrt(6.0 / (widths[l] + widths[l + 1]));
        CHECK(a.weights[l].cwiseAbs().maxCoeff() <= limit);
        CHECK(a.biases[l].isZero(0.0));
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(MlpParams::zeros({1}), config_error);
    CHECK_THROWS_AS(MlpParams::zeros({2, 3, 1}), config_error);
    CHECK_THROWS_AS(MlpParams::zeros({1, 0, 1}), config_error);

    auto p = MlpParams::zeros({1, 3, 1});
    p.weights[1] = Eigen::MatrixXd::Zero(1, 4);
    CHECK_THROWS_AS(p.validate(), config_error);
    CHECK_THROWS_AS(mlp_forward(p, 0.0), config_error);

    p = MlpParams::zeros({1, 3, 1});
    p.biases[0](1) = std::nan("");
    CHECK_THROWS_AS(p.validate(), invalid_state_error);
}
