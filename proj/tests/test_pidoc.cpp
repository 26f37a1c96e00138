#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vdpctl/errors.hpp"
#include "vdpctl/pidoc.hpp"

using namespace vdpctl;

namespace {

IntegratorConfig small_grid() {
    IntegratorConfig c;
    c.n_output = 400;
    return c;
}

TrainConfig small_net(std::size_t iters) {
    TrainConfig t;
    t.depth = 2;
    t.width = 6;
    t.optimizer.max_iterations = iters;
    return t;
}

std::filesystem::path tmp_file(const char* name) {
    return std::filesystem::temp_directory_path() / (std::string("vdpctl_test_") + name);
}

}  // namespace

TEST_CASE("training data is the unforced oscillator on the output grid") {
    const auto data = make_training_data({1.0}, {1.0, 0.0}, {});
    REQUIRE(data.size() == 5000);
    CHECK(data.t.front() == 0.0);
    CHECK(data.t.back() == 50.0);
    CHECK(data.x_train.front() == 1.0);
    const auto tr = integrate({1.0}, nullptr, {1.0, 0.0}, {});
    CHECK(data.x_train == tr.x);
}

TEST_CASE("small network training is deterministic and lowers the loss") {
    const auto cfg = small_net(40);
    const auto a = pidoc_control({1.0}, {1.0}, cfg, small_grid());
    const auto b = pidoc_control({1.0}, {1.0}, cfg, small_grid());
    REQUIRE(a.history.size() == a.iterations + 1);
    CHECK(a.history == b.history);
    CHECK(a.params.flatten() == b.params.flatten());
    CHECK(a.trajectory.x == b.trajectory.x);
    CHECK(a.final_loss().total < a.initial_loss().total);
    for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i].total <= a.history[i - 1].total);

    auto other = cfg;
    other.seed += 1;
    CHECK(pidoc_control({1.0}, {1.0}, other, small_grid()).history.front() != a.history.front());
}

TEST_CASE("full-size network lowers the loss") {
    TrainConfig cfg;
    cfg.optimizer.max_iterations = 10;
    const auto r = pidoc_control({1.0}, {1.0}, cfg, {});
    CHECK(r.params.parameter_count() == 4741);
    CHECK(r.final_loss().total < r.initial_loss().total);
    CHECK(r.trajectory.size() == 5000);
}

TEST_CASE("trajectory comes from network derivatives") {
    const auto r = pidoc_control({2.0}, {3.0}, small_net(15), small_grid());
    const auto& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.size(); i += 37) {
        const auto y = mlp_time_derivs(r.params, tr.t[i]);
        CHECK(tr.x[i] == doctest::Approx(y.x).epsilon(1e-13));
        CHECK(tr.v[i] == doctest::Approx(y.dx).epsilon(1e-13));
        CHECK(tr.a[i] == doctest::Approx(y.ddx).epsilon(1e-13));
        // Force that makes the oscillator follow the network output.
        CHECK(tr.f[i] == doctest::Approx(tr.a[i] - 2.0 * (1.0 - tr.x[i] * tr.x[i]) * tr.v[i] + tr.x[i]).epsilon(1e-14));
    }
    CHECK(network_trajectory(r.params, {2.0}, small_grid()).x == tr.x);
}

TEST_CASE("warm start resumes from given parameters") {
    const auto first = pidoc_control({1.0}, {1.0}, small_net(10), small_grid());
    auto cfg = small_net(10);
    cfg.warm_start = first.params;
    const auto resumed = pidoc_control({1.0}, {1.0}, cfg, small_grid());
    CHECK(resumed.initial_loss().total == doctest::Approx(first.final_loss().total).epsilon(1e-12));
    CHECK(resumed.final_loss().total <= first.final_loss().total);
}

TEST_CASE("checkpoint round trip is bit-identical") {
    const auto r = pidoc_control({1.0}, {1.0}, small_net(5), small_grid());
    Checkpoint ck{r.params, 20220601, r.history};
    const auto path = tmp_file("ck.json");
    save_checkpoint(path.string(), ck);
    const auto back = load_checkpoint(path.string());
    CHECK(back == ck);
    CHECK(back.params.flatten() == ck.params.flatten());
    CHECK(back.params.input_scale == ck.params.input_scale);
    CHECK(back.params.input_shift == ck.params.input_shift);
    CHECK(back.history == ck.history);
    std::filesystem::remove(path);
}

TEST_CASE("bad checkpoints are rejected") {
    const auto path = tmp_file("bad.json");
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\"}";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), config_error);
    {
        std::ofstream out(path);
        out << "not json";
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), config_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path.string()), config_error);
}

TEST_CASE("config validation") {
    auto cfg = small_net(5);
    cfg.depth = 0;
    CHECK_THROWS_AS(pidoc_control({1.0}, {1.0}, cfg, small_grid()), config_error);
    CHECK_THROWS_AS(pidoc_control({1.0}, {-1.0}, small_net(5), small_grid()), invalid_state_error);
}
