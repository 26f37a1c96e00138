#include "vdpctl/pidoc.hpp"

#include <fstream>
#include "json.hpp"

#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

constexpr const char* kCheckpointFormat = "vdpctl-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

void TrainConfig::validate() const {
    optimizer.validate();
    if (depth < 1 || width < 1) throw config_error("train config: network depth and width must be positive");
    if (warm_start) warm_start->validate();
}

TrainingData make_training_data(const VdpParams& sys, const State& init, const IntegratorConfig& integ) {
    const Trajectory free = integrate(sys, nullptr, init, integ);
    return TrainingData{free.t, free.x};
}

Trajectory network_trajectory(const MlpParams& p, const VdpParams& sys, const IntegratorConfig& integ) {
    Trajectory out;
    out.t = integ.grid();
    const std::size_t n = out.t.size();
    out.x.resize(n);
    out.v.resize(n);
    out.a.resize(n);
    out.f.resize(n);
    mlp_time_derivs(p, out.t, out.x, out.v, out.a);
    for (std::size_t i = 0; i < n; ++i) {
        out.f[i] = out.a[i] - sys.mu * (1.0 - out.x[i] * out.x[i]) * out.v[i] + out.x[i];
    }
    return out;
}

PidocResult pidoc_control(const VdpParams& sys, const DesiredTrajectory& d, const TrainConfig& cfg,
                          const IntegratorConfig& integ) {
    sys.validate();
    d.validate();
    cfg.validate();
    integ.validate();

    const TrainingData data = make_training_data(sys, cfg.training_init, integ);

    MlpParams params;
    if (cfg.warm_start) {
        params = *cfg.warm_start;
        if (params.widths.front() != 1 || params.widths.back() != 1) throw config_error("pidoc: bad warm start");
    } else {
        params = MlpParams::glorot(hidden_widths(cfg.depth, cfg.width), cfg.seed);
        params.set_input_range(integ.t0, integ.t1);
    }

    PidocResult res;
    MlpParams work = params;
    LossBreakdown last_loss;
    Eigen::VectorXd last_x;
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        work.assign(x);
        LossGradient lg = loss_grad(work, data, d, cfg.loss);
        grad = std::move(lg.grad);
        last_loss = lg.loss;
        last_x = x;
        return lg.loss.total;
    };
    auto on_iteration = [&](std::size_t, const Eigen::VectorXd& x, double) {
        if (x != last_x) {
            work.assign(x);
            last_loss = loss_eval(work, data, d, cfg.loss);
        }
        res.history.push_back(last_loss);
    };

    res.history.push_back(loss_eval(params, data, d, cfg.loss));
    const LbfgsResult opt = lbfgs_minimize(objective, params.flatten(), cfg.optimizer, on_iteration);

    params.assign(opt.x);
    res.params = params;
    res.iterations = opt.iterations;
    res.evaluations = opt.evaluations;
    res.stop = opt.reason;
    res.degraded = opt.degraded;
    res.trajectory = network_trajectory(params, sys, integ);
    return res;
}

bool Checkpoint::operator==(const Checkpoint& o) const {
    return seed == o.seed && history == o.history && params.widths == o.params.widths &&
           params.input_scale == o.params.input_scale && params.input_shift == o.params.input_shift &&
           params.flatten() == o.params.flatten();
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    ck.params.validate();
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["precision"] = "float64";
    j["encoding"] = "decimal-shortest-roundtrip";
    j["widths"] = ck.params.widths;
    j["input_scale"] = ck.params.input_scale;
    j["input_shift"] = ck.params.input_shift;
    j["seed"] = ck.seed;
    const Eigen::VectorXd flat = ck.params.flatten();
    j["parameters"] = std::vector<double>(flat.data(), flat.data() + flat.size());
    auto& hist = j["loss_history"] = nlohmann::json::array();
    for (const auto& l : ck.history) hist.push_back({l.mse_nn, l.mse_i, l.mse_d, l.total});

    std::ofstream out(path);
    if (!out) throw config_error("cannot write checkpoint " + path);
    out << j.dump(1) << '\n';
    if (!out) throw config_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("malformed checkpoint " + path + ": " + e.what());
    }
    if (j.value("format", "") != kCheckpointFormat || j.value("version", 0) != kCheckpointVersion ||
        j.value("precision", "") != "float64") {
        throw config_error("unsupported checkpoint " + path);
    }
    try {
        Checkpoint ck;
        ck.params = MlpParams::zeros(j.at("widths").get<std::vector<int>>());
        ck.params.input_scale = j.at("input_scale").get<double>();
        ck.params.input_shift = j.at("input_shift").get<double>();
        ck.seed = j.at("seed").get<std::uint64_t>();
        const auto flat = j.at("parameters").get<std::vector<double>>();
        ck.params.assign(Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())));
        for (const auto& row : j.at("loss_history")) {
            ck.history.push_back({row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>(),
                                  row.at(3).get<double>()});
        }
        ck.params.validate();
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("malformed checkpoint " + path + ": " + e.what());
    }
}

}  // namespace vdpctl
