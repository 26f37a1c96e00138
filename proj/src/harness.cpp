#include "vdpctl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "vdpctl/errors.hpp"

#ifndef VDPCTL_VERSION
#define VDPCTL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace vdpctl {

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw config_error("cannot open " + path + " for writing");
    return f;
}

json loss_to_json(const LossBreakdown& l) {
    return {{"mse_nn", l.mse_nn}, {"mse_i", l.mse_i}, {"mse_d", l.mse_d}, {"total", l.total}};
}

LossBreakdown loss_from_json(const json& j) {
    return {j.at("mse_nn").get<double>(), j.at("mse_i").get<double>(), j.at("mse_d").get<double>(),
            j.at("total").get<double>()};
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

std::string software_version() { return VDPCTL_VERSION; }

std::string_view to_string(ControllerKind c) {
    switch (c) {
        case ControllerKind::pidoc: return "pidoc";
        case ControllerKind::ff: return "ff";
        case ControllerKind::fb: return "fb";
        case ControllerKind::combined: return "combined";
    }
    return "unknown";
}

ControllerKind parse_controller(std::string_view text) {
    for (ControllerKind c : kAllControllers) {
        if (text == to_string(c)) return c;
    }
    if (text == "c") return ControllerKind::combined;
    throw config_error("unknown controller '" + std::string(text) + "' (expected pidoc, ff, fb or combined)");
}

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::validate() const {
    if (!std::isfinite(lambda) || lambda <= 0.0) throw config_error("lambda must be positive");
    if (!std::isfinite(mu) || mu <= 0.0) throw config_error("mu must be positive");
    if (!std::isfinite(init.x) || !std::isfinite(init.v)) throw config_error("initial state must be finite");
    if (!(r > 0.0)) throw config_error("R must be positive");
    if (max_iterations < 1) throw config_error("max_iterations must be at least 1");
    if (depth < 1 || width < 1) throw config_error("network depth and width must be positive");
    if (!(guard_fraction >= 0.0)) throw config_error("guard_fraction must be non-negative");
    if (out_dir.empty()) throw config_error("output directory must be set");
    integrator.validate();
    weights().validate();
}

CostWeights ExperimentConfig::weights() const {
    CostWeights w;
    w.Q.resize(2, 2);
    w.Q << q[0], q[1], q[2], q[3];
    w.R = Eigen::MatrixXd::Constant(1, 1, r);
    return w;
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig t;
    t.optimizer.max_iterations = max_iterations;
    t.seed = seed;
    t.depth = depth;
    t.width = width;
    t.loss.residual = separated_dynamics ? DynamicsResidual::separated : DynamicsResidual::joint;
    t.training_init = init;
    return t;
}

std::string ExperimentConfig::cell_id() const { return "lambda" + format_number(lambda) + "_mu" + format_number(mu); }

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    const auto& a = integrator;
    const auto& b = o.integrator;
    return controller == o.controller && lambda == o.lambda && mu == o.mu && sign == o.sign && q == o.q &&
           r == o.r && a.rtol == b.rtol && a.atol == b.atol && a.t0 == b.t0 && a.t1 == b.t1 &&
           a.n_output == b.n_output && a.max_steps == b.max_steps && init.x == o.init.x && init.v == o.init.v &&
           seed == o.seed && max_iterations == o.max_iterations && depth == o.depth && width == o.width &&
           separated_dynamics == o.separated_dynamics && transient_cutoff == o.transient_cutoff &&
           guard_fraction == o.guard_fraction && out_dir == o.out_dir;
}

json to_json(const ExperimentConfig& c) {
    return {
        {"controller", std::string(to_string(c.controller))},
        {"lambda", c.lambda},
        {"mu", c.mu},
        {"sign", std::string(to_string(c.sign))},
        {"Q", {{c.q[0], c.q[1]}, {c.q[2], c.q[3]}}},
        {"R", c.r},
        {"integrator",
         {{"rtol", c.integrator.rtol},
          {"atol", c.integrator.atol},
          {"t0", c.integrator.t0},
          {"t1", c.integrator.t1},
          {"n_output", c.integrator.n_output},
          {"max_steps", c.integrator.max_steps}}},
        {"init", {c.init.x, c.init.v}},
        {"seed", c.seed},
        {"max_iterations", c.max_iterations},
        {"network", {{"depth", c.depth}, {"width", c.width}}},
        {"separated_dynamics", c.separated_dynamics},
        {"transient_cutoff", c.transient_cutoff},
        {"guard_fraction", c.guard_fraction},
        {"out_dir", c.out_dir},
    };
}

void apply_json(ExperimentConfig& c, const json& j) {
    if (!j.is_object()) throw config_error("experiment config must be a JSON object");
    static const std::vector<std::string> known{"controller", "lambda",        "mu",
                                                "sign",       "Q",             "R",
                                                "integrator", "init",          "seed",
                                                "max_iterations", "network",   "separated_dynamics",
                                                "transient_cutoff", "guard_fraction", "out_dir"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw config_error("unknown config key '" + key + "'");
        }
    }
    try {
        if (j.contains("controller")) c.controller = parse_controller(j["controller"].get<std::string>());
        read_if(j, "lambda", c.lambda);
        read_if(j, "mu", c.mu);
        if (j.contains("sign")) c.sign = parse_feedback_sign(j["sign"].get<std::string>());
        if (j.contains("Q")) {
            const auto rows = j["Q"].get<std::vector<std::vector<double>>>();
            if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2) {
                throw config_error("Q must be a 2x2 array");
            }
            c.q = {rows[0][0], rows[0][1], rows[1][0], rows[1][1]};
        }
        read_if(j, "R", c.r);
        if (j.contains("integrator")) {
            const json& ij = j["integrator"];
            read_if(ij, "rtol", c.integrator.rtol);
            read_if(ij, "atol", c.integrator.atol);
            read_if(ij, "t0", c.integrator.t0);
            read_if(ij, "t1", c.integrator.t1);
            read_if(ij, "n_output", c.integrator.n_output);
            read_if(ij, "max_steps", c.integrator.max_steps);
        }
        if (j.contains("init")) {
            const auto v = j["init"].get<std::vector<double>>();
            if (v.size() != 2) throw config_error("init must be [x, v]");
            c.init = {v[0], v[1]};
        }
        read_if(j, "seed", c.seed);
        read_if(j, "max_iterations", c.max_iterations);
        if (j.contains("network")) {
            read_if(j["network"], "depth", c.depth);
            read_if(j["network"], "width", c.width);
        }
        read_if(j, "separated_dynamics", c.separated_dynamics);
        read_if(j, "transient_cutoff", c.transient_cutoff);
        read_if(j, "guard_fraction", c.guard_fraction);
        read_if(j, "out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw config_error(std::string("bad config value: ") + e.what());
    }
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    apply_json(c, j);
    return c;
}

// ---------------------------------------------------------------------------
// RunRecord

bool RunRecord::operator==(const RunRecord& o) const {
    return config == o.config && experiment == o.experiment && status == o.status && failure == o.failure &&
           series_file == o.series_file && losses_file == o.losses_file && error == o.error &&
           radius == o.radius && timing == o.timing && gains == o.gains && pidoc == o.pidoc &&
           software_version == o.software_version && timestamp == o.timestamp;
}

json to_json(const RunRecord& r) {
    json j;
    j["config"] = to_json(r.config);
    j["experiment"] = r.experiment;
    j["cell_id"] = r.config.cell_id();
    j["status"] = r.status;
    j["failure"] = r.failure;
    j["series_file"] = r.series_file;
    j["losses_file"] = r.losses_file ? json(*r.losses_file) : json(nullptr);
    if (r.error) {
        j["error"] = {{"mean_abs_rel_error", r.error->mean_abs_rel_error},
                      {"n_used", r.error->n_used},
                      {"n_excluded", r.error->n_excluded},
                      {"transient_cutoff", r.error->transient_cutoff}};
    } else {
        j["error"] = nullptr;
    }
    if (r.radius) {
        j["radius"] = {{"mean", r.radius->mean},
                       {"max_rel_deviation", r.radius->max_rel_deviation},
                       {"mean_rel_deviation", r.radius->mean_rel_deviation},
                       {"samples", r.radius->samples}};
    } else {
        j["radius"] = nullptr;
    }
    j["timing"] = {{"wall_seconds", r.timing.wall_seconds},
                   {"relative_time", r.timing.relative_time ? json(*r.timing.relative_time) : json(nullptr)}};
    j["gains"] = r.gains ? json{{"kp", (*r.gains)[0]}, {"kd", (*r.gains)[1]}} : json(nullptr);
    if (r.pidoc) {
        j["pidoc"] = {{"iterations", r.pidoc->iterations},
                      {"stop_reason", r.pidoc->stop_reason},
                      {"degraded", r.pidoc->degraded},
                      {"initial_loss", loss_to_json(r.pidoc->initial_loss)},
                      {"final_loss", loss_to_json(r.pidoc->final_loss)}};
    } else {
        j["pidoc"] = nullptr;
    }
    j["software_version"] = r.software_version;
    j["timestamp"] = r.timestamp;
    return j;
}

RunRecord record_from_json(const json& j) {
    try {
        RunRecord r;
        r.config = config_from_json(j.at("config"));
        r.experiment = j.at("experiment").get<std::string>();
        r.status = j.at("status").get<std::string>();
        r.failure = j.at("failure").get<std::string>();
        r.series_file = j.at("series_file").get<std::string>();
        if (!j.at("losses_file").is_null()) r.losses_file = j["losses_file"].get<std::string>();
        if (const json& e = j.at("error"); !e.is_null()) {
            r.error = ErrorReport{e.at("mean_abs_rel_error").get<double>(), e.at("n_used").get<std::size_t>(),
                                  e.at("n_excluded").get<std::size_t>(), e.at("transient_cutoff").get<double>()};
        }
        if (const json& rd = j.at("radius"); !rd.is_null()) {
            r.radius = RadiusStats{rd.at("mean").get<double>(), rd.at("max_rel_deviation").get<double>(),
                                   rd.at("mean_rel_deviation").get<double>(), rd.at("samples").get<std::size_t>()};
        }
        const json& t = j.at("timing");
        r.timing.wall_seconds = t.at("wall_seconds").get<double>();
        if (!t.at("relative_time").is_null()) r.timing.relative_time = t["relative_time"].get<double>();
        if (const json& g = j.at("gains"); !g.is_null()) {
            r.gains = std::array<double, 2>{g.at("kp").get<double>(), g.at("kd").get<double>()};
        }
        if (const json& p = j.at("pidoc"); !p.is_null()) {
            r.pidoc = PidocSummary{p.at("iterations").get<std::size_t>(), p.at("stop_reason").get<std::string>(),
                                   p.at("degraded").get<bool>(), loss_from_json(p.at("initial_loss")),
                                   loss_from_json(p.at("final_loss"))};
        }
        r.software_version = j.at("software_version").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed run record: ") + e.what());
    }
}

void save_record(const std::string& path, const RunRecord& r) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << to_json(r).dump(2) << '\n';
}

RunRecord load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("malformed manifest " + path + ": " + e.what());
    }
    return record_from_json(j);
}

std::vector<RunRecord> load_records(const std::string& root) {
    std::vector<std::string> paths;
    if (!fs::exists(root)) return {};
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "manifest.json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<RunRecord> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_record(p));
    return out;
}

// ---------------------------------------------------------------------------
// Execution

ControllerOutcome run_controller(const ExperimentConfig& cfg) {
    cfg.validate();
    const VdpParams sys{cfg.mu};
    const DesiredTrajectory d{cfg.lambda};
    ControllerOutcome out;

    auto feedback = [&] {
        const RiccatiSolution sol = solve_are(linearize(sys), cfg.weights());
        out.gains = std::array<double, 2>{sol.kp(), sol.kd()};
        return fb_force(sol, d, cfg.sign);
    };

    switch (cfg.controller) {
        case ControllerKind::ff:
            out.trajectory = integrate(sys, ff_force(sys, d), cfg.init, cfg.integrator);
            break;
        case ControllerKind::fb:
            out.trajectory = integrate(sys, feedback(), cfg.init, cfg.integrator);
            break;
        case ControllerKind::combined:
            out.trajectory = integrate(sys, combined_force(ff_force(sys, d), feedback()), cfg.init, cfg.integrator);
            break;
        case ControllerKind::pidoc: {
            PidocResult res = pidoc_control(sys, d, cfg.train_config(), cfg.integrator);
            out.trajectory = std::move(res.trajectory);
            out.pidoc = PidocSummary{res.iterations, std::string(to_string(res.stop)), res.degraded,
                                     res.initial_loss(), res.final_loss()};
            out.losses = std::move(res.history);
            break;
        }
    }
    return out;
}

namespace {

CellResult execute_cell(const ExperimentConfig& cfg, const std::string& experiment) {
    CellResult cell;
    RunRecord& rec = cell.record;
    rec.config = cfg;
    rec.experiment = experiment;
    rec.software_version = software_version();
    rec.timestamp = utc_timestamp();
    try {
        ControllerOutcome outcome;
        rec.timing.wall_seconds = timed_wall_seconds([&] { outcome = run_controller(cfg); });
        const DesiredTrajectory d{cfg.lambda};
        rec.error = rel_error(outcome.trajectory, d, cfg.transient_cutoff, cfg.guard_fraction * cfg.lambda);
        rec.radius = radius_stats(outcome.trajectory, cfg.lambda, cfg.transient_cutoff);
        rec.gains = outcome.gains;
        rec.pidoc = outcome.pidoc;
        cell.trajectory = std::move(outcome.trajectory);
        cell.losses = std::move(outcome.losses);
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.failure = e.what();
    }
    return cell;
}

void write_cell(CellResult& cell) {
    RunRecord& rec = cell.record;
    const fs::path rel = fs::path(rec.experiment) / std::string(to_string(rec.config.controller)) / rec.config.cell_id();
    const fs::path dir = fs::path(rec.config.out_dir) / rel;
    fs::create_directories(dir);
    if (rec.ok()) {
        rec.series_file = (rel / "series.csv").generic_string();
        write_series_csv((dir / "series.csv").string(), cell.trajectory, DesiredTrajectory{rec.config.lambda});
        if (rec.config.controller == ControllerKind::pidoc) {
            rec.losses_file = (rel / "losses.csv").generic_string();
            write_losses_csv((dir / "losses.csv").string(), cell.losses);
        }
    }
    save_record((dir / "manifest.json").string(), rec);
}

}  // namespace

std::vector<CellResult> run_cells(const std::vector<ExperimentConfig>& cells, const std::string& experiment,
                                  const BatchOptions& opts) {
    std::vector<CellResult> results(cells.size());
    const unsigned workers = opts.timed ? 1u : std::max(1u, std::min<unsigned>(opts.jobs, cells.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) results[i] = execute_cell(cells[i], experiment);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = execute_cell(cells[i], experiment);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::map<std::string, double> ff_wall;
    for (const auto& c : results) {
        if (c.record.ok() && c.record.config.controller == ControllerKind::ff) {
            ff_wall[c.record.config.cell_id()] = c.record.timing.wall_seconds;
        }
    }
    for (auto& c : results) {
        if (!c.record.ok()) continue;
        if (auto it = ff_wall.find(c.record.config.cell_id()); it != ff_wall.end()) {
            c.record.timing = relative_to(c.record.timing.wall_seconds, it->second);
        }
    }

    if (opts.write_files) {
        for (auto& c : results) write_cell(c);
    }
    return results;
}

namespace {

std::vector<ExperimentConfig> expand(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                     const std::vector<std::pair<double, double>>& lambda_mu) {
    std::vector<ExperimentConfig> cells;
    for (const auto& [lambda, mu] : lambda_mu) {
        for (ControllerKind c : controllers) {
            ExperimentConfig cfg = base;
            cfg.controller = c;
            cfg.lambda = lambda;
            cfg.mu = mu;
            cells.push_back(cfg);
        }
    }
    return cells;
}

}  // namespace

std::vector<CellResult> run_benchmark(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                      const BatchOptions& opts) {
    return run_cells(expand(base, controllers, {{base.lambda, base.mu}}), "benchmark", opts);
}

std::vector<CellResult> run_lambda_sweep(const ExperimentConfig& base,
                                         const std::vector<ControllerKind>& controllers, const BatchOptions& opts) {
    std::vector<std::pair<double, double>> grid;
    for (double lambda : kLambdaSweep) grid.emplace_back(lambda, base.mu);
    return run_cells(expand(base, controllers, grid), "sweep-lambda", opts);
}

std::vector<CellResult> run_mu_sweep(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                     const BatchOptions& opts) {
    std::vector<std::pair<double, double>> grid;
    for (double mu : kMuSweep) grid.emplace_back(base.lambda, mu);
    return run_cells(expand(base, controllers, grid), "sweep-mu", opts);
}

// ---------------------------------------------------------------------------
// Files

void write_series_csv(const std::string& path, const Trajectory& traj, const DesiredTrajectory& d) {
    FilePtr f = open_for_write(path);
    std::fputs("t,x,v,a,F,xd,vd,ad\n", f.get());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const DesiredSample ds = d.eval(traj.t[i]);
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.t[i], traj.x[i], traj.v[i],
                     traj.a[i], traj.f[i], ds.x, ds.v, ds.a);
    }
    if (std::ferror(f.get())) throw config_error("failed writing " + path);
}

Trajectory read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path);
    std::string line;
    std::getline(in, line);
    if (line != "t,x,v,a,F,xd,vd,ad") throw config_error("unexpected series header in " + path);
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[5];
        for (double& v : vals) {
            if (!std::getline(row, cell, ',')) throw config_error("short row in " + path);
            v = std::strtod(cell.c_str(), nullptr);
        }
        traj.t.push_back(vals[0]);
        traj.x.push_back(vals[1]);
        traj.v.push_back(vals[2]);
        traj.a.push_back(vals[3]);
        traj.f.push_back(vals[4]);
    }
    return traj;
}

void write_losses_csv(const std::string& path, const std::vector<LossBreakdown>& losses) {
    FilePtr f = open_for_write(path);
    std::fputs("iteration,mse_nn,mse_i,mse_d,total\n", f.get());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        const auto& l = losses[i];
        std::fprintf(f.get(), "%zu,%.17g,%.17g,%.17g,%.17g\n", i, l.mse_nn, l.mse_i, l.mse_d, l.total);
    }
}

std::vector<PhaseArrow> phase_field(const VdpParams& params, const PhaseGrid& g) {
    params.validate();
    if (g.nx < 1 || g.nv < 1) throw config_error("phase field: grid needs at least one node per axis");
    auto axis = [](double lo, double hi, std::size_t n, std::size_t i) {
        return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    std::vector<PhaseArrow> out;
    out.reserve(g.nx * g.nv);
    for (std::size_t j = 0; j < g.nv; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            const State s{axis(g.x_min, g.x_max, g.nx, i), axis(g.v_min, g.v_max, g.nv, j)};
            const StateDerivative d = rhs(params, s, 0.0);
            out.push_back({s.x, s.v, d.dx, d.dv});
        }
    }
    return out;
}

void emit_phase_field(const std::string& path, const VdpParams& params, const PhaseGrid& grid) {
    const auto arrows = phase_field(params, grid);
    FilePtr f = open_for_write(path);
    std::fputs("x,v,dx,dv\n", f.get());
    for (const auto& a : arrows) std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g\n", a.x, a.v, a.dx, a.dv);
}

std::vector<std::string> emit_tables(const std::vector<RunRecord>& records, const std::string& dir) {
    fs::create_directories(dir);
    auto find = [&](const std::string& experiment, ControllerKind c, bool by_lambda, double value) -> const RunRecord* {
        const RunRecord* hit = nullptr;
        for (const auto& r : records) {
            if (r.experiment != experiment || r.config.controller != c || !r.ok()) continue;
            if ((by_lambda ? r.config.lambda : r.config.mu) == value) hit = &r;
        }
        return hit;
    };
    auto num = [](std::optional<double> v) { return v ? format_number(*v) : std::string("NA"); };
    auto precise = [](std::optional<double> v) {
        if (!v) return std::string("NA");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        return std::string(buf);
    };

    std::vector<std::string> written;
    auto timing_table = [&](const std::string& name, const std::string& experiment, bool by_lambda,
                            const std::vector<double>& values) {
        const std::string path = (fs::path(dir) / name).string();
        FilePtr f = open_for_write(path);
        std::string header = "controller";
        for (double v : values) header += "," + format_number(v);
        std::fprintf(f.get(), "%s\n", header.c_str());
        for (ControllerKind c : kAllControllers) {
            std::string row(to_string(c));
            for (double v : values) {
                const RunRecord* r = find(experiment, c, by_lambda, v);
                row += "," + (r ? precise(r->timing.wall_seconds) : std::string("NA"));
            }
            std::fprintf(f.get(), "%s\n", row.c_str());
        }
        written.push_back(path);
    };
    const std::vector<double> lambdas(kLambdaSweep.begin(), kLambdaSweep.end());
    const std::vector<double> mus(kMuSweep.begin(), kMuSweep.end());
    timing_table("timing_lambda.csv", "sweep-lambda", true, lambdas);
    timing_table("timing_mu.csv", "sweep-mu", false, mus);

    auto cell_table = [&](const std::string& name, const std::vector<ControllerKind>& columns, auto value_of) {
        const std::string path = (fs::path(dir) / name).string();
        FilePtr f = open_for_write(path);
        std::string header = "cell";
        for (ControllerKind c : columns) header += "," + std::string(to_string(c));
        std::fprintf(f.get(), "%s\n", header.c_str());
        auto rows = [&](const std::string& experiment, bool by_lambda, const std::vector<double>& values) {
            for (double v : values) {
                std::string row = std::string(by_lambda ? "lambda=" : "mu=") + format_number(v);
                for (ControllerKind c : columns) {
                    const RunRecord* r = find(experiment, c, by_lambda, v);
                    row += "," + (r ? value_of(*r) : std::string("NA"));
                }
                std::fprintf(f.get(), "%s\n", row.c_str());
            }
        };
        rows("sweep-lambda", true, lambdas);
        rows("sweep-mu", false, mus);
        written.push_back(path);
    };
    cell_table("relative_time.csv", {ControllerKind::pidoc, ControllerKind::ff, ControllerKind::fb,
                                     ControllerKind::combined},
               [&](const RunRecord& r) { return r.timing.relative_time ? precise(r.timing.relative_time) : num({}); });
    cell_table("relative_error.csv",
               {ControllerKind::combined, ControllerKind::ff, ControllerKind::fb, ControllerKind::pidoc},
               [&](const RunRecord& r) {
                   return r.error ? precise(r.error->mean_abs_rel_error) : std::string("NA");
               });
    return written;
}

}  // namespace vdpctl
