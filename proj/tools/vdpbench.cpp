#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vdpctl/errors.hpp"
#include "vdpctl/harness.hpp"

using namespace vdpctl;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> controllers;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> sign;
    std::optional<std::size_t> max_iters;
    std::optional<std::string> out;
    bool full = false;
    bool timed = false;
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "JSON experiment config; flags override its values")
        ->check(CLI::ExistingFile);
    cmd->add_option("--controller", c.controllers, "Restrict to these controllers (pidoc, ff, fb, combined)")
        ->delimiter(',');
    cmd->add_option("--lambda", c.lambda, "Desired amplitude");
    cmd->add_option("--mu", c.mu, "Nonlinearity");
    cmd->add_option("--seed", c.seed, "Network initialization seed");
    cmd->add_option("--sign", c.sign, "Feedback sign convention")->check(CLI::IsMember({"paper", "standard"}));
    cmd->add_option("--max-iters", c.max_iters, "Optimizer iteration cap for the network controller");
    cmd->add_option("--out", c.out, "Output root directory");
    cmd->add_flag("--full", c.full, "Full-scale training (200000 iterations)");
    cmd->add_flag("--timed", c.timed, "Run cells one at a time for uncontended wall times");
    cmd->add_option("--jobs", c.jobs, "Parallel worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg;
    if (!c.config_file.empty()) {
        std::ifstream in(c.config_file);
        try {
            apply_json(cfg, nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw config_error("cannot parse " + c.config_file + ": " + e.what());
        }
    }
    if (c.lambda) cfg.lambda = *c.lambda;
    if (c.mu) cfg.mu = *c.mu;
    if (c.seed) cfg.seed = *c.seed;
    if (c.sign) cfg.sign = parse_feedback_sign(*c.sign);
    if (c.full) cfg.max_iterations = kFullScaleIterations;
    if (c.max_iters) cfg.max_iterations = *c.max_iters;
    if (c.out) cfg.out_dir = *c.out;
    cfg.validate();
    return cfg;
}

std::vector<ControllerKind> selected(const Common& c) {
    if (c.controllers.empty()) return {kAllControllers.begin(), kAllControllers.end()};
    std::vector<ControllerKind> out;
    for (const auto& name : c.controllers) out.push_back(parse_controller(name));
    return out;
}

int summarize(const std::vector<CellResult>& cells) {
    int failed = 0;
    for (const auto& c : cells) {
        const auto& r = c.record;
        const std::string id = r.experiment + "/" + std::string(to_string(r.config.controller)) + "/" + r.config.cell_id();
        if (!r.ok()) {
            ++failed;
            continue;
        }
        std::printf("%-40s E=%-10.4g radius=%-8.4g wall=%.4fs", id.c_str(), r.error->mean_abs_rel_error, r.radius->mean,
                    r.timing.wall_seconds);
        if (r.timing.relative_time) std::printf(" T=%.2f", *r.timing.relative_time);
        std::printf("\n");
    }
    if (failed) {
        std::fprintf(stderr, "%d of %zu cells failed:\n", failed, cells.size());
        for (const auto& c : cells) {
            if (c.record.ok()) continue;
            std::fprintf(stderr, "  %s/%s/%s: %s\n", c.record.experiment.c_str(),
                         std::string(to_string(c.record.config.controller)).c_str(), c.record.config.cell_id().c_str(),
                         c.record.failure.c_str());
        }
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Van der Pol tracking controllers: benchmark runs and parameter sweeps"};
    app.set_version_flag("--version", software_version());
    app.require_subcommand(1);

    Common bench_opts, lambda_opts, mu_opts;
    auto* bench = app.add_subcommand("benchmark", "One cell (default lambda 5, mu 1), every selected controller");
    add_common(bench, bench_opts);
    auto* sweep_lambda = app.add_subcommand("sweep-lambda", "lambda in {1,3,5,7,9} at fixed mu");
    add_common(sweep_lambda, lambda_opts);
    auto* sweep_mu = app.add_subcommand("sweep-mu", "mu in {1,3,5,7,9,10} at fixed lambda");
    add_common(sweep_mu, mu_opts);

    double phase_mu = 1.0;
    std::string phase_out = "out/phase_field.csv";
    PhaseGrid grid;
    auto* phase = app.add_subcommand("phase-field", "Unforced vector field on a grid");
    phase->add_option("--mu", phase_mu, "Nonlinearity")->check(CLI::PositiveNumber);
    phase->add_option("--out", phase_out, "Output CSV file");
    phase->add_option("--nx", grid.nx, "Grid nodes along x");
    phase->add_option("--nv", grid.nv, "Grid nodes along v");

    std::string tables_root = "out";
    std::string tables_dir;
    auto* tables = app.add_subcommand("tables", "Summary tables from recorded manifests");
    tables->add_option("--out", tables_root, "Output root holding the run manifests");
    tables->add_option("--dir", tables_dir, "Where to write the tables (default <out>/tables)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto batch = [](const Common& c) { return BatchOptions{c.timed, c.jobs, true}; };
        if (bench->parsed()) return summarize(run_benchmark(resolve(bench_opts), selected(bench_opts), batch(bench_opts)));
        if (sweep_lambda->parsed())
            return summarize(run_lambda_sweep(resolve(lambda_opts), selected(lambda_opts), batch(lambda_opts)));
        if (sweep_mu->parsed()) return summarize(run_mu_sweep(resolve(mu_opts), selected(mu_opts), batch(mu_opts)));
        if (phase->parsed()) {
            if (fs::path(phase_out).has_parent_path()) fs::create_directories(fs::path(phase_out).parent_path());
            emit_phase_field(phase_out, {phase_mu}, grid);
            std::printf("%s\n", phase_out.c_str());
            return 0;
        }
        if (tables->parsed()) {
            const auto records = load_records(tables_root);
            if (records.empty()) {
                std::fprintf(stderr, "no manifests found under %s\n", tables_root.c_str());
                return 1;
            }
            const std::string dir = tables_dir.empty() ? (fs::path(tables_root) / "tables").string() : tables_dir;
            for (const auto& path : emit_tables(records, dir)) std::printf("%s\n", path.c_str());
            return 0;
        }
    } catch (const vdpctl::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
