#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vdpctl/controllers.hpp"
#include "vdpctl/dynamics.hpp"
#include "vdpctl/integrator.hpp"
#include "vdpctl/metrics.hpp"
#include "vdpctl/pidoc.hpp"

namespace vdpctl {

enum class ControllerKind { pidoc, ff, fb, combined };

inline constexpr std::array<ControllerKind, 4> kAllControllers{ControllerKind::pidoc, ControllerKind::ff,
                                                                ControllerKind::fb, ControllerKind::combined};
inline constexpr std::array<double, 5> kLambdaSweep{1, 3, 5, 7, 9};
inline constexpr std::array<double, 6> kMuSweep{1, 3, 5, 7, 9, 10};

std::string_view to_string(ControllerKind c);
ControllerKind parse_controller(std::string_view text);

/// One sweep cell: controller, target, system and every numerical knob.
struct ExperimentConfig {
    ControllerKind controller = ControllerKind::ff;
    double lambda = 5.0;
    double mu = 1.0;
    FeedbackSign sign = FeedbackSign::paper_as_written;
    /// Row-major 2x2 state weight and scalar input weight.
    std::array<double, 4> q{1.0, 0.0, 0.0, 1.0};
    double r = 1.0;
    IntegratorConfig integrator;
    State init{1.0, 0.0};
    std::uint64_t seed = 20220601;
    std::size_t max_iterations = kDeskScaleIterations;
    int depth = 6;
    int width = 30;
    bool separated_dynamics = false;
    double transient_cutoff = kDefaultTransientCutoff;
    double guard_fraction = kDefaultGuardFraction;
    std::string out_dir = "out";

    void validate() const;
    CostWeights weights() const;
    TrainConfig train_config() const;
    /// "lambda5_mu1"
    std::string cell_id() const;

    bool operator==(const ExperimentConfig& o) const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Overrides the fields present in `j`; unknown keys are a config_error.
void apply_json(ExperimentConfig& c, const nlohmann::json& j);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct PidocSummary {
    std::size_t iterations = 0;
    std::string stop_reason;
    bool degraded = false;
    LossBreakdown initial_loss;
    LossBreakdown final_loss;

    bool operator==(const PidocSummary&) const = default;
};

/// Persisted outcome of one cell. File references are relative to
/// config.out_dir.
struct RunRecord {
    ExperimentConfig config;
    std::string experiment;
    std::string status = "ok";
    std::string failure;
    std::string series_file;
    std::optional<std::string> losses_file;
    std::optional<ErrorReport> error;
    std::optional<RadiusStats> radius;
    TimingRecord timing;
    /// [K_p, K_d] for the feedback and combined controllers.
    std::optional<std::array<double, 2>> gains;
    std::optional<PidocSummary> pidoc;
    std::string software_version;
    std::string timestamp;

    bool ok() const { return status == "ok"; }
    bool operator==(const RunRecord& o) const;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
void save_record(const std::string& path, const RunRecord& r);
RunRecord load_record(const std::string& path);
/// Every manifest.json below `root`, sorted by path.
std::vector<RunRecord> load_records(const std::string& root);

/// Result of the control computation alone.
struct ControllerOutcome {
    Trajectory trajectory;
    std::vector<LossBreakdown> losses;
    std::optional<std::array<double, 2>> gains;
    std::optional<PidocSummary> pidoc;
};

ControllerOutcome run_controller(const ExperimentConfig& cfg);

struct CellResult {
    RunRecord record;
    Trajectory trajectory;
    std::vector<LossBreakdown> losses;
};

struct BatchOptions {
    /// Serialize cells so wall times are uncontended.
    bool timed = false;
    unsigned jobs = 1;
    bool write_files = true;
};

/// Runs every config, normalizes timings against the feedforward run of the
/// same cell and (optionally) writes out/<experiment>/<controller>/<cell>/.
/// Per-cell failures are recorded, never thrown.
std::vector<CellResult> run_cells(const std::vector<ExperimentConfig>& cells, const std::string& experiment,
                                  const BatchOptions& opts);

std::vector<CellResult> run_benchmark(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                      const BatchOptions& opts);
std::vector<CellResult> run_lambda_sweep(const ExperimentConfig& base,
                                         const std::vector<ControllerKind>& controllers, const BatchOptions& opts);
std::vector<CellResult> run_mu_sweep(const ExperimentConfig& base, const std::vector<ControllerKind>& controllers,
                                     const BatchOptions& opts);

/// Columns t,x,v,a,F,xd,vd,ad with 17 significant digits.
void write_series_csv(const std::string& path, const Trajectory& traj, const DesiredTrajectory& d);
/// Reads back t,x,v,a,F.
Trajectory read_series_csv(const std::string& path);
void write_losses_csv(const std::string& path, const std::vector<LossBreakdown>& losses);

struct PhaseGrid {
    double x_min = -3.0, x_max = 3.0;
    std::size_t nx = 21;
    double v_min = -3.0, v_max = 3.0;
    std::size_t nv = 21;
};

struct PhaseArrow {
    double x, v, dx, dv;
};

/// Unforced vector field on a rectangular grid, x varying fastest.
std::vector<PhaseArrow> phase_field(const VdpParams& params, const PhaseGrid& grid);
/// CSV with header x,v,dx,dv.
void emit_phase_field(const std::string& path, const VdpParams& params, const PhaseGrid& grid);

/// Writes timing_lambda.csv, timing_mu.csv, relative_time.csv and
/// relative_error.csv into `dir`; missing cells are written as NA.
std::vector<std::string> emit_tables(const std::vector<RunRecord>& records, const std::string& dir);

std::string software_version();

}  // namespace vdpctl
