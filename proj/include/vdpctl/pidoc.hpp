#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vdpctl/dynamics.hpp"
#include "vdpctl/integrator.hpp"
#include "vdpctl/lbfgs.hpp"
#include "vdpctl/mlp.hpp"
#include "vdpctl/pinn_loss.hpp"

namespace vdpctl {

/// Iteration cap used for desk-scale runs; full scale is LbfgsConfig's default.
inline constexpr std::size_t kDeskScaleIterations = 5000;
inline constexpr std::size_t kFullScaleIterations = 200'000;

struct TrainConfig {
    LbfgsConfig optimizer;
    std::uint64_t seed = 20220601;
    int depth = 6;
    int width = 30;
    LossOptions loss;
    /// Initial point of the unforced simulation that produces x_train.
    State training_init{1.0, 0.0};
    /// Resume from these parameters instead of a fresh initialization.
    std::optional<MlpParams> warm_start;

    void validate() const;
};

TrainingData make_training_data(const VdpParams& sys, const State& init, const IntegratorConfig& integ);

struct PidocResult {
    /// Network output on the integrator grid; v and a are exact network
    /// derivatives, f is the force that makes the oscillator follow it.
    Trajectory trajectory;
    /// Loss after every accepted iteration; entry 0 is the initial loss.
    std::vector<LossBreakdown> history;
    MlpParams params;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    StopReason stop = StopReason::max_iterations;
    bool degraded = false;

    const LossBreakdown& initial_loss() const { return history.front(); }
    const LossBreakdown& final_loss() const { return history.back(); }
};

/// Trains the network on the physics-informed control loss and samples it.
PidocResult pidoc_control(const VdpParams& sys, const DesiredTrajectory& d, const TrainConfig& cfg,
                          const IntegratorConfig& integ);

/// Samples a trained network on the integrator grid.
Trajectory network_trajectory(const MlpParams& p, const VdpParams& sys, const IntegratorConfig& integ);

/// Text checkpoint (JSON). Doubles are written in shortest round-trip decimal
/// form, so a loaded checkpoint is bit-identical to the saved one.
struct Checkpoint {
    MlpParams params;
    std::uint64_t seed = 0;
    std::vector<LossBreakdown> history;

    bool operator==(const Checkpoint& o) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vdpctl
