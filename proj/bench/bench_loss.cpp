// Blocked OpenMP loss kernel against the serial per-sample reference.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "vdpctl/pidoc.hpp"
#include "vdpctl/pinn_loss.hpp"

#ifdef VDPCTL_HAVE_OPENMP
#include <omp.h>
#endif

using namespace vdpctl;

namespace {

struct Fixture {
    MlpParams params;
    TrainingData data;
};

const Fixture& fixture(std::size_t stride) {
    static std::vector<std::unique_ptr<Fixture>> cache(5001);
    auto& slot = cache[stride];
    if (!slot) {
        slot = std::make_unique<Fixture>();
        slot->params = MlpParams::glorot(hidden_widths(6, 30), 20220601);
        slot->params.set_input_range(0.0, 50.0);
        slot->data = make_training_data({1.0}, {1.0, 0.0}, {}).subsample(stride);
    }
    return *slot;
}

void BM_loss_grad(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loss_grad(f.params, f.data, {1.0}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
#ifdef VDPCTL_HAVE_OPENMP
    state.counters["threads"] = omp_get_max_threads();
#endif
}

void BM_loss_grad_reference(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loss_grad_reference(f.params, f.data, {1.0}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_loss_eval(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(loss_eval(f.params, f.data, {1.0}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.size()));
}

}  // namespace

// Argument is the subsampling stride of the 5000-point grid.
BENCHMARK(BM_loss_grad)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loss_grad_reference)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loss_eval)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
