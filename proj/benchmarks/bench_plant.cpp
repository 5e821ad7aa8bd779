#include <benchmark/benchmark.h>

#include "platoonlab/mapper.hpp"
#include "platoonlab/plant.hpp"
#include "platoonlab/testgen.hpp"

using namespace platoonlab;

namespace {

const std::string kConfigDir = std::string(PLATOONLAB_SOURCE_DIR) + "/configs/";

void BM_PlantStep(benchmark::State& state) {
    Plant plant(PlantConfig::load(kConfigDir + "plant_default.cfg"), 1);
    for (auto _ : state) benchmark::DoNotOptimize(plant.step_control(0.7, 1));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PlantStep);

void BM_AbstractQuery(benchmark::State& state) {
    SulHarness harness(PlantConfig::load(kConfigDir + "plant_default.cfg"),
                       AbstractAlphabet::load(kConfigDir + "alphabet_default.cfg"), false);
    StrategyConfig sc;
    sc.n_train = 64;
    sc.l_max = static_cast<int>(state.range(0));
    sc.seed = 7;
    auto suite = gen_random(sc, harness.alphabet().num_inputs());
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(harness.query(suite[k]));
        k = (k + 1) % suite.size();
    }
}
BENCHMARK(BM_AbstractQuery)->Arg(5)->Arg(20);

} // namespace
