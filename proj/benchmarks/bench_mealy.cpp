#include <benchmark/benchmark.h>

#include "platoonlab/mealy.hpp"
#include "platoonlab/util.hpp"

using namespace platoonlab;

namespace {

MealyMachine random_machine(int states, int inputs, int outputs, std::uint64_t seed) {
    std::vector<std::string> in, out;
    for (int i = 0; i < inputs; ++i) in.push_back("i" + std::to_string(i));
    for (int o = 0; o < outputs; ++o) out.push_back("o" + std::to_string(o));
    MealyMachine m(in, out, states, 0);
    Rng rng(seed);
    for (int q = 0; q < states; ++q)
        for (int i = 0; i < inputs; ++i)
            m.set_transition(q, i, static_cast<int>(rng.bounded(states)),
                             static_cast<Symbol>(rng.bounded(outputs)));
    return m;
}

void BM_Run(benchmark::State& state) {
    MealyMachine m = random_machine(static_cast<int>(state.range(0)), 6, 8, 1);
    Rng rng(2);
    Word input;
    for (int k = 0; k < 64; ++k) input.push_back(static_cast<Symbol>(rng.bounded(6)));
    for (auto _ : state) benchmark::DoNotOptimize(run(m, input));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Run)->Arg(100)->Arg(6000);

void BM_PathToState(benchmark::State& state) {
    MealyMachine m = random_machine(static_cast<int>(state.range(0)), 6, 8, 3);
    int target = m.num_states() - 1;
    for (auto _ : state) benchmark::DoNotOptimize(path_to_state(m, 0, target));
}
BENCHMARK(BM_PathToState)->Arg(100)->Arg(1000)->Arg(6000);

void BM_SeparatingSequence(benchmark::State& state) {
    MealyMachine a = random_machine(static_cast<int>(state.range(0)), 3, 3, 5);
    MealyMachine b = random_machine(static_cast<int>(state.range(0)), 3, 3, 6);
    for (auto _ : state) benchmark::DoNotOptimize(separating_sequence(a, b));
}
BENCHMARK(BM_SeparatingSequence)->Arg(50)->Arg(200);

} // namespace
