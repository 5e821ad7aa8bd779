#include <benchmark/benchmark.h>

#include "platoonlab/learner.hpp"
#include "platoonlab/mealy.hpp"
#include "platoonlab/util.hpp"

using namespace platoonlab;

namespace {

MealyMachine random_target(int states, std::uint64_t seed) {
    std::vector<std::string> in{"a", "b", "c"}, out{"x", "y", "z"};
    MealyMachine m(in, out, states, 0);
    Rng rng(seed);
    for (int q = 0; q < states; ++q)
        for (int i = 0; i < 3; ++i)
            m.set_transition(q, i, static_cast<int>(rng.bounded(states)),
                             static_cast<Symbol>(rng.bounded(3)));
    return m;
}

void BM_LearnExact(benchmark::State& state) {
    MealyMachine target = random_target(static_cast<int>(state.range(0)), 11);
    for (auto _ : state) {
        MachineTeacher teacher(target);
        ExactOracle oracle(target);
        benchmark::DoNotOptimize(learn(teacher, oracle));
    }
}
BENCHMARK(BM_LearnExact)->Arg(20)->Arg(100);

} // namespace

BENCHMARK_MAIN();
