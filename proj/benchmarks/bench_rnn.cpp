#include <benchmark/benchmark.h>

#include "platoonlab/rnn.hpp"
#include "platoonlab/util.hpp"

using namespace platoonlab;

namespace {

std::vector<RawSequencePair> make_pairs(int n, int T, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawSequencePair> pairs(static_cast<std::size_t>(n));
    for (auto& p : pairs)
        for (int k = 0; k < T; ++k) {
            p.x.push_back({rng.uniform_real(-1, 1), rng.uniform_real(-1, 1)});
            p.targets.push_back(
                {rng.uniform_real(-1, 1), rng.uniform_real(-1, 1), rng.uniform_real(-1, 1)});
        }
    return pairs;
}

void BM_LstmForward(benchmark::State& state) {
    RnnParams p = RnnParams::init(RnnMode::Lstm, 2, static_cast<int>(state.range(0)), 3, 1);
    auto pairs = make_pairs(1, 64, 2);
    for (auto _ : state) benchmark::DoNotOptimize(forward(p, pairs[0].x));
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LstmForward)->Arg(32)->Arg(100);

void BM_LstmBackward(benchmark::State& state) {
    RnnParams p = RnnParams::init(RnnMode::Lstm, 2, static_cast<int>(state.range(0)), 3, 1);
    auto pairs = make_pairs(5, 64, 3);
    std::vector<const RawSequencePair*> batch;
    for (auto& q : pairs) batch.push_back(&q);
    for (auto _ : state) benchmark::DoNotOptimize(backward(p, batch));
    state.SetItemsProcessed(state.iterations() * 5 * 64);
}
BENCHMARK(BM_LstmBackward)->Arg(32)->Arg(100);

void BM_TrainEpoch(benchmark::State& state) {
    auto pairs = make_pairs(100, 64, 4);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.hidden = 32;
    for (auto _ : state) benchmark::DoNotOptimize(train(pairs, cfg));
}
BENCHMARK(BM_TrainEpoch);

} // namespace
