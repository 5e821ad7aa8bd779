#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "platoonlab/dataset.hpp"
#include "platoonlab/testgen.hpp"

using namespace platoonlab;

namespace {

const std::string kConfigDir = std::string(PLATOONLAB_SOURCE_DIR) + "/configs/";

PlantConfig shipped_plant() { return PlantConfig::load(kConfigDir + "plant_default.cfg"); }
AbstractAlphabet shipped_alphabet() {
    return AbstractAlphabet::load(kConfigDir + "alphabet_default.cfg");
}

ConcreteTrace execute(const Word& w) {
    SulHarness h(shipped_plant(), shipped_alphabet(), false);
    ConcreteTrace t;
    h.execute(w, &t);
    return t;
}

Word crash_word(const AbstractAlphabet& a) {
    Word w;
    for (int i = 0; i < 6; ++i) w.push_back(a.input_index("fast-acc"));
    for (int i = 0; i < 6; ++i) w.push_back(a.input_index("hard-brake"));
    return w;
}

} // namespace

TEST_CASE("a trace of exactly T steps passes through unchanged") {
    AbstractAlphabet a = shipped_alphabet();
    // fast-acc x3 = 6 sampling periods
    ConcreteTrace t = execute(Word(3, a.input_index("fast-acc")));
    REQUIRE(t.rows.size() == 6);
    RawSequencePair pair = build_pair(t, 6, shipped_plant());
    CHECK(pair.length() == 6);
    for (int k = 0; k < 6; ++k) {
        auto ks = static_cast<std::size_t>(k);
        CHECK(pair.x[ks][0] == t.rows[ks].acc_cmd);
        CHECK(pair.targets[ks][0] == t.rows[ks].v_l);
        CHECK(pair.targets[ks][2] == t.rows[ks].d);
    }
    CHECK(!pair.label_crash);
}

TEST_CASE("short traces are continued by simulating zero acceleration") {
    AbstractAlphabet a = shipped_alphabet();
    // at rest the continuation is constant
    ConcreteTrace t = execute(Word(2, a.input_index("const"))); // 4 periods at rest
    RawSequencePair pair = build_pair(t, 9, shipped_plant());
    CHECK(pair.length() == 9);
    for (int k = 4; k < 9; ++k) {
        auto ks = static_cast<std::size_t>(k);
        CHECK(pair.x[ks][0] == 0.0);
        CHECK(pair.targets[ks][0] == 0.0);
        CHECK(pair.targets[ks][2] == doctest::Approx(1.0).epsilon(1e-12));
    }

    // a moving leader keeps moving during the pad and the pad is dynamic,
    // not a copy of the last row
    ConcreteTrace moving = execute(Word(2, a.input_index("fast-acc")));
    RawSequencePair mp = build_pair(moving, 10, shipped_plant());
    CHECK(mp.targets[4][0] == doctest::Approx(mp.targets[9][0]).epsilon(1e-9)); // v_l constant
    CHECK(mp.targets[4][2] != mp.targets[9][2]); // the gap keeps evolving
}

TEST_CASE("reverse truncation pads the head with the zero state") {
    AbstractAlphabet a = shipped_alphabet();
    ConcreteTrace t = execute({a.input_index("brake"), a.input_index("const")});
    // braking from rest turns v_l negative in the very first period
    REQUIRE(t.rows[0].v_l < 0);
    RawSequencePair pair = build_pair(t, 5, shipped_plant());
    CHECK(pair.length() == 5);
    for (int k = 0; k < 5; ++k) {
        auto ks = static_cast<std::size_t>(k);
        CHECK(pair.x[ks][0] == 0.0);
        CHECK(pair.x[ks][1] == 0.0);
        CHECK(pair.targets[ks][0] == 0.0);
        CHECK(pair.targets[ks][1] == 0.0);
        CHECK(pair.targets[ks][2] == shipped_plant().initial_distance_m);
    }
    CHECK(!pair.label_crash);
}

TEST_CASE("reverse after motion keeps the prefix and pads in front") {
    AbstractAlphabet a = shipped_alphabet();
    // accelerate then brake well past standstill
    Word w{a.input_index("fast-acc"), a.input_index("hard-brake"), a.input_index("hard-brake"),
           a.input_index("const")};
    ConcreteTrace t = execute(w);
    std::size_t k = 0;
    while (k < t.rows.size() && t.rows[k].v_l >= 0) ++k;
    REQUIRE(k < t.rows.size()); // reverse did happen
    const int T = 12;
    RawSequencePair pair = build_pair(t, T, shipped_plant());
    const int pad = T - static_cast<int>(k);
    REQUIRE(pad > 0);
    for (int j = 0; j < pad; ++j)
        CHECK(pair.targets[static_cast<std::size_t>(j)][0] == 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        CHECK(pair.targets[static_cast<std::size_t>(pad) + j][0] == t.rows[j].v_l);
        CHECK(pair.targets[static_cast<std::size_t>(pad) + j][2] == t.rows[j].d);
    }
}

TEST_CASE("overlong traces fail, with truncation as the only escape") {
    AbstractAlphabet a = shipped_alphabet();
    ConcreteTrace no_reverse = execute(Word(4, a.input_index("fast-acc"))); // 8 periods
    CHECK_THROWS_AS(build_pair(no_reverse, 6, shipped_plant()), trace_too_long);

    ConcreteTrace reversing = execute({a.input_index("brake"), a.input_index("wait")});
    REQUIRE(reversing.rows.size() == 10);
    // reverse at step 0 means everything is dropped; fits any T
    RawSequencePair pair = build_pair(reversing, 4, shipped_plant());
    CHECK(pair.length() == 4);
}

TEST_CASE("crash labels equal ground-truth threshold crossings") {
    AbstractAlphabet a = shipped_alphabet();
    PlantConfig cfg = shipped_plant();
    ConcreteTrace crash_trace = execute(crash_word(a));
    RawSequencePair pair = build_pair(crash_trace, 64, cfg);
    int first = -1;
    for (int k = 0; k < pair.length(); ++k) {
        if (pair.targets[static_cast<std::size_t>(k)][2] < cfg.truck_length_m) {
            first = k;
            break;
        }
    }
    REQUIRE(first >= 0);
    CHECK(pair.label_crash);
    CHECK(pair.crash_time == first);

    ConcreteTrace calm = execute(Word(2, a.input_index("const")));
    RawSequencePair calm_pair = build_pair(calm, 16, cfg);
    CHECK(!calm_pair.label_crash);
    CHECK(!calm_pair.crash_time.has_value());
}

TEST_CASE("delta-prime telescopes back to the orientation signal") {
    AbstractAlphabet a = shipped_alphabet();
    ConcreteTrace t = execute(Word(5, a.input_index("slow-acc")));
    RawSequencePair pair = build_pair(t, 10, shipped_plant());
    CHECK(pair.x[0][1] == 0.0);
    double cum = 0;
    for (int k = 1; k < pair.length(); ++k) {
        cum += pair.x[static_cast<std::size_t>(k)][1];
        if (k < static_cast<int>(t.rows.size()))
            CHECK(cum ==
                  doctest::Approx(t.rows[static_cast<std::size_t>(k)].delta - t.rows[0].delta)
                      .epsilon(1e-12));
    }
}

TEST_CASE("normalization: zero mean, unit variance, floored constants") {
    AbstractAlphabet a = shipped_alphabet();
    StrategyConfig sc;
    sc.n_train = 50;
    sc.l_max = 6;
    sc.seed = 21;
    SulHarness h(shipped_plant(), a, false);
    std::vector<ConcreteTrace> traces;
    for (const Word& w : gen_random(sc, a.num_inputs())) {
        ConcreteTrace t;
        h.execute(w, &t);
        traces.push_back(std::move(t));
    }
    auto pairs = build_pairs(traces, 64, shipped_plant());
    NormalizationStats stats = fit_normalize(pairs);
    auto normalized = pairs;
    apply_normalize(normalized, stats);

    double mean[5] = {0, 0, 0, 0, 0};
    std::size_t n = 0;
    for (const auto& p : normalized) {
        for (int k = 0; k < p.length(); ++k) {
            auto ks = static_cast<std::size_t>(k);
            mean[0] += p.x[ks][0];
            mean[1] += p.x[ks][1];
            for (int d = 0; d < 3; ++d) mean[2 + d] += p.targets[ks][static_cast<std::size_t>(d)];
            ++n;
        }
    }
    for (double m : mean) CHECK(std::abs(m / static_cast<double>(n)) < 1e-9);

    // constant dimension: all-zero acc
    std::vector<RawSequencePair> constant(3);
    for (auto& p : constant) {
        p.x.assign(8, {0.5, 0.0});
        p.targets.assign(8, {1.0, 2.0, 3.0});
    }
    NormalizationStats cs = fit_normalize(constant);
    CHECK(cs.x_std[0] == 1e-8);
    auto cnorm = constant;
    apply_normalize(cnorm, cs);
    CHECK(cnorm[0].x[0][0] == 0.0);
}

TEST_CASE("invert is the exact inverse of apply") {
    Rng rng(33);
    std::vector<RawSequencePair> pairs(4);
    for (auto& p : pairs) {
        for (int k = 0; k < 12; ++k) {
            p.x.push_back({rng.uniform_real(-3, 3), rng.uniform_real(-1, 1)});
            p.targets.push_back(
                {rng.uniform_real(-5, 5), rng.uniform_real(-5, 5), rng.uniform_real(0, 4)});
        }
    }
    NormalizationStats stats = fit_normalize(pairs);
    auto normalized = pairs;
    apply_normalize(normalized, stats);
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        auto physical = invert_outputs(normalized[pi].targets, stats);
        for (std::size_t k = 0; k < physical.size(); ++k)
            for (std::size_t d = 0; d < 3; ++d)
                CHECK(std::abs(physical[k][d] - pairs[pi].targets[k][d]) < 1e-10);
    }
}

TEST_CASE("normalization statistics are order independent") {
    Rng rng(44);
    std::vector<RawSequencePair> pairs(6);
    for (auto& p : pairs) {
        for (int k = 0; k < 7; ++k) {
            p.x.push_back({rng.uniform_real(-2, 2), rng.uniform_real(-2, 2)});
            p.targets.push_back(
                {rng.uniform_real(-2, 2), rng.uniform_real(-2, 2), rng.uniform_real(-2, 2)});
        }
    }
    auto shuffled = pairs;
    std::reverse(shuffled.begin(), shuffled.end());
    NormalizationStats a = fit_normalize(pairs), b = fit_normalize(shuffled);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(a.t_mean[d] == doctest::Approx(b.t_mean[d]).epsilon(1e-12));
        CHECK(a.t_std[d] == doctest::Approx(b.t_std[d]).epsilon(1e-12));
    }
}

TEST_CASE("empty training set is rejected") {
    CHECK_THROWS_AS(fit_normalize({}), std::invalid_argument);
}

TEST_CASE("dataset csv and stats kv round trips") {
    AbstractAlphabet a = shipped_alphabet();
    ConcreteTrace t = execute(crash_word(a));
    std::vector<ConcreteTrace> traces{t, execute(Word(2, a.input_index("const")))};
    auto pairs = build_pairs(traces, 48, shipped_plant());
    std::string csv = pairs_to_csv(pairs);
    CHECK(csv.rfind("pair_id,step,acc,dprime,v_l,v_f,d,label_crash,crash_time\n", 0) == 0);
    auto back = pairs_from_csv(csv);
    REQUIRE(back.size() == pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        CHECK(back[p].label_crash == pairs[p].label_crash);
        CHECK(back[p].crash_time == pairs[p].crash_time);
        REQUIRE(back[p].length() == pairs[p].length());
        for (int k = 0; k < pairs[p].length(); ++k) {
            auto ks = static_cast<std::size_t>(k);
            CHECK(back[p].x[ks] == pairs[p].x[ks]);
            CHECK(back[p].targets[ks] == pairs[p].targets[ks]);
        }
    }

    NormalizationStats stats = fit_normalize(pairs);
    NormalizationStats sback = stats_from_kv(KvFile::parse(stats_to_kv(stats).dump()));
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(sback.t_mean[d] == stats.t_mean[d]);
        CHECK(sback.t_std[d] == stats.t_std[d]);
    }
}
