#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "platoonlab/learner.hpp"
#include "platoonlab/pipeline.hpp"
#include "platoonlab/testgen.hpp"

using namespace platoonlab;

namespace {

const std::string kConfigDir = std::string(PLATOONLAB_SOURCE_DIR) + "/configs/";

LearnResult learn_machine(const MealyMachine& target, std::uint64_t budget = UINT64_MAX) {
    MachineTeacher teacher(target, budget);
    ExactOracle oracle(target);
    return learn(teacher, oracle);
}

/// Teacher whose answers to multi-symbol queries contradict its answers to
/// their one-symbol prefixes.
class LyingTeacher : public Teacher {
public:
    LyingTeacher() : Teacher({"a"}, {"0", "1"}, UINT64_MAX, std::nullopt) {}

protected:
    Word do_query(const Word& inputs) override {
        return Word(inputs.size(), inputs.size() <= 1 ? 0 : 1);
    }
};

} // namespace

TEST_CASE("constant teacher learns in one round with one state") {
    MealyMachine target = oracle::constant_machine({"a", "b"}, {"x"}, 0);
    LearnResult res = learn_machine(target);
    CHECK(res.hypothesis.num_states() == 1);
    CHECK(res.log.rounds.size() == 1);
    CHECK(!separating_sequence(res.hypothesis, target).has_value());
}

TEST_CASE("toggle machine is learned exactly") {
    MealyMachine target = oracle::toggle_machine();
    LearnResult res = learn_machine(target);
    CHECK(res.hypothesis.num_states() == 2);
    CHECK(!separating_sequence(res.hypothesis, target).has_value());
}

TEST_CASE("exact-oracle convergence on random machines") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        MealyMachine target = oracle::random_machine(12, 3, 3, seed + 7000);
        LearnResult res = learn_machine(target);
        INFO("seed ", seed);
        CHECK(!separating_sequence(res.hypothesis, target).has_value());
    }
}

TEST_CASE("hypothesis reproduces every executed query") {
    MealyMachine target = oracle::random_machine(10, 3, 3, 321);
    MachineTeacher teacher(target);
    ExactOracle oracle_(target);
    LearnResult res = learn(teacher, oracle_);
    for (const Word& w : teacher.executed())
        CHECK(run(res.hypothesis, w).outputs == run(target, w).outputs);
}

TEST_CASE("state count grows monotonically, at least one per round") {
    MealyMachine target = oracle::random_machine(15, 2, 3, 99);
    LearnResult res = learn_machine(target);
    for (std::size_t k = 1; k < res.log.rounds.size(); ++k)
        CHECK(res.log.rounds[k].states >= res.log.rounds[k - 1].states + 1);
    CHECK(res.log.rounds.back().states == res.hypothesis.num_states());
}

TEST_CASE("budget accounting: cached repeats are free, budget caps executions") {
    MealyMachine target = oracle::toggle_machine();
    MachineTeacher teacher(target, 10);
    StrategyConfig cfg;
    cfg.strategy = Strategy::LearningBased;
    cfg.n_train = 10;
    cfg.l_max = 6;
    cfg.seed = 3;
    LearnResult res;
    std::vector<Word> executed = run_learning_based(cfg, teacher, 5, &res);
    CHECK(executed.size() == 10);
    CHECK(res.log.stopped_by_budget);
    // the budgeted run still had time to learn the toggle exactly
    CHECK(!separating_sequence(res.hypothesis, target).has_value());
    // no word appears twice: repeats are answered by the cache
    std::vector<Word> sorted = executed;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("budget exhaustion at any point still yields a valid hypothesis") {
    MealyMachine target = oracle::random_machine(12, 3, 3, 808);
    for (std::uint64_t budget = 3; budget <= 120; budget += 7) {
        MachineTeacher teacher(target, budget);
        CoverageTestingOracle oracle_(10, budget, 6, /*persistent=*/true);
        LearnResult res = learn(teacher, oracle_);
        res.hypothesis.validate();
        CHECK(teacher.executed().size() <= budget);
        CHECK(res.hypothesis.num_states() >= 1);
    }
}

TEST_CASE("zero budget cannot fund the initial hypothesis") {
    MealyMachine target = oracle::toggle_machine();
    MachineTeacher teacher(target, 0);
    ExactOracle oracle_(target);
    CHECK_THROWS_AS(learn(teacher, oracle_), std::invalid_argument);
}

TEST_CASE("equivalence testing oracle: equal machines give no counterexample") {
    MealyMachine target = oracle::random_machine(6, 2, 2, 11);
    MachineTeacher teacher(target);
    QueryCache cache;
    auto ask = [&](const Word& w) {
        if (auto hit = cache.lookup(w)) return *hit;
        Word out = teacher.query(w);
        cache.insert(w, out);
        return out;
    };
    CoverageTestingOracle oracle_(50, 17, 8);
    CHECK(!oracle_.find_counterexample(target, ask).has_value());
}

TEST_CASE("equivalence testing oracle: constant hypothesis vs toggle teacher") {
    MealyMachine toggle = oracle::toggle_machine();
    MealyMachine constant = oracle::constant_machine({"a"}, {"0", "1"}, 0);
    MachineTeacher teacher(toggle);
    auto ask = [&](const Word& w) { return teacher.query(w); };
    CoverageTestingOracle oracle_(50, 4, 8);
    auto ce = oracle_.find_counterexample(constant, ask);
    REQUIRE(ce.has_value());
    CHECK(ce->size() <= 2);
    CHECK(run(toggle, *ce).outputs != run(constant, *ce).outputs);
}

TEST_CASE("contradictory teacher raises nondeterminism_error") {
    LyingTeacher teacher;
    CoverageTestingOracle oracle_(10, 1, 4, /*persistent=*/true);
    CHECK_THROWS_AS(learn(teacher, oracle_), nondeterminism_error);
}

TEST_CASE("discrimination tree: sift, split and separator invariants") {
    MealyMachine target = oracle::toggle_machine();
    MachineTeacher teacher(target);
    QueryCache cache;
    DiscriminationTree::Ask ask = [&](const Word& w) {
        if (auto hit = cache.lookup(w)) return *hit;
        Word out = teacher.query(w);
        cache.insert(w, out);
        return out;
    };

    DiscriminationTree tree;
    CHECK(tree.num_states() == 1);
    CHECK(tree.access(0).empty());
    CHECK(tree.sift({0}, ask) == 0); // single leaf absorbs everything

    // distinguish state 0 (access eps) from state reached by one input:
    // suffix [a] answers 0 after eps and 1 after [a].
    int fresh = tree.split_leaf(0, {0}, {0}, {1}, {0});
    CHECK(fresh == 1);
    CHECK(tree.num_states() == 2);
    CHECK(tree.access(1) == Word{0});
    CHECK(tree.separator(0, 1) == Word{0});

    // both access sequences sift back to their own leaves
    CHECK(tree.sift({}, ask) == 0);
    CHECK(tree.sift({0}, ask) == 1);
    CHECK(tree.sift({0, 0}, ask) == 0);

    // the separator really distinguishes the two access sequences
    Word sep = tree.separator(0, 1);
    Word wa = tree.access(0);
    wa.insert(wa.end(), sep.begin(), sep.end());
    Word wb = tree.access(1);
    wb.insert(wb.end(), sep.begin(), sep.end());
    Word oa = ask(wa), ob = ask(wb);
    CHECK(Word(oa.end() - 1, oa.end()) != Word(ob.end() - 1, ob.end()));
}

TEST_CASE("learn log csv format") {
    MealyMachine target = oracle::random_machine(8, 2, 2, 5);
    LearnResult res = learn_machine(target);
    std::string csv = learn_log_to_csv(res.log);
    CHECK(csv.rfind("round,states,total_tests,collisions\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          1 + static_cast<std::ptrdiff_t>(res.log.rounds.size()));
}

TEST_CASE("violation traps survive into a harness-learned hypothesis") {
    PlantConfig plant = PlantConfig::load(kConfigDir + "plant_default.cfg");
    AbstractAlphabet alphabet = AbstractAlphabet::load(kConfigDir + "alphabet_default.cfg");
    SulHarness harness(plant, alphabet);
    HarnessTeacher teacher(harness, 800, alphabet.output_index("crash"));
    CoverageTestingOracle oracle_(40, 2024, 10, /*persistent=*/true);
    LearnResult res = learn(teacher, oracle_);
    CHECK(res.log.stopped_by_budget);
    CHECK(res.hypothesis.num_states() > 2);

    // the first hypothesis is refuted quickly
    REQUIRE(res.log.rounds.size() >= 2);
    CHECK(res.log.rounds[1].total_tests - res.log.rounds[0].total_tests <= 200);

    const MealyMachine& hyp = res.hypothesis;
    int trap_edges = 0;
    for (int q = 0; q < hyp.num_states(); ++q) {
        for (int i = 0; i < hyp.num_inputs(); ++i) {
            Symbol o = hyp.output(q, i);
            if (!alphabet.is_violation(o)) continue;
            ++trap_edges;
            int t = hyp.next_state(q, i);
            for (int j = 0; j < hyp.num_inputs(); ++j) CHECK(hyp.output(t, j) == o);
        }
    }
    CHECK(trap_edges > 0);
}
