/*
 * learner - active Mealy-machine learning from output queries.
 *
 * Discrimination-tree learner in the style of Kearns-Vazirani: leaves hold
 * access sequences (one per hypothesis state), inner nodes hold
 * distinguishing input suffixes, and child edges are labeled with the
 * output words those suffixes produce. Counterexamples are reduced by
 * binary search to a single distinguishing suffix, splitting exactly one
 * leaf each. Equivalence queries are answered either exactly (against a
 * known target machine, for tests) or through model-based testing with the
 * transition-coverage strategy.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platoonlab/mapper.hpp"
#include "platoonlab/mealy.hpp"

namespace platoonlab {

/// Raised when the configured number of concrete tests has been spent.
/// learn() treats it as the stop signal and returns the last hypothesis.
class budget_exhausted : public std::exception {
public:
    const char* what() const noexcept override { return "test budget exhausted"; }
};

/// Test budget and round sizing for one learning session.
struct LearnerBudget {
    std::uint64_t max_total_tests = 5000; // concrete tests, output + equivalence
    int eq_tests_per_round = 50;
    std::uint64_t seed = 0;
};

/// Oracle answering output queries, with budget accounting. Cached answers
/// are free; each concrete execution counts against the budget, and the
/// query that would exceed it throws budget_exhausted instead of running.
class Teacher {
public:
    Teacher(std::vector<std::string> input_names, std::vector<std::string> output_names,
            std::uint64_t budget, std::optional<Symbol> collision_symbol);
    virtual ~Teacher() = default;

    const std::vector<std::string>& input_names() const { return input_names_; }
    const std::vector<std::string>& output_names() const { return output_names_; }

    Word query(const Word& inputs);

    /// Concrete tests executed so far, in execution order.
    const std::vector<Word>& executed() const { return executed_; }
    /// Executed tests whose output contained the collision symbol.
    std::uint64_t collisions() const { return collisions_; }

protected:
    virtual Word do_query(const Word& inputs) = 0;
    /// Cached answer that costs no budget, if the backend has one.
    virtual std::optional<Word> precached(const Word&) { return std::nullopt; }

private:
    std::vector<std::string> input_names_;
    std::vector<std::string> output_names_;
    std::uint64_t budget_;
    std::optional<Symbol> collision_symbol_;
    std::vector<Word> executed_;
    std::uint64_t collisions_ = 0;
};

/// Teacher backed by a known Mealy machine (unit tests, LBT toys).
class MachineTeacher : public Teacher {
public:
    explicit MachineTeacher(const MealyMachine& target,
                            std::uint64_t budget = UINT64_MAX,
                            std::optional<Symbol> collision_symbol = std::nullopt);

protected:
    Word do_query(const Word& inputs) override { return run(target_, inputs).outputs; }

private:
    const MealyMachine& target_;
};

/// Teacher backed by the plant harness.
class HarnessTeacher : public Teacher {
public:
    HarnessTeacher(SulHarness& harness, std::uint64_t budget,
                   std::optional<Symbol> collision_symbol = std::nullopt);

protected:
    Word do_query(const Word& inputs) override { return harness_.execute(inputs, nullptr); }
    std::optional<Word> precached(const Word& inputs) override { return harness_.cached(inputs); }

private:
    SulHarness& harness_;
};

/// The discrimination tree. Exposed so tests can check the structural
/// invariants; learning code drives it through Learner.
class DiscriminationTree {
public:
    using Ask = std::function<Word(const Word&)>;

    DiscriminationTree();

    /// Walks `word` down the tree, asking word+suffix at each inner node.
    /// A missing child means a previously unseen state: a new leaf with
    /// access sequence `word` is created. Returns the leaf's state id.
    int sift(const Word& word, const Ask& ask);

    /// Replaces the leaf of `state` with an inner node labeled `suffix`,
    /// keeping the old leaf under old_label and adding a new leaf with
    /// access `new_access` under new_label. Returns the new state id.
    int split_leaf(int state, Word suffix, const Word& old_label, const Word& new_label,
                   Word new_access);

    int num_states() const { return static_cast<int>(leaf_of_state_.size()); }
    const Word& access(int state) const;

    /// Distinguishing suffix at the lowest common ancestor of two leaves.
    const Word& separator(int state_a, int state_b) const;

private:
    struct Node {
        bool leaf = true;
        Word suffix;      // inner nodes
        Word access;      // leaves
        int state_id = -1;
        int parent = -1;
        std::vector<std::pair<Word, int>> children; // sorted by label
    };
    int find_child(int node, const Word& label) const;
    int add_child(int node, const Word& label, Word access);

    std::vector<Node> nodes_;
    std::vector<int> leaf_of_state_;
};

struct LearnRound {
    int round = 0;
    int states = 0;
    std::uint64_t total_tests = 0;
    std::uint64_t collisions = 0;
};

struct LearnLog {
    std::vector<LearnRound> rounds;
    bool stopped_by_budget = false;
    std::uint64_t total_tests = 0;
    std::uint64_t collisions = 0;
};

struct LearnResult {
    MealyMachine hypothesis;
    LearnLog log;
};

/// Equivalence-query strategy.
class EquivalenceOracle {
public:
    virtual ~EquivalenceOracle() = default;
    /// A counterexample input word (trimmed to the first divergence), or
    /// nullopt when no discrepancy was found within this oracle's budget.
    virtual std::optional<Word> find_counterexample(
        const MealyMachine& hypothesis, const std::function<Word(const Word&)>& ask) = 0;
};

/// Exact equivalence via product-machine search against a known target.
class ExactOracle : public EquivalenceOracle {
public:
    explicit ExactOracle(const MealyMachine& target) : target_(target) {}
    std::optional<Word> find_counterexample(const MealyMachine& hypothesis,
                                            const std::function<Word(const Word&)>&) override;

private:
    const MealyMachine& target_;
};

/// Testing-based equivalence: transition-coverage suites generated from the
/// hypothesis, executed through the teacher until an output differs. In
/// persistent mode a fruitless round does not end the search; rounds repeat
/// (with one extra test of strictly growing length, so that a finite SUL
/// whose short tests are all cached still consumes budget) until either a
/// counterexample appears or the teacher's budget stops the session.
class CoverageTestingOracle : public EquivalenceOracle {
public:
    CoverageTestingOracle(int tests_per_round, std::uint64_t seed, int l_max = 10,
                          bool persistent = false);
    std::optional<Word> find_counterexample(const MealyMachine& hypothesis,
                                            const std::function<Word(const Word&)>& ask) override;

private:
    int tests_per_round_;
    int l_max_;
    bool persistent_;
    int escalation_ = 0;
    Rng rng_;
};

/// Runs learning rounds until the oracle finds no counterexample or the
/// teacher's budget runs out, and returns the last completed hypothesis.
/// Throws nondeterminism_error when the teacher ever contradicts itself and
/// std::invalid_argument when the budget cannot fund the initial round.
LearnResult learn(Teacher& teacher, EquivalenceOracle& oracle);

/// Budgeted learning of the plant harness: persistent transition-coverage
/// equivalence testing until budget.max_total_tests concrete tests are
/// spent, counting queries whose output contains collision_symbol.
LearnResult learn_from_harness(SulHarness& harness, const LearnerBudget& budget,
                               std::optional<Symbol> collision_symbol = std::nullopt,
                               int l_max = 10);

std::string learn_log_to_csv(const LearnLog& log);

} // namespace platoonlab
