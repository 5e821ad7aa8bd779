/*
 * testgen - the four abstract test-suite generation strategies.
 *
 * random: uniform symbols, uniform length in [1, l_max].
 * learning-based: the tests executed by a budgeted automata-learning run.
 * transition-coverage: random walks on a model, greedily reordered so
 *   early tests maximize newly covered transitions.
 * output-directed: random prefix, shortest path to a random state, then
 *   shortest path to a transition emitting the target label.
 *
 * Every generator is a pure function of (config, model, seed).
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "platoonlab/learner.hpp"
#include "platoonlab/mapper.hpp"
#include "platoonlab/mealy.hpp"

namespace platoonlab {

enum class Strategy { Random, LearningBased, TransitionCoverage, OutputDirected };

Strategy strategy_from_name(const std::string& name);
std::string strategy_name(Strategy s);

struct StrategyConfig {
    Strategy strategy = Strategy::Random;
    int n_train = 100;
    int l_max = 10;                  // max random length
    std::string target_label = "crash"; // output-directed only
    int generation_batch = 1000;     // transition-coverage phase size
    std::uint64_t seed = 0;
};

/// n_train input words, each of uniform length in [1, l_max] over an
/// alphabet of num_inputs symbols.
std::vector<Word> gen_random(const StrategyConfig& cfg, int num_inputs);

/// Runs a learning session with the test budget set to n_train and returns
/// the executed tests in execution order. eq_tests_per_round sizes the
/// equivalence queries inside the session.
std::vector<Word> gen_learning_based(const StrategyConfig& cfg, SulHarness& harness,
                                     int eq_tests_per_round,
                                     LearnResult* result_out = nullptr);

/// The strategy over an arbitrary teacher. The teacher must be budgeted at
/// cfg.n_train; equivalence testing keeps going until that budget is spent.
std::vector<Word> run_learning_based(const StrategyConfig& cfg, Teacher& teacher,
                                     int eq_tests_per_round,
                                     LearnResult* result_out = nullptr);

/// Rounds of (generate random walks, select by marginal transition
/// coverage) until n_train tests are selected. Within a round, selection
/// first takes tests with positive coverage gain (largest first, ties in
/// generation order) and then the remaining walks in generation order;
/// coverage resets between rounds.
std::vector<Word> gen_transition_coverage(const StrategyConfig& cfg, const MealyMachine& model);

/// Algorithm: draw rand-len uniform in [0, l_max]; prefix = random word of
/// that length; walk the model to its end state; pick a random destination
/// state; connect with path_to_state (discard the draw when unreachable);
/// finish with path_to_label to target_label (discard when absent); accept
/// prefix + interfix + suffix. Repeats until n_train accepted. Throws
/// std::invalid_argument when no transition emitting target_label is
/// reachable from the initial state.
std::vector<Word> gen_output_directed(const StrategyConfig& cfg, const MealyMachine& model);

/// Suite file: one test per line, symbol names space-separated.
std::string suite_to_text(const std::vector<Word>& suite,
                          const std::vector<std::string>& input_names);
std::vector<Word> suite_from_text(const std::string& text,
                                  const std::vector<std::string>& input_names);
void save_suite(const std::vector<Word>& suite, const std::vector<std::string>& input_names,
                const std::string& path);
std::vector<Word> load_suite(const std::vector<std::string>& input_names,
                             const std::string& path);

} // namespace platoonlab
