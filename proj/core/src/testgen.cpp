#include "platoonlab/testgen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace platoonlab {

Strategy strategy_from_name(const std::string& name) {
    if (name == "random") return Strategy::Random;
    if (name == "learning-based") return Strategy::LearningBased;
    if (name == "transition-coverage") return Strategy::TransitionCoverage;
    if (name == "output-directed") return Strategy::OutputDirected;
    throw std::invalid_argument("unknown strategy: '" + name + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Random: return "random";
        case Strategy::LearningBased: return "learning-based";
        case Strategy::TransitionCoverage: return "transition-coverage";
        case Strategy::OutputDirected: return "output-directed";
    }
    throw std::logic_error("bad strategy enum");
}

std::vector<Word> gen_random(const StrategyConfig& cfg, int num_inputs) {
    if (cfg.n_train <= 0) throw std::invalid_argument("gen_random: n_train must be positive");
    if (cfg.l_max < 1) throw std::invalid_argument("gen_random: l_max must be >= 1");
    if (num_inputs <= 0) throw std::invalid_argument("gen_random: empty alphabet");
    Rng rng(cfg.seed);
    std::vector<Word> suite;
    suite.reserve(static_cast<std::size_t>(cfg.n_train));
    for (int n = 0; n < cfg.n_train; ++n) {
        std::int64_t len = rng.uniform_int(1, cfg.l_max);
        Word w;
        w.reserve(static_cast<std::size_t>(len));
        for (std::int64_t k = 0; k < len; ++k)
            w.push_back(static_cast<Symbol>(rng.bounded(static_cast<std::uint64_t>(num_inputs))));
        suite.push_back(std::move(w));
    }
    return suite;
}

std::vector<Word> run_learning_based(const StrategyConfig& cfg, Teacher& teacher,
                                     int eq_tests_per_round, LearnResult* result_out) {
    CoverageTestingOracle oracle(eq_tests_per_round, derive_seed(cfg.seed, "eq"), cfg.l_max,
                                 /*persistent=*/true);
    LearnResult res = learn(teacher, oracle);
    if (result_out) *result_out = std::move(res);
    return teacher.executed();
}

std::vector<Word> gen_learning_based(const StrategyConfig& cfg, SulHarness& harness,
                                     int eq_tests_per_round, LearnResult* result_out) {
    std::optional<Symbol> collision;
    for (int o = 0; o < harness.alphabet().num_outputs(); ++o)
        if (harness.alphabet().outputs[static_cast<std::size_t>(o)] == cfg.target_label)
            collision = o;
    HarnessTeacher teacher(harness, static_cast<std::uint64_t>(cfg.n_train), collision);
    return run_learning_based(cfg, teacher, eq_tests_per_round, result_out);
}

std::vector<Word> gen_transition_coverage(const StrategyConfig& cfg, const MealyMachine& model) {
    if (cfg.n_train <= 0)
        throw std::invalid_argument("gen_transition_coverage: n_train must be positive");
    if (cfg.generation_batch <= 0)
        throw std::invalid_argument("gen_transition_coverage: generation_batch must be positive");
    Rng rng(cfg.seed);
    const int ni = model.num_inputs();
    const std::size_t n_trans = static_cast<std::size_t>(model.num_states()) *
                                static_cast<std::size_t>(ni);
    const std::size_t cap = 4 * static_cast<std::size_t>(model.num_states());

    std::vector<Word> suite;
    suite.reserve(static_cast<std::size_t>(cfg.n_train));
    while (suite.size() < static_cast<std::size_t>(cfg.n_train)) {
        // Generation phase: random walks, continue probability 0.95 per
        // step, length capped at 4*|Q|.
        std::vector<Word> walks;
        std::vector<std::vector<std::size_t>> walk_trans;
        walks.reserve(static_cast<std::size_t>(cfg.generation_batch));
        for (int b = 0; b < cfg.generation_batch; ++b) {
            Word w;
            std::vector<std::size_t> trans;
            int q = model.initial_state();
            do {
                Symbol i = static_cast<Symbol>(rng.bounded(static_cast<std::uint64_t>(ni)));
                trans.push_back(static_cast<std::size_t>(q) * static_cast<std::size_t>(ni) +
                                static_cast<std::size_t>(i));
                w.push_back(i);
                q = model.next_state(q, i);
            } while (w.size() < cap && rng.uniform_real() < 0.95);
            std::sort(trans.begin(), trans.end());
            trans.erase(std::unique(trans.begin(), trans.end()), trans.end());
            walks.push_back(std::move(w));
            walk_trans.push_back(std::move(trans));
        }

        // Selection phase: tests with positive coverage gain first (largest
        // gain, ties by generation order), then the rest in generation
        // order. Coverage resets with the next batch.
        std::vector<char> covered(n_trans, 0);
        std::vector<char> taken(walks.size(), 0);
        std::size_t remaining = walks.size();
        while (remaining > 0 && suite.size() < static_cast<std::size_t>(cfg.n_train)) {
            std::size_t best = walks.size();
            std::size_t best_gain = 0;
            for (std::size_t idx = 0; idx < walks.size(); ++idx) {
                if (taken[idx]) continue;
                std::size_t gain = 0;
                for (std::size_t t : walk_trans[idx]) gain += covered[t] ? 0u : 1u;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = idx;
                }
            }
            if (best == walks.size()) {
                // No candidate adds coverage; take the rest in generation order.
                for (std::size_t idx = 0;
                     idx < walks.size() && suite.size() < static_cast<std::size_t>(cfg.n_train);
                     ++idx) {
                    if (taken[idx]) continue;
                    taken[idx] = 1;
                    --remaining;
                    suite.push_back(walks[idx]);
                }
                break;
            }
            taken[best] = 1;
            --remaining;
            for (std::size_t t : walk_trans[best]) covered[t] = 1;
            suite.push_back(walks[best]);
        }
    }
    return suite;
}

std::vector<Word> gen_output_directed(const StrategyConfig& cfg, const MealyMachine& model) {
    if (cfg.n_train <= 0)
        throw std::invalid_argument("gen_output_directed: n_train must be positive");
    const Symbol label = model.output_index(cfg.target_label);
    if (!path_to_label(model, model.initial_state(), label))
        throw std::invalid_argument("gen_output_directed: no transition emitting '" +
                                    cfg.target_label + "' is reachable from the initial state");
    Rng rng(cfg.seed);
    const int ni = model.num_inputs();
    std::vector<Word> suite;
    suite.reserve(static_cast<std::size_t>(cfg.n_train));
    while (suite.size() < static_cast<std::size_t>(cfg.n_train)) {
        std::int64_t len = rng.uniform_int(0, cfg.l_max);
        Word prefix;
        for (std::int64_t k = 0; k < len; ++k)
            prefix.push_back(static_cast<Symbol>(rng.bounded(static_cast<std::uint64_t>(ni))));
        int q_r = model.run_state(model.initial_state(), prefix);
        int q_dest = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(model.num_states())));
        auto interfix = path_to_state(model, q_r, q_dest);
        if (!interfix) continue;
        auto suffix = path_to_label(model, q_dest, label);
        if (!suffix) continue;
        Word test = std::move(prefix);
        test.insert(test.end(), interfix->begin(), interfix->end());
        test.insert(test.end(), suffix->begin(), suffix->end());
        suite.push_back(std::move(test));
    }
    return suite;
}

std::string suite_to_text(const std::vector<Word>& suite,
                          const std::vector<std::string>& input_names) {
    std::ostringstream out;
    for (const Word& w : suite) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (k) out << ' ';
            out << input_names.at(static_cast<std::size_t>(w[k]));
        }
        out << '\n';
    }
    return out.str();
}

std::vector<Word> suite_from_text(const std::string& text,
                                  const std::vector<std::string>& input_names) {
    std::vector<Word> suite;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string sym;
        Word w;
        while (ls >> sym) {
            auto it = std::find(input_names.begin(), input_names.end(), sym);
            if (it == input_names.end())
                throw std::invalid_argument("suite: unknown input symbol '" + sym + "'");
            w.push_back(static_cast<Symbol>(it - input_names.begin()));
        }
        suite.push_back(std::move(w));
    }
    return suite;
}

void save_suite(const std::vector<Word>& suite, const std::vector<std::string>& input_names,
                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write suite file: " + path);
    out << suite_to_text(suite, input_names);
}

std::vector<Word> load_suite(const std::vector<std::string>& input_names,
                             const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open suite file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return suite_from_text(buf.str(), input_names);
}

} // namespace platoonlab
