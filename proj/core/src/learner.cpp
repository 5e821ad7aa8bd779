#include "platoonlab/learner.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "platoonlab/testgen.hpp"

namespace platoonlab {

Teacher::Teacher(std::vector<std::string> input_names, std::vector<std::string> output_names,
                 std::uint64_t budget, std::optional<Symbol> collision_symbol)
    : input_names_(std::move(input_names)),
      output_names_(std::move(output_names)),
      budget_(budget),
      collision_symbol_(collision_symbol) {}

Word Teacher::query(const Word& inputs) {
    if (auto hit = precached(inputs)) return *hit;
    if (executed_.size() >= budget_) throw budget_exhausted{};
    Word out = do_query(inputs);
    executed_.push_back(inputs);
    if (collision_symbol_ &&
        std::find(out.begin(), out.end(), *collision_symbol_) != out.end())
        ++collisions_;
    return out;
}

MachineTeacher::MachineTeacher(const MealyMachine& target, std::uint64_t budget,
                               std::optional<Symbol> collision_symbol)
    : Teacher(target.input_names(), target.output_names(), budget, collision_symbol),
      target_(target) {}

HarnessTeacher::HarnessTeacher(SulHarness& harness, std::uint64_t budget,
                               std::optional<Symbol> collision_symbol)
    : Teacher(harness.alphabet().inputs, harness.alphabet().outputs, budget, collision_symbol),
      harness_(harness) {}

DiscriminationTree::DiscriminationTree() {
    Node root;
    root.leaf = true;
    root.state_id = 0;
    nodes_.push_back(std::move(root));
    leaf_of_state_.push_back(0);
}

int DiscriminationTree::find_child(int node, const Word& label) const {
    const auto& ch = nodes_[node].children;
    auto it = std::lower_bound(ch.begin(), ch.end(), label,
                               [](const auto& p, const Word& l) { return p.first < l; });
    if (it == ch.end() || it->first != label) return -1;
    return it->second;
}

int DiscriminationTree::add_child(int node, const Word& label, Word access) {
    Node leaf;
    leaf.leaf = true;
    leaf.access = std::move(access);
    leaf.state_id = static_cast<int>(leaf_of_state_.size());
    leaf.parent = node;
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(leaf));
    leaf_of_state_.push_back(idx);
    auto& ch = nodes_[node].children;
    ch.insert(std::lower_bound(ch.begin(), ch.end(), label,
                               [](const auto& p, const Word& l) { return p.first < l; }),
              {label, idx});
    return nodes_[idx].state_id;
}

int DiscriminationTree::sift(const Word& word, const Ask& ask) {
    int n = 0;
    while (!nodes_[n].leaf) {
        Word q = word;
        q.insert(q.end(), nodes_[n].suffix.begin(), nodes_[n].suffix.end());
        Word out = ask(q);
        Word label(out.end() - static_cast<std::ptrdiff_t>(nodes_[n].suffix.size()), out.end());
        int c = find_child(n, label);
        if (c < 0) return add_child(n, label, word);
        n = c;
    }
    return nodes_[n].state_id;
}

int DiscriminationTree::split_leaf(int state, Word suffix, const Word& old_label,
                                   const Word& new_label, Word new_access) {
    if (suffix.empty()) throw std::logic_error("discrimination tree: empty suffix");
    if (old_label == new_label)
        throw std::logic_error("discrimination tree: labels do not distinguish");
    int n = leaf_of_state_[static_cast<std::size_t>(state)];

    Node old_leaf;
    old_leaf.leaf = true;
    old_leaf.access = std::move(nodes_[n].access);
    old_leaf.state_id = state;
    old_leaf.parent = n;
    int old_idx = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(old_leaf));
    leaf_of_state_[static_cast<std::size_t>(state)] = old_idx;

    Node new_leaf;
    new_leaf.leaf = true;
    new_leaf.access = std::move(new_access);
    new_leaf.state_id = static_cast<int>(leaf_of_state_.size());
    new_leaf.parent = n;
    int new_idx = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(new_leaf));
    leaf_of_state_.push_back(new_idx);

    nodes_[n].leaf = false;
    nodes_[n].suffix = std::move(suffix);
    nodes_[n].access.clear();
    nodes_[n].state_id = -1;
    nodes_[n].children.clear();
    nodes_[n].children.push_back({old_label, old_idx});
    nodes_[n].children.push_back({new_label, new_idx});
    std::sort(nodes_[n].children.begin(), nodes_[n].children.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return nodes_[new_idx].state_id;
}

const Word& DiscriminationTree::access(int state) const {
    return nodes_[static_cast<std::size_t>(leaf_of_state_.at(static_cast<std::size_t>(state)))]
        .access;
}

const Word& DiscriminationTree::separator(int state_a, int state_b) const {
    std::vector<int> up_a;
    for (int n = leaf_of_state_.at(static_cast<std::size_t>(state_a)); n >= 0;
         n = nodes_[n].parent)
        up_a.push_back(n);
    for (int n = leaf_of_state_.at(static_cast<std::size_t>(state_b)); n >= 0;
         n = nodes_[n].parent) {
        if (std::find(up_a.begin(), up_a.end(), n) != up_a.end() && !nodes_[n].leaf)
            return nodes_[n].suffix;
    }
    throw std::logic_error("discrimination tree: no common ancestor");
}

namespace {

/// One learning session: the learner-side query cache, the tree and the
/// hypothesis construction. The cache both deduplicates queries and detects
/// teacher nondeterminism (conflicting answers on a shared prefix).
class Session {
public:
    explicit Session(Teacher& teacher)
        : teacher_(teacher), ask_([this](const Word& w) { return this->ask(w); }) {}

    Word ask(const Word& w) {
        if (auto hit = cache_.lookup(w)) return *hit;
        Word out = teacher_.query(w);
        cache_.insert(w, out);
        return out;
    }

    const DiscriminationTree::Ask& ask_fn() const { return ask_; }

    MealyMachine build() {
        const int ni = static_cast<int>(teacher_.input_names().size());
        std::vector<std::vector<std::pair<int, Symbol>>> rows;
        for (int q = 0; q < tree_.num_states(); ++q) {
            if (static_cast<int>(rows.size()) < tree_.num_states())
                rows.resize(static_cast<std::size_t>(tree_.num_states()));
            rows[static_cast<std::size_t>(q)].resize(static_cast<std::size_t>(ni));
            for (int i = 0; i < ni; ++i) {
                Word w = tree_.access(q);
                w.push_back(i);
                Symbol lambda = ask(w).back();
                int target = tree_.sift(w, ask_);
                rows[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] = {target, lambda};
            }
        }
        const int initial = tree_.sift(Word{}, ask_);
        MealyMachine hyp(teacher_.input_names(), teacher_.output_names(), tree_.num_states(),
                         initial);
        for (int q = 0; q < static_cast<int>(rows.size()); ++q)
            for (int i = 0; i < ni; ++i) {
                auto [t, o] = rows[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)];
                hyp.set_transition(q, i, t, o);
            }
        hyp.validate();
        return hyp;
    }

    /// Rivest-Schapire: binary-search the counterexample for the earliest
    /// point where replacing the executed prefix by its hypothesis access
    /// sequence changes the final output, and split that transition's
    /// target leaf with the remaining suffix.
    void process_counterexample(Word ce, const MealyMachine& hyp) {
        Word sul_out = ask(ce);
        Word hyp_out = run(hyp, ce).outputs;
        std::size_t p = 0;
        while (p < ce.size() && sul_out[p] == hyp_out[p]) ++p;
        if (p == ce.size()) return; // spurious counterexample
        ce.resize(p + 1);
        const std::size_t m = p + 1;
        if (m < 2)
            throw std::logic_error("learner: divergence on a single-input query");

        std::vector<int> states(m + 1);
        states[0] = hyp.initial_state();
        for (std::size_t k = 0; k < m; ++k)
            states[k + 1] = hyp.next_state(states[k], ce[k]);

        auto out_at = [&](std::size_t k) -> Symbol {
            Word w = tree_.access(states[k]);
            w.insert(w.end(), ce.begin() + static_cast<std::ptrdiff_t>(k), ce.end());
            return ask(w).back();
        };

        const Symbol ref = out_at(0);
        std::size_t lo = 0, hi = m - 1;
        while (hi - lo > 1) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (out_at(mid) == ref)
                lo = mid;
            else
                hi = mid;
        }

        const std::size_t k = lo;
        const int old_state = states[k + 1];
        Word new_access = tree_.access(states[k]);
        new_access.push_back(ce[k]);
        Word suffix(ce.begin() + static_cast<std::ptrdiff_t>(k) + 1, ce.end());

        Word ask_old = tree_.access(old_state);
        ask_old.insert(ask_old.end(), suffix.begin(), suffix.end());
        Word out_old = ask(ask_old);
        Word label_old(out_old.end() - static_cast<std::ptrdiff_t>(suffix.size()),
                       out_old.end());

        Word ask_new = new_access;
        ask_new.insert(ask_new.end(), suffix.begin(), suffix.end());
        Word out_new = ask(ask_new);
        Word label_new(out_new.end() - static_cast<std::ptrdiff_t>(suffix.size()),
                       out_new.end());

        tree_.split_leaf(old_state, std::move(suffix), label_old, label_new,
                         std::move(new_access));
    }

private:
    Teacher& teacher_;
    QueryCache cache_;
    DiscriminationTree tree_;
    DiscriminationTree::Ask ask_;
};

} // namespace

std::optional<Word> ExactOracle::find_counterexample(const MealyMachine& hypothesis,
                                                     const std::function<Word(const Word&)>&) {
    return separating_sequence(hypothesis, target_);
}

CoverageTestingOracle::CoverageTestingOracle(int tests_per_round, std::uint64_t seed, int l_max,
                                             bool persistent)
    : tests_per_round_(tests_per_round), l_max_(l_max), persistent_(persistent), rng_(seed) {}

std::optional<Word> CoverageTestingOracle::find_counterexample(
    const MealyMachine& hypothesis, const std::function<Word(const Word&)>& ask) {
    auto check = [&](const Word& w) -> std::optional<Word> {
        Word sul_out = ask(w);
        Word hyp_out = run(hypothesis, w).outputs;
        for (std::size_t p = 0; p < w.size(); ++p) {
            if (sul_out[p] != hyp_out[p])
                return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p) + 1);
        }
        return std::nullopt;
    };
    for (;;) {
        StrategyConfig cfg;
        cfg.strategy = Strategy::TransitionCoverage;
        cfg.n_train = tests_per_round_;
        cfg.generation_batch = tests_per_round_;
        cfg.l_max = l_max_;
        cfg.seed = rng_.next();
        for (const Word& w : gen_transition_coverage(cfg, hypothesis)) {
            if (auto ce = check(w)) return ce;
        }
        if (!persistent_) return std::nullopt;
        ++escalation_;
        Word forced;
        const int len = l_max_ + escalation_;
        for (int k = 0; k < len; ++k)
            forced.push_back(static_cast<Symbol>(
                rng_.bounded(static_cast<std::uint64_t>(hypothesis.num_inputs()))));
        if (auto ce = check(forced)) return ce;
    }
}

LearnResult learn(Teacher& teacher, EquivalenceOracle& oracle) {
    Session session(teacher);
    LearnLog log;
    MealyMachine hypothesis;
    try {
        hypothesis = session.build();
    } catch (const budget_exhausted&) {
        throw std::invalid_argument("learner: budget too small for the initial hypothesis");
    }

    auto record = [&](int round) {
        log.rounds.push_back(LearnRound{round, hypothesis.num_states(),
                                        teacher.executed().size(), teacher.collisions()});
    };

    int round = 1;
    record(round);
    try {
        for (;;) {
            auto ce = oracle.find_counterexample(hypothesis, session.ask_fn());
            if (!ce) break;
            session.process_counterexample(*ce, hypothesis);
            hypothesis = session.build();
            record(++round);
        }
    } catch (const budget_exhausted&) {
        log.stopped_by_budget = true;
    }
    log.total_tests = teacher.executed().size();
    log.collisions = teacher.collisions();
    return LearnResult{std::move(hypothesis), std::move(log)};
}

LearnResult learn_from_harness(SulHarness& harness, const LearnerBudget& budget,
                               std::optional<Symbol> collision_symbol, int l_max) {
    if (budget.max_total_tests == 0)
        throw std::invalid_argument("learner: max_total_tests must be positive");
    HarnessTeacher teacher(harness, budget.max_total_tests, collision_symbol);
    CoverageTestingOracle oracle(budget.eq_tests_per_round, budget.seed, l_max,
                                 /*persistent=*/true);
    return learn(teacher, oracle);
}

std::string learn_log_to_csv(const LearnLog& log) {
    std::ostringstream out;
    out << "round,states,total_tests,collisions\n";
    for (const auto& r : log.rounds)
        out << r.round << "," << r.states << "," << r.total_tests << "," << r.collisions << "\n";
    return out.str();
}

} // namespace platoonlab
