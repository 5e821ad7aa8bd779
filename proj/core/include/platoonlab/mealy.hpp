/*
 * mealy - deterministic Mealy machines over ordered finite alphabets.
 *
 * States are dense integer indices, alphabets are ordered lists of symbol
 * names, and the transition/output functions are stored as flat tables.
 * All searches visit inputs in alphabet order, which makes every result
 * of the path and equivalence queries deterministic.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace platoonlab {

/// Index into an alphabet (input or output, depending on context).
using Symbol = int;
/// A sequence of symbols.
using Word = std::vector<Symbol>;

/// An input/output sequence pair of equal length.
struct Observation {
    Word inputs;
    Word outputs;
};

class MealyMachine {
public:
    MealyMachine() = default;
    /// Creates a machine with all transitions unset; fill with set_transition
    /// and call validate() before use.
    MealyMachine(std::vector<std::string> inputs, std::vector<std::string> outputs,
                 int num_states, int initial);

    int num_states() const { return num_states_; }
    int num_inputs() const { return static_cast<int>(inputs_.size()); }
    int num_outputs() const { return static_cast<int>(outputs_.size()); }
    int initial_state() const { return initial_; }
    const std::vector<std::string>& input_names() const { return inputs_; }
    const std::vector<std::string>& output_names() const { return outputs_; }

    void set_transition(int state, Symbol input, int target, Symbol output);
    int next_state(int state, Symbol input) const { return next_[index(state, input)]; }
    Symbol output(int state, Symbol input) const { return out_[index(state, input)]; }

    /// State reached from `state` by the input word.
    int run_state(int state, const Word& word) const;

    /// Throws std::invalid_argument unless both tables are total and every
    /// target state is in range.
    void validate() const;

    Symbol input_index(const std::string& name) const;
    Symbol output_index(const std::string& name) const;

private:
    std::size_t index(int state, Symbol input) const;

    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    int num_states_ = 0;
    int initial_ = 0;
    std::vector<int> next_;
    std::vector<Symbol> out_;
};

/// Executes the machine on an input word from the initial state and returns
/// the full observation. Throws std::invalid_argument on an out-of-range
/// input symbol.
Observation run(const MealyMachine& m, const Word& inputs);

/// Shortest input word driving the machine from `from` to `to`; ties broken
/// by alphabet order. Empty word when from == to. nullopt when unreachable.
std::optional<Word> path_to_state(const MealyMachine& m, int from, int to);

/// Shortest input word from `from` whose final transition emits `label`;
/// ties broken by alphabet order. nullopt when no such transition is
/// reachable.
std::optional<Word> path_to_label(const MealyMachine& m, int from, Symbol label);

/// Minimal-length input word on which the two machines produce different
/// outputs, found by breadth-first search of the product machine; nullopt
/// when the machines are observation equivalent. Throws
/// std::invalid_argument when the input alphabets differ.
std::optional<Word> separating_sequence(const MealyMachine& m1, const MealyMachine& m2);

inline bool observation_equivalent(const MealyMachine& m1, const MealyMachine& m2) {
    return !separating_sequence(m1, m2).has_value();
}

/// GraphViz DOT text, one edge per (state, input) labeled "input/output",
/// states and inputs in ascending order.
std::string to_dot(const MealyMachine& m);

/// Line-oriented text format:
///   mealy |Q| |I| |O| q0
///   inputs <name>...
///   outputs <name>...
///   q i delta(q,i) lambda(q,i)     (one line per pair, all indices)
std::string to_text(const MealyMachine& m);
MealyMachine mealy_from_text(const std::string& text);

void save_mealy(const MealyMachine& m, const std::string& path);
MealyMachine load_mealy(const std::string& path);

} // namespace platoonlab
