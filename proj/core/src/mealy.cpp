#include "platoonlab/mealy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace platoonlab {

MealyMachine::MealyMachine(std::vector<std::string> inputs, std::vector<std::string> outputs,
                           int num_states, int initial)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      num_states_(num_states),
      initial_(initial) {
    if (num_states_ <= 0) throw std::invalid_argument("mealy: need at least one state");
    if (inputs_.empty()) throw std::invalid_argument("mealy: empty input alphabet");
    if (outputs_.empty()) throw std::invalid_argument("mealy: empty output alphabet");
    if (initial_ < 0 || initial_ >= num_states_)
        throw std::invalid_argument("mealy: initial state out of range");
    next_.assign(static_cast<std::size_t>(num_states_) * inputs_.size(), -1);
    out_.assign(next_.size(), -1);
}

std::size_t MealyMachine::index(int state, Symbol input) const {
    if (state < 0 || state >= num_states_)
        throw std::invalid_argument("mealy: state out of range");
    if (input < 0 || input >= num_inputs())
        throw std::invalid_argument("mealy: unknown input symbol");
    return static_cast<std::size_t>(state) * inputs_.size() + static_cast<std::size_t>(input);
}

void MealyMachine::set_transition(int state, Symbol input, int target, Symbol output) {
    if (target < 0 || target >= num_states_)
        throw std::invalid_argument("mealy: transition target out of range");
    if (output < 0 || output >= num_outputs())
        throw std::invalid_argument("mealy: output symbol out of range");
    std::size_t k = index(state, input);
    next_[k] = target;
    out_[k] = output;
}

int MealyMachine::run_state(int state, const Word& word) const {
    int q = state;
    for (Symbol i : word) q = next_state(q, i);
    return q;
}

void MealyMachine::validate() const {
    for (int q = 0; q < num_states_; ++q) {
        for (int i = 0; i < num_inputs(); ++i) {
            std::size_t k = static_cast<std::size_t>(q) * inputs_.size() + i;
            if (next_[k] < 0 || next_[k] >= num_states_)
                throw std::invalid_argument("mealy: transition table not total");
            if (out_[k] < 0 || out_[k] >= num_outputs())
                throw std::invalid_argument("mealy: output table not total");
        }
    }
}

Symbol MealyMachine::input_index(const std::string& name) const {
    auto it = std::find(inputs_.begin(), inputs_.end(), name);
    if (it == inputs_.end()) throw std::invalid_argument("mealy: unknown input '" + name + "'");
    return static_cast<Symbol>(it - inputs_.begin());
}

Symbol MealyMachine::output_index(const std::string& name) const {
    auto it = std::find(outputs_.begin(), outputs_.end(), name);
    if (it == outputs_.end()) throw std::invalid_argument("mealy: unknown output '" + name + "'");
    return static_cast<Symbol>(it - outputs_.begin());
}

Observation run(const MealyMachine& m, const Word& inputs) {
    Observation obs;
    obs.inputs = inputs;
    obs.outputs.reserve(inputs.size());
    int q = m.initial_state();
    for (Symbol i : inputs) {
        obs.outputs.push_back(m.output(q, i));
        q = m.next_state(q, i);
    }
    return obs;
}

namespace {

// Backward-pointer BFS over the transition graph. parent[q] = (state, input)
// edge that first discovered q. Inputs are scanned in alphabet order, so the
// discovery order (and therefore every reconstructed path) is deterministic.
struct BfsResult {
    std::vector<int> parent_state;
    std::vector<Symbol> parent_input;
    std::vector<int> order; // states in discovery order
};

BfsResult bfs(const MealyMachine& m, int from) {
    BfsResult r;
    r.parent_state.assign(m.num_states(), -1);
    r.parent_input.assign(m.num_states(), -1);
    std::vector<char> seen(m.num_states(), 0);
    std::deque<int> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        int q = queue.front();
        queue.pop_front();
        r.order.push_back(q);
        for (int i = 0; i < m.num_inputs(); ++i) {
            int t = m.next_state(q, i);
            if (!seen[t]) {
                seen[t] = 1;
                r.parent_state[t] = q;
                r.parent_input[t] = i;
                queue.push_back(t);
            }
        }
    }
    return r;
}

Word reconstruct(const BfsResult& r, int from, int to) {
    Word path;
    for (int q = to; q != from; q = r.parent_state[q]) path.push_back(r.parent_input[q]);
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace

std::optional<Word> path_to_state(const MealyMachine& m, int from, int to) {
    if (from < 0 || from >= m.num_states() || to < 0 || to >= m.num_states())
        throw std::invalid_argument("path_to_state: state out of range");
    if (from == to) return Word{};
    BfsResult r = bfs(m, from);
    if (r.parent_state[to] < 0) return std::nullopt;
    return reconstruct(r, from, to);
}

std::optional<Word> path_to_label(const MealyMachine& m, int from, Symbol label) {
    if (from < 0 || from >= m.num_states())
        throw std::invalid_argument("path_to_label: state out of range");
    if (label < 0 || label >= m.num_outputs())
        throw std::invalid_argument("path_to_label: output symbol out of range");
    // States come out of the BFS in distance order, so the first emitting
    // edge found extends a shortest path.
    BfsResult r = bfs(m, from);
    for (int q : r.order) {
        for (int i = 0; i < m.num_inputs(); ++i) {
            if (m.output(q, i) == label) {
                Word path = reconstruct(r, from, q);
                path.push_back(i);
                return path;
            }
        }
    }
    return std::nullopt;
}

std::optional<Word> separating_sequence(const MealyMachine& m1, const MealyMachine& m2) {
    if (m1.input_names() != m2.input_names())
        throw std::invalid_argument("separating_sequence: input alphabets differ");
    const int n2 = m2.num_states();
    auto pair_id = [n2](int a, int b) { return a * n2 + b; };
    std::vector<int> parent_pair(static_cast<std::size_t>(m1.num_states()) * n2, -1);
    std::vector<Symbol> parent_input(parent_pair.size(), -1);
    std::vector<char> seen(parent_pair.size(), 0);
    const int start = pair_id(m1.initial_state(), m2.initial_state());
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
        int p = queue.front();
        queue.pop_front();
        int a = p / n2, b = p % n2;
        for (int i = 0; i < m1.num_inputs(); ++i) {
            if (m1.output_names()[m1.output(a, i)] != m2.output_names()[m2.output(b, i)]) {
                Word w{i};
                for (int cur = p; cur != start; cur = parent_pair[cur])
                    w.push_back(parent_input[cur]);
                std::reverse(w.begin(), w.end());
                return w;
            }
            int t = pair_id(m1.next_state(a, i), m2.next_state(b, i));
            if (!seen[t]) {
                seen[t] = 1;
                parent_pair[t] = p;
                parent_input[t] = i;
                queue.push_back(t);
            }
        }
    }
    return std::nullopt;
}

std::string to_dot(const MealyMachine& m) {
    std::ostringstream out;
    out << "digraph mealy {\n  rankdir=LR;\n  node [shape=circle];\n";
    out << "  __start [shape=point];\n  __start -> q" << m.initial_state() << ";\n";
    for (int q = 0; q < m.num_states(); ++q) {
        for (int i = 0; i < m.num_inputs(); ++i) {
            out << "  q" << q << " -> q" << m.next_state(q, i) << " [label=\""
                << m.input_names()[i] << "/" << m.output_names()[m.output(q, i)] << "\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

std::string to_text(const MealyMachine& m) {
    std::ostringstream out;
    out << "mealy " << m.num_states() << " " << m.num_inputs() << " " << m.num_outputs() << " "
        << m.initial_state() << "\n";
    out << "inputs";
    for (const auto& s : m.input_names()) out << " " << s;
    out << "\noutputs";
    for (const auto& s : m.output_names()) out << " " << s;
    out << "\n";
    for (int q = 0; q < m.num_states(); ++q)
        for (int i = 0; i < m.num_inputs(); ++i)
            out << q << " " << i << " " << m.next_state(q, i) << " " << m.output(q, i) << "\n";
    return out.str();
}

MealyMachine mealy_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int nq = 0, ni = 0, no = 0, q0 = 0;
    if (!(in >> tag >> nq >> ni >> no >> q0) || tag != "mealy")
        throw std::invalid_argument("mealy: malformed header");
    std::string kw, name;
    std::vector<std::string> inputs, outputs;
    if (!(in >> kw) || kw != "inputs") throw std::invalid_argument("mealy: missing inputs line");
    for (int i = 0; i < ni; ++i) {
        if (!(in >> name)) throw std::invalid_argument("mealy: truncated inputs line");
        inputs.push_back(name);
    }
    if (!(in >> kw) || kw != "outputs") throw std::invalid_argument("mealy: missing outputs line");
    for (int i = 0; i < no; ++i) {
        if (!(in >> name)) throw std::invalid_argument("mealy: truncated outputs line");
        outputs.push_back(name);
    }
    MealyMachine m(std::move(inputs), std::move(outputs), nq, q0);
    int q, i, t, o;
    while (in >> q >> i >> t >> o) m.set_transition(q, i, t, o);
    m.validate();
    return m;
}

void save_mealy(const MealyMachine& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write machine file: " + path);
    out << to_text(m);
}

MealyMachine load_mealy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open machine file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return mealy_from_text(buf.str());
}

} // namespace platoonlab
