/*
 * Test-only oracles, deliberately written with different data structures
 * and algorithms than the library so they can stand as independent checks:
 * a map-based Mealy interpreter, word-enumeration searches, an exhaustive
 * equivalence check, scalar-loop network forward passes and a
 * finite-difference gradient.
 */

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "platoonlab/mealy.hpp"
#include "platoonlab/rnn.hpp"
#include "platoonlab/util.hpp"

namespace oracle {

using platoonlab::MealyMachine;
using platoonlab::Symbol;
using platoonlab::Word;

/// Step-by-step interpreter over an edge map (not the library's tables).
class NaiveInterpreter {
public:
    explicit NaiveInterpreter(const MealyMachine& m) {
        for (int q = 0; q < m.num_states(); ++q)
            for (int i = 0; i < m.num_inputs(); ++i)
                edges_[{q, i}] = {m.next_state(q, i), m.output(q, i)};
        state_ = m.initial_state();
    }
    Word feed(const Word& inputs) {
        Word out;
        for (Symbol i : inputs) {
            auto [next, o] = edges_.at({state_, i});
            out.push_back(o);
            state_ = next;
        }
        return out;
    }

private:
    std::map<std::pair<int, int>, std::pair<int, Symbol>> edges_;
    int state_;
};

/// All words over [0, n_symbols) of the given length, in lexicographic
/// order.
inline std::vector<Word> all_words(int n_symbols, int length) {
    std::vector<Word> words{Word{}};
    for (int l = 0; l < length; ++l) {
        std::vector<Word> next;
        for (const Word& w : words)
            for (Symbol s = 0; s < n_symbols; ++s) {
                Word e = w;
                e.push_back(s);
                next.push_back(std::move(e));
            }
        words = std::move(next);
    }
    return words;
}

/// Shortest word driving m from `from` to `to`, by brute-force enumeration
/// of all words of increasing length.
inline std::optional<Word> brute_path_to_state(const MealyMachine& m, int from, int to,
                                               int max_len) {
    for (int len = 0; len <= max_len; ++len) {
        for (const Word& w : all_words(m.num_inputs(), len)) {
            int q = from;
            for (Symbol i : w) q = m.next_state(q, i);
            if (q == to) return w;
        }
    }
    return std::nullopt;
}

/// Shortest word from `from` whose final output is `label`, brute force.
inline std::optional<Word> brute_path_to_label(const MealyMachine& m, int from, Symbol label,
                                               int max_len) {
    for (int len = 1; len <= max_len; ++len) {
        for (const Word& w : all_words(m.num_inputs(), len)) {
            int q = from;
            Symbol last = -1;
            for (Symbol i : w) {
                last = m.output(q, i);
                q = m.next_state(q, i);
            }
            if (last == label) return w;
        }
    }
    return std::nullopt;
}

/// Exhaustive comparison of outputs on every word up to max_len.
inline std::optional<Word> brute_separating(const MealyMachine& a, const MealyMachine& b,
                                            int max_len) {
    for (int len = 1; len <= max_len; ++len) {
        for (const Word& w : all_words(a.num_inputs(), len)) {
            auto oa = platoonlab::run(a, w).outputs;
            auto ob = platoonlab::run(b, w).outputs;
            std::vector<std::string> na, nb;
            for (Symbol s : oa) na.push_back(a.output_names()[s]);
            for (Symbol s : ob) nb.push_back(b.output_names()[s]);
            if (na != nb) return w;
        }
    }
    return std::nullopt;
}

/// Random machine over shared alphabets; all entries drawn uniformly.
inline MealyMachine random_machine(int states, int inputs, int outputs, std::uint64_t seed) {
    std::vector<std::string> in, out;
    for (int i = 0; i < inputs; ++i) in.push_back("i" + std::to_string(i));
    for (int o = 0; o < outputs; ++o) out.push_back("o" + std::to_string(o));
    MealyMachine m(in, out, states, 0);
    platoonlab::Rng rng(seed);
    for (int q = 0; q < states; ++q)
        for (int i = 0; i < inputs; ++i)
            m.set_transition(q, i,
                             static_cast<int>(rng.bounded(static_cast<std::uint64_t>(states))),
                             static_cast<Symbol>(rng.bounded(static_cast<std::uint64_t>(outputs))));
    m.validate();
    return m;
}

/// The 2-state toggle machine: one input, outputs 0 then 1 alternating.
inline MealyMachine toggle_machine() {
    MealyMachine m({"a"}, {"0", "1"}, 2, 0);
    m.set_transition(0, 0, 1, 0);
    m.set_transition(1, 0, 0, 1);
    m.validate();
    return m;
}

/// One-state machine emitting a constant output.
inline MealyMachine constant_machine(const std::vector<std::string>& inputs,
                                     const std::vector<std::string>& outputs, Symbol emitted) {
    MealyMachine m(inputs, outputs, 1, 0);
    for (int i = 0; i < m.num_inputs(); ++i) m.set_transition(0, i, 0, emitted);
    m.validate();
    return m;
}

/// Scalar-loop reference forward passes (no Eigen, no batching).
inline platoonlab::OutputSeq reference_forward(const platoonlab::RnnParams& p,
                                               const platoonlab::InputSeq& x) {
    const int dh = p.d_h;
    std::vector<double> h(static_cast<std::size_t>(dh), 0.0);
    std::vector<double> c(static_cast<std::size_t>(dh), 0.0);
    platoonlab::OutputSeq ys;
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    for (const auto& xt : x) {
        const int gr = p.gate_rows();
        std::vector<double> z(static_cast<std::size_t>(gr), 0.0);
        for (int r = 0; r < gr; ++r) {
            double s = p.b_h[static_cast<std::size_t>(r)];
            for (int k = 0; k < p.d_x; ++k)
                s += p.w_x[static_cast<std::size_t>(r * p.d_x + k)] *
                     xt[static_cast<std::size_t>(k)];
            for (int k = 0; k < dh; ++k)
                s += p.w_h[static_cast<std::size_t>(r * dh + k)] * h[static_cast<std::size_t>(k)];
            z[static_cast<std::size_t>(r)] = s;
        }
        if (p.mode == platoonlab::RnnMode::Plain) {
            for (int k = 0; k < dh; ++k)
                h[static_cast<std::size_t>(k)] = std::tanh(z[static_cast<std::size_t>(k)]);
        } else {
            for (int k = 0; k < dh; ++k) {
                double ig = sig(z[static_cast<std::size_t>(k)]);
                double fg = sig(z[static_cast<std::size_t>(dh + k)]);
                double og = sig(z[static_cast<std::size_t>(2 * dh + k)]);
                double gg = std::tanh(z[static_cast<std::size_t>(3 * dh + k)]);
                c[static_cast<std::size_t>(k)] = fg * c[static_cast<std::size_t>(k)] + ig * gg;
                h[static_cast<std::size_t>(k)] = og * std::tanh(c[static_cast<std::size_t>(k)]);
            }
        }
        std::array<double, 3> y{};
        for (int r = 0; r < p.d_y; ++r) {
            double s = p.b_y[static_cast<std::size_t>(r)];
            for (int k = 0; k < dh; ++k)
                s += p.w_y[static_cast<std::size_t>(r * dh + k)] * h[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(r)] = s;
        }
        ys.push_back(y);
    }
    return ys;
}

/// Central finite difference of mse_loss with respect to one coordinate of
/// one tensor.
inline double fd_gradient(platoonlab::RnnParams p,
                          const std::vector<const platoonlab::RawSequencePair*>& batch,
                          std::vector<double> platoonlab::RnnParams::* tensor, std::size_t k,
                          double step = 1e-5) {
    (p.*tensor)[k] += step;
    double up = platoonlab::mse_loss(p, batch);
    (p.*tensor)[k] -= 2 * step;
    double down = platoonlab::mse_loss(p, batch);
    return (up - down) / (2 * step);
}

} // namespace oracle
