/*
 * mapper - abstraction layer between abstract test alphabets and the plant.
 *
 * Concretizes abstract input symbols to (acceleration, duration) pairs,
 * classifies sampled outputs into abstract output symbols with absorbing
 * violation semantics, caches abstract queries in a prefix tree and exposes
 * the plant as a Mealy-style oracle: one abstract output per abstract input.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/mealy.hpp"
#include "platoonlab/plant.hpp"
#include "platoonlab/util.hpp"

namespace platoonlab {

/// Thrown when the same abstract query produces two different answers. The
/// plant is deterministic by construction, so this always indicates a bug.
class nondeterminism_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AbstractAlphabet {
    struct Concretization {
        double acc = 0;   // m/s^2
        int duration = 1; // sampling steps
    };

    std::vector<std::string> inputs;
    std::vector<Concretization> conc; // one per input symbol
    std::vector<std::string> outputs;
    std::vector<Symbol> violations;        // indices into outputs
    Symbol reverse_output = -1;            // emitted when v_l < 0
    std::vector<double> distance_bounds;   // ascending thresholds, meters
    std::vector<Symbol> distance_outputs;  // size = bounds + 1, lowest range first

    int num_inputs() const { return static_cast<int>(inputs.size()); }
    int num_outputs() const { return static_cast<int>(outputs.size()); }
    bool is_violation(Symbol o) const;
    Symbol input_index(const std::string& name) const;
    Symbol output_index(const std::string& name) const;

    /// Distance classification only (ignores the reverse rule and latch).
    Symbol classify_distance(double d) const;

    void validate() const;
    static AbstractAlphabet from_kv(const KvFile& kv);
    static AbstractAlphabet load(const std::string& path);
    KvFile to_kv() const;
};

/// The stateful half of output abstraction: once a violation symbol is
/// produced, every later sample maps to that same symbol until reset.
class Mapper {
public:
    void reset() { latched_.reset(); }
    std::optional<Symbol> latched() const { return latched_; }

    Symbol abstract_output(const SampleRecord& sample, const AbstractAlphabet& alphabet);

private:
    std::optional<Symbol> latched_;
};

/// Prefix tree over abstract input words; every node stores the abstract
/// output of its prefix. Serves whole-query hits only.
class QueryCache {
public:
    QueryCache() : nodes_(1) {}

    /// Output word iff the entire query is cached.
    std::optional<Word> lookup(const Word& query) const;

    /// Records an observation; throws nondeterminism_error when a stored
    /// output disagrees with the new one.
    void insert(const Word& query, const Word& outputs);

    std::size_t node_count() const { return nodes_.size() - 1; }

private:
    struct Node {
        Symbol out = -1;
        std::vector<std::pair<Symbol, int>> children; // sorted by symbol
    };
    int child(int node, Symbol s) const;
    std::vector<Node> nodes_;
};

/// Everything observed while executing one abstract test on the plant.
struct ConcreteTrace {
    Word abstract_inputs;
    Word abstract_outputs;
    std::vector<SampleRecord> rows; // one per sampling period
    PlantState final_state;
    std::uint64_t curve_seed = 0;
};

/// The system under learning, viewed through the mapper: reset, concretize,
/// execute, abstract. Per-query orientation scripts are derived from the
/// query content, so identical queries produce identical traces.
class SulHarness {
public:
    SulHarness(PlantConfig plant_cfg, AbstractAlphabet alphabet, bool use_cache = true);

    const AbstractAlphabet& alphabet() const { return alphabet_; }
    const PlantConfig& plant_config() const { return plant_cfg_; }

    /// Abstract output word for an abstract input word. Serves fully cached
    /// queries without touching the plant; otherwise executes from reset.
    Word query(const Word& inputs);

    /// Cache lookup only (no execution).
    std::optional<Word> cached(const Word& inputs) const;

    /// Unconditional concrete execution that also returns the full trace.
    /// Updates the cache and counters like any other execution.
    Word execute(const Word& inputs, ConcreteTrace* trace);

    /// Number of concrete (non-cached) test executions so far.
    std::uint64_t concrete_runs() const { return concrete_runs_; }

private:
    PlantConfig plant_cfg_;
    AbstractAlphabet alphabet_;
    bool use_cache_;
    QueryCache cache_;
    std::uint64_t concrete_runs_ = 0;
};

/// CSV with header t_ms,acc,delta,v_l,v_f,d (the plant trace format).
std::string rows_to_csv(const std::vector<SampleRecord>& rows);

/// Plant trace format plus abstract_in,abstract_out columns; each sampling
/// period carries the abstract input it belongs to and that input's output.
std::string trace_to_csv(const ConcreteTrace& trace, const AbstractAlphabet& alphabet);

} // namespace platoonlab
