#include "platoonlab/mapper.hpp"

#include <algorithm>
#include <sstream>

namespace platoonlab {

bool AbstractAlphabet::is_violation(Symbol o) const {
    return std::find(violations.begin(), violations.end(), o) != violations.end();
}

Symbol AbstractAlphabet::input_index(const std::string& name) const {
    auto it = std::find(inputs.begin(), inputs.end(), name);
    if (it == inputs.end())
        throw std::invalid_argument("alphabet: unknown input symbol '" + name + "'");
    return static_cast<Symbol>(it - inputs.begin());
}

Symbol AbstractAlphabet::output_index(const std::string& name) const {
    auto it = std::find(outputs.begin(), outputs.end(), name);
    if (it == outputs.end())
        throw std::invalid_argument("alphabet: unknown output symbol '" + name + "'");
    return static_cast<Symbol>(it - outputs.begin());
}

Symbol AbstractAlphabet::classify_distance(double d) const {
    std::size_t k = 0;
    while (k < distance_bounds.size() && d >= distance_bounds[k]) ++k;
    return distance_outputs[k];
}

void AbstractAlphabet::validate() const {
    if (inputs.empty()) throw std::invalid_argument("alphabet: no input symbols");
    if (conc.size() != inputs.size())
        throw std::invalid_argument("alphabet: conc table incomplete");
    for (const auto& c : conc)
        if (c.duration < 1) throw std::invalid_argument("alphabet: durations must be >= 1");
    if (outputs.empty()) throw std::invalid_argument("alphabet: no output symbols");
    if (!std::is_sorted(distance_bounds.begin(), distance_bounds.end()) ||
        std::adjacent_find(distance_bounds.begin(), distance_bounds.end()) !=
            distance_bounds.end())
        throw std::invalid_argument("alphabet: distance bounds must be strictly ascending");
    if (distance_outputs.size() != distance_bounds.size() + 1)
        throw std::invalid_argument("alphabet: need one output per distance range");
    auto in_range = [&](Symbol s) { return s >= 0 && s < num_outputs(); };
    if (!in_range(reverse_output))
        throw std::invalid_argument("alphabet: reverse output unset");
    for (Symbol s : distance_outputs)
        if (!in_range(s)) throw std::invalid_argument("alphabet: bad distance output");
    for (Symbol s : violations)
        if (!in_range(s)) throw std::invalid_argument("alphabet: bad violation symbol");
}

AbstractAlphabet AbstractAlphabet::from_kv(const KvFile& kv) {
    AbstractAlphabet a;
    a.inputs = split_list(kv.get("inputs"));
    for (const auto& name : a.inputs) {
        auto parts = split_list(kv.get("conc." + name));
        if (parts.size() != 2)
            throw std::invalid_argument("alphabet: conc." + name + " must be 'acc,duration'");
        a.conc.push_back({parse_double(parts[0]), static_cast<int>(parse_int(parts[1]))});
    }
    a.outputs = split_list(kv.get("outputs"));
    for (const auto& name : split_list(kv.get("violations")))
        a.violations.push_back(a.output_index(name));
    a.reverse_output = a.output_index(kv.get("reverse_output"));
    for (const auto& b : split_list(kv.get("distance_bounds")))
        a.distance_bounds.push_back(parse_double(b));
    for (const auto& name : split_list(kv.get("distance_outputs")))
        a.distance_outputs.push_back(a.output_index(name));
    a.validate();
    return a;
}

AbstractAlphabet AbstractAlphabet::load(const std::string& path) {
    return from_kv(KvFile::load(path));
}

KvFile AbstractAlphabet::to_kv() const {
    KvFile kv;
    auto join_names = [](const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    };
    kv.set("inputs", join_names(inputs));
    for (std::size_t i = 0; i < inputs.size(); ++i)
        kv.set("conc." + inputs[i],
               format_double(conc[i].acc) + "," + std::to_string(conc[i].duration));
    kv.set("outputs", join_names(outputs));
    std::string viol;
    for (std::size_t i = 0; i < violations.size(); ++i)
        viol += (i ? "," : "") + outputs[violations[i]];
    kv.set("violations", viol);
    kv.set("reverse_output", outputs[reverse_output]);
    std::string bounds;
    for (std::size_t i = 0; i < distance_bounds.size(); ++i)
        bounds += (i ? "," : "") + format_double(distance_bounds[i]);
    kv.set("distance_bounds", bounds);
    std::string douts;
    for (std::size_t i = 0; i < distance_outputs.size(); ++i)
        douts += (i ? "," : "") + outputs[distance_outputs[i]];
    kv.set("distance_outputs", douts);
    return kv;
}

Symbol Mapper::abstract_output(const SampleRecord& sample, const AbstractAlphabet& alphabet) {
    if (latched_) return *latched_;
    Symbol out;
    if (sample.v_l < 0)
        out = alphabet.reverse_output;
    else
        out = alphabet.classify_distance(sample.d);
    if (alphabet.is_violation(out)) latched_ = out;
    return out;
}

int QueryCache::child(int node, Symbol s) const {
    const auto& ch = nodes_[node].children;
    auto it = std::lower_bound(ch.begin(), ch.end(), s,
                               [](const auto& p, Symbol v) { return p.first < v; });
    if (it == ch.end() || it->first != s) return -1;
    return it->second;
}

std::optional<Word> QueryCache::lookup(const Word& query) const {
    Word out;
    out.reserve(query.size());
    int node = 0;
    for (Symbol s : query) {
        int c = child(node, s);
        if (c < 0) return std::nullopt;
        out.push_back(nodes_[c].out);
        node = c;
    }
    return out;
}

void QueryCache::insert(const Word& query, const Word& outputs) {
    if (query.size() != outputs.size())
        throw std::invalid_argument("cache: input/output length mismatch");
    int node = 0;
    for (std::size_t k = 0; k < query.size(); ++k) {
        int c = child(node, query[k]);
        if (c < 0) {
            c = static_cast<int>(nodes_.size());
            nodes_.push_back(Node{outputs[k], {}});
            auto& ch = nodes_[node].children;
            ch.insert(std::lower_bound(ch.begin(), ch.end(), query[k],
                                       [](const auto& p, Symbol v) { return p.first < v; }),
                      {query[k], c});
        } else if (nodes_[c].out != outputs[k]) {
            throw nondeterminism_error("cache: conflicting outputs for the same query prefix");
        }
        node = c;
    }
}

namespace {

std::uint64_t hash_word(const Word& w) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Symbol s : w) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) + 1;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

SulHarness::SulHarness(PlantConfig plant_cfg, AbstractAlphabet alphabet, bool use_cache)
    : plant_cfg_(std::move(plant_cfg)), alphabet_(std::move(alphabet)), use_cache_(use_cache) {
    plant_cfg_.validate();
    alphabet_.validate();
}

std::optional<Word> SulHarness::cached(const Word& inputs) const {
    if (!use_cache_) return std::nullopt;
    return cache_.lookup(inputs);
}

Word SulHarness::query(const Word& inputs) {
    if (auto hit = cached(inputs)) return *hit;
    return execute(inputs, nullptr);
}

Word SulHarness::execute(const Word& inputs, ConcreteTrace* trace) {
    for (Symbol s : inputs)
        if (s < 0 || s >= alphabet_.num_inputs())
            throw std::invalid_argument("harness: unknown abstract input symbol");

    const std::uint64_t curve_seed = plant_cfg_.curve.seed ^ hash_word(inputs);
    Plant plant(plant_cfg_, curve_seed);
    Mapper mapper;
    Word outputs;
    outputs.reserve(inputs.size());
    std::vector<SampleRecord>* rows = trace ? &trace->rows : nullptr;
    if (trace) {
        trace->rows.clear();
        trace->abstract_inputs = inputs;
        trace->curve_seed = curve_seed;
    }
    for (Symbol s : inputs) {
        const auto& c = alphabet_.conc[static_cast<std::size_t>(s)];
        SampleRecord rec = plant.step_control(c.acc, c.duration, rows);
        outputs.push_back(mapper.abstract_output(rec, alphabet_));
    }
    if (trace) {
        trace->abstract_outputs = outputs;
        trace->final_state = plant.state();
    }
    ++concrete_runs_;
    if (use_cache_) cache_.insert(inputs, outputs);
    return outputs;
}

std::string rows_to_csv(const std::vector<SampleRecord>& rows) {
    std::ostringstream out;
    out << "t_ms,acc,delta,v_l,v_f,d\n";
    for (const auto& r : rows)
        out << r.t_ms << "," << format_double(r.acc_cmd) << "," << format_double(r.delta) << ","
            << format_double(r.v_l) << "," << format_double(r.v_f) << "," << format_double(r.d)
            << "\n";
    return out.str();
}

std::string trace_to_csv(const ConcreteTrace& trace, const AbstractAlphabet& alphabet) {
    std::ostringstream out;
    out << "t_ms,acc,delta,v_l,v_f,d,abstract_in,abstract_out\n";
    std::size_t row = 0;
    for (std::size_t k = 0; k < trace.abstract_inputs.size(); ++k) {
        Symbol in = trace.abstract_inputs[k];
        int dur = alphabet.conc[static_cast<std::size_t>(in)].duration;
        for (int j = 0; j < dur && row < trace.rows.size(); ++j, ++row) {
            const auto& r = trace.rows[row];
            out << r.t_ms << "," << format_double(r.acc_cmd) << "," << format_double(r.delta)
                << "," << format_double(r.v_l) << "," << format_double(r.v_f) << ","
                << format_double(r.d) << "," << alphabet.inputs[static_cast<std::size_t>(in)]
                << "," << alphabet.outputs[static_cast<std::size_t>(trace.abstract_outputs[k])]
                << "\n";
        }
    }
    return out.str();
}

} // namespace platoonlab
