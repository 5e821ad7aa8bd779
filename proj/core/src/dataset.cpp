#include "platoonlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace platoonlab {

RawSequencePair build_pair(const ConcreteTrace& trace, int T, const PlantConfig& plant_cfg) {
    if (T < 1) throw std::invalid_argument("build_pair: T must be >= 1");
    std::vector<SampleRecord> rows = trace.rows;

    if (static_cast<int>(rows.size()) < T) {
        Plant plant(plant_cfg, trace.curve_seed);
        plant.set_state(trace.final_state);
        while (static_cast<int>(rows.size()) < T) plant.step_control(0.0, 1, &rows);
    }

    // Truncate at the first reverse step, padding the head with the initial
    // all-zero state.
    std::size_t cut = rows.size();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].v_l < 0) {
            cut = k;
            break;
        }
    }
    rows.resize(cut);
    if (static_cast<int>(rows.size()) > T)
        throw trace_too_long("trace has " + std::to_string(rows.size()) +
                             " steps and does not fit T=" + std::to_string(T));
    const int head_pad = T - static_cast<int>(rows.size());
    if (head_pad > 0) {
        SampleRecord zero{};
        zero.d = plant_cfg.initial_distance_m;
        rows.insert(rows.begin(), static_cast<std::size_t>(head_pad), zero);
    }

    RawSequencePair pair;
    pair.x.resize(static_cast<std::size_t>(T));
    pair.targets.resize(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        double dprime = i == 0 ? 0.0 : r.delta - rows[static_cast<std::size_t>(i) - 1].delta;
        pair.x[static_cast<std::size_t>(i)] = {r.acc_cmd, dprime};
        pair.targets[static_cast<std::size_t>(i)] = {r.v_l, r.v_f, r.d};
        if (!pair.crash_time && r.d < plant_cfg.truck_length_m) pair.crash_time = i;
    }
    pair.label_crash = pair.crash_time.has_value();
    return pair;
}

std::vector<RawSequencePair> build_pairs(const std::vector<ConcreteTrace>& traces, int T,
                                         const PlantConfig& plant_cfg) {
    std::vector<RawSequencePair> pairs;
    pairs.reserve(traces.size());
    for (const auto& trace : traces) pairs.push_back(build_pair(trace, T, plant_cfg));
    return pairs;
}

NormalizationStats fit_normalize(const std::vector<RawSequencePair>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("fit_normalize: empty training set");
    NormalizationStats s;
    std::array<double, 2> xs{}, xs2{};
    std::array<double, 3> ts{}, ts2{};
    std::size_t n = 0;
    for (const auto& p : pairs) {
        for (const auto& x : p.x)
            for (int d = 0; d < 2; ++d) {
                xs[static_cast<std::size_t>(d)] += x[static_cast<std::size_t>(d)];
                xs2[static_cast<std::size_t>(d)] +=
                    x[static_cast<std::size_t>(d)] * x[static_cast<std::size_t>(d)];
            }
        for (const auto& t : p.targets)
            for (int d = 0; d < 3; ++d) {
                ts[static_cast<std::size_t>(d)] += t[static_cast<std::size_t>(d)];
                ts2[static_cast<std::size_t>(d)] +=
                    t[static_cast<std::size_t>(d)] * t[static_cast<std::size_t>(d)];
            }
        n += p.x.size();
    }
    const double floor = 1e-8;
    const double dn = static_cast<double>(n);
    for (int d = 0; d < 2; ++d) {
        auto k = static_cast<std::size_t>(d);
        s.x_mean[k] = xs[k] / dn;
        s.x_std[k] = std::max(floor, std::sqrt(std::max(0.0, xs2[k] / dn - s.x_mean[k] * s.x_mean[k])));
    }
    for (int d = 0; d < 3; ++d) {
        auto k = static_cast<std::size_t>(d);
        s.t_mean[k] = ts[k] / dn;
        s.t_std[k] = std::max(floor, std::sqrt(std::max(0.0, ts2[k] / dn - s.t_mean[k] * s.t_mean[k])));
    }
    return s;
}

void apply_normalize(std::vector<RawSequencePair>& pairs, const NormalizationStats& s) {
    for (auto& p : pairs) {
        for (auto& x : p.x)
            for (std::size_t d = 0; d < 2; ++d) x[d] = (x[d] - s.x_mean[d]) / s.x_std[d];
        for (auto& t : p.targets)
            for (std::size_t d = 0; d < 3; ++d) t[d] = (t[d] - s.t_mean[d]) / s.t_std[d];
    }
}

std::vector<std::array<double, 3>> invert_outputs(const std::vector<std::array<double, 3>>& y,
                                                  const NormalizationStats& s) {
    std::vector<std::array<double, 3>> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t d = 0; d < 3; ++d) out[i][d] = y[i][d] * s.t_std[d] + s.t_mean[d];
    return out;
}

std::string pairs_to_csv(const std::vector<RawSequencePair>& pairs) {
    std::ostringstream out;
    out << "pair_id,step,acc,dprime,v_l,v_f,d,label_crash,crash_time\n";
    for (std::size_t id = 0; id < pairs.size(); ++id) {
        const auto& p = pairs[id];
        for (int i = 0; i < p.length(); ++i) {
            auto k = static_cast<std::size_t>(i);
            out << id << "," << i << "," << format_double(p.x[k][0]) << ","
                << format_double(p.x[k][1]) << "," << format_double(p.targets[k][0]) << ","
                << format_double(p.targets[k][1]) << "," << format_double(p.targets[k][2]) << ","
                << (p.label_crash ? 1 : 0) << ",";
            if (p.crash_time) out << *p.crash_time;
            out << "\n";
        }
    }
    return out.str();
}

std::vector<RawSequencePair> pairs_from_csv(const std::string& text) {
    std::vector<RawSequencePair> pairs;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("pair_id,step,", 0) != 0)
        throw std::invalid_argument("dataset csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string item;
        std::istringstream ls(line);
        while (std::getline(ls, item, ',')) f.push_back(item);
        if (f.size() == 8) f.push_back(""); // empty trailing crash_time
        if (f.size() != 9) throw std::invalid_argument("dataset csv: bad row: " + line);
        std::size_t id = static_cast<std::size_t>(parse_int(f[0]));
        if (id >= pairs.size()) pairs.resize(id + 1);
        auto& p = pairs[id];
        p.x.push_back({parse_double(f[2]), parse_double(f[3])});
        p.targets.push_back({parse_double(f[4]), parse_double(f[5]), parse_double(f[6])});
        p.label_crash = parse_int(f[7]) != 0;
        if (!f[8].empty()) p.crash_time = static_cast<int>(parse_int(f[8]));
    }
    return pairs;
}

void save_pairs(const std::vector<RawSequencePair>& pairs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << pairs_to_csv(pairs);
}

std::vector<RawSequencePair> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return pairs_from_csv(buf.str());
}

KvFile stats_to_kv(const NormalizationStats& s) {
    KvFile kv;
    for (std::size_t d = 0; d < 2; ++d) {
        kv.set("x_mean_" + std::to_string(d), format_double(s.x_mean[d]));
        kv.set("x_std_" + std::to_string(d), format_double(s.x_std[d]));
    }
    for (std::size_t d = 0; d < 3; ++d) {
        kv.set("t_mean_" + std::to_string(d), format_double(s.t_mean[d]));
        kv.set("t_std_" + std::to_string(d), format_double(s.t_std[d]));
    }
    return kv;
}

NormalizationStats stats_from_kv(const KvFile& kv) {
    NormalizationStats s;
    for (std::size_t d = 0; d < 2; ++d) {
        s.x_mean[d] = kv.get_double("x_mean_" + std::to_string(d));
        s.x_std[d] = kv.get_double("x_std_" + std::to_string(d));
    }
    for (std::size_t d = 0; d < 3; ++d) {
        s.t_mean[d] = kv.get_double("t_mean_" + std::to_string(d));
        s.t_std[d] = kv.get_double("t_std_" + std::to_string(d));
    }
    return s;
}

} // namespace platoonlab
