/*
 * dataset - fixed-length, normalized sequence pairs for network training.
 *
 * Executed traces become (input, target) sequence pairs of exactly T steps:
 * inputs are (acc, delta') with delta' the per-step orientation difference,
 * targets are (v_l, v_f, d). Short traces are continued by simulating
 * acc = 0; traces where the leader velocity turns negative are truncated
 * there and padded at the head with copies of the all-zero initial state.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/mapper.hpp"
#include "platoonlab/plant.hpp"

namespace platoonlab {

/// Raised when a trace has more than T steps and no truncation point.
class trace_too_long : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawSequencePair {
    std::vector<std::array<double, 2>> x;       // (acc, delta')
    std::vector<std::array<double, 3>> targets; // (v_l, v_f, d)
    bool label_crash = false;
    std::optional<int> crash_time; // first step with d below the threshold

    int length() const { return static_cast<int>(x.size()); }
};

/// Expands one trace to exactly T steps. The crash label and time come from
/// the ground-truth distance of the finished pair, using the truck length
/// from the plant config as threshold.
RawSequencePair build_pair(const ConcreteTrace& trace, int T, const PlantConfig& plant_cfg);

/// build_pair over a list; throws on the first offending trace.
std::vector<RawSequencePair> build_pairs(const std::vector<ConcreteTrace>& traces, int T,
                                         const PlantConfig& plant_cfg);

/// Per-dimension mean and standard deviation over all pairs and steps.
/// Standard deviations are floored at 1e-8 so constant dimensions stay
/// finite. Fit on training data only; validation reuses the same stats.
struct NormalizationStats {
    std::array<double, 2> x_mean{}, x_std{};
    std::array<double, 3> t_mean{}, t_std{};
};

NormalizationStats fit_normalize(const std::vector<RawSequencePair>& pairs);
void apply_normalize(std::vector<RawSequencePair>& pairs, const NormalizationStats& stats);
/// Maps normalized network outputs back to physical units.
std::vector<std::array<double, 3>> invert_outputs(const std::vector<std::array<double, 3>>& y,
                                                  const NormalizationStats& stats);

/// CSV with header pair_id,step,acc,dprime,v_l,v_f,d,label_crash,crash_time
/// (one row per step, physical units; crash_time empty when absent).
std::string pairs_to_csv(const std::vector<RawSequencePair>& pairs);
std::vector<RawSequencePair> pairs_from_csv(const std::string& text);
void save_pairs(const std::vector<RawSequencePair>& pairs, const std::string& path);
std::vector<RawSequencePair> load_pairs(const std::string& path);

KvFile stats_to_kv(const NormalizationStats& stats);
NormalizationStats stats_from_kv(const KvFile& kv);

} // namespace platoonlab
