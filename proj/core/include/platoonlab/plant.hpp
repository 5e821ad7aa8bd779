/*
 * plant - reference two-vehicle platooning model.
 *
 * The leader integrates a commanded acceleration; the follower runs a
 * constant-time-headway controller (spacing policy r + h*v_f, PD on gap
 * error and relative speed) behind a first-order actuator lag. Orientation
 * is a scripted piecewise-constant yaw-rate signal that does not couple
 * into the longitudinal dynamics. Integration is forward Euler at a fixed
 * internal step, and all trajectories are bit-for-bit deterministic
 * functions of (config, curve seed, inputs).
 */

#pragma once

#include <cstdint>
#include <vector>

#include "platoonlab/util.hpp"

namespace platoonlab {

struct CurveProfile {
    std::int64_t segment_min_ms = 2000;
    std::int64_t segment_max_ms = 8000;
    double yaw_rate_max = 0.15; // rad/s, segments drawn uniform in [-max, max]
    std::uint64_t seed = 0;
};

struct PlantConfig {
    std::int64_t sample_period_ms = 250; // t_s
    std::int64_t internal_dt_ms = 25;
    double accel_min = -1.5; // m/s^2
    double accel_max = 1.5;  // m/s^2
    double truck_length_m = 0.43;
    double standstill_gap_m = 1.0; // r in the spacing policy
    double headway_s = 0.25;       // h in the spacing policy
    double kp = 2.0;
    double kd = 0.9;
    double follower_lag_s = 0.6;      // tau
    double initial_distance_m = 1.0;  // d0
    CurveProfile curve;

    /// Throws std::invalid_argument when any invariant is violated
    /// (acceleration range must straddle zero, internal_dt must divide both
    /// t_s and t_s/2, d0 > truck length, tau > 0, h >= 0).
    void validate() const;

    static PlantConfig from_kv(const KvFile& kv);
    static PlantConfig load(const std::string& path);
    KvFile to_kv() const;
};

struct PlantState {
    double v_l = 0;        // leader velocity, m/s
    double v_f = 0;        // follower velocity, m/s
    double d = 0;          // leader-follower gap, m
    double a_f_actual = 0; // lagged follower acceleration, m/s^2
    double delta = 0;      // leader orientation, rad
    std::int64_t t_ms = 0; // elapsed time

    bool operator==(const PlantState&) const = default;
};

/// One sampled valuation of all observable variables.
struct SampleRecord {
    std::int64_t t_ms = 0;
    double acc_cmd = 0;
    double delta = 0;
    double v_l = 0;
    double v_f = 0;
    double d = 0;
};

/// Scripted orientation signal: piecewise-constant yaw-rate segments whose
/// durations and rates are drawn deterministically from the seed. Segments
/// are generated lazily as time advances.
class CurveSignal {
public:
    CurveSignal(const CurveProfile& profile, std::uint64_t seed);
    double rate_at(std::int64_t t_ms);

private:
    void extend(std::int64_t t_ms);

    CurveProfile profile_;
    Rng rng_;
    std::vector<std::int64_t> seg_end_ms_; // cumulative segment end times
    std::vector<double> seg_rate_;
};

class Plant {
public:
    /// Validates the config and resets to the canonical initial state.
    /// curve_seed selects the orientation script for this instance.
    Plant(const PlantConfig& cfg, std::uint64_t curve_seed);

    void reset();
    const PlantState& state() const { return state_; }
    const PlantConfig& config() const { return cfg_; }

    /// Restores a previously observed state (used to continue a trace when
    /// padding datasets). The orientation script is a pure function of time,
    /// so restoring (state, seed) reproduces the continuation exactly.
    void set_state(const PlantState& s);

    /// Advances steps * t_s milliseconds with the leader acceleration held
    /// at acc_cmd. One SampleRecord is captured per sampling period at
    /// offset k*t_s - t_s/2 from the call start (k = 1..steps) and appended
    /// to rows when given; the record of the last period, taken
    /// steps*t_s - t_s/2 after the call start, is returned. Throws
    /// std::invalid_argument when acc_cmd is outside the configured range
    /// or steps < 1.
    SampleRecord step_control(double acc_cmd, int steps,
                              std::vector<SampleRecord>* rows = nullptr);

private:
    void euler_step(double acc_cmd);
    SampleRecord sample(double acc_cmd) const;

    PlantConfig cfg_;
    std::uint64_t curve_seed_;
    CurveSignal curve_;
    PlantState state_;
};

} // namespace platoonlab
