#include "platoonlab/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace platoonlab {

void PlantConfig::validate() const {
    if (sample_period_ms <= 0 || internal_dt_ms <= 0)
        throw std::invalid_argument("plant: time steps must be positive");
    if (sample_period_ms % internal_dt_ms != 0)
        throw std::invalid_argument("plant: internal_dt must divide the sample period");
    if (sample_period_ms % 2 != 0 || (sample_period_ms / 2) % internal_dt_ms != 0)
        throw std::invalid_argument(
            "plant: internal_dt must divide half the sample period (mid-period sampling)");
    if (!(accel_min < 0) || !(accel_max > 0))
        throw std::invalid_argument("plant: acceleration range must straddle zero");
    if (!(initial_distance_m > truck_length_m))
        throw std::invalid_argument("plant: initial distance must exceed the truck length");
    if (!(follower_lag_s > 0)) throw std::invalid_argument("plant: follower lag must be positive");
    if (headway_s < 0) throw std::invalid_argument("plant: headway must be non-negative");
    if (curve.segment_min_ms <= 0 || curve.segment_max_ms < curve.segment_min_ms)
        throw std::invalid_argument("plant: malformed curve segment range");
    if (curve.yaw_rate_max < 0) throw std::invalid_argument("plant: negative yaw rate bound");
}

PlantConfig PlantConfig::from_kv(const KvFile& kv) {
    PlantConfig c;
    c.sample_period_ms = kv.get_int_or("sample_period_ms", c.sample_period_ms);
    c.internal_dt_ms = kv.get_int_or("internal_dt_ms", c.internal_dt_ms);
    c.accel_min = kv.get_double_or("accel_min", c.accel_min);
    c.accel_max = kv.get_double_or("accel_max", c.accel_max);
    c.truck_length_m = kv.get_double_or("truck_length_m", c.truck_length_m);
    c.standstill_gap_m = kv.get_double_or("standstill_gap_m", c.standstill_gap_m);
    c.headway_s = kv.get_double_or("headway_s", c.headway_s);
    c.kp = kv.get_double_or("kp", c.kp);
    c.kd = kv.get_double_or("kd", c.kd);
    c.follower_lag_s = kv.get_double_or("follower_lag_s", c.follower_lag_s);
    c.initial_distance_m = kv.get_double_or("initial_distance_m", c.initial_distance_m);
    c.curve.segment_min_ms = kv.get_int_or("curve_segment_min_ms", c.curve.segment_min_ms);
    c.curve.segment_max_ms = kv.get_int_or("curve_segment_max_ms", c.curve.segment_max_ms);
    c.curve.yaw_rate_max = kv.get_double_or("curve_yaw_rate_max", c.curve.yaw_rate_max);
    c.curve.seed = static_cast<std::uint64_t>(kv.get_int_or("curve_seed", 0));
    c.validate();
    return c;
}

PlantConfig PlantConfig::load(const std::string& path) {
    return from_kv(KvFile::load(path));
}

KvFile PlantConfig::to_kv() const {
    KvFile kv;
    kv.set("sample_period_ms", std::to_string(sample_period_ms));
    kv.set("internal_dt_ms", std::to_string(internal_dt_ms));
    kv.set("accel_min", format_double(accel_min));
    kv.set("accel_max", format_double(accel_max));
    kv.set("truck_length_m", format_double(truck_length_m));
    kv.set("standstill_gap_m", format_double(standstill_gap_m));
    kv.set("headway_s", format_double(headway_s));
    kv.set("kp", format_double(kp));
    kv.set("kd", format_double(kd));
    kv.set("follower_lag_s", format_double(follower_lag_s));
    kv.set("initial_distance_m", format_double(initial_distance_m));
    kv.set("curve_segment_min_ms", std::to_string(curve.segment_min_ms));
    kv.set("curve_segment_max_ms", std::to_string(curve.segment_max_ms));
    kv.set("curve_yaw_rate_max", format_double(curve.yaw_rate_max));
    kv.set("curve_seed", std::to_string(curve.seed));
    return kv;
}

CurveSignal::CurveSignal(const CurveProfile& profile, std::uint64_t seed)
    : profile_(profile), rng_(seed) {}

void CurveSignal::extend(std::int64_t t_ms) {
    while (seg_end_ms_.empty() || seg_end_ms_.back() <= t_ms) {
        std::int64_t dur =
            rng_.uniform_int(profile_.segment_min_ms, profile_.segment_max_ms);
        double rate = rng_.uniform_real(-profile_.yaw_rate_max, profile_.yaw_rate_max);
        std::int64_t start = seg_end_ms_.empty() ? 0 : seg_end_ms_.back();
        seg_end_ms_.push_back(start + dur);
        seg_rate_.push_back(rate);
    }
}

double CurveSignal::rate_at(std::int64_t t_ms) {
    if (profile_.yaw_rate_max == 0) return 0;
    extend(t_ms);
    auto it = std::upper_bound(seg_end_ms_.begin(), seg_end_ms_.end(), t_ms);
    return seg_rate_[static_cast<std::size_t>(it - seg_end_ms_.begin())];
}

Plant::Plant(const PlantConfig& cfg, std::uint64_t curve_seed)
    : cfg_(cfg), curve_seed_(curve_seed), curve_(cfg.curve, curve_seed ^ cfg.curve.seed) {
    cfg_.validate();
    reset();
}

void Plant::reset() {
    state_ = PlantState{};
    state_.d = cfg_.initial_distance_m;
    curve_ = CurveSignal(cfg_.curve, curve_seed_ ^ cfg_.curve.seed);
}

void Plant::set_state(const PlantState& s) {
    state_ = s;
}

void Plant::euler_step(double acc_cmd) {
    const double dt = static_cast<double>(cfg_.internal_dt_ms) / 1000.0;
    const double yaw = curve_.rate_at(state_.t_ms);
    state_.v_l += acc_cmd * dt;
    const double gap_error = state_.d - (cfg_.standstill_gap_m + cfg_.headway_s * state_.v_f);
    const double a_cmd_f = std::clamp(cfg_.kp * gap_error + cfg_.kd * (state_.v_l - state_.v_f),
                                      cfg_.accel_min, cfg_.accel_max);
    state_.a_f_actual += dt / cfg_.follower_lag_s * (a_cmd_f - state_.a_f_actual);
    state_.v_f += state_.a_f_actual * dt;
    state_.d += (state_.v_l - state_.v_f) * dt;
    state_.delta += yaw * dt;
    state_.t_ms += cfg_.internal_dt_ms;
}

SampleRecord Plant::sample(double acc_cmd) const {
    return SampleRecord{state_.t_ms, acc_cmd, state_.delta, state_.v_l, state_.v_f, state_.d};
}

SampleRecord Plant::step_control(double acc_cmd, int steps, std::vector<SampleRecord>* rows) {
    if (steps < 1) throw std::invalid_argument("plant: steps must be >= 1");
    if (acc_cmd < cfg_.accel_min || acc_cmd > cfg_.accel_max)
        throw std::invalid_argument("plant: commanded acceleration out of range");
    const std::int64_t half_steps = cfg_.sample_period_ms / 2 / cfg_.internal_dt_ms;
    SampleRecord last{};
    for (int k = 0; k < steps; ++k) {
        for (std::int64_t j = 0; j < half_steps; ++j) euler_step(acc_cmd);
        last = sample(acc_cmd);
        if (rows) rows->push_back(last);
        for (std::int64_t j = 0; j < half_steps; ++j) euler_step(acc_cmd);
    }
    return last;
}

} // namespace platoonlab
