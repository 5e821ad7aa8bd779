#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "platoonlab/plant.hpp"

using namespace platoonlab;

namespace {

PlantConfig shipped_config() {
    return PlantConfig::load(std::string(PLATOONLAB_SOURCE_DIR) + "/configs/plant_default.cfg");
}

} // namespace

TEST_CASE("reset gives the canonical initial state") {
    Plant plant(shipped_config(), 1);
    const PlantState& s = plant.state();
    CHECK(s.v_l == 0.0);
    CHECK(s.v_f == 0.0);
    CHECK(s.d == shipped_config().initial_distance_m);
    CHECK(s.a_f_actual == 0.0);
    CHECK(s.delta == 0.0);
    CHECK(s.t_ms == 0);
}

TEST_CASE("two resets are bitwise identical") {
    Plant a(shipped_config(), 7), b(shipped_config(), 7);
    a.step_control(1.0, 3);
    a.reset();
    CHECK(a.state() == b.state());
}

TEST_CASE("zero input from rest is an equilibrium") {
    Plant plant(shipped_config(), 3);
    for (int k = 0; k < 8; ++k) plant.step_control(0.0, 1);
    CHECK(plant.state().v_l == 0.0);
    CHECK(plant.state().v_f == 0.0);
    CHECK(plant.state().d == shipped_config().initial_distance_m);
}

TEST_CASE("constant acceleration integrates exactly at the sampling instant") {
    // sample at 2*250 - 125 = 375 ms; Euler sum of 15 steps of 1.5*0.025
    Plant plant(shipped_config(), 0);
    SampleRecord rec = plant.step_control(1.5, 2);
    CHECK(rec.t_ms == 375);
    CHECK(rec.v_l == doctest::Approx(0.5625).epsilon(1e-12));
}

TEST_CASE("sampling alignment across multiple calls") {
    Plant plant(shipped_config(), 0);
    std::vector<SampleRecord> rows;
    SampleRecord r1 = plant.step_control(0.5, 3, &rows);
    CHECK(r1.t_ms == 3 * 250 - 125);
    SampleRecord r2 = plant.step_control(0.0, 2, &rows);
    CHECK(r2.t_ms == 3 * 250 + 2 * 250 - 125);
    REQUIRE(rows.size() == 5);
    for (std::size_t k = 0; k < rows.size(); ++k)
        CHECK(rows[k].t_ms == static_cast<std::int64_t>(k + 1) * 250 - 125);
}

TEST_CASE("determinism: identical commands give bit-identical trajectories") {
    Plant a(shipped_config(), 42), b(shipped_config(), 42);
    std::vector<SampleRecord> ra, rb;
    for (double acc : {1.5, -0.7, 0.0, 0.7, -1.5}) {
        a.step_control(acc, 2, &ra);
        b.step_control(acc, 2, &rb);
    }
    CHECK(a.state() == b.state());
    REQUIRE(ra.size() == rb.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
        CHECK(ra[k].v_l == rb[k].v_l);
        CHECK(ra[k].v_f == rb[k].v_f);
        CHECK(ra[k].d == rb[k].d);
        CHECK(ra[k].delta == rb[k].delta);
    }
}

TEST_CASE("velocity stays within the integrated acceleration bound") {
    PlantConfig cfg = shipped_config();
    Plant plant(cfg, 11);
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        double acc = rng.uniform_real(cfg.accel_min, cfg.accel_max);
        plant.step_control(acc, 1);
        double t_s = static_cast<double>(plant.state().t_ms) / 1000.0;
        CHECK(std::abs(plant.state().v_l) <= cfg.accel_max * t_s + 1e-9);
    }
}

TEST_CASE("crash reachability of the shipped config (pinned regression)") {
    // fast-acc x6, hard-brake x6, wait x2 expressed concretely:
    // 1.5 m/s^2 for 12 periods, -1.5 for 12 periods, 0 for 16.
    PlantConfig cfg = shipped_config();
    Plant plant(cfg, 0);
    std::vector<SampleRecord> rows;
    plant.step_control(1.5, 12, &rows);
    plant.step_control(-1.5, 12, &rows);
    plant.step_control(0.0, 16, &rows);
    double dmin = 1e9;
    bool crash_before_reverse = false;
    for (const auto& r : rows) {
        if (r.v_l < 0) break;
        if (r.d < dmin) dmin = r.d;
        if (r.d < cfg.truck_length_m) {
            crash_before_reverse = true;
            break;
        }
    }
    CHECK(dmin < cfg.truck_length_m);
    CHECK(crash_before_reverse);
}

TEST_CASE("step_control validates its inputs") {
    Plant plant(shipped_config(), 0);
    CHECK_THROWS_AS(plant.step_control(2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(plant.step_control(-2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(plant.step_control(0.0, 0), std::invalid_argument);
}

TEST_CASE("config invariants are enforced") {
    PlantConfig cfg = shipped_config();
    cfg.internal_dt_ms = 60; // does not divide 125
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = shipped_config();
    cfg.accel_min = 0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = shipped_config();
    cfg.initial_distance_m = 0.1; // below truck length
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = shipped_config();
    cfg.follower_lag_s = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config file round trip") {
    PlantConfig cfg = shipped_config();
    PlantConfig back = PlantConfig::from_kv(KvFile::parse(cfg.to_kv().dump()));
    CHECK(back.kp == cfg.kp);
    CHECK(back.kd == cfg.kd);
    CHECK(back.follower_lag_s == cfg.follower_lag_s);
    CHECK(back.sample_period_ms == cfg.sample_period_ms);
}

TEST_CASE("orientation script is a pure function of (profile, seed, time)") {
    PlantConfig cfg = shipped_config();
    CurveSignal a(cfg.curve, 99), b(cfg.curve, 99);
    // query in different orders; answers must match
    std::vector<std::int64_t> times{50, 10000, 3000, 50000, 125};
    for (auto t : times) (void)a.rate_at(t);
    for (auto it = times.rbegin(); it != times.rend(); ++it)
        CHECK(a.rate_at(*it) == b.rate_at(*it));
}

TEST_CASE("state restore continues a trajectory exactly") {
    PlantConfig cfg = shipped_config();
    Plant whole(cfg, 31);
    whole.step_control(1.2, 4);
    PlantState mid = whole.state();
    std::vector<SampleRecord> expect;
    whole.step_control(0.0, 3, &expect);

    Plant resumed(cfg, 31);
    resumed.set_state(mid);
    std::vector<SampleRecord> got;
    resumed.step_control(0.0, 3, &got);
    REQUIRE(got.size() == expect.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k].v_l == expect[k].v_l);
        CHECK(got[k].d == expect[k].d);
        CHECK(got[k].delta == expect[k].delta);
    }
}
