#include <cmath>

#include "doctest.h"
#include "lbt/config.hpp"

using namespace lbt;

TEST_CASE("empty config text yields the reference defaults") {
  const ExperimentConfig cfg = parse_config_text("  \n\t ");
  CHECK(cfg.vehicle.m == 1.0);
  CHECK((cfg.vehicle.J - Mat3(Vec3(2, 2, 1).asDiagonal())).norm() == 0.0);
  CHECK((cfg.vehicle.e - Vec3(0, 0, 1)).norm() == 0.0);
  CHECK(cfg.traj_kind == "lissajous");
  CHECK((cfg.traj_amp - Vec3(1.2, 1.2, 0.6)).norm() == 0.0);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.t_end == 14.0);
  CHECK(cfg.collect_period == 0.1);
  CHECK(cfg.update_period == 0.5);
  CHECK(cfg.update_stop == 12.0);
  CHECK(cfg.points_per_update == 5);
  CHECK(cfg.noise_std == 0.08);
  CHECK(cfg.seed == 0);
  CHECK(cfg.gains.gamma == 0.9);
  Mat36 G0;
  G0.leftCols<3>() = Vec3(10, 10, 40).asDiagonal();
  G0.rightCols<3>() = Vec3(10, 10, 10).asDiagonal();
  CHECK((cfg.gains.G0 - G0).norm() == 0.0);
  CHECK((cfg.gains.Gz1 - 2.0 * Mat3::Identity()).norm() == 0.0);
  CHECK((cfg.gains.Gz2 - 2.0 * Mat3::Identity()).norm() == 0.0);
  CHECK((cfg.gains.Q - Mat6::Identity()).norm() == 0.0);
  CHECK(cfg.oracle.kind == OracleKind::kGp);
  CHECK(cfg.oracle.prior_mean[2] == -10.0);
  CHECK((cfg.oracle.ebp.beta - Vec6::Constant(2.0)).norm() == 0.0);
  CHECK(cfg.oracle.ebp.delta == 0.95);
  CHECK(cfg.ctrl.u_min == 0.1);
  CHECK(cfg.ctrl.u_hover == doctest::Approx(9.81));
  CHECK((cfg.init.p - Vec3(0.1, -0.1, 0)).norm() == 0.0);
  CHECK(cfg.init.v_from_trajectory);
}

TEST_CASE("dt = 0 is rejected with the field name") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"sim": {"dt": 0}})"),
                       "sim.dt must be positive", ConfigError);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_AS(parse_config_text(R"({"simulation": {}})"), ConfigError);
  try {
    parse_config_text(R"({"sim": {"dtt": 1e-3}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sim.dtt") != std::string::npos);
  }
}

TEST_CASE("malformed JSON and wrong types are field-level errors") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"vehicle": {"m": "heavy"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"init": {"v": "velocity"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"oracle": {"kind": "svm"}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config_text(R"({"init": {"R": [[2,0,0],[0,1,0],[0,0,1]]}})"),
      ConfigError);  // not a rotation
}

TEST_CASE("scalar and matrix gain forms parse") {
  const auto cfg = parse_config_text(
      R"({"gains": {"Gz1": 3.0, "Gz2": [1, 2, 3], "Q": 0.5}})");
  CHECK((cfg.gains.Gz1 - 3.0 * Mat3::Identity()).norm() == 0.0);
  CHECK((cfg.gains.Gz2 - Mat3(Vec3(1, 2, 3).asDiagonal())).norm() == 0.0);
  CHECK((cfg.gains.Q - 0.5 * Mat6::Identity()).norm() == 0.0);
}

TEST_CASE("beta accepts a scalar or six entries") {
  auto cfg = parse_config_text(R"({"oracle": {"beta": 1.5}})");
  CHECK((cfg.oracle.ebp.beta - Vec6::Constant(1.5)).norm() == 0.0);
  cfg = parse_config_text(R"({"oracle": {"beta": [1, 2, 3, 4, 5, 6]}})");
  CHECK(cfg.oracle.ebp.beta[5] == 6.0);
  CHECK_THROWS_AS(parse_config_text(R"({"oracle": {"beta": [1, 2]}})"),
                  ConfigError);
}

TEST_CASE("explicit initial velocity switches off trajectory matching") {
  const auto cfg = parse_config_text(R"({"init": {"v": [0.5, 0, -0.5]}})");
  CHECK_FALSE(cfg.init.v_from_trajectory);
  CHECK((cfg.init.v - Vec3(0.5, 0, -0.5)).norm() == 0.0);
}

TEST_CASE("u_hover defaults to hover thrust for the configured mass") {
  const auto cfg = parse_config_text(R"({"vehicle": {"m": 2.0}})");
  CHECK(cfg.ctrl.u_hover == doctest::Approx(2.0 * 9.81));
  const auto given = parse_config_text(
      R"({"vehicle": {"m": 2.0}, "controller": {"u_hover": 5.0}})");
  CHECK(given.ctrl.u_hover == 5.0);
}

TEST_CASE("config round-trips through its JSON dump") {
  const auto base = parse_config_text(R"({
    "vehicle": {"m": 1.3, "J": [2.1, 2.2, 1.1]},
    "trajectory": {"kind": "helix", "radius": 0.8, "climb": 0.2},
    "sim": {"dt": 0.002, "t_end": 6.0, "collect_period": 0.2,
            "update_period": 1.0, "seed": 42},
    "gains": {"gamma": 0.85, "Gz1": 1.5},
    "oracle": {"kind": "linear", "rho_const": 2.5, "beta": 1.0},
    "init": {"p": [0, 0, 1], "v": [1, 0, 0]}
  })");
  const std::string dump = config_to_json(base);
  const auto back = parse_config_text(dump);
  CHECK(config_to_json(back) == dump);
  CHECK(back.vehicle.m == base.vehicle.m);
  CHECK(back.traj_kind == "helix");
  CHECK(back.seed == 42);
  CHECK(back.oracle.kind == OracleKind::kLinear);
  CHECK_FALSE(back.init.v_from_trajectory);
}

TEST_CASE("schema doc mentions every scope") {
  const std::string doc = config_schema_doc();
  for (const char* key :
       {"vehicle.m", "trajectory.kind", "sim.dt", "gains.G0_pos",
        "oracle.kind", "controller.u_min", "init.p"}) {
    CHECK(doc.find(key) != std::string::npos);
  }
}

TEST_CASE("parse_config_file reports missing files") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);
}
