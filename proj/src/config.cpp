#include "lbt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lbt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

void check_keys(const json& j, const std::string& scope,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(scope, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      fail(scope.empty() ? it.key() : scope + "." + it.key(), "unknown key");
    }
  }
}

double get_num(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  return j.get<double>();
}

void read_num(const json& j, const char* key, const std::string& scope,
              double& out) {
  if (j.contains(key)) out = get_num(j.at(key), scope + "." + key);
}

void read_int(const json& j, const char* key, const std::string& scope,
              int& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(scope + "." + key, "must be an integer");
  out = v.get<int>();
}

Vec3 get_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) fail(field, "must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = get_num(j[i], field);
  return v;
}

void read_vec3(const json& j, const char* key, const std::string& scope,
               Vec3& out) {
  if (j.contains(key)) out = get_vec3(j.at(key), scope + "." + key);
}

Vec6 get_vec6(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 6) fail(field, "must be an array of 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = get_num(j[i], field);
  return v;
}

// 3x3 matrix: diag from 3 numbers, or 3 rows of 3
Mat3 get_mat3(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array (diag of 3, or 3x3 rows)");
  if (j.size() == 3 && j[0].is_number()) {
    return Vec3(get_vec3(j, field)).asDiagonal();
  }
  if (j.size() == 3 && j[0].is_array()) {
    Mat3 M;
    for (int i = 0; i < 3; ++i) M.row(i) = get_vec3(j[i], field).transpose();
    return M;
  }
  fail(field, "must be 3 numbers (diagonal) or 3 rows of 3");
}

// scalar -> s*I, 3 numbers -> diag, 3x3 rows
Mat3 get_mat3_or_scaled(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>() * Mat3::Identity();
  return get_mat3(j, field);
}

Mat6 get_mat6_or_scaled(const json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>() * Mat6::Identity();
  if (j.is_array() && j.size() == 6 && j[0].is_number()) {
    Vec6 d = get_vec6(j, field);
    return d.asDiagonal();
  }
  if (j.is_array() && j.size() == 6 && j[0].is_array()) {
    Mat6 M;
    for (int i = 0; i < 6; ++i) {
      if (!j[i].is_array() || j[i].size() != 6) fail(field, "rows must have 6 entries");
      for (int k = 0; k < 6; ++k) M(i, k) = get_num(j[i][k], field);
    }
    return M;
  }
  fail(field, "must be a scalar, 6 numbers (diagonal) or 6 rows of 6");
}

FeatureMapKind features_from_string(const std::string& s,
                                    const std::string& field) {
  if (s == "pos_vel_omega") return FeatureMapKind::kPosVelOmega;
  if (s == "pos_vel_omega_rot") return FeatureMapKind::kPosVelOmegaRot;
  fail(field, "must be pos_vel_omega or pos_vel_omega_rot");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;  // defaults = reference configuration

  // empty file means "all defaults"
  bool blank = true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
  }
  bool u_hover_given = false;
  if (!blank) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "", {"vehicle", "trajectory", "sim", "gains", "oracle",
                       "controller", "init"});

    if (j.contains("vehicle")) {
      const auto& v = j.at("vehicle");
      check_keys(v, "vehicle", {"m", "J", "e"});
      read_num(v, "m", "vehicle", cfg.vehicle.m);
      if (v.contains("J")) cfg.vehicle.J = get_mat3(v.at("J"), "vehicle.J");
      read_vec3(v, "e", "vehicle", cfg.vehicle.e);
    }
    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      check_keys(t, "trajectory",
                 {"kind", "amplitude", "frequency", "phase", "offset",
                  "radius", "rate", "height", "climb"});
      if (t.contains("kind")) {
        if (!t.at("kind").is_string()) fail("trajectory.kind", "must be a string");
        cfg.traj_kind = t.at("kind").get<std::string>();
      }
      read_vec3(t, "amplitude", "trajectory", cfg.traj_amp);
      read_vec3(t, "frequency", "trajectory", cfg.traj_freq);
      read_vec3(t, "phase", "trajectory", cfg.traj_phase);
      read_vec3(t, "offset", "trajectory", cfg.traj_offset);
      read_num(t, "radius", "trajectory", cfg.traj_radius);
      read_num(t, "rate", "trajectory", cfg.traj_rate);
      read_num(t, "height", "trajectory", cfg.traj_height);
      read_num(t, "climb", "trajectory", cfg.traj_climb);
    }
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      check_keys(s, "sim",
                 {"dt", "t_end", "collect_period", "update_period",
                  "update_stop", "points_per_update", "noise_std", "seed",
                  "dataset_capacity"});
      read_num(s, "dt", "sim", cfg.dt);
      read_num(s, "t_end", "sim", cfg.t_end);
      read_num(s, "collect_period", "sim", cfg.collect_period);
      read_num(s, "update_period", "sim", cfg.update_period);
      read_num(s, "update_stop", "sim", cfg.update_stop);
      read_int(s, "points_per_update", "sim", cfg.points_per_update);
      read_num(s, "noise_std", "sim", cfg.noise_std);
      if (s.contains("seed")) {
        if (!s.at("seed").is_number_unsigned() &&
            !s.at("seed").is_number_integer()) {
          fail("sim.seed", "must be a nonnegative integer");
        }
        cfg.seed = s.at("seed").get<std::uint64_t>();
      }
      if (s.contains("dataset_capacity")) {
        if (!s.at("dataset_capacity").is_number_unsigned() &&
            !s.at("dataset_capacity").is_number_integer()) {
          fail("sim.dataset_capacity", "must be a positive integer");
        }
        cfg.dataset_capacity = s.at("dataset_capacity").get<std::size_t>();
      }
    }
    if (j.contains("gains")) {
      const auto& g = j.at("gains");
      check_keys(g, "gains", {"G0_pos", "G0_vel", "gamma", "Gz1", "Gz2", "Q"});
      if (g.contains("G0_pos")) {
        cfg.gains.G0.leftCols<3>() = get_mat3(g.at("G0_pos"), "gains.G0_pos");
      }
      if (g.contains("G0_vel")) {
        cfg.gains.G0.rightCols<3>() = get_mat3(g.at("G0_vel"), "gains.G0_vel");
      }
      read_num(g, "gamma", "gains", cfg.gains.gamma);
      if (g.contains("Gz1")) cfg.gains.Gz1 = get_mat3_or_scaled(g.at("Gz1"), "gains.Gz1");
      if (g.contains("Gz2")) cfg.gains.Gz2 = get_mat3_or_scaled(g.at("Gz2"), "gains.Gz2");
      if (g.contains("Q")) cfg.gains.Q = get_mat6_or_scaled(g.at("Q"), "gains.Q");
    }
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      check_keys(o, "oracle",
                 {"kind", "features", "lengthscale", "signal_var",
                  "noise_std", "prior_mean", "beta", "delta", "rho_const",
                  "opt_starts", "opt_evals"});
      if (o.contains("kind")) {
        if (!o.at("kind").is_string()) fail("oracle.kind", "must be a string");
        cfg.oracle.kind = oracle_kind_from_string(o.at("kind").get<std::string>());
      }
      if (o.contains("features")) {
        if (!o.at("features").is_string()) fail("oracle.features", "must be a string");
        cfg.oracle.features = features_from_string(
            o.at("features").get<std::string>(), "oracle.features");
      }
      read_num(o, "lengthscale", "oracle", cfg.oracle.lengthscale);
      read_num(o, "signal_var", "oracle", cfg.oracle.signal_var);
      read_num(o, "noise_std", "oracle", cfg.oracle.noise_std);
      if (o.contains("prior_mean")) {
        cfg.oracle.prior_mean = get_vec6(o.at("prior_mean"), "oracle.prior_mean");
      }
      if (o.contains("beta")) {
        const auto& b = o.at("beta");
        if (b.is_number()) {
          cfg.oracle.ebp.beta = Vec6::Constant(b.get<double>());
        } else {
          cfg.oracle.ebp.beta = get_vec6(b, "oracle.beta");
        }
      }
      read_num(o, "delta", "oracle", cfg.oracle.ebp.delta);
      read_num(o, "rho_const", "oracle", cfg.oracle.rho_const);
      read_int(o, "opt_starts", "oracle", cfg.oracle.budget.starts);
      read_int(o, "opt_evals", "oracle", cfg.oracle.budget.evals_per_start);
    }
    if (j.contains("controller")) {
      const auto& c = j.at("controller");
      check_keys(c, "controller", {"u_min", "k_u", "u_hover"});
      read_num(c, "u_min", "controller", cfg.ctrl.u_min);
      read_num(c, "k_u", "controller", cfg.ctrl.k_u);
      if (c.contains("u_hover")) {
        u_hover_given = true;
        read_num(c, "u_hover", "controller", cfg.ctrl.u_hover);
      }
    }
    if (j.contains("init")) {
      const auto& i = j.at("init");
      check_keys(i, "init", {"p", "R", "omega", "v"});
      read_vec3(i, "p", "init", cfg.init.p);
      if (i.contains("R")) cfg.init.R = get_mat3(i.at("R"), "init.R");
      read_vec3(i, "omega", "init", cfg.init.omega);
      if (i.contains("v")) {
        if (i.at("v").is_string()) {
          if (i.at("v").get<std::string>() != "trajectory") {
            fail("init.v", "must be an array of 3 numbers or \"trajectory\"");
          }
          cfg.init.v_from_trajectory = true;
        } else {
          cfg.init.v = get_vec3(i.at("v"), "init.v");
          cfg.init.v_from_trajectory = false;
        }
      }
    }
  }

  if (!u_hover_given) cfg.ctrl.u_hover = 9.81 * cfg.vehicle.m;
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["vehicle"]["m"] = cfg.vehicle.m;
  j["vehicle"]["J"] = {{cfg.vehicle.J(0, 0), cfg.vehicle.J(0, 1), cfg.vehicle.J(0, 2)},
                       {cfg.vehicle.J(1, 0), cfg.vehicle.J(1, 1), cfg.vehicle.J(1, 2)},
                       {cfg.vehicle.J(2, 0), cfg.vehicle.J(2, 1), cfg.vehicle.J(2, 2)}};
  j["vehicle"]["e"] = {cfg.vehicle.e[0], cfg.vehicle.e[1], cfg.vehicle.e[2]};
  auto arr3 = [](const Vec3& v) { return json::array({v[0], v[1], v[2]}); };
  j["trajectory"]["kind"] = cfg.traj_kind;
  j["trajectory"]["amplitude"] = arr3(cfg.traj_amp);
  j["trajectory"]["frequency"] = arr3(cfg.traj_freq);
  j["trajectory"]["phase"] = arr3(cfg.traj_phase);
  j["trajectory"]["offset"] = arr3(cfg.traj_offset);
  j["trajectory"]["radius"] = cfg.traj_radius;
  j["trajectory"]["rate"] = cfg.traj_rate;
  j["trajectory"]["height"] = cfg.traj_height;
  j["trajectory"]["climb"] = cfg.traj_climb;
  j["sim"]["dt"] = cfg.dt;
  j["sim"]["t_end"] = cfg.t_end;
  j["sim"]["collect_period"] = cfg.collect_period;
  j["sim"]["update_period"] = cfg.update_period;
  j["sim"]["update_stop"] = cfg.update_stop;
  j["sim"]["points_per_update"] = cfg.points_per_update;
  j["sim"]["noise_std"] = cfg.noise_std;
  j["sim"]["seed"] = cfg.seed;
  j["sim"]["dataset_capacity"] = cfg.dataset_capacity;
  auto mat3_rows = [](const Mat3& M) {
    return json::array({json::array({M(0, 0), M(0, 1), M(0, 2)}),
                        json::array({M(1, 0), M(1, 1), M(1, 2)}),
                        json::array({M(2, 0), M(2, 1), M(2, 2)})});
  };
  j["gains"]["G0_pos"] = mat3_rows(cfg.gains.G0.leftCols<3>());
  j["gains"]["G0_vel"] = mat3_rows(cfg.gains.G0.rightCols<3>());
  j["gains"]["gamma"] = cfg.gains.gamma;
  j["gains"]["Gz1"] = mat3_rows(cfg.gains.Gz1);
  j["gains"]["Gz2"] = mat3_rows(cfg.gains.Gz2);
  {
    json rows = json::array();
    for (int i = 0; i < 6; ++i) {
      json row = json::array();
      for (int k = 0; k < 6; ++k) row.push_back(cfg.gains.Q(i, k));
      rows.push_back(row);
    }
    j["gains"]["Q"] = rows;
  }
  j["oracle"]["kind"] = to_string(cfg.oracle.kind);
  j["oracle"]["features"] =
      cfg.oracle.features == FeatureMapKind::kPosVelOmega ? "pos_vel_omega"
                                                          : "pos_vel_omega_rot";
  j["oracle"]["lengthscale"] = cfg.oracle.lengthscale;
  j["oracle"]["signal_var"] = cfg.oracle.signal_var;
  j["oracle"]["noise_std"] = cfg.oracle.noise_std;
  {
    json pm = json::array();
    for (int i = 0; i < 6; ++i) pm.push_back(cfg.oracle.prior_mean[i]);
    j["oracle"]["prior_mean"] = pm;
    json beta = json::array();
    for (int i = 0; i < 6; ++i) beta.push_back(cfg.oracle.ebp.beta[i]);
    j["oracle"]["beta"] = beta;
  }
  j["oracle"]["delta"] = cfg.oracle.ebp.delta;
  j["oracle"]["rho_const"] = cfg.oracle.rho_const;
  j["oracle"]["opt_starts"] = cfg.oracle.budget.starts;
  j["oracle"]["opt_evals"] = cfg.oracle.budget.evals_per_start;
  j["controller"]["u_min"] = cfg.ctrl.u_min;
  j["controller"]["k_u"] = cfg.ctrl.k_u;
  j["controller"]["u_hover"] = cfg.ctrl.u_hover;
  j["init"]["p"] = arr3(cfg.init.p);
  j["init"]["R"] = mat3_rows(cfg.init.R);
  j["init"]["omega"] = arr3(cfg.init.omega);
  if (cfg.init.v_from_trajectory) {
    j["init"]["v"] = "trajectory";
  } else {
    j["init"]["v"] = arr3(cfg.init.v);
  }
  return j.dump(2) + "\n";
}

std::string config_schema_doc() {
  return R"(Experiment config schema (JSON; every key optional, unknown keys rejected;
an empty file selects all defaults, which reproduce the reference run).

vehicle.m               number  mass [kg]                    default 1.0
vehicle.J               3 numbers (diagonal) or 3x3 rows     default diag(2,2,1)
vehicle.e               3 numbers, unit thrust axis          default [0,0,1]

trajectory.kind         "lissajous"|"circle"|"helix"|"hover" default "lissajous"
trajectory.amplitude    3 numbers (lissajous)                default [1.2,1.2,0.6]
trajectory.frequency    3 numbers [rad/s]                    default [2,2,1]
trajectory.phase        3 numbers [rad]                      default [0,pi/2,0]
trajectory.offset       3 numbers [m] (also hover point)     default [0,-1.2,0]
trajectory.radius       number (circle/helix)                default 1.0
trajectory.rate         number [rad/s] (circle/helix)        default 1.0
trajectory.height       number [m] (circle)                  default 1.0
trajectory.climb        number [m/s] (helix)                 default 0.1

sim.dt                  number [s], integrator step          default 0.001
sim.t_end               number [s], horizon                  default 14.0
sim.collect_period      number [s], data collection cadence  default 0.1
sim.update_period       number [s], oracle update cadence    default 0.5
sim.update_stop         number [s], last update instant      default 12.0
sim.points_per_update   integer = update/collect ratio       default 5
sim.noise_std           number, training output noise sd     default 0.08
sim.seed                nonnegative integer                  default 0
sim.dataset_capacity    positive integer                     default 4096

gains.G0_pos            3 numbers (diag) or 3x3, position    default diag(10,10,40)
gains.G0_vel            3 numbers (diag) or 3x3, velocity    default diag(10,10,10)
gains.gamma             number in (0,1], per-update decay    default 0.9
gains.Gz1               scalar, 3 numbers or 3x3 (SPD)       default 2
gains.Gz2               scalar, 3 numbers or 3x3 (SPD)       default 2
gains.Q                 scalar, 6 numbers or 6x6 (PD)        default 1

oracle.kind             "gp"|"zero"|"linear"|"truth"         default "gp"
oracle.features         "pos_vel_omega"|"pos_vel_omega_rot"  default "pos_vel_omega"
oracle.lengthscale      number > 0, initial SE lengthscale   default 1.0
oracle.signal_var       number > 0, initial signal variance  default 1.0
oracle.noise_std        number >= 0, kernel noise sd         default 0.08
oracle.prior_mean       6 numbers, constant prior means      default [0,0,-10,0,0,0]
oracle.beta             scalar or 6 numbers, bound scaling   default 2
oracle.delta            number in (0,1], bound probability   default 0.95
oracle.rho_const        number >= 0, baseline error bound    default 3.0
oracle.opt_starts       integer, likelihood search starts    default 4
oracle.opt_evals        integer, evaluations per start       default 200

controller.u_min        number > 0, singularity guard [N]    default 0.1
controller.k_u          number, guard recovery rate          default 50.0
controller.u_hover      number, guard target thrust [N]      default 9.81*m

init.p                  3 numbers [m]                        default [0.1,-0.1,0]
init.R                  3 numbers (diag) or 3x3 rotation     default identity
init.omega              3 numbers [rad/s]                    default [0,0,0]
init.v                  3 numbers [m/s] or "trajectory"      default "trajectory"
)";
}

}  // namespace lbt
