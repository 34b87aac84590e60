#include "lbt/experiment.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lbt/io.hpp"

namespace lbt {

const char* to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kGp: return "gp";
    case OracleKind::kZero: return "zero";
    case OracleKind::kLinear: return "linear";
    case OracleKind::kTruth: return "truth";
  }
  return "?";
}

OracleKind oracle_kind_from_string(const std::string& s) {
  if (s == "gp") return OracleKind::kGp;
  if (s == "zero") return OracleKind::kZero;
  if (s == "linear") return OracleKind::kLinear;
  if (s == "truth") return OracleKind::kTruth;
  throw ConfigError("unknown oracle kind '" + s +
                    "' (expected gp|zero|linear|truth)");
}

void ExperimentConfig::validate() const {
  vehicle.validate();
  gains.validate();
  oracle.ebp.validate();
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("sim.t_end must be positive");
  if (collect_period < dt) {
    throw ConfigError("sim.collect_period must be >= sim.dt");
  }
  if (update_period < collect_period) {
    throw ConfigError("sim.update_period must be >= sim.collect_period");
  }
  if (update_stop < 0.0) throw ConfigError("sim.update_stop must be >= 0");
  if (noise_std < 0.0) throw ConfigError("sim.noise_std must be >= 0");
  if (points_per_update < 1) {
    throw ConfigError("sim.points_per_update must be >= 1");
  }
  const double ratio = update_period / collect_period;
  if (std::abs(ratio - points_per_update) > 1e-6) {
    throw ConfigError(
        "sim.points_per_update must equal update_period / collect_period");
  }
  if (!(oracle.lengthscale > 0.0)) {
    throw ConfigError("oracle.lengthscale must be positive");
  }
  if (!(oracle.signal_var > 0.0)) {
    throw ConfigError("oracle.signal_var must be positive");
  }
  if (oracle.noise_std < 0.0) {
    throw ConfigError("oracle.noise_std must be >= 0");
  }
  if (oracle.rho_const < 0.0) {
    throw ConfigError("oracle.rho_const must be >= 0");
  }
  if (!(ctrl.u_min > 0.0)) throw ConfigError("controller.u_min must be > 0");
  if (traj_kind != "lissajous" && traj_kind != "circle" &&
      traj_kind != "helix" && traj_kind != "hover") {
    throw ConfigError("trajectory.kind must be lissajous|circle|helix|hover");
  }
  if (!is_rotation(init.R, 1e-9)) {
    throw ConfigError("init.R must be a rotation matrix");
  }
}

DesiredTrajectory ExperimentConfig::trajectory() const {
  if (traj_kind == "lissajous") {
    return make_lissajous(traj_amp, traj_freq, traj_phase, traj_offset);
  }
  if (traj_kind == "circle") {
    return make_circle(traj_radius, traj_rate, traj_height);
  }
  if (traj_kind == "helix") {
    return make_helix(traj_radius, traj_rate, traj_climb);
  }
  return make_hover(traj_offset);
}

std::unique_ptr<Oracle> make_oracle(const ExperimentConfig& cfg) {
  const FeatureMap fmap(cfg.oracle.features);
  switch (cfg.oracle.kind) {
    case OracleKind::kZero:
      return std::make_unique<ZeroOracle>(cfg.oracle.prior_mean,
                                          cfg.oracle.rho_const);
    case OracleKind::kLinear:
      return std::make_unique<LinearOracle>(fmap, cfg.oracle.rho_const);
    case OracleKind::kTruth:
      return std::make_unique<TruthOracle>();
    case OracleKind::kGp: {
      std::array<KernelParams, 6> kp;
      kp.fill(KernelParams::isotropic(fmap.dim(), cfg.oracle.lengthscale,
                                      cfg.oracle.signal_var,
                                      cfg.oracle.noise_std));
      return std::make_unique<GpOracle>(fmap, kp, cfg.oracle.prior_mean,
                                        cfg.oracle.ebp, cfg.oracle.budget);
    }
  }
  throw Error("make_oracle: unreachable");
}

int schedule_n(double t, const ExperimentConfig& cfg) {
  if (t < 0.0) throw Error("schedule_n: t must be >= 0");
  // small epsilon so exact switch instants hit by k*dt round correctly
  const double eps = 1e-9;
  const int n_end =
      static_cast<int>(std::floor(cfg.update_stop / cfg.update_period + eps));
  const int n = static_cast<int>(std::floor((t + eps) / cfg.update_period));
  return std::min(n, n_end);
}

RunResult run_closed_loop(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  RunResult res;
  res.data = Dataset(cfg.dataset_capacity);
  const DesiredTrajectory traj = cfg.trajectory();
  const TruthModel truth;
  std::shared_ptr<Oracle> oracle = make_oracle(cfg);
  res.oracle = oracle;

  std::mt19937_64 rng(cfg.seed);

  BodyState state;
  state.R = cfg.init.R;
  state.p = cfg.init.p;
  state.omega = cfg.init.omega;
  state.v = cfg.init.v_from_trajectory ? traj(0.0).v : cfg.init.v;

  auto run = [&]() {
    GainCertificate cert = gain_schedule(cfg.gains, 0, cfg.vehicle.m);
    int current_n = 0;

    // start the thrust extension at the force the outer loop demands
    ControllerState ctl;
    {
      const Prediction pred0 = oracle->predict(state);
      const Vec3 g_d0 = desired_force(traj(0.0), cert, state.x(),
                                      pred0.mean.head<3>(), cfg.vehicle.m);
      ctl.u = std::max(cfg.ctrl.u_min,
                       cfg.vehicle.e.dot(state.R.transpose() * g_d0));
      ctl.u_dot = 0.0;
    }

    const long steps = std::llround(cfg.t_end / cfg.dt);
    const long collect_every =
        std::max<long>(1, std::llround(cfg.collect_period / cfg.dt));
    std::vector<TrainingPoint> buffer;
    double rho_running_max = 0.0;
    res.log.reserve(steps + 1);

    const DerivFn deriv = [&](double t, const BodyState& s, const Aux& aux) {
      const ControllerState c{aux[0], aux[1]};
      const ControlOutput out = control_step(t, cert, s, traj, *oracle, c,
                                             cfg.vehicle, cfg.gains, cfg.ctrl);
      const StateDerivative ds =
          dynamics(s, c.u, out.tau, truth.f(s.x()), truth.f_omega(s),
                   cfg.vehicle);
      return std::make_pair(ds, Aux(c.u_dot, out.u_ddot));
    };

    for (long k = 0; k <= steps; ++k) {
      const double t = k * cfg.dt;

      // oracle update + gain switch, atomically at the scheduled instants
      const int n_t = schedule_n(t, cfg);
      if (n_t > current_n) {
        res.data.append(std::span<const TrainingPoint>(buffer));
        oracle->absorb(std::span<const TrainingPoint>(buffer));
        buffer.clear();
        oracle->reoptimize(cfg.seed + 0x51ul * static_cast<unsigned>(n_t));
        cert = gain_schedule(cfg.gains, n_t, cfg.vehicle.m);
        current_n = n_t;
      }

      const ControlOutput out = control_step(t, cert, state, traj, *oracle,
                                             ctl, cfg.vehicle, cfg.gains,
                                             cfg.ctrl);
      rho_running_max = std::max(rho_running_max, out.rho_bar);

      LogRecord rec;
      rec.t = t;
      rec.p = state.p;
      rec.p_d = traj(t).p;
      rec.z0_norm = out.z0.norm();
      rec.V = out.V;
      rec.gain_norm = cert.G.norm();
      rec.u = ctl.u;
      rec.tau = out.tau;
      rec.N = static_cast<int>(res.data.size());
      rec.n = current_n;
      rec.rho_bar = out.rho_bar;
      rec.bound = rho_running_max * cert.b;
      res.log.push_back(rec);

      // data collection from the true dynamics, then noised
      if (k % collect_every == 0 && t < cfg.update_stop - 1e-9) {
        const StateDerivative ds =
            dynamics(state, ctl.u, out.tau, truth.f(state.x()),
                     truth.f_omega(state), cfg.vehicle);
        buffer.push_back(build_training_point(t, state, ds.dv, ds.domega,
                                              ctl.u, out.tau, cfg.vehicle,
                                              cfg.noise_std, rng));
      }

      if (k < steps) {
        Aux aux(ctl.u, ctl.u_dot);
        std::tie(state, aux) = rk4_step(t, state, aux, deriv, cfg.dt);
        ctl.u = aux[0];
        ctl.u_dot = aux[1];
        res.max_so3_drift = std::max(res.max_so3_drift, so3_drift(state.R));
        res.max_det_drift =
            std::max(res.max_det_drift,
                     std::abs(state.R.determinant() - 1.0));
      }
    }
    res.final_cert = cert;
  };

  try {
    run();
  } catch (const Error& e) {
    res.failed = true;
    res.error = e.what();
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return res;
}

Metrics compute_metrics(const std::vector<LogRecord>& log, double window) {
  if (log.empty()) throw Error("compute_metrics: empty log");
  Metrics m;
  const double t_end = log.back().t;
  double sum_early = 0.0, sum_late = 0.0;
  long n_early = 0, n_late = 0;
  int last_n = -1;
  for (const auto& r : log) {
    if (r.t <= window) {
      sum_early += r.z0_norm;
      m.max_z0_early = std::max(m.max_z0_early, r.z0_norm);
      ++n_early;
    }
    if (r.t >= t_end - window) {
      sum_late += r.z0_norm;
      m.max_z0_late = std::max(m.max_z0_late, r.z0_norm);
      ++n_late;
    }
    if (r.n != last_n) {
      m.gain_norms.push_back(r.gain_norm);
      last_n = r.n;
    }
  }
  m.mean_z0_early = n_early ? sum_early / n_early : 0.0;
  m.mean_z0_late = n_late ? sum_late / n_late : 0.0;
  m.improvement_ratio =
      m.mean_z0_late > 0.0
          ? m.mean_z0_early / m.mean_z0_late
          : std::numeric_limits<double>::infinity();
  m.final_V = log.back().V;
  m.final_bound = log.back().bound;
  return m;
}

std::string log_to_csv(const std::vector<LogRecord>& log) {
  std::string out =
      "t,px,py,pz,pdx,pdy,pdz,z0_norm,V,gain_norm,u,taux,tauy,tauz,N,n,"
      "rho_bar,bound\n";
  for (const auto& r : log) {
    out += fmt17(r.t);
    for (int i = 0; i < 3; ++i) out += "," + fmt17(r.p[i]);
    for (int i = 0; i < 3; ++i) out += "," + fmt17(r.p_d[i]);
    out += "," + fmt17(r.z0_norm);
    out += "," + fmt17(r.V);
    out += "," + fmt17(r.gain_norm);
    out += "," + fmt17(r.u);
    for (int i = 0; i < 3; ++i) out += "," + fmt17(r.tau[i]);
    out += "," + std::to_string(r.N);
    out += "," + std::to_string(r.n);
    out += "," + fmt17(r.rho_bar);
    out += "," + fmt17(r.bound);
    out += "\n";
  }
  return out;
}

void write_log_csv(const std::filesystem::path& path,
                   const std::vector<LogRecord>& log) {
  write_file_atomic(path, log_to_csv(log));
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["mean_z0_early"] = m.mean_z0_early;
  j["max_z0_early"] = m.max_z0_early;
  j["mean_z0_late"] = m.mean_z0_late;
  j["max_z0_late"] = m.max_z0_late;
  j["improvement_ratio"] = m.improvement_ratio;
  j["final_V"] = m.final_V;
  j["final_bound"] = m.final_bound;
  j["gain_norms"] = m.gain_norms;
  j["wall_seconds"] = m.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace lbt
