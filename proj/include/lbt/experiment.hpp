#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lbt/controller.hpp"
#include "lbt/dataset.hpp"
#include "lbt/oracle.hpp"
#include "lbt/trajectory.hpp"
#include "lbt/truth.hpp"

namespace lbt {

enum class OracleKind { kGp, kZero, kLinear, kTruth };

const char* to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& s);

struct OracleConfig {
  OracleKind kind = OracleKind::kGp;
  FeatureMapKind features = FeatureMapKind::kPosVelOmega;
  double lengthscale = 1.0;
  double signal_var = 1.0;
  double noise_std = 0.08;  // kernel noise level (matches the sensor noise)
  Vec6 prior_mean = (Vec6() << 0, 0, -10, 0, 0, 0).finished();
  ErrorBoundParams ebp{};
  double rho_const = 3.0;  // error bound reported by the baseline oracles
  HyperOptBudget budget{};
};

struct InitialState {
  Vec3 p = Vec3(0.1, -0.1, 0.0);
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  bool v_from_trajectory = true;  // start at the desired velocity
  Vec3 v = Vec3::Zero();
};

/// Full closed-loop experiment description. The defaults reproduce the
/// reference configuration (quadrotor in a wind field, 14 s horizon,
/// 0.1 s collection, 0.5 s oracle updates until 12 s, gain decay 0.9).
struct ExperimentConfig {
  VehicleParams vehicle = [] {
    VehicleParams v;
    v.m = 1.0;
    v.J = Vec3(2.0, 2.0, 1.0).asDiagonal();
    v.e = Vec3(0, 0, 1);
    return v;
  }();

  // trajectory
  std::string traj_kind = "lissajous";
  Vec3 traj_amp = Vec3(1.2, 1.2, 0.6);
  Vec3 traj_freq = Vec3(2.0, 2.0, 1.0);
  Vec3 traj_phase = Vec3(0.0, M_PI / 2.0, 0.0);
  Vec3 traj_offset = Vec3(0.0, -1.2, 0.0);
  double traj_radius = 1.0;  // circle/helix
  double traj_rate = 1.0;
  double traj_height = 1.0;
  double traj_climb = 0.1;

  // simulation schedule
  double dt = 1e-3;
  double t_end = 14.0;
  double collect_period = 0.1;
  double update_period = 0.5;
  double update_stop = 12.0;
  int points_per_update = 5;
  double noise_std = 0.08;
  std::uint64_t seed = 0;
  std::size_t dataset_capacity = Dataset::kDefaultCapacity;

  GainParams gains = [] {
    GainParams g;
    g.G0.leftCols<3>() = Vec3(10.0, 10.0, 40.0).asDiagonal();
    g.G0.rightCols<3>() = Vec3(10.0, 10.0, 10.0).asDiagonal();
    return g;
  }();

  OracleConfig oracle{};
  ControllerConfig ctrl{};
  InitialState init{};

  void validate() const;
  DesiredTrajectory trajectory() const;
};

/// Builds the configured oracle (untrained).
std::unique_ptr<Oracle> make_oracle(const ExperimentConfig& cfg);

/// Switching index n(t) = min(n_end, floor(t / update_period)),
/// n_end = update_stop / update_period.
int schedule_n(double t, const ExperimentConfig& cfg);

struct LogRecord {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 p_d = Vec3::Zero();
  double z0_norm = 0.0;
  double V = 0.0;
  double gain_norm = 0.0;
  double u = 0.0;
  Vec3 tau = Vec3::Zero();
  int N = 0;
  int n = 0;
  double rho_bar = 0.0;
  double bound = 0.0;
};

struct RunResult {
  std::vector<LogRecord> log;
  Dataset data{Dataset::kDefaultCapacity};  // all appended training points
  std::shared_ptr<Oracle> oracle;           // final fitted oracle
  GainCertificate final_cert;
  double max_so3_drift = 0.0;
  double max_det_drift = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;      // integration/certificate failure
  std::string error;        // set when failed
};

/// Simulates the plant (true disturbances) in closed loop with the
/// configured oracle and controller, collecting data and switching
/// gains/models on the configured schedule. On integration or
/// certificate failure the result carries the log up to the failure.
RunResult run_closed_loop(const ExperimentConfig& cfg);

struct Metrics {
  double mean_z0_early = 0.0;
  double max_z0_early = 0.0;
  double mean_z0_late = 0.0;
  double max_z0_late = 0.0;
  double improvement_ratio = 0.0;  // mean early / mean late
  double final_V = 0.0;
  double final_bound = 0.0;
  std::vector<double> gain_norms;  // one entry per switch index n
  double wall_seconds = 0.0;
};

/// Summary statistics over a run log: tracking error over the first and
/// last `window` seconds, final Lyapunov value and bound, gain sequence.
Metrics compute_metrics(const std::vector<LogRecord>& log,
                        double window = 2.0);

std::string log_to_csv(const std::vector<LogRecord>& log);
void write_log_csv(const std::filesystem::path& path,
                   const std::vector<LogRecord>& log);
std::string metrics_to_json(const Metrics& m);

}  // namespace lbt
