// Command-line front end: parse a config, run experiments, emit CSV/JSON
// artifacts and plot-ready data files.
//
// Exit codes (stable):
//   0  success
//   1  command-line usage error
//   2  config parse/validation error
//   3  run failed (integration or certificate failure)
//   4  I/O error writing artifacts
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lbt/config.hpp"
#include "lbt/experiment.hpp"

namespace fs = std::filesystem;
using namespace lbt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRunFailed = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> oracle;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_config = true) {
  if (with_config)
    cmd->add_option("--config", o.config_path,
                    "Path to a JSON config file (empty file = defaults)");
  cmd->add_option("--out", o.out_dir, "Output directory")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed (overrides the config value)");
  cmd->add_option("--oracle", o.oracle,
                  "Oracle override: gp, zero, linear or truth");
  cmd->add_flag("--quiet", o.quiet, "Suppress progress output");
}

ExperimentConfig load_config(const CommonOpts& o) {
  ExperimentConfig cfg = o.config_path.empty()
                             ? ExperimentConfig{}
                             : parse_config_file(o.config_path);
  // CLI overrides beat file values.
  if (o.seed) cfg.seed = *o.seed;
  if (o.oracle) cfg.oracle.kind = oracle_kind_from_string(*o.oracle);
  cfg.validate();
  return cfg;
}

// Atomic write: temp file in the target directory, then rename.
void atomic_write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "."
                                                    : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Plot-ready whitespace-separated data files (one per reference figure).
std::string trajectory_dat(const std::vector<LogRecord>& log) {
  std::string out = "# t px py pz pdx pdy pdz z0_norm\n";
  for (const auto& r : log) {
    out += fmt17(r.t);
    for (int i = 0; i < 3; ++i) out += " " + fmt17(r.p[i]);
    for (int i = 0; i < 3; ++i) out += " " + fmt17(r.p_d[i]);
    out += " " + fmt17(r.z0_norm) + "\n";
  }
  return out;
}

std::string gains_dat(const std::vector<LogRecord>& log) {
  std::string out = "# t gain_norm N n\n";
  for (const auto& r : log)
    out += fmt17(r.t) + " " + fmt17(r.gain_norm) + " " +
           std::to_string(r.N) + " " + std::to_string(r.n) + "\n";
  return out;
}

std::string lyapunov_dat(const std::vector<LogRecord>& log) {
  std::string out = "# t V rho_bar bound\n";
  for (const auto& r : log)
    out += fmt17(r.t) + " " + fmt17(r.V) + " " + fmt17(r.rho_bar) + " " +
           fmt17(r.bound) + "\n";
  return out;
}

int write_run_artifacts(const ExperimentConfig& cfg, const RunResult& res,
                        const fs::path& dir, bool quiet) {
  try {
    atomic_write(dir / "log.csv", log_to_csv(res.log));
    atomic_write(dir / "summary.json", metrics_to_json(compute_metrics(res.log)));
    atomic_write(dir / "dataset.csv", res.data.to_csv());
    atomic_write(dir / "config.json", config_to_json(cfg));
    atomic_write(dir / "trajectory.dat", trajectory_dat(res.log));
    atomic_write(dir / "gains.dat", gains_dat(res.log));
    atomic_write(dir / "lyapunov.dat", lyapunov_dat(res.log));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  if (!quiet) std::printf("artifacts written to %s\n", dir.string().c_str());
  return 0;
}

int run_and_write(const ExperimentConfig& cfg, const fs::path& dir,
                  bool quiet) {
  const RunResult res = run_closed_loop(cfg);
  if (res.failed) {
    std::fprintf(stderr, "error: run failed: %s\n", res.error.c_str());
    // keep the partial log around for debugging, under a distinct name
    try {
      atomic_write(dir / "failed_log.csv", log_to_csv(res.log));
    } catch (...) {
    }
    return kExitRunFailed;
  }
  if (!quiet) {
    const Metrics m = compute_metrics(res.log);
    std::printf("run complete: %zu steps, improvement ratio %.3g, "
                "final bound %.3g\n",
                res.log.size(), m.improvement_ratio, m.final_bound);
  }
  return write_run_artifacts(cfg, res, dir, quiet);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Online learning-based tracking control simulator for an "
      "underactuated vehicle in a wind field"};
  app.require_subcommand(1);
  app.footer("Config keys, types and defaults: lbt validate-config --schema");

  CommonOpts sim_o, rep_o, sweep_o, val_o;
  int sweep_runs = 10;
  int sweep_jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (sweep_jobs < 1) sweep_jobs = 1;
  bool val_schema = false;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Run one closed-loop simulation from a config");
  add_common(sim, sim_o);

  CLI::App* rep = app.add_subcommand(
      "reproduce-paper",
      "Run the reference configuration (14 s horizon) and emit all artifacts");
  add_common(rep, rep_o);

  CLI::App* swp = app.add_subcommand(
      "sweep", "Run the same config across consecutive seeds");
  add_common(swp, sweep_o);
  swp->add_option("--runs", sweep_runs, "Number of seeds (seed + index)")
      ->capture_default_str();
  swp->add_option("--jobs", sweep_jobs, "Concurrent workers")
      ->capture_default_str();

  CLI::App* val = app.add_subcommand(
      "validate-config", "Parse and validate a config, print normalized JSON");
  add_common(val, val_o);
  val->add_flag("--schema", val_schema, "Print the config schema and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) {
      if (val_schema) {
        std::printf("%s", config_schema_doc().c_str());
        return 0;
      }
      const ExperimentConfig cfg = load_config(val_o);
      std::printf("%s\n", config_to_json(cfg).c_str());
      return 0;
    }

    if (sim->parsed()) {
      const ExperimentConfig cfg = load_config(sim_o);
      return run_and_write(cfg, sim_o.out_dir, sim_o.quiet);
    }

    if (rep->parsed()) {
      // Reference configuration = defaults; only seed/oracle overridable.
      CommonOpts o = rep_o;
      o.config_path.clear();
      const ExperimentConfig cfg = load_config(o);
      return run_and_write(cfg, rep_o.out_dir, rep_o.quiet);
    }

    if (swp->parsed()) {
      if (sweep_runs < 1 || sweep_jobs < 1) {
        std::fprintf(stderr, "error: --runs and --jobs must be >= 1\n");
        return kExitUsage;
      }
      const ExperimentConfig base = load_config(sweep_o);
      std::vector<int> codes(sweep_runs, 0);
      std::string summary = "[\n";
      for (int lo = 0; lo < sweep_runs; lo += sweep_jobs) {
        const int hi = std::min(sweep_runs, lo + sweep_jobs);
        std::vector<std::future<std::pair<int, std::string>>> work;
        for (int i = lo; i < hi; ++i) {
          work.push_back(std::async(std::launch::async, [&, i] {
            ExperimentConfig cfg = base;
            cfg.seed = base.seed + static_cast<std::uint64_t>(i);
            const fs::path dir =
                fs::path(sweep_o.out_dir) / ("run_" + std::to_string(i));
            const int code = run_and_write(cfg, dir, true);
            std::string entry = "  {\"seed\": " + std::to_string(cfg.seed) +
                                ", \"ok\": " + (code == 0 ? "true" : "false");
            if (code == 0) {
              // summary.json already on disk; embed the ratio for convenience
              entry += ", \"dir\": \"" + dir.string() + "\"";
            }
            entry += "}";
            return std::make_pair(code, entry);
          }));
        }
        for (int i = lo; i < hi; ++i) {
          auto [code, entry] = work[i - lo].get();
          codes[i] = code;
          summary += entry + (i + 1 < sweep_runs ? ",\n" : "\n");
          if (!sweep_o.quiet)
            std::printf("run %d/%d %s\n", i + 1, sweep_runs,
                        code == 0 ? "ok" : "FAILED");
        }
      }
      summary += "]\n";
      atomic_write(fs::path(sweep_o.out_dir) / "sweep.json", summary);
      for (int c : codes)
        if (c != 0) return c;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailed;
  }
  return kExitUsage;
}
