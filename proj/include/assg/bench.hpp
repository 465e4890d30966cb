#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assg/oracle.hpp"
#include "assg/problems.hpp"
#include "assg/solvers.hpp"

namespace assg::bench {

struct ProblemConfig {
  enum class Source { synthetic, libsvm };
  Source source = Source::synthetic;
  SyntheticSpec synth;
  std::uint64_t seed = 0;
  // libsvm source
  std::string path;
  Loss loss = Loss::hinge();
  Regularizer reg = Regularizer::none();
  Mode mode = Mode::plain;
  std::optional<double> G;
  std::string echo_json;  // canonical problem block, reproduced in the manifest
};

struct SolverEntry {
  std::string name;
  AssgConfig assg;
  std::optional<double> G_override;
  // plain baseline and standalone inner solvers
  std::optional<std::int64_t> steps;
  std::optional<double> eta;
  std::optional<double> B;  // step rule eta = B / (G sqrt(steps))
  std::optional<double> beta;
};

struct ReferenceConfig {
  std::int64_t budget = 200000;
  double tol = 1e-9;
};

struct ExperimentConfig {
  int version = 1;
  ProblemConfig problem;
  std::vector<SolverEntry> solvers;
  int replicas = 1;
  std::uint64_t base_seed = 0;
  std::string out_dir;
  int workers = 1;
  bool record_wall_ms = false;  // off by default so reruns are byte-identical
  std::optional<ReferenceConfig> reference;
};

/// Parses and schema-checks a config file. Unknown keys, missing required
/// keys, and inconsistent values throw ConfigError with a line-anchored
/// message.
ExperimentConfig parse_experiment_config(const std::string& path);

/// Applies CLI overrides (empty/zero means "keep the config value").
void apply_overrides(ExperimentConfig& cfg, const std::string& out_dir, int workers,
                     double desk_scale_factor);

Objective build_objective(const ProblemConfig& pc);

/// Schedule resolution without running; the manifest echoes exactly this.
ScheduleEcho preview_schedule(const SolverEntry& entry, const Objective& obj);

struct TraceRow {
  std::string run_id;
  std::string solver;
  int replica = 0;
  int stage = 0;
  std::int64_t cumulative_evaluations = 0;
  double objective = 0.0;
  std::optional<double> gap;
  std::int64_t wall_ms = 0;
  std::uint64_t seed = 0;
};

std::vector<TraceRow> rows_from_run(const RunResult& run, int replica,
                                    std::int64_t wall_ms);
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Runs every solver x replica, writes one trace CSV per run plus summary.csv
/// and manifest.json into out_dir. Returns the process exit code: 0 on
/// success, 3 when a solver failed (completed traces are preserved).
int run_experiment(const ExperimentConfig& cfg);

struct CompareReport {
  std::vector<double> budgets;
  std::vector<double> median_gap_a;
  std::vector<double> median_gap_b;
  double win_rate_a = 0.5;          // at the largest shared budget; ties 0.5
  double slope_budget_a = 0.0;      // log gap vs log budget
  double slope_budget_b = 0.0;
  double slope_stage_a = 0.0;       // log gap vs stage index (median over replicas)
  double slope_stage_b = 0.0;
  bool used_objective_fallback = false;  // no reference: compared objectives
  std::string solver_a, solver_b;
};

/// Paired comparison of two solvers over the traces in a run directory.
/// Refuses (ConfigError) when traces are missing or were produced on
/// mismatched problems/seeds.
CompareReport compare_traces(const std::string& trace_dir, const std::string& solver_a,
                             const std::string& solver_b);

std::string format_report(const CompareReport& rep);

/// Prints resolved schedules without running; flags region sizes below their
/// schedule lower bounds. Returns an exit code.
int validate_config(const ExperimentConfig& cfg);

}  // namespace assg::bench
