// Benchmark harness: runs seeded solver replicas from a JSON config and emits
// CSV traces, a summary, and a schedule manifest.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "assg/bench.hpp"

namespace {

int guarded(int (*body)(const std::string&, const std::string&, int, double),
            const std::string& config, const std::string& out, int workers,
            double desk_scale) {
  try {
    return body(config, out, workers, desk_scale);
  } catch (const assg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

int do_run(const std::string& config, const std::string& out, int workers,
           double desk_scale) {
  auto cfg = assg::bench::parse_experiment_config(config);
  assg::bench::apply_overrides(cfg, out, workers, desk_scale);
  return assg::bench::run_experiment(cfg);
}

int do_validate(const std::string& config, const std::string&, int, double desk_scale) {
  auto cfg = assg::bench::parse_experiment_config(config);
  if (desk_scale > 0.0 && desk_scale != 1.0)
    for (auto& s : cfg.solvers) s.assg.desk_scale *= desk_scale;
  return assg::bench::validate_config(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic subgradient benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  double desk_scale = 1.0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (default: config out_dir or $ASSG_OUT_DIR)");
  run->add_option("--workers", workers, "parallel replica workers");
  run->add_option("--desk-scale-factor", desk_scale,
                  "extra multiplier on schedule-prescribed inner iterations");

  auto* validate = app.add_subcommand("validate", "resolve and print schedules without running");
  validate->add_option("--config", config_path, "experiment config (JSON)")->required();
  validate->add_option("--desk-scale-factor", desk_scale,
                       "extra multiplier on schedule-prescribed inner iterations");

  std::string cmp_dir, solver_a, solver_b;
  auto* compare = app.add_subcommand("compare", "paired comparison of two solvers' traces");
  compare->add_option("--traces", cmp_dir, "trace directory written by 'run'")->required();
  compare->add_option("--solver-a", solver_a, "first solver name")->required();
  compare->add_option("--solver-b", solver_b, "second solver name")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return guarded(do_run, config_path, out_dir, workers, desk_scale);
  if (validate->parsed())
    return guarded(do_validate, config_path, out_dir, workers, desk_scale);
  if (compare->parsed()) {
    try {
      const auto rep = assg::bench::compare_traces(cmp_dir, solver_a, solver_b);
      std::cout << assg::bench::format_report(rep);
      return 0;
    } catch (const assg::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }
  return 0;
}
