#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "assg/problems.hpp"
#include "assg/rng.hpp"

namespace assg {

/// Inputs for the staged solvers. eps0 bounds the initial gap F(w0) - F*,
/// eps is the target, delta the failure probability. Region sizes resolve
/// from explicit D1/beta1 when given, otherwise from the growth constant c;
/// when neither is available the staged solvers refuse and point at rassg.
struct AssgConfig {
  double eps0 = 1.0;
  double eps = 1e-3;
  double delta = 0.1;
  double G = 1.0;
  double theta = 1.0;
  std::optional<double> c;
  std::optional<double> D1;
  std::optional<double> beta1;
  std::optional<std::int64_t> t_override;  // honored verbatim, no desk scaling
  std::optional<int> K_override;
  std::uint64_t seed = 0;
  std::optional<double> rho;    // composite variants
  std::optional<double> c_hat;  // global-error-bound variant
  double desk_scale = 1.0;      // multiplier on schedule-prescribed inner iterations
  std::optional<Vector> w0;
  std::optional<double> f_star_ref;  // enables gap entries in the trace

  // restarting driver
  std::optional<double> D1_initial;
  std::optional<std::int64_t> t1;
  std::optional<int> S_override;
};

struct StageRecord {
  int stage = 0;
  double eta = 0.0;
  double region = 0.0;  // D_k (ball variants) or beta_k (regularized variants)
  std::int64_t inner_iters = 0;
  Vector iterate;
  double objective = 0.0;
  std::optional<double> gap;
  std::int64_t cum_evals = 0;
};

struct Diagnostics {
  double g_max_observed = 0.0;
  std::int64_t g_bound_violations = 0;       // ||g|| exceeded the configured G
  std::int64_t confinement_violations = 0;   // regularized-variant anchor bound broken
  std::int64_t region_violations = 0;        // stage iterate left its ball region
  double max_anchor_dist = 0.0;

  void merge(const Diagnostics& other);
};

/// Resolved schedule, echoed for auditability of every run.
struct ScheduleEcho {
  int K = 0;
  std::int64_t t_prescribed = 0;    // schedule formula value before desk scaling
  std::int64_t t_effective = 0;  // value actually run per stage (0 when it varies)
  std::vector<std::int64_t> stage_iters;  // per-stage iterations when they vary
  double eta1 = 0.0;
  std::optional<double> D1;
  std::optional<double> beta1;
  int S = 0;  // restart count (restarting driver)
  std::vector<std::int64_t> restart_iters;
  std::vector<double> restart_regions;
  double desk_scale = 1.0;
  double eps0 = 0.0, eps = 0.0, delta = 0.0, G = 0.0, theta = 0.0;
  std::optional<double> rho;
  std::optional<double> c_hat;
  std::string rng_algorithm = Rng64::kAlgorithmId;
};

struct RunResult {
  Vector final_iterate;
  std::vector<StageRecord> trace;
  std::int64_t total_evals = 0;
  std::string solver;
  ScheduleEcho schedule;
  std::uint64_t seed = 0;
  Diagnostics diag;
};

struct InnerResult {
  Vector average;
  std::int64_t evals = 0;
  Diagnostics diag;
};

// ---- schedule formulas ----

/// max(1, smallest K with 2^K >= eps0/eps).
int compute_stage_count(double eps0, double eps);

/// Smallest t with t >= max{9, 1728 ln(1/delta_tilde)} G^2 D1^2 / eps0^2.
std::int64_t compute_t_assg_c(double G, double D1, double eps0, double delta_tilde);

/// Smallest t with t >= max{3, 136 beta1 G^2 (1 + ln(4 ln t / delta_tilde) + ln t) / eps0},
/// resolved by fixed-point iteration from t = 3.
std::int64_t compute_t_assg_r(double beta1, double G, double eps0, double delta_tilde);

/// Smallest t with t >= max{max(16, 3072 ln(1/delta_tilde)) G^2 D1^2 / eps0^2,
///                          8 rho D1 / eps0}.
std::int64_t compute_t_prox_assg_c(double G, double D1, double eps0, double rho,
                                   double delta_tilde);

/// Regularized composite threshold: (G + rho)^2 replaces G^2 in the fixed point.
std::int64_t compute_t_prox_assg_r(double beta1, double G, double rho, double eps0,
                                   double delta_tilde);

/// Smallest t_k with t_k >= 6912 G^2 c_hat^2 ln(1/delta_tilde) max{1, 1/eps_k}.
std::int64_t compute_t_global(double G, double c_hat, double delta_tilde, double eps_k);

/// Per-restart growth (t factor, region factor) = (2^{2(1-theta)}, 2^{1-theta}).
std::pair<double, double> rassg_growth(double theta);

double d1_lower_bound(double c, double eps0, double eps, double theta);
double beta1_lower_bound(double c, double eps0, double eps, double theta);

/// Constant step B/(G sqrt(T)) for the plain baseline.
double ssg_step_size(double B, double G, std::int64_t T);

// ---- solvers ----

/// Projected stochastic subgradient baseline with constant step; returns the
/// uniform average of the first `steps` iterates, with objective checkpoints
/// on a geometric evaluation grid.
RunResult ssg(const Objective& obj, const Vector& w0, std::int64_t steps, double eta,
              std::uint64_t seed, std::optional<double> f_star = std::nullopt,
              int checkpoints = 24);

/// t steps of w <- Pi_{domain ∩ B(w1, D)}[w - eta g]; returns the uniform
/// average of the first t iterates. Every iterate stays inside the ball.
/// `iterates`, when non-null, receives the visited points.
InnerResult inner_ball_ssg(const Objective& obj, const Vector& w1, double D, double eta,
                           std::int64_t t, std::uint64_t seed,
                           std::vector<Vector>* iterates = nullptr);

/// Stochastic subgradient on F(w) + ||w - w1||^2 / (2 beta) with step 2 beta / t;
/// the quadratic term confines iterates to ||w_t - w1|| <= 2 beta G, checked
/// every iteration against the running max observed subgradient norm.
InnerResult ssgs(const Objective& obj, const Vector& w1, double beta, std::int64_t T,
                 std::uint64_t seed, std::vector<Vector>* iterates = nullptr);

/// Composite counterpart of inner_ball_ssg: the projection becomes the
/// ball-constrained prox of the regularizer.
InnerResult prox_inner(const Objective& obj, const Vector& w1, double D, double eta,
                       std::int64_t t, std::uint64_t seed,
                       std::vector<Vector>* iterates = nullptr);

/// Composite counterpart of ssgs; confinement bound 2 beta (G + rho).
InnerResult prox_ssgs(const Objective& obj, const Vector& w1, double beta, std::int64_t T,
                      std::uint64_t seed, std::vector<Vector>* iterates = nullptr);

enum class RassgMode { known_theta, theta_zero };

/// Stage-wise ball-constrained solver: K stages of inner_ball_ssg with eta and
/// D halved between stages.
RunResult assg_c(const AssgConfig& cfg, const Objective& obj);

/// Stage-wise regularized solver: K stages of ssgs with beta halved.
RunResult assg_r(const AssgConfig& cfg, const Objective& obj);

/// Restarting driver for unknown growth constants: repeated assg_c calls with
/// geometrically growing inner budget and region.
RunResult rassg(const AssgConfig& cfg, const Objective& obj, RassgMode mode);

/// Composite stage-wise solver using the ball-constrained prox.
RunResult prox_assg_c(const AssgConfig& cfg, const Objective& obj);

/// Composite regularized stage-wise solver.
RunResult prox_assg_r(const AssgConfig& cfg, const Objective& obj);

/// Stage-wise solver under the global error bound for piecewise convex
/// quadratic objectives: stage regions c_hat (eps_{k-1} + sqrt(eps_{k-1})) and
/// stage-varying iteration counts.
RunResult assg_c_global(const AssgConfig& cfg, const Objective& obj);

}  // namespace assg
