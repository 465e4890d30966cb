#include "assg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "assg/geometry.hpp"

namespace assg {

namespace {

constexpr double kRelSlack = 1e-9;   // rounding slack for runtime invariants
constexpr double kAbsSlack = 1e-12;
constexpr double kFeasTol = 1e-9;    // feasibility tolerance for supplied starts

void check_start(const Objective& obj, const Vector& w, const char* where) {
  if (w.size() != obj.dim())
    throw InvalidInput(std::string(where) + ": start dimension mismatch");
  if (!obj.domain.contains(w, kFeasTol))
    throw InvalidInput(std::string(where) + ": start point is not feasible");
}

std::int64_t desk_scaled(std::int64_t t_prescribed, double factor) {
  if (factor <= 0.0) throw ConfigError("desk_scale must be positive");
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(static_cast<double>(t_prescribed) * factor)));
}

void validate_common(const AssgConfig& cfg) {
  if (!(cfg.eps0 > 0.0) || !(cfg.eps > 0.0))
    throw ConfigError("config: eps0 and eps must be positive");
  if (cfg.eps > cfg.eps0) throw ConfigError("config: need eps <= eps0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ConfigError("config: delta must lie in (0, 1)");
  if (!(cfg.G > 0.0)) throw ConfigError("config: G must be positive");
  if (cfg.K_override && *cfg.K_override < 1)
    throw ConfigError("config: K_override must be >= 1");
  if (cfg.t_override && *cfg.t_override < 1)
    throw ConfigError("config: t_override must be >= 1");
}

double resolve_d1(const AssgConfig& cfg) {
  if (cfg.D1) {
    if (*cfg.D1 <= 0.0) throw ConfigError("config: D1 must be positive");
    return *cfg.D1;
  }
  if (cfg.c) {
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0))
      throw ConfigError("config: theta must lie in (0, 1]");
    return d1_lower_bound(*cfg.c, cfg.eps0, cfg.eps, cfg.theta);
  }
  throw ConfigError(
      "config: supply D1 or the growth constant c; with both unknown, run rassg");
}

double resolve_beta1(const AssgConfig& cfg) {
  if (cfg.beta1) {
    if (*cfg.beta1 <= 0.0) throw ConfigError("config: beta1 must be positive");
    return *cfg.beta1;
  }
  if (cfg.c) {
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0))
      throw ConfigError("config: theta must lie in (0, 1]");
    return beta1_lower_bound(*cfg.c, cfg.eps0, cfg.eps, cfg.theta);
  }
  throw ConfigError(
      "config: supply beta1 or the growth constant c; with both unknown, run rassg");
}

double resolve_rho(const AssgConfig& cfg, const Objective& obj) {
  if (cfg.rho) {
    if (*cfg.rho < 0.0) throw ConfigError("config: rho must be nonnegative");
    return *cfg.rho;
  }
  if (obj.reg.kind == RegKind::none) return 0.0;
  if (obj.rho > 0.0) return obj.rho;
  throw ConfigError("config: composite runs need rho (bound on regularizer subgradients)");
}

Vector resolve_w0(const AssgConfig& cfg, const Objective& obj) {
  if (cfg.w0) {
    check_start(obj, *cfg.w0, "config");
    return *cfg.w0;
  }
  return project(obj.domain, Vector::Zero(obj.dim()));
}

ScheduleEcho base_echo(const AssgConfig& cfg) {
  ScheduleEcho e;
  e.desk_scale = cfg.desk_scale;
  e.eps0 = cfg.eps0;
  e.eps = cfg.eps;
  e.delta = cfg.delta;
  e.G = cfg.G;
  e.theta = cfg.theta;
  e.rho = cfg.rho;
  e.c_hat = cfg.c_hat;
  return e;
}

struct StageState {
  Vector w;
  std::vector<StageRecord> trace;
  Diagnostics diag;
  std::int64_t cum_evals = 0;
  int next_stage = 1;
};

void record_stage(const Objective& obj, StageState& st, double eta, double region,
                  std::int64_t t, const std::optional<double>& f_star) {
  StageRecord rec;
  rec.stage = st.next_stage++;
  rec.eta = eta;
  rec.region = region;
  rec.inner_iters = t;
  rec.iterate = st.w;
  rec.objective = full_objective(obj, st.w);
  if (f_star) rec.gap = rec.objective - *f_star;
  rec.cum_evals = st.cum_evals;
  st.trace.push_back(std::move(rec));
}

// K stages of the ball-constrained inner loop; eta halves, D_k is supplied per
// stage (halving for the local variant, schedule-driven for the global one).
void run_ball_block(const Objective& obj, StageState& st, Rng64& master, double eta1,
                    const std::vector<double>& D_k, const std::vector<std::int64_t>& t_k,
                    bool prox, const std::optional<double>& f_star) {
  double eta = eta1;
  for (std::size_t k = 0; k < D_k.size(); ++k) {
    const std::uint64_t stage_seed = master.next_u64();
    InnerResult inner = prox
                            ? prox_inner(obj, st.w, D_k[k], eta, t_k[k], stage_seed)
                            : inner_ball_ssg(obj, st.w, D_k[k], eta, t_k[k], stage_seed);
    if (inner.diag.max_anchor_dist > D_k[k] + kTolProx) ++inner.diag.region_violations;
    st.w = std::move(inner.average);
    st.diag.merge(inner.diag);
    st.cum_evals += inner.evals;
    record_stage(obj, st, eta, D_k[k], t_k[k], f_star);
    eta *= 0.5;
  }
}

// K stages of the regularized inner loop; beta halves between stages.
void run_reg_block(const Objective& obj, StageState& st, Rng64& master, int K,
                   double beta1, std::int64_t t, bool prox,
                   const std::optional<double>& f_star) {
  double beta = beta1;
  for (int k = 0; k < K; ++k) {
    const std::uint64_t stage_seed = master.next_u64();
    InnerResult inner = prox ? prox_ssgs(obj, st.w, beta, t, stage_seed)
                             : ssgs(obj, st.w, beta, t, stage_seed);
    st.w = std::move(inner.average);
    st.diag.merge(inner.diag);
    st.cum_evals += inner.evals;
    record_stage(obj, st, 2.0 * beta, beta, t, f_star);
    beta *= 0.5;
  }
}

RunResult finish(std::string name, const AssgConfig& cfg, StageState&& st,
                 ScheduleEcho echo) {
  RunResult out;
  out.final_iterate = std::move(st.w);
  out.trace = std::move(st.trace);
  out.total_evals = st.cum_evals;
  out.solver = std::move(name);
  out.schedule = std::move(echo);
  out.seed = cfg.seed;
  out.diag = st.diag;
  return out;
}

}  // namespace

void Diagnostics::merge(const Diagnostics& other) {
  g_max_observed = std::max(g_max_observed, other.g_max_observed);
  g_bound_violations += other.g_bound_violations;
  confinement_violations += other.confinement_violations;
  region_violations += other.region_violations;
  max_anchor_dist = std::max(max_anchor_dist, other.max_anchor_dist);
}

int compute_stage_count(double eps0, double eps) {
  if (!(eps0 > 0.0) || !(eps > 0.0))
    throw ConfigError("compute_stage_count: eps0, eps must be positive");
  if (eps > eps0) throw ConfigError("compute_stage_count: need eps <= eps0");
  const double ratio = eps0 / eps;
  int k = static_cast<int>(std::ceil(std::log2(ratio)));
  while (k > 0 && std::exp2(static_cast<double>(k - 1)) >= ratio) --k;
  while (std::exp2(static_cast<double>(k)) < ratio) ++k;
  return std::max(1, k);
}

std::int64_t compute_t_assg_c(double G, double D1, double eps0, double delta_tilde) {
  if (!(G > 0.0) || !(D1 > 0.0) || !(eps0 > 0.0))
    throw ConfigError("compute_t_assg_c: G, D1, eps0 must be positive");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw ConfigError("compute_t_assg_c: delta_tilde must lie in (0, 1)");
  const double raw = std::max(9.0, 1728.0 * std::log(1.0 / delta_tilde)) *
                     (G * G * D1 * D1) / (eps0 * eps0);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
}

namespace {

// Least t with t >= f(t) for a threshold growing logarithmically in t.
std::int64_t fixed_point_threshold(double coeff, double eps0, double delta_tilde) {
  std::int64_t t = 3;
  for (int round = 0; round < 50; ++round) {
    const double td = static_cast<double>(t);
    const double needed = std::max(
        3.0, coeff * (1.0 + std::log(4.0 * std::log(td) / delta_tilde) + std::log(td)) / eps0);
    const auto t_next = static_cast<std::int64_t>(std::ceil(needed));
    if (t_next <= t) break;
    t = t_next;
  }
  return t;
}

}  // namespace

std::int64_t compute_t_assg_r(double beta1, double G, double eps0, double delta_tilde) {
  if (!(beta1 > 0.0) || !(G > 0.0) || !(eps0 > 0.0))
    throw ConfigError("compute_t_assg_r: beta1, G, eps0 must be positive");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw ConfigError("compute_t_assg_r: delta_tilde must lie in (0, 1)");
  return fixed_point_threshold(136.0 * beta1 * G * G, eps0, delta_tilde);
}

std::int64_t compute_t_prox_assg_c(double G, double D1, double eps0, double rho,
                                   double delta_tilde) {
  if (!(G > 0.0) || !(D1 > 0.0) || !(eps0 > 0.0) || rho < 0.0)
    throw ConfigError("compute_t_prox_assg_c: bad arguments");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw ConfigError("compute_t_prox_assg_c: delta_tilde must lie in (0, 1)");
  const double term1 = std::max(16.0, 3072.0 * std::log(1.0 / delta_tilde)) *
                       (G * G * D1 * D1) / (eps0 * eps0);
  const double term2 = 8.0 * rho * D1 / eps0;
  return std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(std::max(term1, term2))));
}

std::int64_t compute_t_prox_assg_r(double beta1, double G, double rho, double eps0,
                                   double delta_tilde) {
  if (!(beta1 > 0.0) || !(G > 0.0) || !(eps0 > 0.0) || rho < 0.0)
    throw ConfigError("compute_t_prox_assg_r: bad arguments");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw ConfigError("compute_t_prox_assg_r: delta_tilde must lie in (0, 1)");
  const double gp = G + rho;
  return fixed_point_threshold(136.0 * beta1 * gp * gp, eps0, delta_tilde);
}

std::int64_t compute_t_global(double G, double c_hat, double delta_tilde, double eps_k) {
  if (!(G > 0.0) || !(c_hat > 0.0) || !(eps_k > 0.0))
    throw ConfigError("compute_t_global: bad arguments");
  if (!(delta_tilde > 0.0 && delta_tilde < 1.0))
    throw ConfigError("compute_t_global: delta_tilde must lie in (0, 1)");
  const double raw = 6912.0 * G * G * c_hat * c_hat * std::log(1.0 / delta_tilde) *
                     std::max(1.0, 1.0 / eps_k);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
}

std::pair<double, double> rassg_growth(double theta) {
  if (theta < 0.0 || theta > 1.0) throw ConfigError("rassg_growth: theta must lie in [0, 1]");
  return {std::exp2(2.0 * (1.0 - theta)), std::exp2(1.0 - theta)};
}

double d1_lower_bound(double c, double eps0, double eps, double theta) {
  return c * eps0 / std::pow(eps, 1.0 - theta);
}

double beta1_lower_bound(double c, double eps0, double eps, double theta) {
  return 2.0 * c * c * eps0 / std::pow(eps, 2.0 * (1.0 - theta));
}

double ssg_step_size(double B, double G, std::int64_t T) {
  if (!(B > 0.0) || !(G > 0.0) || T < 1) throw ConfigError("ssg_step_size: bad arguments");
  return B / (G * std::sqrt(static_cast<double>(T)));
}

RunResult ssg(const Objective& obj, const Vector& w0, std::int64_t steps, double eta,
              std::uint64_t seed, std::optional<double> f_star, int checkpoints) {
  if (steps < 1) throw ConfigError("ssg: steps must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("ssg: invalid step size");
  check_start(obj, w0, "ssg");

  std::vector<std::int64_t> cps;
  for (int j = 1; j <= checkpoints; ++j) {
    const double e = static_cast<double>(j) / static_cast<double>(checkpoints);
    auto cp = static_cast<std::int64_t>(
        std::llround(std::pow(static_cast<double>(steps), e)));
    cp = std::clamp<std::int64_t>(cp, 1, steps);
    if (cps.empty() || cp > cps.back()) cps.push_back(cp);
  }
  if (cps.empty() || cps.back() != steps) cps.push_back(steps);

  Rng64 rng(seed);
  Vector w = w0;
  Vector g(w.size());
  Vector sum = Vector::Zero(w.size());
  RunResult out;
  out.solver = "ssg";
  out.seed = seed;
  std::size_t next_cp = 0;
  const bool needs_projection = obj.domain.kind() != Domain::Kind::all_space;
  for (std::int64_t t = 1; t <= steps; ++t) {
    sum += w;
    stochastic_subgrad_into(obj, w, rng, g);
    const double gn = g.norm();
    out.diag.g_max_observed = std::max(out.diag.g_max_observed, gn);
    if (gn > obj.G * (1.0 + kRelSlack) + kAbsSlack) ++out.diag.g_bound_violations;
    w -= eta * g;
    if (needs_projection) w = project(obj.domain, w);
    if (next_cp < cps.size() && t == cps[next_cp]) {
      StageRecord rec;
      rec.stage = static_cast<int>(next_cp) + 1;
      rec.eta = eta;
      rec.region = std::numeric_limits<double>::quiet_NaN();
      rec.inner_iters = t;
      rec.iterate = sum / static_cast<double>(t);
      rec.objective = full_objective(obj, rec.iterate);
      if (f_star) rec.gap = rec.objective - *f_star;
      rec.cum_evals = t;
      out.trace.push_back(std::move(rec));
      ++next_cp;
    }
  }
  out.final_iterate = sum / static_cast<double>(steps);
  out.total_evals = steps;
  out.schedule.K = 1;
  out.schedule.t_prescribed = steps;
  out.schedule.t_effective = steps;
  out.schedule.eta1 = eta;
  return out;
}

InnerResult inner_ball_ssg(const Objective& obj, const Vector& w1, double D, double eta,
                           std::int64_t t, std::uint64_t seed,
                           std::vector<Vector>* iterates) {
  if (t < 1) throw ConfigError("inner_ball_ssg: t must be >= 1");
  if (!(D > 0.0)) throw InvalidInput("inner_ball_ssg: D must be positive");
  if (!(eta > 0.0)) throw ConfigError("inner_ball_ssg: invalid step size");
  check_start(obj, w1, "inner_ball_ssg");

  const Ball ball(w1, D);
  Rng64 rng(seed);
  Vector w = w1;
  Vector g(w.size());
  Vector sum = Vector::Zero(w.size());
  InnerResult res;
  const bool all_space = obj.domain.kind() == Domain::Kind::all_space;
  for (std::int64_t tau = 1; tau <= t; ++tau) {
    if (iterates) iterates->push_back(w);
    sum += w;
    stochastic_subgrad_into(obj, w, rng, g);
    const double gn = g.norm();
    res.diag.g_max_observed = std::max(res.diag.g_max_observed, gn);
    if (gn > obj.G * (1.0 + kRelSlack) + kAbsSlack) ++res.diag.g_bound_violations;
    w -= eta * g;
    if (all_space) {
      const double dist = (w - ball.center).norm();
      if (dist > ball.radius)
        w = ball.center + (w - ball.center) * (ball.radius / dist);
    } else {
      w = project_intersection(obj.domain, ball, w);
    }
    res.diag.max_anchor_dist = std::max(res.diag.max_anchor_dist, (w - w1).norm());
  }
  res.average = sum / static_cast<double>(t);
  res.evals = t;
  return res;
}

namespace {

// Shared update body for the regularized loops, so the plain and composite
// variants stay bit-identical when the regularizer degenerates.
InnerResult reg_loop(const Objective& obj, const Vector& w1, double beta, std::int64_t T,
                     std::uint64_t seed, bool prox, double rho_term,
                     std::vector<Vector>* iterates) {
  Rng64 rng(seed);
  Vector w = w1;
  Vector g(w.size());
  Vector sum = Vector::Zero(w.size());
  InnerResult res;
  const bool needs_projection = !prox && obj.domain.kind() != Domain::Kind::all_space;
  for (std::int64_t t = 1; t <= T; ++t) {
    if (iterates) iterates->push_back(w);
    sum += w;
    stochastic_subgrad_into(obj, w, rng, g);
    const double gn = g.norm();
    res.diag.g_max_observed = std::max(res.diag.g_max_observed, gn);
    if (gn > obj.G * (1.0 + kRelSlack) + kAbsSlack) ++res.diag.g_bound_violations;
    const double a = 2.0 / static_cast<double>(t);
    w = (1.0 - a) * w + a * w1 - (a * beta) * g;
    if (prox) {
      if (obj.reg.kind != RegKind::none) w = prox_reg(obj.reg, a * beta, w);
    } else if (needs_projection) {
      w = project(obj.domain, w);
    }
    const double dist = (w - w1).norm();
    res.diag.max_anchor_dist = std::max(res.diag.max_anchor_dist, dist);
    const double bound = 2.0 * beta * (res.diag.g_max_observed + rho_term);
    if (dist > bound * (1.0 + kRelSlack) + kAbsSlack) ++res.diag.confinement_violations;
  }
  res.average = sum / static_cast<double>(T);
  res.evals = T;
  return res;
}

}  // namespace

InnerResult ssgs(const Objective& obj, const Vector& w1, double beta, std::int64_t T,
                 std::uint64_t seed, std::vector<Vector>* iterates) {
  if (!(beta > 0.0)) throw ConfigError("ssgs: beta must be positive");
  if (T < 1) throw ConfigError("ssgs: T must be >= 1");
  check_start(obj, w1, "ssgs");
  return reg_loop(obj, w1, beta, T, seed, /*prox=*/false, /*rho_term=*/0.0, iterates);
}

InnerResult prox_inner(const Objective& obj, const Vector& w1, double D, double eta,
                       std::int64_t t, std::uint64_t seed, std::vector<Vector>* iterates) {
  if (obj.mode != Mode::composite)
    throw ConfigError("prox_inner: objective must be in composite mode");
  if (obj.domain.kind() != Domain::Kind::all_space)
    throw ConfigError("prox_inner: composite problems are unconstrained");
  if (t < 1) throw ConfigError("prox_inner: t must be >= 1");
  if (!(D > 0.0)) throw InvalidInput("prox_inner: D must be positive");
  if (!(eta > 0.0)) throw ConfigError("prox_inner: invalid step size");
  check_start(obj, w1, "prox_inner");

  const Ball ball(w1, D);
  Rng64 rng(seed);
  Vector w = w1;
  Vector g(w.size());
  Vector sum = Vector::Zero(w.size());
  InnerResult res;
  for (std::int64_t tau = 1; tau <= t; ++tau) {
    if (iterates) iterates->push_back(w);
    sum += w;
    stochastic_subgrad_into(obj, w, rng, g);
    const double gn = g.norm();
    res.diag.g_max_observed = std::max(res.diag.g_max_observed, gn);
    if (gn > obj.G * (1.0 + kRelSlack) + kAbsSlack) ++res.diag.g_bound_violations;
    w -= eta * g;
    if (obj.reg.kind == RegKind::none) {
      const double dist = (w - ball.center).norm();
      if (dist > ball.radius)
        w = ball.center + (w - ball.center) * (ball.radius / dist);
    } else {
      w = prox_reg_ball(obj.reg, eta, ball, w);
    }
    res.diag.max_anchor_dist = std::max(res.diag.max_anchor_dist, (w - w1).norm());
  }
  res.average = sum / static_cast<double>(t);
  res.evals = t;
  return res;
}

InnerResult prox_ssgs(const Objective& obj, const Vector& w1, double beta, std::int64_t T,
                      std::uint64_t seed, std::vector<Vector>* iterates) {
  if (obj.mode != Mode::composite)
    throw ConfigError("prox_ssgs: objective must be in composite mode");
  if (obj.domain.kind() != Domain::Kind::all_space)
    throw ConfigError("prox_ssgs: composite problems are unconstrained");
  if (!(beta > 0.0)) throw ConfigError("prox_ssgs: beta must be positive");
  if (T < 1) throw ConfigError("prox_ssgs: T must be >= 1");
  check_start(obj, w1, "prox_ssgs");
  return reg_loop(obj, w1, beta, T, seed, /*prox=*/true, /*rho_term=*/obj.rho, iterates);
}

RunResult assg_c(const AssgConfig& cfg, const Objective& obj) {
  validate_common(cfg);
  if (obj.mode != Mode::plain)
    throw ConfigError("assg_c: use prox_assg_c for composite objectives");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_tilde = cfg.delta / K;
  const double D1 = resolve_d1(cfg);
  const std::int64_t t_thm = compute_t_assg_c(cfg.G, D1, cfg.eps0, delta_tilde);
  const std::int64_t t = cfg.t_override ? *cfg.t_override : desk_scaled(t_thm, cfg.desk_scale);
  const double eta1 = cfg.eps0 / (3.0 * cfg.G * cfg.G);

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  std::vector<double> D_k(static_cast<std::size_t>(K));
  double d = D1;
  for (auto& v : D_k) {
    v = d;
    d *= 0.5;
  }
  run_ball_block(obj, st, master, eta1, D_k,
                 std::vector<std::int64_t>(static_cast<std::size_t>(K), t),
                 /*prox=*/false, cfg.f_star_ref);

  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.t_prescribed = t_thm;
  echo.t_effective = t;
  echo.eta1 = eta1;
  echo.D1 = D1;
  return finish("assg_c", cfg, std::move(st), std::move(echo));
}

RunResult assg_r(const AssgConfig& cfg, const Objective& obj) {
  validate_common(cfg);
  if (obj.mode != Mode::plain)
    throw ConfigError("assg_r: use prox_assg_r for composite objectives");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_tilde = cfg.delta / K;
  const double beta1 = resolve_beta1(cfg);
  const std::int64_t t_thm = compute_t_assg_r(beta1, cfg.G, cfg.eps0, delta_tilde);
  const std::int64_t t = cfg.t_override ? *cfg.t_override : desk_scaled(t_thm, cfg.desk_scale);

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  run_reg_block(obj, st, master, K, beta1, t, /*prox=*/false, cfg.f_star_ref);

  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.t_prescribed = t_thm;
  echo.t_effective = t;
  echo.beta1 = beta1;
  echo.eta1 = 2.0 * beta1;  // first inner step size
  return finish("assg_r", cfg, std::move(st), std::move(echo));
}

RunResult rassg(const AssgConfig& cfg, const Objective& obj, RassgMode mode) {
  validate_common(cfg);
  if (obj.mode != Mode::plain) throw ConfigError("rassg: composite objectives unsupported");
  const double theta_eff = mode == RassgMode::theta_zero ? 0.0 : cfg.theta;
  if (mode == RassgMode::known_theta && !(cfg.theta > 0.0 && cfg.theta <= 1.0))
    throw ConfigError("rassg: theta must lie in (0, 1]");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_hat = cfg.delta / (static_cast<double>(K) * (K + 1.0));
  if (!cfg.D1_initial || !(*cfg.D1_initial > 0.0))
    throw ConfigError("rassg: supply a positive initial region D1_initial");
  double D1s = *cfg.D1_initial;
  std::int64_t t_s = cfg.t1 ? *cfg.t1
                            : desk_scaled(compute_t_assg_c(cfg.G, D1s, cfg.eps0, delta_hat),
                                          cfg.desk_scale);
  if (t_s < 1) throw ConfigError("rassg: t1 must be >= 1");
  int S = cfg.S_override.value_or(
      std::max(1, static_cast<int>(std::ceil(std::log2(cfg.eps0 / (2.0 * cfg.eps)))) + 1));
  const double eta1 = cfg.eps0 / (3.0 * cfg.G * cfg.G);
  const auto [t_factor, d_factor] = rassg_growth(theta_eff);

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.S = S;
  echo.eta1 = eta1;
  echo.theta = theta_eff;
  for (int s = 1; s <= S; ++s) {
    std::vector<double> D_k(static_cast<std::size_t>(K));
    double d = D1s;
    for (auto& v : D_k) {
      v = d;
      d *= 0.5;
    }
    run_ball_block(obj, st, master, eta1, D_k,
                   std::vector<std::int64_t>(static_cast<std::size_t>(K), t_s),
                   /*prox=*/false, cfg.f_star_ref);
    echo.restart_iters.push_back(t_s);
    echo.restart_regions.push_back(D1s);
    t_s = static_cast<std::int64_t>(std::ceil(static_cast<double>(t_s) * t_factor));
    D1s *= d_factor;
  }
  echo.D1 = *cfg.D1_initial;
  echo.t_prescribed = echo.restart_iters.front();
  return finish(mode == RassgMode::theta_zero ? "rassg_theta0" : "rassg", cfg,
                std::move(st), std::move(echo));
}

RunResult prox_assg_c(const AssgConfig& cfg, const Objective& obj) {
  validate_common(cfg);
  if (obj.mode != Mode::composite)
    throw ConfigError("prox_assg_c: objective must be in composite mode");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_tilde = cfg.delta / K;
  const double D1 = resolve_d1(cfg);
  const double rho = resolve_rho(cfg, obj);
  const std::int64_t t_thm = compute_t_prox_assg_c(cfg.G, D1, cfg.eps0, rho, delta_tilde);
  const std::int64_t t = cfg.t_override ? *cfg.t_override : desk_scaled(t_thm, cfg.desk_scale);
  const double eta1 = cfg.eps0 / (4.0 * cfg.G * cfg.G);

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  std::vector<double> D_k(static_cast<std::size_t>(K));
  double d = D1;
  for (auto& v : D_k) {
    v = d;
    d *= 0.5;
  }
  run_ball_block(obj, st, master, eta1, D_k,
                 std::vector<std::int64_t>(static_cast<std::size_t>(K), t),
                 /*prox=*/true, cfg.f_star_ref);

  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.t_prescribed = t_thm;
  echo.t_effective = t;
  echo.eta1 = eta1;
  echo.D1 = D1;
  echo.rho = rho;
  return finish("prox_assg_c", cfg, std::move(st), std::move(echo));
}

RunResult prox_assg_r(const AssgConfig& cfg, const Objective& obj) {
  validate_common(cfg);
  if (obj.mode != Mode::composite)
    throw ConfigError("prox_assg_r: objective must be in composite mode");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_tilde = cfg.delta / K;
  const double beta1 = resolve_beta1(cfg);
  const double rho = resolve_rho(cfg, obj);
  const std::int64_t t_thm =
      compute_t_prox_assg_r(beta1, cfg.G, rho, cfg.eps0, delta_tilde);
  const std::int64_t t = cfg.t_override ? *cfg.t_override : desk_scaled(t_thm, cfg.desk_scale);

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  run_reg_block(obj, st, master, K, beta1, t, /*prox=*/true, cfg.f_star_ref);

  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.t_prescribed = t_thm;
  echo.t_effective = t;
  echo.beta1 = beta1;
  echo.eta1 = 2.0 * beta1;
  echo.rho = rho;
  return finish("prox_assg_r", cfg, std::move(st), std::move(echo));
}

RunResult assg_c_global(const AssgConfig& cfg, const Objective& obj) {
  validate_common(cfg);
  if (obj.mode != Mode::plain)
    throw ConfigError("assg_c_global: composite objectives unsupported");
  if (!cfg.c_hat || !(*cfg.c_hat > 0.0))
    throw ConfigError("assg_c_global: supply a positive c_hat");
  const int K = cfg.K_override.value_or(compute_stage_count(cfg.eps0, cfg.eps));
  const double delta_tilde = cfg.delta / K;
  const double eta1 = cfg.eps0 / (3.0 * cfg.G * cfg.G);

  std::vector<double> D_k(static_cast<std::size_t>(K));
  std::vector<std::int64_t> t_k(static_cast<std::size_t>(K));
  double eps_prev = cfg.eps0;
  for (int k = 1; k <= K; ++k) {
    const double eps_k = cfg.eps0 / std::exp2(static_cast<double>(k));
    D_k[static_cast<std::size_t>(k - 1)] =
        *cfg.c_hat * (eps_prev + std::sqrt(eps_prev));
    const std::int64_t tk_thm = compute_t_global(cfg.G, *cfg.c_hat, delta_tilde, eps_k);
    t_k[static_cast<std::size_t>(k - 1)] =
        cfg.t_override ? *cfg.t_override : desk_scaled(tk_thm, cfg.desk_scale);
    eps_prev = eps_k;
  }

  StageState st;
  st.w = resolve_w0(cfg, obj);
  Rng64 master(cfg.seed);
  run_ball_block(obj, st, master, eta1, D_k, t_k, /*prox=*/false, cfg.f_star_ref);

  ScheduleEcho echo = base_echo(cfg);
  echo.K = K;
  echo.eta1 = eta1;
  echo.D1 = D_k.front();
  echo.stage_iters = t_k;
  echo.t_prescribed = compute_t_global(cfg.G, *cfg.c_hat, delta_tilde, cfg.eps0 / 2.0);
  return finish("assg_c_global", cfg, std::move(st), std::move(echo));
}

}  // namespace assg
