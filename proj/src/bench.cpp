#include "assg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace assg::bench {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// ---- schema helpers -------------------------------------------------------

std::size_t line_of_offset(const std::string& raw, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < raw.size(); ++i)
    if (raw[i] == '\n') ++line;
  return line;
}

std::size_t line_of_key(const std::string& raw, const std::string& key) {
  const auto pos = raw.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(raw, pos);
}

struct SchemaCtx {
  const std::string* raw = nullptr;
  std::string file;

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = file;
    const std::size_t line = raw ? line_of_key(*raw, key) : 0;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + msg);
  }
};

void ensure_keys(const json& j, const SchemaCtx& ctx, const std::string& where,
                 const std::set<std::string>& allowed) {
  if (!j.is_object()) ctx.fail(where, where + " must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      ctx.fail(item.key(), "unknown key '" + item.key() + "' in " + where);
}

template <typename T>
T require(const json& j, const SchemaCtx& ctx, const std::string& key) {
  if (!j.contains(key)) ctx.fail(key, "missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    ctx.fail(key, "bad value type for '" + key + "'");
  }
}

template <typename T>
std::optional<T> maybe(const json& j, const SchemaCtx& ctx, const std::string& key) {
  if (!j.contains(key)) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    ctx.fail(key, "bad value type for '" + key + "'");
  }
}

Loss parse_loss(const std::string& name, std::optional<double> param, const SchemaCtx& ctx) {
  if (name == "hinge") return Loss::hinge();
  if (name == "absolute") return Loss::absolute();
  if (name == "eps_insensitive") return Loss::eps_insensitive(param.value_or(0.1));
  if (name == "huber") return Loss::huber(param.value_or(1.0));
  if (name == "squared_hinge") return Loss::squared_hinge();
  if (name == "square") return Loss::square();
  ctx.fail("loss", "unknown loss '" + name + "'");
}

Regularizer parse_reg(const std::string& name, double lambda, double delta,
                      const SchemaCtx& ctx) {
  if (name == "none") return Regularizer::none();
  if (name == "l1") return Regularizer::l1(lambda);
  if (name == "linf") return Regularizer::linf(lambda);
  if (name == "huber_norm") return Regularizer::huber_norm(lambda, delta);
  ctx.fail("regularizer", "unknown regularizer '" + name + "'");
}

SynthFamily parse_family(const std::string& name, const SchemaCtx& ctx) {
  if (name == "separable-classification") return SynthFamily::separable_classification;
  if (name == "robust-regression") return SynthFamily::robust_regression;
  if (name == "least-squares") return SynthFamily::least_squares;
  if (name == "streaming-gaussian-regression")
    return SynthFamily::streaming_gaussian_regression;
  if (name == "scalar") return SynthFamily::scalar;
  ctx.fail("family", "unknown synthetic family '" + name + "'");
}

const std::set<std::string> kSolverNames = {
    "ssg",         "assg_c",      "ssgs",        "assg_r",       "rassg",
    "rassg_theta0", "prox_assg_c", "prox_ssgs",   "prox_assg_r",  "assg_c_global"};

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string raw = ss.str();
  SchemaCtx ctx{&raw, path};

  json j;
  try {
    j = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_of_offset(raw, e.byte)) +
                      ": JSON parse error: " + e.what());
  }

  ensure_keys(j, ctx, "config",
              {"version", "problem", "solvers", "replicas", "seed", "out_dir", "workers",
               "desk_scale", "record_wall_ms", "reference"});
  ExperimentConfig cfg;
  cfg.version = require<int>(j, ctx, "version");
  if (cfg.version != 1) ctx.fail("version", "unsupported config version");

  // problem block
  if (!j.contains("problem")) ctx.fail("problem", "missing required key 'problem'");
  const json& jp = j.at("problem");
  const std::string source = require<std::string>(jp, ctx, "source");
  ProblemConfig& pc = cfg.problem;
  if (source == "synthetic") {
    ensure_keys(jp, ctx, "problem",
                {"source", "family", "loss", "loss_param", "regularizer", "lambda",
                 "reg_delta", "mode", "n", "d", "margin", "noise", "outlier_fraction",
                 "planted_scale", "cov_diag", "seed", "G"});
    pc.source = ProblemConfig::Source::synthetic;
    SyntheticSpec& s = pc.synth;
    s.family = parse_family(require<std::string>(jp, ctx, "family"), ctx);
    if (auto n = maybe<int>(jp, ctx, "n")) s.n = *n;
    if (auto d = maybe<int>(jp, ctx, "d")) s.d = *d;
    if (auto v = maybe<double>(jp, ctx, "margin")) s.margin = *v;
    if (auto v = maybe<double>(jp, ctx, "noise")) s.noise = *v;
    if (auto v = maybe<double>(jp, ctx, "outlier_fraction")) s.outlier_fraction = *v;
    if (auto v = maybe<double>(jp, ctx, "planted_scale")) s.planted_scale = *v;
    if (auto name = maybe<std::string>(jp, ctx, "loss"))
      s.loss = parse_loss(*name, maybe<double>(jp, ctx, "loss_param"), ctx);
    s.reg = parse_reg(maybe<std::string>(jp, ctx, "regularizer").value_or("none"),
                      maybe<double>(jp, ctx, "lambda").value_or(0.0),
                      maybe<double>(jp, ctx, "reg_delta").value_or(1.0), ctx);
    if (auto mode = maybe<std::string>(jp, ctx, "mode")) {
      if (*mode == "plain")
        s.mode = Mode::plain;
      else if (*mode == "composite")
        s.mode = Mode::composite;
      else
        ctx.fail("mode", "mode must be 'plain' or 'composite'");
    }
    if (auto cov = maybe<std::vector<double>>(jp, ctx, "cov_diag")) {
      s.cov_diag = Eigen::Map<const Vector>(cov->data(),
                                            static_cast<Eigen::Index>(cov->size()));
    }
    if (auto g = maybe<double>(jp, ctx, "G")) s.G = *g;
    pc.seed = maybe<std::uint64_t>(jp, ctx, "seed").value_or(0);
  } else if (source == "libsvm") {
    ensure_keys(jp, ctx, "problem",
                {"source", "path", "loss", "loss_param", "regularizer", "lambda",
                 "reg_delta", "mode", "G", "seed"});
    pc.source = ProblemConfig::Source::libsvm;
    pc.path = require<std::string>(jp, ctx, "path");
    pc.loss = parse_loss(require<std::string>(jp, ctx, "loss"),
                         maybe<double>(jp, ctx, "loss_param"), ctx);
    pc.reg = parse_reg(maybe<std::string>(jp, ctx, "regularizer").value_or("none"),
                       maybe<double>(jp, ctx, "lambda").value_or(0.0),
                       maybe<double>(jp, ctx, "reg_delta").value_or(1.0), ctx);
    const std::string mode = maybe<std::string>(jp, ctx, "mode").value_or("plain");
    if (mode == "plain")
      pc.mode = Mode::plain;
    else if (mode == "composite")
      pc.mode = Mode::composite;
    else
      ctx.fail("mode", "mode must be 'plain' or 'composite'");
    pc.G = maybe<double>(jp, ctx, "G");
    pc.seed = maybe<std::uint64_t>(jp, ctx, "seed").value_or(0);
  } else {
    ctx.fail("source", "problem source must be 'synthetic' or 'libsvm'");
  }
  pc.echo_json = jp.dump();

  // solvers
  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
    ctx.fail("solvers", "'solvers' must be a nonempty array");
  std::set<std::string> seen;
  for (const json& js : j.at("solvers")) {
    ensure_keys(js, ctx, "solver",
                {"name", "eps0", "eps", "delta", "G", "theta", "c", "D1", "beta1",
                 "t_override", "K_override", "rho", "c_hat", "desk_scale", "w0",
                 "D1_initial", "t1", "S_override", "steps", "eta", "B", "beta"});
    SolverEntry e;
    e.name = require<std::string>(js, ctx, "name");
    if (!kSolverNames.count(e.name)) ctx.fail("name", "unknown solver '" + e.name + "'");
    if (seen.count(e.name)) ctx.fail("name", "duplicate solver '" + e.name + "'");
    seen.insert(e.name);
    AssgConfig& a = e.assg;
    if (auto v = maybe<double>(js, ctx, "eps0")) a.eps0 = *v;
    if (auto v = maybe<double>(js, ctx, "eps")) a.eps = *v;
    if (auto v = maybe<double>(js, ctx, "delta")) a.delta = *v;
    e.G_override = maybe<double>(js, ctx, "G");
    if (auto v = maybe<double>(js, ctx, "theta")) a.theta = *v;
    a.c = maybe<double>(js, ctx, "c");
    a.D1 = maybe<double>(js, ctx, "D1");
    a.beta1 = maybe<double>(js, ctx, "beta1");
    a.t_override = maybe<std::int64_t>(js, ctx, "t_override");
    a.K_override = maybe<int>(js, ctx, "K_override");
    a.rho = maybe<double>(js, ctx, "rho");
    a.c_hat = maybe<double>(js, ctx, "c_hat");
    if (auto v = maybe<double>(js, ctx, "desk_scale")) a.desk_scale = *v;
    if (auto w0 = maybe<std::vector<double>>(js, ctx, "w0"))
      a.w0 = Eigen::Map<const Vector>(w0->data(), static_cast<Eigen::Index>(w0->size()));
    a.D1_initial = maybe<double>(js, ctx, "D1_initial");
    a.t1 = maybe<std::int64_t>(js, ctx, "t1");
    a.S_override = maybe<int>(js, ctx, "S_override");
    e.steps = maybe<std::int64_t>(js, ctx, "steps");
    e.eta = maybe<double>(js, ctx, "eta");
    e.B = maybe<double>(js, ctx, "B");
    e.beta = maybe<double>(js, ctx, "beta");
    if (e.name == "ssg" && !e.steps) ctx.fail("steps", "ssg needs 'steps'");
    if (e.name == "ssg" && !e.eta && !e.B) ctx.fail("eta", "ssg needs 'eta' or 'B'");
    if ((e.name == "ssgs" || e.name == "prox_ssgs") && (!e.steps || !e.beta))
      ctx.fail("beta", e.name + " needs 'beta' and 'steps'");
    cfg.solvers.push_back(std::move(e));
  }

  cfg.replicas = maybe<int>(j, ctx, "replicas").value_or(1);
  if (cfg.replicas < 1) ctx.fail("replicas", "replicas must be >= 1");
  cfg.base_seed = maybe<std::uint64_t>(j, ctx, "seed").value_or(0);
  cfg.out_dir = maybe<std::string>(j, ctx, "out_dir").value_or("");
  cfg.workers = maybe<int>(j, ctx, "workers").value_or(1);
  if (cfg.workers < 1) ctx.fail("workers", "workers must be >= 1");
  if (auto ds = maybe<double>(j, ctx, "desk_scale")) {
    if (!(*ds > 0.0)) ctx.fail("desk_scale", "desk_scale must be positive");
    for (auto& s : cfg.solvers) s.assg.desk_scale *= *ds;  // experiment-wide factor
  }
  cfg.record_wall_ms = maybe<bool>(j, ctx, "record_wall_ms").value_or(false);
  if (j.contains("reference")) {
    const json& jr = j.at("reference");
    ensure_keys(jr, ctx, "reference", {"budget", "tol"});
    ReferenceConfig rc;
    if (auto v = maybe<std::int64_t>(jr, ctx, "budget")) rc.budget = *v;
    if (auto v = maybe<double>(jr, ctx, "tol")) rc.tol = *v;
    cfg.reference = rc;
  }
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out_dir, int workers,
                     double desk_scale_factor) {
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) {
    if (const char* env = std::getenv("ASSG_OUT_DIR")) cfg.out_dir = env;
  }
  if (cfg.out_dir.empty()) throw ConfigError("no output directory (out_dir / --out / ASSG_OUT_DIR)");
  if (workers > 0) cfg.workers = workers;
  if (desk_scale_factor > 0.0 && desk_scale_factor != 1.0)
    for (auto& s : cfg.solvers) s.assg.desk_scale *= desk_scale_factor;
}

Objective build_objective(const ProblemConfig& pc) {
  if (pc.source == ProblemConfig::Source::synthetic)
    return generate_synthetic(pc.synth, pc.seed);
  auto data = std::make_shared<Dataset>(load_libsvm(pc.path));
  const auto dim = data->dim;
  return make_finite_objective(std::move(data), pc.loss, pc.reg, pc.mode,
                               Domain::all_space(dim), pc.G);
}

namespace {

AssgConfig resolved_assg(const SolverEntry& e, const Objective& obj,
                         std::optional<double> f_star) {
  AssgConfig a = e.assg;
  a.G = e.G_override.value_or(obj.G);
  a.f_star_ref = f_star;
  return a;
}

RunResult run_solver(const SolverEntry& e, const Objective& obj, AssgConfig a) {
  const Vector w0 = a.w0 ? *a.w0 : project(obj.domain, Vector::Zero(obj.dim()));
  if (e.name == "ssg") {
    const double eta = e.eta ? *e.eta : ssg_step_size(*e.B, a.G, *e.steps);
    return ssg(obj, w0, *e.steps, eta, a.seed, a.f_star_ref);
  }
  if (e.name == "ssgs" || e.name == "prox_ssgs") {
    InnerResult inner = e.name == "ssgs" ? ssgs(obj, w0, *e.beta, *e.steps, a.seed)
                                         : prox_ssgs(obj, w0, *e.beta, *e.steps, a.seed);
    RunResult out;
    out.solver = e.name;
    out.seed = a.seed;
    out.final_iterate = inner.average;
    out.total_evals = inner.evals;
    out.diag = inner.diag;
    StageRecord rec;
    rec.stage = 1;
    rec.eta = 2.0 * *e.beta;
    rec.region = *e.beta;
    rec.inner_iters = inner.evals;
    rec.iterate = inner.average;
    rec.objective = full_objective(obj, inner.average);
    if (a.f_star_ref) rec.gap = rec.objective - *a.f_star_ref;
    rec.cum_evals = inner.evals;
    out.trace.push_back(std::move(rec));
    out.schedule.K = 1;
    out.schedule.t_effective = inner.evals;
    out.schedule.beta1 = *e.beta;
    return out;
  }
  if (e.name == "assg_c") return assg_c(a, obj);
  if (e.name == "assg_r") return assg_r(a, obj);
  if (e.name == "rassg") return rassg(a, obj, RassgMode::known_theta);
  if (e.name == "rassg_theta0") return rassg(a, obj, RassgMode::theta_zero);
  if (e.name == "prox_assg_c") return prox_assg_c(a, obj);
  if (e.name == "prox_assg_r") return prox_assg_r(a, obj);
  if (e.name == "assg_c_global") return assg_c_global(a, obj);
  throw ConfigError("unknown solver '" + e.name + "'");
}

}  // namespace

ScheduleEcho preview_schedule(const SolverEntry& e, const Objective& obj) {
  AssgConfig a = resolved_assg(e, obj, std::nullopt);
  const auto need = [&](const std::optional<double>& v, const char* what) {
    if (!v)
      throw ConfigError("schedule: solver '" + e.name + "' needs " + std::string(what));
    return *v;
  };
  const auto resolve_rho = [&]() {
    if (a.rho) return *a.rho;
    if (obj.reg.kind == RegKind::none) return 0.0;
    if (obj.rho > 0.0) return obj.rho;
    throw ConfigError("schedule: solver '" + e.name +
                      "' needs rho (bound on regularizer subgradients)");
  };
  ScheduleEcho echo;
  echo.desk_scale = a.desk_scale;
  echo.eps0 = a.eps0;
  echo.eps = a.eps;
  echo.delta = a.delta;
  echo.G = a.G;
  echo.theta = a.theta;
  echo.rho = a.rho;
  echo.c_hat = a.c_hat;
  const auto desk = [&](std::int64_t t) {
    return a.t_override
               ? *a.t_override
               : std::max<std::int64_t>(
                     1, static_cast<std::int64_t>(
                            std::ceil(static_cast<double>(t) * a.desk_scale)));
  };
  if (e.name == "ssg") {
    echo.K = 1;
    echo.t_prescribed = echo.t_effective = e.steps.value_or(0);
    echo.eta1 = e.eta ? *e.eta : ssg_step_size(e.B.value_or(1.0), a.G, e.steps.value_or(1));
    return echo;
  }
  if (e.name == "ssgs" || e.name == "prox_ssgs") {
    echo.K = 1;
    echo.t_prescribed = echo.t_effective = e.steps.value_or(0);
    echo.beta1 = e.beta;
    echo.eta1 = e.beta ? 2.0 * *e.beta : 0.0;
    return echo;
  }
  const int K = a.K_override.value_or(compute_stage_count(a.eps0, a.eps));
  echo.K = K;
  const double delta_tilde = a.delta / K;
  if (e.name == "assg_c") {
    const double D1 = a.D1 ? *a.D1 : d1_lower_bound(need(a.c, "c or D1"), a.eps0, a.eps, a.theta);
    echo.D1 = D1;
    echo.t_prescribed = compute_t_assg_c(a.G, D1, a.eps0, delta_tilde);
    echo.t_effective = desk(echo.t_prescribed);
    echo.eta1 = a.eps0 / (3.0 * a.G * a.G);
  } else if (e.name == "assg_r" || e.name == "prox_assg_r") {
    const double beta1 =
        a.beta1 ? *a.beta1 : beta1_lower_bound(need(a.c, "c or beta1"), a.eps0, a.eps, a.theta);
    echo.beta1 = beta1;
    const double rho = resolve_rho();
    echo.t_prescribed = e.name == "assg_r"
                         ? compute_t_assg_r(beta1, a.G, a.eps0, delta_tilde)
                         : compute_t_prox_assg_r(beta1, a.G, rho, a.eps0, delta_tilde);
    echo.t_effective = desk(echo.t_prescribed);
    echo.eta1 = 2.0 * beta1;
    if (e.name == "prox_assg_r") echo.rho = rho;
  } else if (e.name == "prox_assg_c") {
    const double D1 = a.D1 ? *a.D1 : d1_lower_bound(need(a.c, "c or D1"), a.eps0, a.eps, a.theta);
    const double rho = resolve_rho();
    echo.D1 = D1;
    echo.rho = rho;
    echo.t_prescribed = compute_t_prox_assg_c(a.G, D1, a.eps0, rho, delta_tilde);
    echo.t_effective = desk(echo.t_prescribed);
    echo.eta1 = a.eps0 / (4.0 * a.G * a.G);
  } else if (e.name == "assg_c_global") {
    const double c_hat = need(a.c_hat, "c_hat");
    echo.eta1 = a.eps0 / (3.0 * a.G * a.G);
    echo.D1 = c_hat * (a.eps0 + std::sqrt(a.eps0));
    double eps_prev = a.eps0;
    for (int k = 1; k <= K; ++k) {
      const double eps_k = a.eps0 / std::exp2(static_cast<double>(k));
      echo.stage_iters.push_back(desk(compute_t_global(a.G, c_hat, delta_tilde, eps_k)));
      eps_prev = eps_k;
    }
    (void)eps_prev;
    echo.t_prescribed = compute_t_global(a.G, c_hat, delta_tilde, a.eps0 / 2.0);
  } else {  // rassg variants
    const double theta_eff = e.name == "rassg_theta0" ? 0.0 : a.theta;
    const double delta_hat = a.delta / (static_cast<double>(K) * (K + 1.0));
    const double D1s = need(a.D1_initial, "D1_initial");
    echo.D1 = D1s;
    echo.theta = theta_eff;
    echo.S = a.S_override.value_or(std::max(
        1, static_cast<int>(std::ceil(std::log2(a.eps0 / (2.0 * a.eps)))) + 1));
    std::int64_t t_s =
        a.t1 ? *a.t1 : desk(compute_t_assg_c(a.G, D1s, a.eps0, delta_hat));
    double d1 = D1s;
    const auto [tf, df] = rassg_growth(theta_eff);
    for (int s = 0; s < echo.S; ++s) {
      echo.restart_iters.push_back(t_s);
      echo.restart_regions.push_back(d1);
      t_s = static_cast<std::int64_t>(std::ceil(static_cast<double>(t_s) * tf));
      d1 *= df;
    }
    echo.t_prescribed = echo.restart_iters.front();
    echo.eta1 = a.eps0 / (3.0 * a.G * a.G);
  }
  return echo;
}

std::vector<TraceRow> rows_from_run(const RunResult& run, int replica, std::int64_t wall_ms) {
  std::vector<TraceRow> rows;
  rows.reserve(run.trace.size());
  for (const auto& rec : run.trace) {
    TraceRow r;
    r.run_id = run.solver + "-r" + std::to_string(replica);
    r.solver = run.solver;
    r.replica = replica;
    r.stage = rec.stage;
    r.cumulative_evaluations = rec.cum_evals;
    r.objective = rec.objective;
    r.gap = rec.gap;
    r.wall_ms = wall_ms;
    r.seed = run.seed;
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_trace_csv: cannot open " + path);
  out << "run_id,solver,replica,stage,cumulative_evaluations,objective,gap,wall_ms,seed\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.solver << ',' << r.replica << ',' << r.stage << ','
        << r.cumulative_evaluations << ',' << fmt_double(r.objective) << ','
        << (r.gap ? fmt_double(*r.gap) : std::string()) << ',' << r.wall_ms << ','
        << r.seed << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_trace_csv: cannot open " + path);
  std::vector<TraceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 9) throw ParseError("read_trace_csv: expected 9 columns", line_no);
    TraceRow r;
    r.run_id = cells[0];
    r.solver = cells[1];
    r.replica = std::stoi(cells[2]);
    r.stage = std::stoi(cells[3]);
    r.cumulative_evaluations = std::stoll(cells[4]);
    r.objective = std::stod(cells[5]);
    if (!cells[6].empty()) r.gap = std::stod(cells[6]);
    r.wall_ms = std::stoll(cells[7]);
    r.seed = std::stoull(cells[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

ordered_json echo_to_json(const ScheduleEcho& e) {
  ordered_json j;
  j["K"] = e.K;
  j["t_prescribed"] = e.t_prescribed;
  j["t_effective"] = e.t_effective;
  if (!e.stage_iters.empty()) j["stage_iters"] = e.stage_iters;
  j["eta1"] = e.eta1;
  if (e.D1) j["D1"] = *e.D1;
  if (e.beta1) j["beta1"] = *e.beta1;
  if (e.S > 0) {
    j["S"] = e.S;
    j["restart_iters"] = e.restart_iters;
    j["restart_regions"] = e.restart_regions;
  }
  j["desk_scale"] = e.desk_scale;
  j["eps0"] = e.eps0;
  j["eps"] = e.eps;
  j["delta"] = e.delta;
  j["G"] = e.G;
  j["theta"] = e.theta;
  if (e.rho) j["rho"] = *e.rho;
  if (e.c_hat) j["c_hat"] = *e.c_hat;
  j["rng_algorithm"] = e.rng_algorithm;
  return j;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quartile_range(std::vector<double> v) {
  if (v.size() < 2) return 0.0;
  std::sort(v.begin(), v.end());
  const auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return q(0.75) - q(0.25);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("run_experiment: no output directory");
  fs::create_directories(cfg.out_dir);
  const Objective obj = build_objective(cfg.problem);

  std::optional<ReferenceOptimum> ref;
  if (cfg.reference) {
    if (!obj.finite())
      throw ConfigError("run_experiment: reference optimum needs a finite objective");
    ref = reference_optimum(obj, cfg.reference->budget, cfg.reference->tol);
  }
  const std::optional<double> f_star =
      ref ? std::optional<double>(ref->f_star) : std::nullopt;

  // resolve schedules up front so the manifest is auditable even on failure
  ordered_json manifest;
  manifest["version"] = 1;
  manifest["problem"] = json::parse(cfg.problem.echo_json);
  manifest["problem_fingerprint"] =
      fnv1a_hex(cfg.problem.echo_json + "#" + std::to_string(cfg.problem.seed));
  manifest["replicas"] = cfg.replicas;
  manifest["base_seed"] = cfg.base_seed;
  manifest["workers"] = cfg.workers;
  manifest["rng_algorithm"] = Rng64::kAlgorithmId;
  if (ref) {
    ordered_json jr;
    jr["f_star"] = ref->f_star;
    jr["gap_bound"] = ref->gap_bound;
    jr["method"] = ref->method;
    jr["w_star"] = std::vector<double>(ref->w_star.data(),
                                       ref->w_star.data() + ref->w_star.size());
    manifest["reference"] = jr;
  } else {
    manifest["reference"] = nullptr;
  }
  ordered_json jsolvers;
  std::set<std::string> broken;
  for (const auto& e : cfg.solvers) {
    try {
      jsolvers[e.name] = echo_to_json(preview_schedule(e, obj));
    } catch (const std::exception& ex) {
      ordered_json err;
      err["error"] = ex.what();
      jsolvers[e.name] = err;
      broken.insert(e.name);
      std::cerr << "solver failure: " << e.name << ": " << ex.what() << '\n';
    }
  }
  manifest["solvers"] = jsolvers;
  {
    std::ofstream mf(fs::path(cfg.out_dir) / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << '\n';
  }

  struct Task {
    std::size_t solver_idx;
    int replica;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
    if (broken.count(cfg.solvers[s].name)) continue;
    for (int i = 0; i < cfg.replicas; ++i) tasks.push_back({s, i});
  }

  struct Outcome {
    std::vector<TraceRow> rows;
    double final_gap = std::numeric_limits<double>::quiet_NaN();
    double final_objective = std::numeric_limits<double>::quiet_NaN();
    std::int64_t total_evals = 0;
    bool failed = false;
    std::string error;
  };
  std::vector<Outcome> outcomes(tasks.size());

  std::atomic<std::size_t> next{0};
  const int nworkers = std::clamp(cfg.workers, 1, 64);
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& task = tasks[k];
      const SolverEntry& entry = cfg.solvers[task.solver_idx];
      Outcome& out = outcomes[k];
      try {
        AssgConfig a = resolved_assg(entry, obj, f_star);
        a.seed = cfg.base_seed + static_cast<std::uint64_t>(task.replica);
        const auto t0 = std::chrono::steady_clock::now();
        const RunResult run = run_solver(entry, obj, std::move(a));
        const auto t1 = std::chrono::steady_clock::now();
        const std::int64_t wall =
            cfg.record_wall_ms
                ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                : 0;
        out.rows = rows_from_run(run, task.replica, wall);
        out.total_evals = run.total_evals;
        if (!run.trace.empty()) {
          out.final_objective = run.trace.back().objective;
          if (run.trace.back().gap) out.final_gap = *run.trace.back().gap;
        }
      } catch (const std::exception& ex) {
        out.failed = true;
        out.error = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < nworkers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  bool any_failed = !broken.empty();
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& out = outcomes[k];
    const auto& entry = cfg.solvers[tasks[k].solver_idx];
    if (out.failed) {
      any_failed = true;
      std::cerr << "solver failure: " << entry.name << " replica " << tasks[k].replica
                << ": " << out.error << '\n';
      continue;
    }
    const fs::path path = fs::path(cfg.out_dir) /
                          ("trace_" + entry.name + "_r" + std::to_string(tasks[k].replica) +
                           ".csv");
    write_trace_csv(path.string(), out.rows);
  }

  // summary: per solver median final gap (objective when no reference), IQR,
  // total evaluations
  {
    std::ofstream sf(fs::path(cfg.out_dir) / "summary.csv", std::ios::binary);
    sf << "solver,replicas,median_final_gap,iqr_final_gap,median_final_objective,"
          "total_evaluations\n";
    for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
      if (broken.count(cfg.solvers[s].name)) continue;
      std::vector<double> gaps, objs;
      std::int64_t evals = 0;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        if (tasks[k].solver_idx != s || outcomes[k].failed) continue;
        if (!std::isnan(outcomes[k].final_gap)) gaps.push_back(outcomes[k].final_gap);
        objs.push_back(outcomes[k].final_objective);
        evals += outcomes[k].total_evals;
      }
      sf << cfg.solvers[s].name << ',' << objs.size() << ','
         << (gaps.empty() ? std::string() : fmt_double(median(gaps))) << ','
         << (gaps.empty() ? std::string() : fmt_double(quartile_range(gaps))) << ','
         << fmt_double(median(objs)) << ',' << evals << '\n';
    }
  }
  return any_failed ? 3 : 0;
}

CompareReport compare_traces(const std::string& trace_dir, const std::string& solver_a,
                             const std::string& solver_b) {
  const fs::path dir(trace_dir);
  if (!fs::exists(dir / "manifest.json"))
    throw ConfigError("compare: no manifest.json in " + trace_dir);
  json manifest;
  {
    std::ifstream mf(dir / "manifest.json");
    mf >> manifest;
  }
  if (!manifest.at("solvers").contains(solver_a) ||
      !manifest.at("solvers").contains(solver_b))
    throw ConfigError("compare: both solvers must appear in the manifest");
  const int replicas = manifest.at("replicas").get<int>();
  double gap_floor = 1e-14;
  bool have_ref = !manifest.at("reference").is_null();
  if (have_ref)
    gap_floor = std::max(gap_floor, manifest.at("reference").at("gap_bound").get<double>());

  const auto load = [&](const std::string& name) {
    std::vector<std::vector<TraceRow>> per_replica;
    for (int i = 0; i < replicas; ++i) {
      const fs::path p = dir / ("trace_" + name + "_r" + std::to_string(i) + ".csv");
      if (!fs::exists(p))
        throw ConfigError("compare: missing trace " + p.string());
      auto rows = read_trace_csv(p.string());
      if (rows.empty()) throw ConfigError("compare: empty trace " + p.string());
      per_replica.push_back(std::move(rows));
    }
    return per_replica;
  };
  const auto traces_a = load(solver_a);
  const auto traces_b = load(solver_b);
  for (int i = 0; i < replicas; ++i)
    if (traces_a[static_cast<std::size_t>(i)].front().seed !=
        traces_b[static_cast<std::size_t>(i)].front().seed)
      throw ConfigError("compare: traces were produced with mismatched seeds");

  CompareReport rep;
  rep.solver_a = solver_a;
  rep.solver_b = solver_b;
  rep.used_objective_fallback = !have_ref;

  const auto value_of = [&](const TraceRow& r) {
    return std::max(have_ref && r.gap ? *r.gap : r.objective, gap_floor);
  };
  const auto value_at = [&](const std::vector<TraceRow>& rows, std::int64_t budget) {
    std::optional<double> v;
    for (const auto& r : rows) {
      if (r.cumulative_evaluations > budget) break;
      v = value_of(r);
    }
    return v;
  };

  std::int64_t bmax = std::numeric_limits<std::int64_t>::max();
  std::int64_t bmin = 1;
  for (const auto& rows : traces_a) {
    bmax = std::min(bmax, rows.back().cumulative_evaluations);
    bmin = std::max(bmin, rows.front().cumulative_evaluations);
  }
  for (const auto& rows : traces_b) {
    bmax = std::min(bmax, rows.back().cumulative_evaluations);
    bmin = std::max(bmin, rows.front().cumulative_evaluations);
  }
  if (bmax < bmin) throw ConfigError("compare: traces share no evaluation budget");

  constexpr int kBudgets = 12;
  std::vector<std::int64_t> budgets;
  for (int j = 0; j < kBudgets; ++j) {
    const double f = static_cast<double>(j) / (kBudgets - 1);
    const auto b = static_cast<std::int64_t>(std::llround(
        std::exp(std::log(static_cast<double>(bmin)) +
                 f * (std::log(static_cast<double>(bmax)) -
                      std::log(static_cast<double>(bmin))))));
    if (budgets.empty() || b > budgets.back()) budgets.push_back(b);
  }
  if (budgets.back() != bmax) budgets.push_back(bmax);

  for (const auto b : budgets) {
    std::vector<double> va, vb;
    for (int i = 0; i < replicas; ++i) {
      if (auto v = value_at(traces_a[static_cast<std::size_t>(i)], b)) va.push_back(*v);
      if (auto v = value_at(traces_b[static_cast<std::size_t>(i)], b)) vb.push_back(*v);
    }
    rep.budgets.push_back(static_cast<double>(b));
    rep.median_gap_a.push_back(median(va));
    rep.median_gap_b.push_back(median(vb));
  }

  // win rate at the largest shared budget, ties counting one half
  double wins = 0.0;
  int counted = 0;
  for (int i = 0; i < replicas; ++i) {
    const auto va = value_at(traces_a[static_cast<std::size_t>(i)], bmax);
    const auto vb = value_at(traces_b[static_cast<std::size_t>(i)], bmax);
    if (!va || !vb) continue;
    ++counted;
    if (*va < *vb)
      wins += 1.0;
    else if (*va == *vb)
      wins += 0.5;
  }
  rep.win_rate_a = counted > 0 ? wins / counted : 0.5;

  const auto budget_slope = [&](bool pick_a) {
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < rep.budgets.size(); ++j) {
      const double v = pick_a ? rep.median_gap_a[j] : rep.median_gap_b[j];
      if (std::isnan(v)) continue;
      lx.push_back(std::log(rep.budgets[j]));
      ly.push_back(std::log(v));
    }
    return fit_slope(lx, ly);
  };
  rep.slope_budget_a = budget_slope(true);
  rep.slope_budget_b = budget_slope(false);

  const auto stage_slope = [&](const std::vector<std::vector<TraceRow>>& traces) {
    std::vector<double> slopes;
    for (const auto& rows : traces) {
      std::vector<double> sx, sy;
      for (const auto& r : rows) {
        sx.push_back(static_cast<double>(r.stage));
        sy.push_back(std::log(value_of(r)));
      }
      slopes.push_back(fit_slope(sx, sy));
    }
    return median(slopes);
  };
  rep.slope_stage_a = stage_slope(traces_a);
  rep.slope_stage_b = stage_slope(traces_b);
  return rep;
}

std::string format_report(const CompareReport& rep) {
  std::ostringstream os;
  os << "compare " << rep.solver_a << " vs " << rep.solver_b
     << (rep.used_objective_fallback ? " (objective values; no reference optimum)\n"
                                     : " (gaps vs reference optimum)\n");
  os << "budget,median_" << rep.solver_a << ",median_" << rep.solver_b << '\n';
  for (std::size_t j = 0; j < rep.budgets.size(); ++j)
    os << static_cast<std::int64_t>(rep.budgets[j]) << ',' << fmt_double(rep.median_gap_a[j])
       << ',' << fmt_double(rep.median_gap_b[j]) << '\n';
  os << "win_rate_" << rep.solver_a << " " << fmt_double(rep.win_rate_a) << '\n';
  os << "slope_loggap_logbudget_" << rep.solver_a << " " << fmt_double(rep.slope_budget_a)
     << '\n';
  os << "slope_loggap_logbudget_" << rep.solver_b << " " << fmt_double(rep.slope_budget_b)
     << '\n';
  os << "slope_loggap_stage_" << rep.solver_a << " " << fmt_double(rep.slope_stage_a) << '\n';
  os << "slope_loggap_stage_" << rep.solver_b << " " << fmt_double(rep.slope_stage_b) << '\n';
  return os.str();
}

int validate_config(const ExperimentConfig& cfg) {
  const Objective obj = build_objective(cfg.problem);
  for (const auto& e : cfg.solvers) {
    const ScheduleEcho echo = preview_schedule(e, obj);
    std::cout << e.name << ": K=" << echo.K << " t_prescribed=" << echo.t_prescribed
              << " t_effective=" << echo.t_effective << " eta1=" << fmt_double(echo.eta1);
    if (echo.D1) std::cout << " D1=" << fmt_double(*echo.D1);
    if (echo.beta1) std::cout << " beta1=" << fmt_double(*echo.beta1);
    if (echo.S > 0) {
      std::cout << " S=" << echo.S << " t_s=[";
      for (std::size_t i = 0; i < echo.restart_iters.size(); ++i)
        std::cout << (i ? "," : "") << echo.restart_iters[i];
      std::cout << "]";
    }
    if (!echo.stage_iters.empty()) {
      std::cout << " t_k=[";
      for (std::size_t i = 0; i < echo.stage_iters.size(); ++i)
        std::cout << (i ? "," : "") << echo.stage_iters[i];
      std::cout << "]";
    }
    std::cout << '\n';
    const AssgConfig& a = e.assg;
    if (a.c && a.D1) {
      const double bound = d1_lower_bound(*a.c, a.eps0, a.eps, a.theta);
      if (*a.D1 < bound)
        std::cout << "warning: " << e.name << " D1=" << fmt_double(*a.D1)
                  << " is below the schedule lower bound c*eps0/eps^(1-theta)="
                  << fmt_double(bound) << '\n';
    }
    if (a.c && a.beta1) {
      const double bound = beta1_lower_bound(*a.c, a.eps0, a.eps, a.theta);
      if (*a.beta1 < bound)
        std::cout << "warning: " << e.name << " beta1=" << fmt_double(*a.beta1)
                  << " is below the schedule lower bound 2c^2*eps0/eps^(2(1-theta))="
                  << fmt_double(bound) << '\n';
    }
  }
  return 0;
}

}  // namespace assg::bench
