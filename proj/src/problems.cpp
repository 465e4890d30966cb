#include "assg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace assg {

double loss_value(const Loss& loss, double z, double y) {
  switch (loss.kind) {
    case LossKind::hinge:
      return std::max(0.0, 1.0 - y * z);
    case LossKind::absolute:
      return std::abs(z - y);
    case LossKind::eps_insensitive:
      return std::max(0.0, std::abs(z - y) - loss.param);
    case LossKind::huber: {
      const double r = z - y;
      const double d = loss.param;
      return std::abs(r) <= d ? 0.5 * r * r : d * (std::abs(r) - 0.5 * d);
    }
    case LossKind::squared_hinge: {
      const double m = std::max(0.0, 1.0 - y * z);
      return m * m;
    }
    case LossKind::square: {
      const double r = z - y;
      return r * r;
    }
  }
  throw ConfigError("loss_value: unsupported kind");
}

double loss_subgrad(const Loss& loss, double z, double y) {
  switch (loss.kind) {
    case LossKind::hinge:
      return y * z < 1.0 ? -y : 0.0;
    case LossKind::absolute:
      return z > y ? 1.0 : (z < y ? -1.0 : 0.0);
    case LossKind::eps_insensitive: {
      const double r = z - y;
      if (std::abs(r) <= loss.param) return 0.0;
      return r > 0.0 ? 1.0 : -1.0;
    }
    case LossKind::huber:
      return std::clamp(z - y, -loss.param, loss.param);
    case LossKind::squared_hinge: {
      const double m = 1.0 - y * z;
      return m > 0.0 ? -2.0 * y * m : 0.0;
    }
    case LossKind::square:
      return 2.0 * (z - y);
  }
  throw ConfigError("loss_subgrad: unsupported kind");
}

double Loss::slope_bound(double z_abs_max, double y_abs_max) const {
  switch (kind) {
    case LossKind::hinge:
    case LossKind::absolute:
    case LossKind::eps_insensitive:
      return 1.0;
    case LossKind::huber:
      return param;
    case LossKind::squared_hinge:
      return 2.0 * y_abs_max * (1.0 + y_abs_max * z_abs_max);
    case LossKind::square:
      return 2.0 * (z_abs_max + y_abs_max);
  }
  throw ConfigError("slope_bound: unsupported kind");
}

namespace {

void draw_stream_sample(const StreamingSpec& s, Rng64& rng, Vector& x, double& y) {
  const Eigen::Index d = s.dim();
  x.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = std::sqrt(s.cov_diag[i]) * rng.gaussian();
  y = s.planted.dot(x);
  if (s.noise_sigma > 0.0) y += s.noise_sigma * rng.gaussian();
}

// Default G: max per-sample feature norm times the loss slope bound over an
// operating region of radius 2*(data scale)+1, plus the regularizer bound in
// plain mode.
double estimate_g(const Dataset& data, const Loss& loss, const Regularizer& reg,
                  Mode mode, double operating_radius) {
  double max_x = 0.0;
  double max_y = 0.0;
  for (const auto& s : data.samples) {
    max_x = std::max(max_x, s.features.norm());
    max_y = std::max(max_y, std::abs(s.label));
  }
  const double z_max = operating_radius * max_x;
  double g = max_x * loss.slope_bound(z_max, max_y);
  if (mode == Mode::plain) g += reg.subgrad_bound(data.dim);
  return g;
}

}  // namespace

Objective make_finite_objective(std::shared_ptr<const Dataset> data, Loss loss,
                                Regularizer reg, Mode mode, Domain domain,
                                std::optional<double> G) {
  if (!data || data->samples.empty())
    throw ConfigError("make_finite_objective: dataset is empty");
  for (const auto& s : data->samples) {
    if (s.features.size() != data->dim)
      throw InvalidInput("make_finite_objective: inconsistent sample dimension");
    if (!s.features.allFinite() || !std::isfinite(s.label))
      throw InvalidInput("make_finite_objective: non-finite sample entries");
  }
  Objective obj;
  obj.data = std::move(data);
  obj.loss = loss;
  obj.reg = reg;
  obj.mode = mode;
  obj.domain = std::move(domain);
  obj.G = G ? *G : estimate_g(*obj.data, loss, reg, mode, 3.0);
  obj.rho = mode == Mode::composite ? reg.subgrad_bound(obj.data->dim) : 0.0;
  return obj;
}

void stochastic_subgrad_into(const Objective& obj, const Vector& w, Rng64& rng, Vector& g) {
  if (w.size() != obj.dim()) throw InvalidInput("stochastic_subgrad: dimension mismatch");
  if (obj.finite()) {
    const auto& samples = obj.data->samples;
    if (samples.empty()) throw ConfigError("stochastic_subgrad: empty dataset");
    const auto idx = rng.uniform_index(samples.size());
    const Sample& s = samples[static_cast<std::size_t>(idx)];
    const double z = s.features.dot(w);
    g = loss_subgrad(obj.loss, z, s.label) * s.features;
  } else {
    Vector x;
    double y = 0.0;
    draw_stream_sample(*obj.stream, rng, x, y);
    const double z = x.dot(w);
    g = loss_subgrad(obj.loss, z, y) * x;
  }
  if (obj.mode == Mode::plain && obj.reg.kind != RegKind::none) g += obj.reg.subgrad(w);
}

Vector stochastic_subgrad(const Objective& obj, const Vector& w, Rng64& rng) {
  Vector g;
  stochastic_subgrad_into(obj, w, rng, g);
  return g;
}

double full_objective(const Objective& obj, const Vector& w) {
  if (w.size() != obj.dim()) throw InvalidInput("full_objective: dimension mismatch");
  if (obj.finite()) {
    double acc = 0.0;
    for (const auto& s : obj.data->samples)
      acc += loss_value(obj.loss, s.features.dot(w), s.label);
    return acc / static_cast<double>(obj.data->samples.size()) + obj.reg.value(w);
  }
  return mc_objective(obj, w, obj.stream->mc_budget, obj.stream->eval_seed).mean;
}

McEstimate mc_objective(const Objective& obj, const Vector& w, std::int64_t n,
                        std::uint64_t seed) {
  if (obj.finite()) throw InvalidInput("mc_objective: finite objectives are exact");
  if (n <= 1) throw InvalidInput("mc_objective: need n > 1");
  Rng64 rng(seed);
  double sum = 0.0;
  double sumsq = 0.0;
  Vector x;
  double y = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    draw_stream_sample(*obj.stream, rng, x, y);
    const double v = loss_value(obj.loss, x.dot(w), y);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(n) - mean * mean) * n / (n - 1.0);
  McEstimate out;
  out.mean = mean + obj.reg.value(w);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  out.n = n;
  return out;
}

std::optional<double> analytic_objective(const Objective& obj, const Vector& w) {
  if (obj.finite() || obj.loss.kind != LossKind::square) return std::nullopt;
  const auto& s = *obj.stream;
  const Vector diff = w - s.planted;
  const double quad = (diff.array().square() * s.cov_diag.array()).sum();
  return quad + s.noise_sigma * s.noise_sigma + obj.reg.value(w);
}

Vector full_subgrad(const Objective& obj, const Vector& w) {
  if (w.size() != obj.dim()) throw InvalidInput("full_subgrad: dimension mismatch");
  if (obj.finite()) {
    Vector g = Vector::Zero(w.size());
    for (const auto& s : obj.data->samples)
      g += loss_subgrad(obj.loss, s.features.dot(w), s.label) * s.features;
    g /= static_cast<double>(obj.data->samples.size());
    return g + obj.reg.subgrad(w);
  }
  if (obj.loss.kind == LossKind::square) {
    // gradient of (w - planted)' Sigma (w - planted) + const
    const auto& s = *obj.stream;
    Vector g = 2.0 * (s.cov_diag.array() * (w - s.planted).array()).matrix();
    return g + obj.reg.subgrad(w);
  }
  throw ConfigError("full_subgrad: no deterministic subgradient for this streaming loss");
}

namespace {

Vector unit_gaussian(Rng64& rng, int d) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.gaussian();
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : Vector(Vector::Unit(d, 0));
}

}  // namespace

Objective generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n <= 0 || spec.d <= 0) throw ConfigError("generate_synthetic: n, d must be positive");
  Rng64 rng(seed);

  if (spec.family == SynthFamily::streaming_gaussian_regression) {
    auto s = std::make_shared<StreamingSpec>();
    s->planted = spec.planted_scale * unit_gaussian(rng, spec.d);
    s->cov_diag = spec.cov_diag.size() > 0 ? spec.cov_diag : Vector::Ones(spec.d);
    if (s->cov_diag.size() != spec.d || (s->cov_diag.array() < 0.0).any())
      throw ConfigError("generate_synthetic: bad covariance diagonal");
    s->noise_sigma = spec.noise;
    Objective obj;
    obj.stream = std::move(s);
    obj.loss = spec.loss.value_or(Loss::square());
    if (obj.loss.kind != LossKind::square)
      throw ConfigError("generate_synthetic: streaming family uses the square loss");
    obj.reg = spec.reg;
    obj.mode = spec.mode;
    obj.domain = Domain::all_space(spec.d);
    // Heuristic high-probability bound: feature norms concentrate near
    // sqrt(tr Sigma); the operating region is a few planted norms wide.
    const double xb = std::sqrt(obj.stream->cov_diag.sum()) +
                      4.0 * std::sqrt(obj.stream->cov_diag.maxCoeff());
    const double r_op = 2.0 * obj.stream->planted.norm() + 1.0;
    double g_est = 2.0 * (r_op * xb + obj.stream->planted.norm() * xb +
                          4.0 * obj.stream->noise_sigma) * xb;
    if (spec.mode == Mode::plain) g_est += spec.reg.subgrad_bound(spec.d);
    obj.G = spec.G.value_or(g_est);
    obj.rho = spec.mode == Mode::composite ? spec.reg.subgrad_bound(spec.d) : 0.0;
    obj.planted = obj.stream->planted;
    return obj;
  }

  auto data = std::make_shared<Dataset>();
  Loss loss = Loss::hinge();
  std::optional<Vector> planted_out;

  switch (spec.family) {
    case SynthFamily::separable_classification: {
      loss = spec.loss.value_or(Loss::hinge());
      const Vector planted = unit_gaussian(rng, spec.d);
      planted_out = planted;
      data->dim = spec.d;
      data->samples.reserve(static_cast<std::size_t>(spec.n));
      for (int i = 0; i < spec.n; ++i) {
        Vector x(spec.d);
        for (int j = 0; j < spec.d; ++j) x[j] = rng.gaussian();
        double m = planted.dot(x);
        if (std::abs(m) < spec.margin) {
          // shift along the planted direction so the signed margin is exact
          const double side = m >= 0.0 ? 1.0 : -1.0;
          x += (spec.margin * side - m) * planted;
          m = spec.margin * side;
        }
        data->samples.push_back({std::move(x), m >= 0.0 ? 1.0 : -1.0});
      }
      break;
    }
    case SynthFamily::robust_regression: {
      loss = spec.loss.value_or(Loss::absolute());
      const Vector planted = spec.planted_scale * unit_gaussian(rng, spec.d);
      planted_out = planted;
      data->dim = spec.d;
      for (int i = 0; i < spec.n; ++i) {
        Vector x(spec.d);
        for (int j = 0; j < spec.d; ++j) x[j] = rng.gaussian();
        double y = planted.dot(x) + spec.noise * rng.gaussian();
        if (spec.outlier_fraction > 0.0 && rng.uniform_real() < spec.outlier_fraction)
          y += 10.0 * spec.noise * rng.gaussian();
        data->samples.push_back({std::move(x), y});
      }
      break;
    }
    case SynthFamily::least_squares: {
      loss = spec.loss.value_or(Loss::square());
      const Vector planted = spec.planted_scale * unit_gaussian(rng, spec.d);
      planted_out = planted;
      data->dim = spec.d;
      for (int i = 0; i < spec.n; ++i) {
        Vector x(spec.d);
        for (int j = 0; j < spec.d; ++j) x[j] = rng.gaussian();
        const double y = planted.dot(x) + spec.noise * rng.gaussian();
        data->samples.push_back({std::move(x), y});
      }
      break;
    }
    case SynthFamily::scalar: {
      // One-dimensional single-sample objective F(w) = l(w, 0) + R(w); handy
      // for problems with analytically known optima.
      loss = spec.loss.value_or(Loss::absolute());
      data->dim = 1;
      Vector x(1);
      x[0] = 1.0;
      data->samples.push_back({std::move(x), 0.0});
      break;
    }
    default:
      throw ConfigError("generate_synthetic: unknown family");
  }

  Objective obj = make_finite_objective(
      std::move(data), loss, spec.reg, spec.mode,
      Domain::all_space(spec.family == SynthFamily::scalar ? 1 : spec.d), spec.G);
  obj.planted = std::move(planted_out);
  return obj;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_libsvm: cannot open " + path);
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index max_index = 0;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    std::size_t used = 0;
    double label = 0.0;
    try {
      label = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("load_libsvm: bad label '" + tok + "'", line_no);
    }
    if (used != tok.size())
      throw ParseError("load_libsvm: bad label '" + tok + "'", line_no);
    std::vector<std::pair<Eigen::Index, double>> row;
    Eigen::Index prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("load_libsvm: expected index:value, got '" + tok + "'", line_no);
      long long idx = 0;
      try {
        idx = std::stoll(tok.substr(0, colon), &used);
      } catch (const std::exception&) {
        throw ParseError("load_libsvm: bad index in '" + tok + "'", line_no);
      }
      if (used != colon) throw ParseError("load_libsvm: bad index in '" + tok + "'", line_no);
      double val = 0.0;
      const std::string vs = tok.substr(colon + 1);
      try {
        val = std::stod(vs, &used);
      } catch (const std::exception&) {
        throw ParseError("load_libsvm: bad value in '" + tok + "'", line_no);
      }
      if (used != vs.size())
        throw ParseError("load_libsvm: bad value in '" + tok + "'", line_no);
      if (idx < 1) throw ParseError("load_libsvm: indices are 1-based", line_no);
      if (idx <= prev_index)
        throw ParseError("load_libsvm: indices must be strictly ascending", line_no);
      prev_index = static_cast<Eigen::Index>(idx);
      max_index = std::max(max_index, prev_index);
      row.emplace_back(prev_index, val);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("load_libsvm: no samples in " + path);
  out.dim = std::max<Eigen::Index>(max_index, 1);
  out.samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Vector x = Vector::Zero(out.dim);
    for (const auto& [idx, val] : rows[i]) x[idx - 1] = val;
    out.samples.push_back({std::move(x), labels[i]});
  }
  return out;
}

void save_libsvm(const Dataset& dataset, const std::string& path) {
  std::ofstream outf(path, std::ios::binary);  // LF line endings everywhere
  if (!outf) throw ConfigError("save_libsvm: cannot open " + path);
  char buf[64];
  bool dim_pinned = false;
  for (const auto& s : dataset.samples)
    if (s.features.size() == dataset.dim && dataset.dim > 0 &&
        s.features[dataset.dim - 1] != 0.0)
      dim_pinned = true;
  bool first_line = true;
  for (const auto& s : dataset.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.label);
    outf << buf;
    for (Eigen::Index i = 0; i < s.features.size(); ++i) {
      const bool pin = first_line && !dim_pinned && i == dataset.dim - 1;
      if (s.features[i] == 0.0 && !pin) continue;
      std::snprintf(buf, sizeof buf, "%.17g", s.features[i]);
      outf << ' ' << (i + 1) << ':' << buf;
    }
    outf << '\n';
    first_line = false;
  }
}

LebCatalogResult leb_catalog(const Objective& obj) {
  LebCatalogResult out;
  if (!obj.finite()) {
    if (obj.loss.kind == LossKind::square && obj.reg.kind == RegKind::none) {
      double min_pos = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < obj.stream->cov_diag.size(); ++i)
        if (obj.stream->cov_diag[i] > 0.0) min_pos = std::min(min_pos, obj.stream->cov_diag[i]);
      if (std::isfinite(min_pos)) {
        out.known = true;
        out.spec = {0.5, 1.0 / std::sqrt(min_pos), LebScope::global};
        out.note = "gaussian least squares: sharpness from the covariance spectrum";
        return out;
      }
    }
    out.note = "uncataloged streaming combination";
    return out;
  }

  const bool polyhedral_reg = obj.reg.kind == RegKind::none ||
                              obj.reg.kind == RegKind::l1 || obj.reg.kind == RegKind::linf;
  if (obj.loss.piecewise_linear() && polyhedral_reg) {
    out.known = true;
    out.spec = {1.0, std::nullopt, LebScope::global};
    out.note = "polyhedral objective";
    return out;
  }
  const bool pcq_loss = obj.loss.kind == LossKind::huber ||
                        obj.loss.kind == LossKind::squared_hinge ||
                        obj.loss.kind == LossKind::square;
  if ((pcq_loss && (polyhedral_reg || obj.reg.kind == RegKind::huber_norm)) ||
      (obj.loss.piecewise_linear() && obj.reg.kind == RegKind::huber_norm)) {
    out.known = true;
    out.spec = {0.5, std::nullopt, LebScope::sublevel};
    out.note = "piecewise convex quadratic objective";
    return out;
  }
  out.note = "uncataloged loss/regularizer combination";
  return out;
}

}  // namespace assg
