#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assg/errors.hpp"
#include "assg/geometry.hpp"
#include "assg/regularizer.hpp"
#include "assg/rng.hpp"

namespace assg {

struct Sample {
  Vector features;
  double label = 0.0;
};

struct Dataset {
  std::vector<Sample> samples;
  Eigen::Index dim = 0;

  std::size_t size() const { return samples.size(); }
};

enum class LossKind { hinge, absolute, eps_insensitive, huber, squared_hinge, square };

/// Scalar loss l(z, y) with a deterministic subgradient rule in z. Kinks pick
/// the flat branch (hinge, eps-insensitive) or the midpoint 0 (absolute), which
/// keeps |g| minimal.
struct Loss {
  LossKind kind = LossKind::hinge;
  double param = 1.0;  // eps for eps_insensitive, delta for huber

  static Loss hinge() { return {LossKind::hinge, 1.0}; }
  static Loss absolute() { return {LossKind::absolute, 1.0}; }
  static Loss eps_insensitive(double eps) {
    if (eps <= 0.0) throw InvalidInput("eps_insensitive: eps must be positive");
    return {LossKind::eps_insensitive, eps};
  }
  static Loss huber(double delta) {
    if (delta <= 0.0) throw InvalidInput("huber: delta must be positive");
    return {LossKind::huber, delta};
  }
  static Loss squared_hinge() { return {LossKind::squared_hinge, 1.0}; }
  static Loss square() { return {LossKind::square, 1.0}; }

  bool piecewise_linear() const {
    return kind == LossKind::hinge || kind == LossKind::absolute ||
           kind == LossKind::eps_insensitive;
  }

  /// Bound on |d/dz l(z, y)| over |z| <= z_abs_max, |y| <= y_abs_max. The
  /// piecewise-linear kinds ignore the arguments.
  double slope_bound(double z_abs_max, double y_abs_max) const;
};

double loss_value(const Loss& loss, double z, double y);
double loss_subgrad(const Loss& loss, double z, double y);

/// Sample generator for objectives defined as expectations: features are
/// centered Gaussian with diagonal covariance, labels follow a planted linear
/// model plus Gaussian noise. Deterministic evaluation draws use eval_seed.
struct StreamingSpec {
  Vector planted;
  Vector cov_diag;
  double noise_sigma = 0.0;
  std::int64_t mc_budget = 100000;
  std::uint64_t eval_seed = 0x5eedf00dULL;

  Eigen::Index dim() const { return planted.size(); }
};

enum class Mode { plain, composite };

/// A stochastic convex objective F(w) = E[f(w; xi)] + R(w). In plain mode the
/// regularizer is folded into every sampled subgradient; in composite mode the
/// loss part and R are handled separately (R through its prox) and rho bounds
/// the regularizer subgradients.
struct Objective {
  std::shared_ptr<const Dataset> data;          // finite-sample source
  std::shared_ptr<const StreamingSpec> stream;  // streaming source
  Loss loss;
  Regularizer reg;
  Mode mode = Mode::plain;
  Domain domain;
  double G = 1.0;   // bound on ||subgradient of f(.; xi)|| over the operating region
  double rho = 0.0; // bound on ||subgradient of R||, composite mode
  std::optional<Vector> planted;  // generating vector of synthetic problems

  bool finite() const { return data != nullptr; }
  Eigen::Index dim() const { return data ? data->dim : stream->dim(); }
};

Objective make_finite_objective(std::shared_ptr<const Dataset> data, Loss loss,
                                Regularizer reg, Mode mode, Domain domain,
                                std::optional<double> G = std::nullopt);

/// One stochastic subgradient of f at w; consumes draws from rng. Plain mode
/// adds the regularizer subgradient.
Vector stochastic_subgrad(const Objective& obj, const Vector& w, Rng64& rng);

/// Buffer-reusing variant for solver hot loops; identical output bits.
void stochastic_subgrad_into(const Objective& obj, const Vector& w, Rng64& rng, Vector& g);

/// Exact F(w) for finite sources; a deterministic Monte-Carlo estimate with
/// the declared sample budget for streaming sources.
double full_objective(const Objective& obj, const Vector& w);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

McEstimate mc_objective(const Objective& obj, const Vector& w, std::int64_t n,
                        std::uint64_t seed);

/// Closed-form F(w) when one exists (streaming Gaussian square loss).
std::optional<double> analytic_objective(const Objective& obj, const Vector& w);

/// Deterministic full subgradient of F (dataset average or analytic gradient,
/// plus the regularizer subgradient).
Vector full_subgrad(const Objective& obj, const Vector& w);

enum class SynthFamily {
  separable_classification,
  robust_regression,
  least_squares,
  streaming_gaussian_regression,
  scalar,
};

struct SyntheticSpec {
  SynthFamily family = SynthFamily::separable_classification;
  int n = 100;
  int d = 5;
  double margin = 0.5;           // separable_classification
  double noise = 0.1;            // regression noise scale
  double outlier_fraction = 0.0; // robust_regression
  double planted_scale = 1.0;
  std::optional<Loss> loss;      // overrides the family default
  Regularizer reg = Regularizer::none();
  Mode mode = Mode::plain;
  Vector cov_diag;               // streaming; identity when empty
  std::optional<double> G;       // overrides the computed estimate
};

/// Deterministic dataset/generator for (spec, seed); the returned objective
/// carries a documented G estimate (max feature norm times the loss slope
/// bound, plus the regularizer bound in plain mode).
Objective generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

Dataset load_libsvm(const std::string& path);
void save_libsvm(const Dataset& dataset, const std::string& path);

enum class LebScope { global, sublevel };

/// Growth parameters of dist(w, optimal set) <= c * (F(w) - F*)^theta.
struct LebSpec {
  double theta = 1.0;
  std::optional<double> c;  // empty when the catalog cannot supply it
  LebScope scope = LebScope::global;
};

struct LebCatalogResult {
  bool known = false;
  LebSpec spec;
  std::string note;
};

/// Catalog lookup: theta = 1 for piecewise-linear losses with polyhedral
/// regularizers, theta = 1/2 for piecewise convex quadratic combinations and
/// for streaming Gaussian square loss (where c = 1/sqrt(min covariance
/// eigenvalue) is also known). Uncataloged combinations are reported as
/// unknown, never guessed.
LebCatalogResult leb_catalog(const Objective& obj);

}  // namespace assg
