#pragma once

#include <Eigen/Core>
#include <cmath>

#include "assg/errors.hpp"

namespace assg {

using Vector = Eigen::VectorXd;

enum class RegKind { none, l1, linf, huber_norm };

/// Nonnegative convex penalty R(w) with R(0) = 0. All kinds listed here admit
/// an exact proximal map (see geometry.hpp).
struct Regularizer {
  RegKind kind = RegKind::none;
  double lambda = 0.0;  // weight, >= 0
  double delta = 1.0;   // huber_norm knee, > 0

  static Regularizer none() { return {}; }
  static Regularizer l1(double lambda) { return make(RegKind::l1, lambda, 1.0); }
  static Regularizer linf(double lambda) { return make(RegKind::linf, lambda, 1.0); }
  static Regularizer huber_norm(double lambda, double delta) {
    if (delta <= 0.0) throw InvalidInput("huber_norm: delta must be positive");
    return make(RegKind::huber_norm, lambda, delta);
  }

  bool prox_capable() const { return true; }

  double value(const Vector& w) const {
    switch (kind) {
      case RegKind::none:
        return 0.0;
      case RegKind::l1:
        return lambda * w.lpNorm<1>();
      case RegKind::linf:
        return w.size() == 0 ? 0.0 : lambda * w.lpNorm<Eigen::Infinity>();
      case RegKind::huber_norm: {
        double s = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          const double a = std::abs(w[i]);
          s += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
        }
        return lambda * s;
      }
    }
    throw ConfigError("regularizer: unsupported kind");
  }

  /// A deterministic element of the subdifferential; zero coordinates of an
  /// l1 term get 0, the linf term charges the first coordinate of maximal
  /// magnitude.
  Vector subgrad(const Vector& w) const {
    Vector g = Vector::Zero(w.size());
    switch (kind) {
      case RegKind::none:
        return g;
      case RegKind::l1:
        for (Eigen::Index i = 0; i < w.size(); ++i)
          g[i] = w[i] > 0.0 ? lambda : (w[i] < 0.0 ? -lambda : 0.0);
        return g;
      case RegKind::linf: {
        if (w.size() == 0) return g;
        Eigen::Index arg = 0;
        double best = std::abs(w[0]);
        for (Eigen::Index i = 1; i < w.size(); ++i) {
          const double a = std::abs(w[i]);
          if (a > best) {
            best = a;
            arg = i;
          }
        }
        if (best > 0.0) g[arg] = w[arg] > 0.0 ? lambda : -lambda;
        return g;
      }
      case RegKind::huber_norm:
        for (Eigen::Index i = 0; i < w.size(); ++i)
          g[i] = lambda * std::clamp(w[i], -delta, delta);
        return g;
    }
    throw ConfigError("regularizer: unsupported kind");
  }

  /// Uniform bound on subgradient norms over R^d (rho in composite runs).
  double subgrad_bound(Eigen::Index dim) const {
    switch (kind) {
      case RegKind::none:
        return 0.0;
      case RegKind::l1:
        return lambda * std::sqrt(static_cast<double>(dim));
      case RegKind::linf:
        return lambda;
      case RegKind::huber_norm:
        return lambda * delta * std::sqrt(static_cast<double>(dim));
    }
    throw ConfigError("regularizer: unsupported kind");
  }

 private:
  static Regularizer make(RegKind k, double lambda, double delta) {
    if (lambda < 0.0) throw InvalidInput("regularizer: lambda must be nonnegative");
    Regularizer r;
    r.kind = k;
    r.lambda = lambda;
    r.delta = delta;
    return r;
  }
};

}  // namespace assg
