#include "assg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace assg {

namespace {

void check_dim(Eigen::Index expected, Eigen::Index got, const char* where) {
  if (expected != got)
    throw InvalidInput(std::string(where) + ": dimension mismatch (" +
                       std::to_string(expected) + " vs " + std::to_string(got) + ")");
}

}  // namespace

Domain Domain::all_space(Eigen::Index dim) {
  if (dim <= 0) throw InvalidInput("Domain::all_space: dim must be positive");
  Domain d;
  d.kind_ = Kind::all_space;
  d.dim_ = dim;
  return d;
}

Domain Domain::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw InvalidInput("Domain::box: bounds must be nonempty and of equal size");
  if ((lower.array() > upper.array()).any())
    throw InvalidInput("Domain::box: lower must be <= upper elementwise");
  Domain d;
  d.kind_ = Kind::box;
  d.dim_ = lower.size();
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

Domain Domain::ball(Ball b) {
  if (b.center.size() == 0) throw InvalidInput("Domain::ball: empty center");
  Domain d;
  d.kind_ = Kind::ball;
  d.dim_ = b.center.size();
  d.ball_ = std::move(b);
  return d;
}

bool Domain::contains(const Vector& p, double tol) const {
  check_dim(dim_, p.size(), "Domain::contains");
  switch (kind_) {
    case Kind::all_space:
      return true;
    case Kind::box:
      return (p.array() >= lower_.array() - tol).all() &&
             (p.array() <= upper_.array() + tol).all();
    case Kind::ball:
      return ball_.contains(p, tol);
  }
  return false;
}

Vector project(const Domain& domain, const Vector& point) {
  check_dim(domain.dim(), point.size(), "project");
  switch (domain.kind()) {
    case Domain::Kind::all_space:
      return point;
    case Domain::Kind::box:
      return point.cwiseMax(domain.lower()).cwiseMin(domain.upper());
    case Domain::Kind::ball:
      return project_ball(domain.ball_set(), point);
  }
  throw InvalidInput("project: unknown domain kind");
}

Vector project_ball(const Ball& ball, const Vector& point) {
  check_dim(ball.center.size(), point.size(), "project_ball");
  if (ball.radius == 0.0) return ball.center;
  const double dist = (point - ball.center).norm();
  if (dist <= ball.radius) return point;
  return ball.center + (point - ball.center) * (ball.radius / dist);
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (radius < 0.0) throw InvalidInput("project_l1_ball: radius must be nonnegative");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Vector::Zero(v.size());
  // Duchi et al. sort-and-shift: threshold at the largest j keeping the
  // shifted prefix positive.
  std::vector<double> mag(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) mag[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) {
    cum += mag[j];
    const double candidate = (cum - radius) / static_cast<double>(j + 1);
    if (mag[j] - candidate > 0.0)
      theta = candidate;
    else
      break;
  }
  return soft_threshold(v, theta);
}

Vector project_intersection(const Domain& base, const Ball& ball, const Vector& point,
                            double tol, int max_iters) {
  check_dim(base.dim(), point.size(), "project_intersection");
  check_dim(base.dim(), ball.center.size(), "project_intersection");
  if (ball.radius == 0.0) return ball.center;  // forced by definition
  if (base.kind() == Domain::Kind::all_space) return project_ball(ball, point);
  if (base.kind() == Domain::Kind::ball && base.ball_set().center == ball.center) {
    const Ball tighter(ball.center, std::min(ball.radius, base.ball_set().radius));
    return project_ball(tighter, point);
  }

  // Dykstra between the base set and the ball, converging to the exact
  // projection onto the intersection. Ends on the ball step so the result is
  // exactly ball-feasible.
  Vector x = point;
  Vector p_corr = Vector::Zero(point.size());
  Vector q_corr = Vector::Zero(point.size());
  for (int it = 0; it < max_iters; ++it) {
    const Vector y = project(base, x + p_corr);
    p_corr = x + p_corr - y;
    const Vector z = project_ball(ball, y + q_corr);
    q_corr = y + q_corr - z;
    if ((z - x).norm() < tol) return z;
    x = z;
  }
  throw NumericalFailure("project_intersection: Dykstra did not converge", x);
}

Vector soft_threshold(const Vector& v, double tau) {
  if (tau < 0.0) throw InvalidInput("soft_threshold: tau must be nonnegative");
  if (tau == 0.0) return v;
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - tau;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

namespace {

double prox_huber_scalar(double v, double tau, double delta) {
  // prox of tau * huber_delta: quadratic branch shrinks by 1/(1+tau),
  // linear branch shifts by tau*delta toward zero; branches meet at
  // |v| = delta*(1+tau).
  if (std::abs(v) <= delta * (1.0 + tau)) return v / (1.0 + tau);
  return v > 0.0 ? v - tau * delta : v + tau * delta;
}

}  // namespace

Vector prox_reg(const Regularizer& reg, double eta, const Vector& v) {
  if (eta <= 0.0) throw InvalidInput("prox_reg: eta must be positive");
  switch (reg.kind) {
    case RegKind::none:
      return v;
    case RegKind::l1:
      return soft_threshold(v, eta * reg.lambda);
    case RegKind::linf: {
      if (reg.lambda == 0.0) return v;
      // Moreau identity: prox of the linf norm is the residual of the
      // l1-ball projection at radius eta*lambda.
      return v - project_l1_ball(v, eta * reg.lambda);
    }
    case RegKind::huber_norm: {
      Vector out(v.size());
      const double tau = eta * reg.lambda;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        out[i] = prox_huber_scalar(v[i], tau, reg.delta);
      return out;
    }
  }
  throw ConfigError("prox_reg: unsupported regularizer kind");
}

Vector prox_reg_ball(const Regularizer& reg, double eta, const Ball& ball,
                     const Vector& point, double tol) {
  if (eta <= 0.0) throw InvalidInput("prox_reg_ball: eta must be positive");
  check_dim(ball.center.size(), point.size(), "prox_reg_ball");
  if (!reg.prox_capable()) throw ConfigError("prox_reg_ball: regularizer has no prox");
  if (ball.radius == 0.0) return ball.center;
  if (reg.kind == RegKind::none) return project_ball(ball, point);

  const auto shifted_prox = [&](double mu) {
    const Vector shifted = (point + mu * ball.center) / (1.0 + mu);
    return prox_reg(reg, eta / (1.0 + mu), shifted);
  };

  Vector u = shifted_prox(0.0);
  double gap = (u - ball.center).norm() - ball.radius;
  if (gap <= 0.0) return u;  // unconstrained prox already feasible

  // ||u(mu) - center|| is non-increasing in mu, so double to bracket, then
  // bisect on the radius gap.
  double lo = 0.0;
  double hi = 1.0;
  Vector u_hi = shifted_prox(hi);
  int doublings = 0;
  while ((u_hi - ball.center).norm() - ball.radius > 0.0) {
    lo = hi;
    hi *= 2.0;
    u_hi = shifted_prox(hi);
    if (++doublings > 200)
      throw NumericalFailure("prox_reg_ball: could not bracket the multiplier", u_hi);
  }
  for (int it = 0; it < 200; ++it) {
    const double feas_gap = (u_hi - ball.center).norm() - ball.radius;
    if (feas_gap > -tol) break;  // feasible and within tol of the boundary
    const double mid = 0.5 * (lo + hi);
    const Vector u_mid = shifted_prox(mid);
    if ((u_mid - ball.center).norm() - ball.radius > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      u_hi = u_mid;
    }
  }
  return u_hi;
}

}  // namespace assg
