#pragma once

#include <Eigen/Core>

#include "assg/errors.hpp"
#include "assg/regularizer.hpp"

namespace assg {

inline constexpr double kTolProj = 1e-10;      // iterate-change tolerance for Dykstra
inline constexpr double kTolProx = 1e-10;      // radius-gap tolerance for the ball prox
inline constexpr int kMaxDykstraIters = 10000;

/// Euclidean ball { u : ||u - center|| <= radius }.
struct Ball {
  Vector center;
  double radius = 0.0;

  Ball() = default;
  Ball(Vector c, double r) : center(std::move(c)), radius(r) {
    if (radius < 0.0) throw InvalidInput("Ball: radius must be nonnegative");
  }

  bool contains(const Vector& p, double tol = 0.0) const {
    return (p - center).norm() <= radius + tol;
  }
};

/// Closed convex feasible set: all of R^d, an axis-aligned box, or a ball.
class Domain {
 public:
  enum class Kind { all_space, box, ball };

  Domain() = default;  // all of R^0; builders always set a real domain

  static Domain all_space(Eigen::Index dim);
  static Domain box(Vector lower, Vector upper);
  static Domain ball(Ball b);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  bool contains(const Vector& p, double tol = 0.0) const;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Ball& ball_set() const { return ball_; }

 private:
  Kind kind_ = Kind::all_space;
  Eigen::Index dim_ = 0;
  Vector lower_, upper_;
  Ball ball_;
};

/// Exact Euclidean projection onto the domain.
Vector project(const Domain& domain, const Vector& point);

/// Exact ball projection; returns the input unchanged when already inside.
Vector project_ball(const Ball& ball, const Vector& point);

/// Sort-based exact projection onto { v : ||v||_1 <= radius }.
Vector project_l1_ball(const Vector& v, double radius);

/// Projection onto base ∩ ball. Closed form when base is all-space or a ball
/// concentric with `ball`; Dykstra alternating projections otherwise, stopping
/// once the successive-iterate change drops below `tol`. The returned point is
/// exactly ball-feasible and base-feasible within `tol`. The ball is assumed
/// to be centered at a base-feasible point (the solvers guarantee this).
Vector project_intersection(const Domain& base, const Ball& ball, const Vector& point,
                            double tol = kTolProj, int max_iters = kMaxDykstraIters);

/// Elementwise sign(v_i) * max(|v_i| - tau, 0).
Vector soft_threshold(const Vector& v, double tau);

/// Unconstrained proximal map argmin_u 1/2||u - v||^2 + eta R(u).
Vector prox_reg(const Regularizer& reg, double eta, const Vector& v);

/// Ball-constrained proximal map argmin_{u in ball} 1/2||u - point||^2 + eta R(u).
/// Solved through the KKT multiplier mu >= 0 on the ball constraint: the inner
/// problem reduces to the unconstrained prox of R at (point + mu*center)/(1+mu)
/// with weight eta/(1+mu); mu is found by doubling then bisection until the
/// radius gap is below `tol`. mu = 0 is accepted when the unconstrained prox is
/// already feasible.
Vector prox_reg_ball(const Regularizer& reg, double eta, const Ball& ball,
                     const Vector& point, double tol = kTolProx);

}  // namespace assg
