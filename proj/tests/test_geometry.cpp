#include <doctest.h>

#include <cmath>

#include "assg/geometry.hpp"
#include "assg/oracle.hpp"
#include "assg/rng.hpp"

using namespace assg;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector random_vec(Rng64& rng, int d, double scale) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("project: ball, all-space, box examples") {
  Vector p = vec2(3.0, 4.0);
  const Domain ball = Domain::ball(Ball(Vector::Zero(2), 1.0));
  const Vector q = project(ball, p);
  CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.8).epsilon(1e-15));

  const Domain all = Domain::all_space(2);
  CHECK(project(all, p) == p);

  const Domain box = Domain::box(vec2(-1, -1), vec2(1, 1));
  const Vector r = project(box, vec2(2.0, 0.5));
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.5);
}

TEST_CASE("project: dimension mismatch rejected") {
  const Domain box = Domain::box(vec2(-1, -1), vec2(1, 1));
  Vector bad(3);
  bad.setZero();
  CHECK_THROWS_AS(project(box, bad), InvalidInput);
}

TEST_CASE("project_intersection: all-space base reduces to ball projection") {
  const Domain all = Domain::all_space(2);
  const Ball ball(Vector::Zero(2), 1.0);
  const Vector q = project_intersection(all, ball, vec2(3.0, 4.0));
  CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("project_intersection: interior point returned unchanged") {
  const Domain box = Domain::box(vec2(-1, -1), vec2(1, 1));
  const Ball ball(Vector::Zero(2), 0.9);
  const Vector p = vec2(0.2, -0.3);
  const Vector q = project_intersection(box, ball, p);
  CHECK(q == p);
}

TEST_CASE("project_intersection: degenerate radius returns the center") {
  const Domain box = Domain::box(vec2(-1, -1), vec2(1, 1));
  const Ball ball(vec2(0.5, 0.5), 0.0);
  CHECK(project_intersection(box, ball, vec2(9, 9)) == ball.center);
}

TEST_CASE("project_intersection: concentric ball base uses the tighter radius") {
  const Domain base = Domain::ball(Ball(Vector::Zero(2), 0.5));
  const Ball ball(Vector::Zero(2), 2.0);
  const Vector q = project_intersection(base, ball, vec2(3.0, 4.0));
  CHECK(q.norm() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("project_intersection: box-and-ball matches a dense grid argmin") {
  // grid oracle over the feasible set at resolution 1e-3
  const Domain box = Domain::box(vec2(-1, -1), vec2(1, 1));
  const Ball ball(Vector::Zero(2), 0.5);
  const Vector p = vec2(2.0, 2.0);
  const Vector q = project_intersection(box, ball, p);

  double best = 1e300;
  Vector best_u = Vector::Zero(2);
  const double res = 1e-3;
  for (double x = -0.5; x <= 0.5 + 1e-12; x += res)
    for (double y = -0.5; y <= 0.5 + 1e-12; y += res) {
      const Vector u = vec2(x, y);
      if (!ball.contains(u) || !box.contains(u)) continue;
      const double d = (u - p).squaredNorm();
      if (d < best) {
        best = d;
        best_u = u;
      }
    }
  CHECK((q - best_u).norm() < 2e-3);
  CHECK(box.contains(q, kTolProj));
  CHECK(ball.contains(q, kTolProj));
}

TEST_CASE("soft_threshold examples") {
  Vector v(3);
  v << 2.0, -0.5, 0.3;
  const Vector s = soft_threshold(v, 1.0);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.0);

  CHECK(soft_threshold(v, 0.0) == v);

  Vector one(1);
  one << -3.0;
  CHECK(soft_threshold(one, 3.0)[0] == 0.0);
  CHECK_THROWS_AS(soft_threshold(v, -1.0), InvalidInput);
}

TEST_CASE("prox_reg_ball: none is the ball projection") {
  const Ball ball(Vector::Zero(2), 1.0);
  const Vector q = prox_reg_ball(Regularizer::none(), 1.0, ball, vec2(3.0, 4.0));
  CHECK(q[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("prox_reg_ball: slack ball defers to soft thresholding") {
  const Ball ball(Vector::Zero(2), 100.0);
  const Vector q = prox_reg_ball(Regularizer::l1(1.0), 1.0, ball, vec2(2.0, -0.5));
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q[1] == 0.0);
}

TEST_CASE("prox_reg_ball: active ball matches the dense grid oracle") {
  const Ball ball(Vector::Zero(2), 0.3);
  const Vector p = vec2(2.0, 2.0);
  const Vector q = prox_reg_ball(Regularizer::l1(1.0), 1.0, ball, p);
  const Vector o = brute_force_prox(Regularizer::l1(1.0), 1.0, ball, p, 1e-3);
  CHECK((q - o).norm() < 2e-3);
  CHECK(ball.contains(q, kTolProx));
}

TEST_CASE("prox_reg_ball optimality against feasible perturbations") {
  Rng64 rng(99);
  const Regularizer regs[] = {Regularizer::l1(0.7), Regularizer::linf(0.5),
                              Regularizer::huber_norm(0.8, 0.6)};
  for (const auto& reg : regs) {
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 1 + static_cast<int>(rng.uniform_index(4));
      const Ball ball(random_vec(rng, d, 0.5), 0.2 + rng.uniform_real());
      const Vector p = random_vec(rng, d, 2.0);
      const double eta = 0.1 + rng.uniform_real();
      const Vector u = prox_reg_ball(reg, eta, ball, p);
      const double fu = 0.5 * (u - p).squaredNorm() + eta * reg.value(u);
      for (int probe = 0; probe < 20; ++probe) {
        Vector z = ball.center + random_vec(rng, d, ball.radius);
        z = project_ball(ball, z);
        const double fz = 0.5 * (z - p).squaredNorm() + eta * reg.value(z);
        CHECK(fu <= fz + 1e-7);
      }
    }
  }
}

TEST_CASE("projection property tests: nonexpansive, idempotent, variational") {
  Rng64 rng(2024);
  const Domain domains[] = {
      Domain::all_space(3),
      Domain::box(-Vector::Ones(3), Vector::Ones(3)),
      Domain::ball(Ball(Vector::Ones(3) * 0.2, 1.3)),
  };
  for (const auto& dom : domains) {
    for (int i = 0; i < 2000; ++i) {
      const Vector x = random_vec(rng, 3, 3.0);
      const Vector y = random_vec(rng, 3, 3.0);
      const Vector px = project(dom, x);
      const Vector py = project(dom, y);
      CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
      CHECK((project(dom, px) - px).norm() <= 1e-15);
      Vector z = project(dom, random_vec(rng, 3, 3.0));  // feasible probe
      CHECK((x - px).dot(z - px) <= kTolProj + 1e-9 * x.norm());
    }
  }
}

TEST_CASE("project_l1_ball: feasible and identity inside") {
  Rng64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vector v = random_vec(rng, 4, 2.0);
    const double r = 0.5 + rng.uniform_real();
    const Vector p = project_l1_ball(v, r);
    CHECK(p.lpNorm<1>() <= r + 1e-10);
    if (v.lpNorm<1>() <= r) CHECK(p == v);
  }
}
