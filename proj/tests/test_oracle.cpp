#include <doctest.h>

#include <cmath>

#include "assg/geometry.hpp"
#include "assg/oracle.hpp"

using namespace assg;

namespace {

Objective scalar_problem(Loss loss) {
  SyntheticSpec spec;
  spec.family = SynthFamily::scalar;
  spec.loss = loss;
  return generate_synthetic(spec, 0);
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("reference_optimum: absolute value has an analytic optimum at zero") {
  const Objective obj = scalar_problem(Loss::absolute());
  const ReferenceOptimum ref = reference_optimum(obj, 200000, 1e-9);
  CHECK(ref.gap_bound <= 1e-9);
  CHECK(std::abs(ref.f_star) <= 1e-9);
  CHECK(std::abs(ref.w_star[0]) <= 1e-8);
  // self-consistency invariant
  CHECK(full_objective(obj, ref.w_star) - ref.f_star <= ref.gap_bound);
}

TEST_CASE("reference_optimum: tiny polyhedral problem matches vertex enumeration") {
  auto data = std::make_shared<Dataset>();
  data->dim = 2;
  data->samples.push_back({vec2(2.0, 0.0), 1.0});
  data->samples.push_back({vec2(0.0, 2.0), 1.0});
  data->samples.push_back({vec2(-1.0, -1.0), -1.0});
  data->samples.push_back({vec2(-2.0, 1.0), -1.0});
  const Objective obj = make_finite_objective(data, Loss::hinge(), Regularizer::l1(0.1),
                                              Mode::plain, Domain::all_space(2));

  // every kink line of the piecewise-linear objective: y_i x_i . w = 1 and
  // the coordinate axes; the minimum sits on an intersection of two of them
  struct Line {
    double a1, a2, b;
  };
  std::vector<Line> lines;
  for (const auto& s : data->samples)
    lines.push_back({s.label * s.features[0], s.label * s.features[1], 1.0});
  lines.push_back({1.0, 0.0, 0.0});
  lines.push_back({0.0, 1.0, 0.0});
  double best = 1e300;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double det = lines[i].a1 * lines[j].a2 - lines[i].a2 * lines[j].a1;
      if (std::abs(det) < 1e-12) continue;
      const double w1 = (lines[i].b * lines[j].a2 - lines[i].a2 * lines[j].b) / det;
      const double w2 = (lines[i].a1 * lines[j].b - lines[i].b * lines[j].a1) / det;
      best = std::min(best, full_objective(obj, vec2(w1, w2)));
    }

  const ReferenceOptimum ref = reference_optimum(obj, 400000, 1e-8);
  CHECK(std::abs(ref.f_star - best) <= 1e-6);
}

TEST_CASE("reference_optimum: planted least squares with zero noise is recovered") {
  SyntheticSpec spec;
  spec.family = SynthFamily::least_squares;
  spec.n = 20;
  spec.d = 3;
  spec.noise = 0.0;
  const Objective obj = generate_synthetic(spec, 13);
  REQUIRE(obj.planted.has_value());
  const ReferenceOptimum ref = reference_optimum(obj, 300000, 1e-5);
  CHECK((ref.w_star - *obj.planted).norm() <= 1e-6);
  CHECK(ref.f_star <= 1e-10);
}

TEST_CASE("reference_optimum: streaming objectives are rejected") {
  SyntheticSpec spec;
  spec.family = SynthFamily::streaming_gaussian_regression;
  spec.d = 2;
  const Objective obj = generate_synthetic(spec, 1);
  CHECK_THROWS_AS(reference_optimum(obj, 1000, 1e-3), InvalidInput);
}

TEST_CASE("brute_force_prox: projection case and inactive-ball l1 case") {
  const Ball ball(Vector::Zero(2), 1.0);
  const Vector p = vec2(3.0, 4.0);
  const Vector q = brute_force_prox(Regularizer::none(), 1.0, ball, p, 1e-3);
  const Vector exact = project_ball(ball, p);
  CHECK((q - exact).norm() <= 2e-3);

  const Ball big(Vector::Zero(2), 50.0);
  const Vector v = vec2(2.0, -0.5);
  const Vector s = brute_force_prox(Regularizer::l1(1.0), 1.0, big, v, 1e-2);
  const Vector st = soft_threshold(v, 1.0);
  CHECK((s - st).norm() <= 2e-2);
}

TEST_CASE("brute_force_prox: dimension limit") {
  Vector p(3);
  p.setZero();
  CHECK_THROWS_AS(brute_force_prox(Regularizer::none(), 1.0, Ball(p, 1.0), p, 1e-2),
                  InvalidInput);
}

TEST_CASE("brute_force_prox agrees with the bisection solver on random instances") {
  Rng64 rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const Regularizer reg = trial % 2 == 0 ? Regularizer::l1(0.6) : Regularizer::linf(0.5);
    Vector c(2), p(2);
    for (int i = 0; i < 2; ++i) {
      c[i] = 0.3 * rng.gaussian();
      p[i] = 1.5 * rng.gaussian();
    }
    const Ball ball(c, 0.25 + 0.3 * rng.uniform_real());
    const double eta = 0.2 + rng.uniform_real();
    const Vector a = prox_reg_ball(reg, eta, ball, p);
    const Vector b = brute_force_prox(reg, eta, ball, p, 1e-3);
    CHECK((a - b).norm() <= 2e-3);
  }
}

TEST_CASE("check_subgradient: smooth case matches central differences") {
  const Objective obj = scalar_problem(Loss::square());
  Vector w(1);
  w << 0.7;
  const SubgradReport rep = check_subgradient(obj, w, 1e-5);
  CHECK(rep.passed);
  CHECK(rep.fd_coords == 1);
  CHECK(rep.max_fd_error <= 1e-6);
}

TEST_CASE("check_subgradient: hinge kink falls back to inequality probes") {
  auto data = std::make_shared<Dataset>();
  data->dim = 1;
  Vector x(1);
  x << 1.0;
  data->samples.push_back({x, 1.0});
  const Objective obj = make_finite_objective(data, Loss::hinge(), Regularizer::none(),
                                              Mode::plain, Domain::all_space(1));
  Vector w(1);
  w << 1.0;  // margin boundary
  const SubgradReport rep = check_subgradient(obj, w, 1e-5);
  CHECK(rep.kink_coords == 1);
  CHECK(rep.passed);
}

TEST_CASE("check_subgradient: corrupted candidate is flagged") {
  const Objective obj = scalar_problem(Loss::square());
  Vector w(1);
  w << 0.7;
  Vector g = full_subgrad(obj, w);
  g[0] += 0.1;
  const SubgradReport rep = check_subgradient_at(obj, w, g, 1e-5);
  CHECK(!rep.passed);
  CHECK(rep.violations > 0);
}

TEST_CASE("measure_leb recovers the sharp exponent of the absolute value") {
  const Objective obj = scalar_problem(Loss::absolute());
  const ReferenceOptimum ref = reference_optimum(obj, 200000, 1e-9);
  const std::vector<double> grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  const EmpiricalLeb leb = measure_leb(obj, ref, grid);
  CHECK(std::abs(leb.fitted_theta - 1.0) <= 0.1);
  CHECK(std::abs(leb.fitted_c - 1.0) <= 0.1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double prev = leb.dist_estimates[i - 1] / grid[i - 1];
    const double cur = leb.dist_estimates[i] / grid[i];
    CHECK(cur <= prev * 1.05);  // monotone within sampling slack
  }
}

TEST_CASE("measure_leb recovers the quadratic exponent") {
  const Objective obj = scalar_problem(Loss::square());
  const ReferenceOptimum ref = reference_optimum(obj, 200000, 1e-9);
  const std::vector<double> grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  const EmpiricalLeb leb = measure_leb(obj, ref, grid);
  CHECK(std::abs(leb.fitted_theta - 0.5) <= 0.05);
  CHECK(std::abs(leb.fitted_c - 1.0) <= 0.1);
}

TEST_CASE("measure_leb: guards on the grid and the reference accuracy") {
  const Objective obj = scalar_problem(Loss::absolute());
  ReferenceOptimum sloppy;
  sloppy.f_star = 0.0;
  sloppy.w_star = Vector::Zero(1);
  sloppy.gap_bound = 0.5;
  CHECK_THROWS_AS(measure_leb(obj, sloppy, {0.1, 0.2}), InvalidInput);
  ReferenceOptimum fine = sloppy;
  fine.gap_bound = 1e-10;
  CHECK_THROWS_AS(measure_leb(obj, fine, {0.2, 0.1}), InvalidInput);
}
