#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "assg/problems.hpp"

using namespace assg;

namespace {

std::shared_ptr<Dataset> tiny_dataset() {
  auto data = std::make_shared<Dataset>();
  data->dim = 2;
  Vector x1(2), x2(2);
  x1 << 1.0, 0.0;
  x2 << 0.0, 1.0;
  data->samples.push_back({x1, 1.0});
  data->samples.push_back({x2, -1.0});
  return data;
}

Objective scalar_objective(Loss loss, Regularizer reg = Regularizer::none(),
                           Mode mode = Mode::plain) {
  SyntheticSpec spec;
  spec.family = SynthFamily::scalar;
  spec.loss = loss;
  spec.reg = reg;
  spec.mode = mode;
  return generate_synthetic(spec, 0);
}

std::filesystem::path tmp_file(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("loss_value examples") {
  CHECK(loss_value(Loss::hinge(), 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(loss_value(Loss::huber(1.0), 0.5, 0.0) == doctest::Approx(0.125));
  CHECK(loss_value(Loss::huber(1.0), 2.0, 0.0) == doctest::Approx(1.5));
  CHECK(loss_value(Loss::square(), 2.0, 1.0) == doctest::Approx(1.0));
  CHECK(loss_value(Loss::eps_insensitive(0.5), 1.2, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("loss_subgrad kink tie-breaks and derivatives") {
  CHECK(loss_subgrad(Loss::hinge(), 1.0, 1.0) == 0.0);       // kink: flat branch
  CHECK(loss_subgrad(Loss::absolute(), 0.7, 0.7) == 0.0);    // midpoint
  CHECK(loss_subgrad(Loss::square(), 2.0, 1.0) == doctest::Approx(2.0));
  CHECK(loss_subgrad(Loss::eps_insensitive(0.1), 1.05, 1.0) == 0.0);
  CHECK(loss_subgrad(Loss::huber(1.0), 3.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("every loss subgradient satisfies the subgradient inequality") {
  Rng64 rng(17);
  const Loss losses[] = {Loss::hinge(),          Loss::absolute(), Loss::eps_insensitive(0.3),
                         Loss::huber(0.8),       Loss::squared_hinge(), Loss::square()};
  for (const auto& loss : losses) {
    for (int pt = 0; pt < 20; ++pt) {
      const double z = 4.0 * rng.gaussian();
      const double y = pt % 2 == 0 ? 1.0 : -1.0;
      const double v = loss_value(loss, z, y);
      const double g = loss_subgrad(loss, z, y);
      for (int probe = 0; probe < 100; ++probe) {
        const double zp = z + 4.0 * rng.gaussian();
        CHECK(loss_value(loss, zp, y) >= v + g * (zp - z) - 1e-12);
      }
    }
  }
}

TEST_CASE("huber value and derivative are continuous at the knee") {
  const Loss l = Loss::huber(1.0);
  const double lo = std::nextafter(1.0, 0.0);
  const double hi = std::nextafter(1.0, 2.0);
  CHECK(std::abs(loss_value(l, lo, 0.0) - loss_value(l, hi, 0.0)) < 1e-12);
  CHECK(std::abs(loss_subgrad(l, lo, 0.0) - loss_subgrad(l, hi, 0.0)) < 1e-12);
  CHECK(std::abs(loss_value(l, -lo, 0.0) - loss_value(l, -hi, 0.0)) < 1e-12);
}

TEST_CASE("stochastic_subgrad: single sample is deterministic") {
  auto data = std::make_shared<Dataset>();
  data->dim = 2;
  Vector x(2);
  x << 0.5, -1.0;
  data->samples.push_back({x, 1.0});
  const Objective obj = make_finite_objective(data, Loss::hinge(), Regularizer::none(),
                                              Mode::plain, Domain::all_space(2));
  Rng64 rng(1);
  Vector w = Vector::Zero(2);
  const Vector g = stochastic_subgrad(obj, w, rng);
  // margin 0 < 1, so the subgradient is -y x
  CHECK(g[0] == doctest::Approx(-0.5));
  CHECK(g[1] == doctest::Approx(1.0));
}

TEST_CASE("stochastic_subgrad: plain mode folds the regularizer in") {
  auto data = tiny_dataset();
  const Objective obj = make_finite_objective(data, Loss::hinge(), Regularizer::l1(0.5),
                                              Mode::plain, Domain::all_space(2));
  Rng64 rng(3);
  Vector w(2);
  w << 0.2, -0.2;  // all margins below 1
  const Vector g = stochastic_subgrad(obj, w, rng);
  bool matches_sample = false;
  for (const auto& s : obj.data->samples) {
    const Vector expect = -s.label * s.features + obj.reg.subgrad(w);
    if ((g - expect).norm() < 1e-14) matches_sample = true;
  }
  CHECK(matches_sample);
}

TEST_CASE("stochastic_subgrad: fixed seed replays the same index sequence") {
  SyntheticSpec spec;
  spec.family = SynthFamily::separable_classification;
  spec.n = 50;
  spec.d = 4;
  const Objective obj = generate_synthetic(spec, 9);
  Rng64 r1(77), r2(77);
  Vector w = Vector::Zero(4);
  for (int i = 0; i < 200; ++i) {
    const Vector g1 = stochastic_subgrad(obj, w, r1);
    const Vector g2 = stochastic_subgrad(obj, w, r2);
    CHECK(g1 == g2);
  }
}

TEST_CASE("full_objective examples") {
  auto data = tiny_dataset();
  const Objective obj = make_finite_objective(data, Loss::hinge(), Regularizer::l1(0.3),
                                              Mode::plain, Domain::all_space(2));
  CHECK(full_objective(obj, Vector::Zero(2)) == doctest::Approx(1.0));

  auto single = std::make_shared<Dataset>();
  single->dim = 2;
  Vector x(2);
  x << 1.0, 0.0;
  single->samples.push_back({x, 1.0});
  const Objective obj2 = make_finite_objective(single, Loss::hinge(), Regularizer::l1(0.1),
                                               Mode::plain, Domain::all_space(2));
  Vector w(2);
  w << 2.0, 0.0;
  CHECK(full_objective(obj2, w) == doctest::Approx(0.2));
}

TEST_CASE("full_objective is convex along random segments") {
  SyntheticSpec spec;
  spec.family = SynthFamily::robust_regression;
  spec.n = 30;
  spec.d = 3;
  spec.reg = Regularizer::l1(0.2);
  const Objective obj = generate_synthetic(spec, 4);
  Rng64 rng(8);
  for (int i = 0; i < 200; ++i) {
    Vector u(3), v(3);
    for (int k = 0; k < 3; ++k) {
      u[k] = 2.0 * rng.gaussian();
      v[k] = 2.0 * rng.gaussian();
    }
    const double a = rng.uniform_real();
    const Vector mid = a * u + (1.0 - a) * v;
    CHECK(full_objective(obj, mid) <=
          a * full_objective(obj, u) + (1.0 - a) * full_objective(obj, v) + 1e-12);
  }
}

TEST_CASE("streaming estimate agrees with the analytic objective") {
  SyntheticSpec spec;
  spec.family = SynthFamily::streaming_gaussian_regression;
  spec.d = 3;
  spec.noise = 0.2;
  const Objective obj = generate_synthetic(spec, 21);
  Vector w(3);
  w << 0.3, -0.1, 0.5;
  const auto est = mc_objective(obj, w, 100000, 42);
  const double truth = analytic_objective(obj, w).value();
  CHECK(std::abs(est.mean - truth) <= 3.0 * est.std_error);
}

TEST_CASE("generate_synthetic: planted margin is enforced") {
  SyntheticSpec spec;
  spec.family = SynthFamily::separable_classification;
  spec.n = 100;
  spec.d = 5;
  spec.margin = 0.5;
  const Objective obj = generate_synthetic(spec, 7);
  REQUIRE(obj.planted.has_value());
  for (const auto& s : obj.data->samples)
    CHECK(s.label * obj.planted->dot(s.features) >= spec.margin - 1e-12);
  CHECK(obj.data->samples.size() == 100);
  CHECK(obj.data->dim == 5);
}

TEST_CASE("generate_synthetic: identical seeds give bitwise-identical datasets") {
  SyntheticSpec spec;
  spec.family = SynthFamily::separable_classification;
  spec.n = 40;
  spec.d = 3;
  const Objective a = generate_synthetic(spec, 123);
  const Objective b = generate_synthetic(spec, 123);
  REQUIRE(a.data->samples.size() == b.data->samples.size());
  for (std::size_t i = 0; i < a.data->samples.size(); ++i) {
    CHECK(a.data->samples[i].features == b.data->samples[i].features);
    CHECK(a.data->samples[i].label == b.data->samples[i].label);
  }
  CHECK(a.G == b.G);
}

TEST_CASE("streaming sample covariance approaches the identity") {
  SyntheticSpec spec;
  spec.family = SynthFamily::streaming_gaussian_regression;
  spec.d = 3;
  const Objective obj = generate_synthetic(spec, 5);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  const int n = 100000;
  Rng64 rng(999);
  for (int i = 0; i < n; ++i) {
    Vector x(3);
    for (int k = 0; k < 3; ++k)
      x[k] = std::sqrt(obj.stream->cov_diag[k]) * rng.gaussian();
    cov += x * x.transpose() / static_cast<double>(n);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  CHECK(std::abs(es.eigenvalues().minCoeff() - 1.0) < 0.1);
}

TEST_CASE("load_libsvm parses sparse lines and promotes the dimension") {
  const auto path = tmp_file("assg_libsvm_basic.txt");
  {
    std::ofstream f(path);
    f << "1 1:0.5 3:2\n";
    f << "-1 2:1\n";
  }
  const Dataset d = load_libsvm(path.string());
  REQUIRE(d.dim == 3);
  REQUIRE(d.samples.size() == 2);
  CHECK(d.samples[0].features[0] == 0.5);
  CHECK(d.samples[0].features[1] == 0.0);
  CHECK(d.samples[0].features[2] == 2.0);
  CHECK(d.samples[0].label == 1.0);
  CHECK(d.samples[1].features[0] == 0.0);
  CHECK(d.samples[1].features[1] == 1.0);
  CHECK(d.samples[1].features[2] == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("load_libsvm rejects malformed tokens with the line number") {
  const auto path = tmp_file("assg_libsvm_bad.txt");
  {
    std::ofstream f(path);
    f << "1 1:0.5\n";
    f << "1 3:a\n";
  }
  try {
    load_libsvm(path.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load_libsvm: empty file is a configuration error") {
  const auto path = tmp_file("assg_libsvm_empty.txt");
  { std::ofstream f(path); }
  CHECK_THROWS_AS(load_libsvm(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("load_libsvm: non-ascending indices rejected") {
  const auto path = tmp_file("assg_libsvm_order.txt");
  {
    std::ofstream f(path);
    f << "1 2:1 2:3\n";
  }
  CHECK_THROWS_AS(load_libsvm(path.string()), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("libsvm round-trips to an identical dataset") {
  const auto p1 = tmp_file("assg_libsvm_rt1.txt");
  {
    std::ofstream f(p1);
    f << "1 1:0.5 3:2.25\n-1 2:1\n0.5 1:-3e-7 2:0 3:1\n";
  }
  const Dataset a = load_libsvm(p1.string());
  const auto p2 = tmp_file("assg_libsvm_rt2.txt");
  save_libsvm(a, p2.string());
  const Dataset b = load_libsvm(p2.string());
  REQUIRE(a.dim == b.dim);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].features == b.samples[i].features);
    CHECK(a.samples[i].label == b.samples[i].label);
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("leb_catalog: polyhedral, quadratic, and streaming entries") {
  auto data = tiny_dataset();
  const auto hinge_l1 =
      leb_catalog(make_finite_objective(data, Loss::hinge(), Regularizer::l1(0.1),
                                        Mode::plain, Domain::all_space(2)));
  REQUIRE(hinge_l1.known);
  CHECK(hinge_l1.spec.theta == 1.0);
  CHECK(!hinge_l1.spec.c.has_value());

  const auto huber_l1 =
      leb_catalog(make_finite_objective(data, Loss::huber(1.0), Regularizer::l1(0.1),
                                        Mode::plain, Domain::all_space(2)));
  REQUIRE(huber_l1.known);
  CHECK(huber_l1.spec.theta == 0.5);
  CHECK(!huber_l1.spec.c.has_value());

  SyntheticSpec spec;
  spec.family = SynthFamily::streaming_gaussian_regression;
  spec.d = 2;
  Vector cov(2);
  cov << 4.0, 0.25;
  spec.cov_diag = cov;
  const auto gauss = leb_catalog(generate_synthetic(spec, 1));
  REQUIRE(gauss.known);
  CHECK(gauss.spec.theta == 0.5);
  CHECK(gauss.spec.c.value() == doctest::Approx(2.0));  // 1/sqrt(0.25)
}

TEST_CASE("leb_catalog: uncataloged combinations stay unknown") {
  Objective obj = scalar_objective(Loss::square());
  obj.loss.kind = static_cast<LossKind>(99);
  const auto res = leb_catalog(obj);
  CHECK(!res.known);
}

TEST_CASE("scalar family builds F(w) = loss(w, 0)") {
  const Objective obj = scalar_objective(Loss::absolute());
  Vector w(1);
  w << -0.7;
  CHECK(full_objective(obj, w) == doctest::Approx(0.7));
  CHECK(obj.G == doctest::Approx(1.0));
}
