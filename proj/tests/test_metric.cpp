#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "aftk/metric.hpp"

using aftk::HarmonicBasis;
using aftk::MetricField;
using aftk::MetricValue;
using aftk::SphereFunction;

namespace {

// deterministic field with angular structure in every component, small
// enough to stay positive definite at the default inner radius
MetricField generic_field(double rin = 10.0) {
  auto basis = std::make_shared<const HarmonicBasis>(3);
  std::array<SphereFunction, 6> h1 = {
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size())),
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size())),
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size())),
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size())),
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size())),
      SphereFunction(basis, Eigen::VectorXd::Zero(basis->size()))};
  for (int c = 0; c < 6; ++c) {
    for (int n = 0; n < basis->size(); ++n) {
      h1[c].coefficients()[n] = 0.1 * std::sin(1.0 + n + 2.7 * c);
    }
  }
  return MetricField(std::move(h1), rin);
}

Eigen::Matrix3d fd_dg(const MetricField& f, const Eigen::Vector3d& x, int k,
                      double h) {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = h;
  return (f.eval(x - 2.0 * e, 0).g - 8.0 * f.eval(x - e, 0).g +
          8.0 * f.eval(x + e, 0).g - f.eval(x + 2.0 * e, 0).g) /
         (12.0 * h);
}

Eigen::Matrix3d fd_d2g(const MetricField& f, const Eigen::Vector3d& x, int k,
                       int l, double h) {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = h;
  return (f.eval(x - 2.0 * e, 1).dg[l] - 8.0 * f.eval(x - e, 1).dg[l] +
          8.0 * f.eval(x + e, 1).dg[l] - f.eval(x + 2.0 * e, 1).dg[l]) /
         (12.0 * h);
}

double schwarzschild_conformal4(double m, double s) {
  const double phi = 1.0 + m / (2.0 * s);
  return phi * phi * phi * phi;
}

}  // namespace

TEST_CASE("builtin fields have the advertised pointwise values") {
  const Eigen::Vector3d pts[3] = {{12.4, -7.2, 9.6},
                                  {-15.0, 4.0, -22.0},
                                  {0.5, 0.25, 60.0}};

  const MetricField flat = MetricField::flat();
  const MetricField conf = MetricField::conformal();
  const Eigen::Vector3d c(1.5, -2.0, 0.5);
  const MetricField schw = MetricField::schwarzschild(1.3, c);

  for (const auto& x : pts) {
    const double r = x.norm();
    CHECK((flat.eval(x, 0).g - Eigen::Matrix3d::Identity()).norm() == 0.0);

    const Eigen::Matrix3d gc = conf.eval(x, 0).g;
    CHECK((gc - (1.0 + 1.0 / r) * Eigen::Matrix3d::Identity()).norm() <
          1e-14);

    const double want = schwarzschild_conformal4(1.3, (x - c).norm());
    const Eigen::Matrix3d gs = schw.eval(x, 0).g;
    CHECK((gs - want * Eigen::Matrix3d::Identity()).norm() < 1e-13 * want);
  }
}

TEST_CASE("metric values agree with the component functions") {
  const MetricField f = generic_field();
  const Eigen::Vector3d x(12.4, -7.2, 9.6);
  const double r = x.norm();
  const MetricValue mv = f.eval(x, 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double want =
          (i == j ? 1.0 : 0.0) + f.h1(i, j).eval(x / r) / r;
      CHECK(mv.g(i, j) == doctest::Approx(want).epsilon(1e-14));
    }
  }
  CHECK((mv.g * mv.g_inv - Eigen::Matrix3d::Identity()).norm() < 1e-13);
  CHECK(mv.has_first);
  CHECK(mv.has_second);
}

TEST_CASE("first and second derivatives match finite differences") {
  const MetricField f = generic_field();
  const Eigen::Vector3d pts[2] = {{12.4, -7.2, 9.6}, {-15.0, 4.0, -22.0}};
  const double h = 1e-2;
  for (const auto& x : pts) {
    const MetricValue mv = f.eval(x, 2);
    for (int k = 0; k < 3; ++k) {
      CHECK((mv.dg[k] - fd_dg(f, x, k, h)).norm() < 5e-12);
      for (int l = 0; l < 3; ++l) {
        CHECK((mv.d2g[k][l] - fd_d2g(f, x, k, l, h)).norm() < 1e-10);
        CHECK((mv.d2g[k][l] - mv.d2g[l][k]).norm() < 1e-15);
      }
      // lower symmetry of the connection
      CHECK((mv.christoffel[k] - mv.christoffel[k].transpose()).norm() <
            1e-15);
    }
  }
}

TEST_CASE("pure 1/r fields scale exactly") {
  const MetricField f = generic_field();
  const Eigen::Vector3d x(12.4, -7.2, 9.6);
  const Eigen::Matrix3d d1 = f.eval(x, 0).g - Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d d2 =
      f.eval(2.0 * x, 0).g - Eigen::Matrix3d::Identity();
  CHECK((d1 - 2.0 * d2).norm() < 1e-15);
}

TEST_CASE("conformal example has the closed form scalar curvature") {
  const MetricField conf = MetricField::conformal();
  const Eigen::Vector3d dirs[3] = {
      Eigen::Vector3d(1.0, 0.0, 0.0),
      Eigen::Vector3d(0.3, -0.8, 0.52).normalized(),
      Eigen::Vector3d(-0.1, 0.2, 0.97).normalized()};
  for (double r : {10.0, 17.3, 40.0, 123.0}) {
    for (const auto& u : dirs) {
      const double got = aftk::scalar_curvature(conf, r * u);
      const double want = 3.0 / (2.0 * r * std::pow(1.0 + r, 3));
      CHECK(got == doctest::Approx(want).epsilon(1e-11));
    }
  }
}

TEST_CASE("schwarzschild is scalar flat, centered or not") {
  const MetricField centered = MetricField::schwarzschild(1.0);
  const MetricField offset =
      MetricField::schwarzschild(1.0, Eigen::Vector3d(1.5, -2.0, 0.5));
  const Eigen::Vector3d pts[3] = {{12.4, -7.2, 9.6},
                                  {-15.0, 4.0, -22.0},
                                  {25.0, 0.0, 0.0}};
  for (const auto& x : pts) {
    CHECK(std::abs(aftk::scalar_curvature(centered, x)) < 1e-12);
    CHECK(std::abs(aftk::scalar_curvature(offset, x)) < 1e-12);
  }
  // flat space is exactly flat
  const MetricField flat = MetricField::flat();
  CHECK(aftk::scalar_curvature(flat, pts[0]) == 0.0);
}

TEST_CASE("coordinate laplacian matches conformal closed forms") {
  const MetricField flat = MetricField::flat();
  const MetricField conf = MetricField::conformal();
  const MetricField schw = MetricField::schwarzschild(1.3);
  const Eigen::Vector3d pts[2] = {{12.4, -7.2, 9.6}, {-15.0, 4.0, -22.0}};
  for (const auto& x : pts) {
    const double r = x.norm();
    const Eigen::Vector3d u = x / r;

    CHECK(aftk::coordinate_laplacian(flat, x).norm() < 1e-15);

    // g = (1 + 1/r) delta gives Delta_g x^k = -u_k / (2 (1 + r)^2)
    const Eigen::Vector3d want_conf = -u / (2.0 * (1.0 + r) * (1.0 + r));
    CHECK((aftk::coordinate_laplacian(conf, x) - want_conf).norm() <
          1e-12 * want_conf.norm());

    // g = phi^4 delta gives Delta_g x^k = -(m / r^2) phi^-5 u_k
    const double phi = 1.0 + 1.3 / (2.0 * r);
    const Eigen::Vector3d want_schw =
        -(1.3 / (r * r)) * std::pow(phi, -5.0) * u;
    CHECK((aftk::coordinate_laplacian(schw, x) - want_schw).norm() <
          1e-12 * want_schw.norm());
  }
}

TEST_CASE("callable remainder reproduces the analytic tail") {
  const double m = 2.0;
  const Eigen::Vector3d c(1.0, 0.0, -1.0);
  const MetricField exact = MetricField::schwarzschild(m, c);

  MetricField fd(
      {exact.h1(0, 0), exact.h1(0, 1), exact.h1(0, 2), exact.h1(1, 1),
       exact.h1(1, 2), exact.h1(2, 2)},
      exact.inner_radius());
  fd.set_q_callable([m, c](const Eigen::Vector3d& x) -> Eigen::Matrix3d {
    const double s = (x - c).norm();
    const double e = m / (2.0 * s);
    const double tail =
        e * (4.0 + e * (6.0 + e * (4.0 + e))) - 2.0 * m / x.norm();
    return tail * Eigen::Matrix3d::Identity();
  });
  CHECK(fd.q_model() == MetricField::QModel::callable);

  const Eigen::Vector3d pts[2] = {{12.4, -7.2, 9.6}, {-15.0, 4.0, -22.0}};
  for (const auto& x : pts) {
    const MetricValue a = exact.eval(x, 2);
    const MetricValue b = fd.eval(x, 2);
    CHECK((a.g - b.g).norm() < 1e-15);
    for (int k = 0; k < 3; ++k) {
      CHECK((a.dg[k] - b.dg[k]).norm() < 1e-11);
      for (int l = 0; l < 3; ++l) {
        CHECK((a.d2g[k][l] - b.d2g[k][l]).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("metric files round trip") {
  const std::string path = "test_metric_roundtrip.tmp";
  const std::string path2 = "test_metric_roundtrip2.tmp";

  const MetricField orig =
      MetricField::schwarzschild(1.3, Eigen::Vector3d(1.5, -2.0, 0.5), 7.0);
  orig.save(path);
  const MetricField back = MetricField::load(path);
  CHECK(back.inner_radius() == 7.0);
  CHECK(back.q_model() == MetricField::QModel::schwarzschild_tail);

  const Eigen::Vector3d x(12.4, -7.2, 9.6);
  const MetricValue a = orig.eval(x, 2);
  const MetricValue b = back.eval(x, 2);
  CHECK((a.g - b.g).norm() == 0.0);
  for (int k = 0; k < 3; ++k) CHECK((a.dg[k] - b.dg[k]).norm() == 0.0);

  back.save(path2);
  std::ifstream f1(path), f2(path2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().rfind("aftk-metric v1\n", 0) == 0);

  // a field with angular structure survives as well
  const MetricField gen = generic_field();
  gen.save(path);
  const MetricField gen_back = MetricField::load(path);
  CHECK((gen.eval(x, 1).g - gen_back.eval(x, 1).g).norm() == 0.0);

  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("metric specs parse into the right builtins") {
  const Eigen::Vector3d x(12.4, -7.2, 9.6);

  const MetricField a = aftk::parse_metric_spec("builtin:flat");
  CHECK((a.eval(x, 0).g - Eigen::Matrix3d::Identity()).norm() == 0.0);

  const MetricField b = aftk::parse_metric_spec("builtin:conformal,rin=5");
  CHECK(b.inner_radius() == 5.0);
  CHECK((b.eval(x, 0).g - MetricField::conformal().eval(x, 0).g).norm() ==
        0.0);

  const MetricField c =
      aftk::parse_metric_spec("builtin:schwarzschild,m=2.5,cx=1,cz=-0.5");
  const MetricField want =
      MetricField::schwarzschild(2.5, Eigen::Vector3d(1.0, 0.0, -0.5));
  CHECK((c.eval(x, 1).g - want.eval(x, 1).g).norm() == 0.0);

  const std::string path = "test_metric_spec.tmp";
  want.save(path);
  const MetricField d = aftk::parse_metric_spec(path);
  CHECK((d.eval(x, 0).g - want.eval(x, 0).g).norm() == 0.0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(aftk::parse_metric_spec("builtin:nosuch"),
                  std::invalid_argument);
  CHECK_THROWS_AS(aftk::parse_metric_spec("builtin:flat,bogus=1"),
                  std::invalid_argument);
  CHECK_THROWS_AS(aftk::parse_metric_spec("builtin:flat,rin"),
                  std::invalid_argument);
  CHECK_THROWS_AS(aftk::parse_metric_spec("builtin:flat,rin=abc"),
                  std::invalid_argument);
  CHECK_THROWS_AS(aftk::parse_metric_spec("no_such_file.metric"),
                  std::runtime_error);
}

TEST_CASE("construction and evaluation reject bad input") {
  // far from positive definite at the inner radius
  auto basis = std::make_shared<const HarmonicBasis>(2);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis->size());
  Eigen::VectorXd bad = zero;
  bad[0] = -20.0 / aftk::kA0;
  std::array<SphereFunction, 6> h1 = {
      SphereFunction(basis, bad),  SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, bad),
      SphereFunction(basis, zero), SphereFunction(basis, bad)};
  CHECK_THROWS_AS(MetricField(h1, 10.0), std::domain_error);

  CHECK_THROWS_AS(MetricField::flat(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MetricField::flat(-3.0), std::invalid_argument);

  auto other = std::make_shared<const HarmonicBasis>(2);
  std::array<SphereFunction, 6> mixed = {
      SphereFunction(basis, zero), SphereFunction(other, zero),
      SphereFunction(basis, zero), SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, zero)};
  CHECK_THROWS_AS(MetricField(mixed, 10.0), std::invalid_argument);

  const MetricField flat = MetricField::flat(10.0);
  CHECK_THROWS_AS(flat.eval(Eigen::Vector3d(1.0, 2.0, 2.0), 0),
                  std::domain_error);
  CHECK_THROWS_AS(aftk::ricci_tensor(flat.eval(Eigen::Vector3d(0, 0, 20), 1)),
                  std::invalid_argument);

  MetricField cb = MetricField::flat(10.0);
  cb.set_q_callable(
      [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Zero(); });
  CHECK_THROWS_AS(cb.save("unused.tmp"), std::invalid_argument);
  CHECK_THROWS_AS(cb.set_q_callable(nullptr), std::invalid_argument);
}
