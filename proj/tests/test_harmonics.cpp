#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "aftk/harmonics.hpp"

using namespace aftk;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<HarmonicBasis> make_basis(int lmax) {
  return std::make_shared<HarmonicBasis>(lmax);
}

Eigen::VectorXd random_coefficients(const HarmonicBasis& b, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd c(b.size());
  for (int n = 0; n < c.size(); ++n) c[n] = dist(rng);
  return c;
}
}  // namespace

TEST_CASE("quadrature weights sum to the sphere area") {
  for (int lmax : {1, 4, 8, 16}) {
    HarmonicBasis b(lmax);
    CHECK(b.weights().sum() == doctest::Approx(4.0 * kPi).epsilon(1e-13));
  }
}

TEST_CASE("basis is orthonormal under the quadrature") {
  for (int lmax : {4, 8, 16}) {
    HarmonicBasis b(lmax);
    const Eigen::MatrixXd gram = b.values() *
                                 b.weights().asDiagonal() *
                                 b.values().transpose();
    const double err =
        (gram - Eigen::MatrixXd::Identity(b.size(), b.size()))
            .cwiseAbs()
            .maxCoeff();
    CHECK(err < 1e-12);
  }
}

TEST_CASE("constant mode matches the mean-value normalization") {
  auto b = make_basis(4);
  CHECK(b->values()(0, 0) == doctest::Approx(kA0).epsilon(1e-15));
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(b->n_nodes(), 3.7);
  SphereFunction f = analyze(b, ones);
  CHECK(f.coefficients()[0] == doctest::Approx(3.7 * 2.0 * std::sqrt(kPi)));
  CHECK(f.mean() == doctest::Approx(3.7).epsilon(1e-13));
  for (int n = 1; n < b->size(); ++n)
    CHECK(std::abs(f.coefficients()[n]) < 1e-12);
}

TEST_CASE("coordinate functions occupy single degree-one modes") {
  auto b = make_basis(6);
  // x-hat^1 restricted to the sphere is a single l=1, m=1 mode with
  // coefficient sqrt(4*pi/3)
  Eigen::VectorXd vx(b->n_nodes());
  for (int nd = 0; nd < b->n_nodes(); ++nd) vx[nd] = b->node_unit(nd).x();
  SphereFunction f = analyze(b, vx);
  const double expect = std::sqrt(4.0 * kPi / 3.0);
  for (int n = 0; n < b->size(); ++n) {
    const double want =
        (b->mode_l(n) == 1 && b->mode_m(n) == 1) ? expect : 0.0;
    CHECK(f.coefficients()[n] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(b->eigenvalue(HarmonicBasis::mode_index(1, 1)) == -2.0);
}

TEST_CASE("analyze/synthesize round trip is exact for band-limited data") {
  auto b = make_basis(8);
  SphereFunction f(b, random_coefficients(*b, 42));
  const Eigen::VectorXd vals = synthesize(f);
  SphereFunction g = analyze(b, vals);
  CHECK((g.coefficients() - f.coefficients()).cwiseAbs().maxCoeff() < 1e-12);

  // Parseval: quadrature norm of samples equals the coefficient norm
  const double quad = vals.cwiseAbs2().dot(b->weights());
  const double spec = f.coefficients().squaredNorm();
  CHECK(quad == doctest::Approx(spec).epsilon(1e-10));
}

TEST_CASE("laplacian inversion divides by the eigenvalues") {
  auto b = make_basis(6);
  Eigen::VectorXd c = random_coefficients(*b, 7);
  c[0] = 0.0;
  SphereFunction f(b, c);
  SphereFunction u = invert_laplacian(f);
  for (int n = 1; n < b->size(); ++n)
    CHECK(u.coefficients()[n] ==
          doctest::Approx(c[n] / b->eigenvalue(n)).epsilon(1e-14));
  CHECK(u.coefficients()[0] == 0.0);

  // the coordinate function is an eigenfunction: inverse scales by -1/2
  Eigen::VectorXd vx(b->n_nodes());
  for (int nd = 0; nd < b->n_nodes(); ++nd) vx[nd] = b->node_unit(nd).x();
  SphereFunction fx = analyze(b, vx);
  const Eigen::VectorXd inv = synthesize(invert_laplacian(fx));
  for (int nd = 0; nd < b->n_nodes(); ++nd)
    CHECK(inv[nd] == doctest::Approx(-0.5 * vx[nd]).epsilon(1e-12));
}

TEST_CASE("laplacian inversion rejects nonzero mean") {
  auto b = make_basis(2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b->size());
  c[0] = 1.0;
  c[3] = 1.0;
  CHECK_THROWS_AS(invert_laplacian(SphereFunction(b, c)), std::domain_error);
}

TEST_CASE("chart derivative tables match finite differences") {
  auto b = make_basis(5);
  SphereFunction f(b, random_coefficients(*b, 3));
  const Eigen::MatrixXd& vals = b->values();
  const double h = 1e-5;
  auto at = [&](double th, double ph) {
    return f.eval({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                   std::cos(th)});
  };
  for (int nd : {0, 7, b->n_nodes() / 2, b->n_nodes() - 1}) {
    const double th = b->node_theta(nd), ph = b->node_phi(nd);
    const double fd_th = (at(th + h, ph) - at(th - h, ph)) / (2 * h);
    const double fd_ph = (at(th, ph + h) - at(th, ph - h)) / (2 * h);
    const double fd_thth =
        (at(th + h, ph) - 2 * at(th, ph) + at(th - h, ph)) / (h * h);
    double sp_th = 0, sp_ph = 0, sp_thth = 0;
    for (int n = 0; n < b->size(); ++n) {
      sp_th += f.coefficients()[n] * b->dtheta()(n, nd);
      sp_ph += f.coefficients()[n] * b->dphi()(n, nd);
      sp_thth += f.coefficients()[n] * b->dtheta2()(n, nd);
    }
    CHECK(sp_th == doctest::Approx(fd_th).epsilon(1e-7));
    CHECK(sp_ph == doctest::Approx(fd_ph).epsilon(1e-7));
    CHECK(sp_thth == doctest::Approx(fd_thth).epsilon(1e-4));
    (void)vals;
  }
}

TEST_CASE("cartesian jets match finite differences, including near poles") {
  auto b = make_basis(6);
  SphereFunction f(b, random_coefficients(*b, 11));
  const double h = 1e-5;
  const Eigen::Vector3d pts[] = {
      {1.3, -0.4, 0.8},
      {0.3, 2.0, -1.1},
      {1e-4, -2e-4, 5.0},   // nearly along +z, a chart pole
      {-3e-5, 1e-5, -2.0},  // nearly along -z
  };
  for (const Eigen::Vector3d& x : pts) {
    const AngularJet j = f.eval_cartesian(x, 2);
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[i] = h;
      const double fd =
          (f.eval_cartesian(x + dp, 0).value -
           f.eval_cartesian(x - dp, 0).value) /
          (2 * h);
      CHECK(j.grad[i] == doctest::Approx(fd).epsilon(5e-7));
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d dk = Eigen::Vector3d::Zero();
        dk[k] = h;
        const double fd2 = (f.eval_cartesian(x + dp + dk, 0).value -
                            f.eval_cartesian(x + dp - dk, 0).value -
                            f.eval_cartesian(x - dp + dk, 0).value +
                            f.eval_cartesian(x - dp - dk, 0).value) /
                           (4 * h * h);
        CHECK(j.hess(i, k) == doctest::Approx(fd2).epsilon(2e-4));
      }
    }
  }
}

TEST_CASE("cartesian hessian trace recovers the spherical laplacian") {
  // for the degree-zero extension, trace(hess) at |x|=1 equals the
  // Laplace-Beltrami eigenvalue times the value, mode by mode
  auto b = make_basis(5);
  for (int n : {1, 4, 10, 20, 35}) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(b->size());
    c[n] = 1.0;
    SphereFunction f(b, c);
    const Eigen::Vector3d u = Eigen::Vector3d(0.3, -0.82, 0.49).normalized();
    const AngularJet j = f.eval_cartesian(u, 2);
    CHECK(j.hess.trace() ==
          doctest::Approx(b->eigenvalue(n) * j.value).epsilon(1e-10));
  }
}

TEST_CASE("sobolev norm applies the spectral weight") {
  auto b = make_basis(3);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b->size());
  c[HarmonicBasis::mode_index(2, 1)] = 2.0;
  SphereFunction f(b, c);
  // l=2: weight (1+6)^m
  CHECK(f.sobolev_norm(2) == doctest::Approx(2.0 * 7.0));
  CHECK(f.norm() == doctest::Approx(2.0));
}

TEST_CASE("coefficient files round trip byte for byte") {
  auto b = make_basis(4);
  SphereFunction f(b, random_coefficients(*b, 99));
  const std::string p1 = "coef_roundtrip_a.txt";
  const std::string p2 = "coef_roundtrip_b.txt";
  save_coefficients(f, p1);
  SphereFunction g = load_coefficients(p1);
  CHECK(g.basis()->lmax() == 4);
  CHECK((g.coefficients() - f.coefficients()).cwiseAbs().maxCoeff() == 0.0);
  save_coefficients(g, p2);
  std::ifstream a(p1), c(p2);
  std::stringstream sa, sc;
  sa << a.rdbuf();
  sc << c.rdbuf();
  CHECK(sa.str() == sc.str());
  CHECK(!sa.str().empty());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("invalid construction is rejected") {
  CHECK_THROWS_AS(HarmonicBasis(0), std::invalid_argument);
  CHECK_THROWS_AS(HarmonicBasis(-3), std::invalid_argument);
  auto b = make_basis(2);
  CHECK_THROWS_AS(analyze(b, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SphereFunction(b, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}
