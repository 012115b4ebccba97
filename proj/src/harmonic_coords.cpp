#include "aftk/harmonic_coords.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "aftk/adm.hpp"

namespace aftk {
namespace {

void validate_samples(const std::vector<double>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("source fit needs at least 2 sample radii");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i] > samples[i - 1])) {
      throw std::invalid_argument("source sample radii must be increasing");
    }
  }
}

// smallest sampled radius beyond which the forward map stays locally
// invertible (least singular value of the Jacobian clears 1/2)
double scan_invertibility(const CoordinateMap& map, double inner_radius) {
  const std::vector<Eigen::Vector3d> dirs = lattice_directions();
  std::vector<double> radii;
  for (double r = inner_radius; r <= 2e4; r *= 2.0) radii.push_back(r);

  double threshold = radii.back();
  for (auto it = radii.rbegin(); it != radii.rend(); ++it) {
    bool ok = true;
    for (const auto& d : dirs) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(map.jacobian(*it * d));
      if (svd.singularValues().minCoeff() < 0.5) {
        ok = false;
        break;
      }
    }
    if (!ok) break;
    threshold = *it;
  }
  return threshold;
}

}  // namespace

std::vector<double> default_source_radii() {
  return {1000.0, 2000.0, 4000.0, 8000.0};
}

SourceTerm source_term(const MetricField& field,
                       std::vector<double> r_samples) {
  if (r_samples.empty()) r_samples = default_source_radii();
  validate_samples(r_samples);

  auto basis =
      std::make_shared<const HarmonicBasis>(field.h1_basis()->lmax() + 1);
  const int nn = basis->n_nodes();
  const std::size_t ns = r_samples.size();

  // -r^2 Delta_g x^k at every node and sample radius
  std::vector<Eigen::VectorXd> samples(3, Eigen::VectorXd(nn));
  std::vector<std::vector<Eigen::VectorXd>> all(
      ns, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd(nn)));
  for (std::size_t s = 0; s < ns; ++s) {
    const double r = r_samples[s];
    for (int n = 0; n < nn; ++n) {
      const Eigen::Vector3d lap =
          coordinate_laplacian(field, r * basis->node_unit(n));
      for (int k = 0; k < 3; ++k) all[s][k][n] = -r * r * lap[k];
    }
  }

  SourceTerm out;
  std::array<Eigen::VectorXd, 3> fitted;
  std::array<Eigen::VectorXd, 3> residual;
  for (int k = 0; k < 3; ++k) {
    fitted[k].resize(nn);
    residual[k].resize(nn);
    for (int n = 0; n < nn; ++n) {
      std::vector<double> v(ns);
      for (std::size_t s = 0; s < ns; ++s) v[s] = all[s][k][n];
      const auto [a, b] = fit_inverse_radius(r_samples, v);
      fitted[k][n] = a;
      double dev = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        dev = std::max(dev, std::abs(a + b / r_samples[s] - v[s]));
      }
      residual[k][n] = dev;
    }
  }
  for (int k = 0; k < 3; ++k) {
    const double scale =
        std::max(fitted[k].cwiseAbs().maxCoeff(), 1e-10);
    out.max_relative_residual = std::max(
        out.max_relative_residual, residual[k].maxCoeff() / scale);
    out.components[k] = analyze(basis, fitted[k]);
  }
  out.poor_separation = out.max_relative_residual > 0.1;
  return out;
}

CoordinateMap::CoordinateMap(Eigen::Vector3d lambda0,
                             std::array<SphereFunction, 3> angular_parts,
                             double invertibility_radius)
    : lambda0_(std::move(lambda0)),
      angular_(std::move(angular_parts)),
      invertibility_radius_(invertibility_radius) {
  for (const auto& g : angular_) {
    if (!g.basis()) {
      throw std::invalid_argument("coordinate map needs angular parts");
    }
    if (std::abs(g.mean()) > 1e-10 * (1.0 + g.norm())) {
      throw std::invalid_argument(
          "coordinate map angular parts must have zero mean");
    }
  }
  if (!(invertibility_radius_ > 0.0)) {
    throw std::invalid_argument(
        "coordinate map invertibility radius must be positive");
  }
}

Eigen::Vector3d CoordinateMap::forward(const Eigen::Vector3d& x) const {
  const double r = x.norm();
  Eigen::Vector3d y = x;
  const double logr = std::log(r);
  for (int k = 0; k < 3; ++k) {
    y[k] += lambda0_[k] * kA0 * logr + angular_[k].eval(x / r);
  }
  return y;
}

Eigen::Matrix3d CoordinateMap::jacobian(const Eigen::Vector3d& x) const {
  const double rr = x.squaredNorm();
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
  for (int k = 0; k < 3; ++k) {
    const AngularJet jet = angular_[k].eval_cartesian(x, 1);
    for (int i = 0; i < 3; ++i) {
      J(k, i) += lambda0_[k] * kA0 * x[i] / rr + jet.grad[i];
    }
  }
  return J;
}

std::array<Eigen::Matrix3d, 3> CoordinateMap::hessian(
    const Eigen::Vector3d& x) const {
  const double rr = x.squaredNorm();
  std::array<Eigen::Matrix3d, 3> H;
  for (int k = 0; k < 3; ++k) {
    const AngularJet jet = angular_[k].eval_cartesian(x, 2);
    H[k] = jet.hess;
    H[k] += lambda0_[k] * kA0 *
            (Eigen::Matrix3d::Identity() / rr -
             2.0 * x * x.transpose() / (rr * rr));
  }
  return H;
}

Eigen::Vector3d CoordinateMap::inverse(const Eigen::Vector3d& y) const {
  Eigen::Vector3d x = y;
  for (int it = 0; it < 50; ++it) {
    if (x.norm() < 0.5 * invertibility_radius_) {
      throw std::domain_error(
          "coordinate map inversion left the invertible region");
    }
    const Eigen::Vector3d f = forward(x) - y;
    const Eigen::Vector3d dx = jacobian(x).partialPivLu().solve(f);
    x -= dx;
    if (dx.norm() <= 1e-13 * (1.0 + y.norm())) return x;
  }
  throw std::domain_error("coordinate map inversion did not settle");
}

CoordinateMap build_harmonic_map(const MetricField& field,
                                 std::vector<double> r_samples) {
  const SourceTerm st = source_term(field, std::move(r_samples));

  Eigen::Vector3d lambda0;
  std::array<SphereFunction, 3> angular = st.components;
  for (int k = 0; k < 3; ++k) {
    lambda0[k] = st.components[k].coefficients()[0];
    Eigen::VectorXd c = st.components[k].coefficients();
    c[0] = 0.0;
    angular[k] = invert_laplacian(
        SphereFunction(st.components[k].basis(), std::move(c)));
  }

  CoordinateMap map(lambda0, std::move(angular), field.inner_radius());
  const double threshold = scan_invertibility(map, field.inner_radius());
  CoordinateMap out(map.lambda0(),
                    {map.angular_part(0), map.angular_part(1),
                     map.angular_part(2)},
                    threshold);
  out.source_residual = st.max_relative_residual;
  out.poor_separation = st.poor_separation;
  return out;
}

Eigen::Vector3d harmonic_residual(const MetricEvaluator& field,
                                  const CoordinateMap& map,
                                  const Eigen::Vector3d& x) {
  const MetricValue mv = field.eval(x, 1);
  const Eigen::Matrix3d J = map.jacobian(x);
  const std::array<Eigen::Matrix3d, 3> H = map.hessian(x);

  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) {
    for (int m = 0; m < 3; ++m) {
      for (int n = 0; n < 3; ++n) {
        double t = H[k](m, n);
        for (int l = 0; l < 3; ++l) t -= mv.christoffel[l](m, n) * J(k, l);
        out[k] += mv.g_inv(m, n) * t;
      }
    }
  }
  return out;
}

TransformedMetric::TransformedMetric(CoordinateMap map, MetricField field)
    : map_(std::move(map)), field_(std::move(field)) {}

double TransformedMetric::inner_radius() const {
  return std::max(field_.inner_radius(), map_.invertibility_radius());
}

Eigen::Vector3d TransformedMetric::base_point(const Eigen::Vector3d& y) const {
  const Eigen::Vector3d x = map_.inverse(y);
  if (x.norm() < inner_radius() * (1.0 - 1e-12)) {
    throw std::domain_error(
        "transformed metric evaluated below its invertibility radius");
  }
  return x;
}

MetricValue TransformedMetric::eval(const Eigen::Vector3d& y,
                                    int order) const {
  if (order > 1) {
    throw std::invalid_argument(
        "transformed metric provides first derivatives only");
  }
  const Eigen::Vector3d x = base_point(y);
  const MetricValue base = field_.eval(x, order);
  const Eigen::Matrix3d B = map_.jacobian(x).inverse();  // dx/dy

  MetricValue out;
  out.g = B.transpose() * base.g * B;
  out.g_inv = out.g.inverse();
  if (order < 1) return out;

  // dJ_by_c(k, l) = sum_d d_d d_l y^k * dx^d/dy^c
  const std::array<Eigen::Matrix3d, 3> H = map_.hessian(x);
  for (int c = 0; c < 3; ++c) {
    Eigen::Matrix3d dJ = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d dg_c = Eigen::Matrix3d::Zero();
    for (int d = 0; d < 3; ++d) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) dJ(k, l) += H[k](d, l) * B(d, c);
      }
      dg_c += base.dg[d] * B(d, c);
    }
    const Eigen::Matrix3d dB = -B * dJ * B;
    out.dg[c] = dB.transpose() * base.g * B + B.transpose() * dg_c * B +
                B.transpose() * base.g * dB;
  }
  out.christoffel = christoffel_symbols(out.g_inv, out.dg);
  out.has_first = true;
  return out;
}

TransformedMetric transform_metric(const CoordinateMap& map,
                                   const MetricField& field) {
  return TransformedMetric(map, field);
}

Eigen::Matrix3d closed_form_h_tilde(const CoordinateMap& map,
                                    const MetricField& field,
                                    const Eigen::Vector3d& x) {
  const double rr = x.squaredNorm();
  Eigen::Matrix3d h =
      field.eval(x, 0).g - Eigen::Matrix3d::Identity();
  std::array<Eigen::Vector3d, 3> grad;
  for (int k = 0; k < 3; ++k) {
    grad[k] = map.angular_part(k).eval_cartesian(x, 1).grad;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      h(i, j) -= kA0 * (map.lambda0()[i] * x[j] + map.lambda0()[j] * x[i]) / rr;
      h(i, j) -= grad[i][j] + grad[j][i];
    }
  }
  return h;
}

std::vector<Eigen::Vector3d> lattice_directions() {
  std::vector<Eigen::Vector3d> dirs;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      for (int k = -1; k <= 1; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        dirs.push_back(Eigen::Vector3d(i, j, k).normalized());
      }
    }
  }
  return dirs;
}

EllipticityReport ellipticity_check(const MetricEvaluator& field,
                                    std::vector<double> radii,
                                    std::vector<Eigen::Vector3d> directions,
                                    double margin) {
  if (radii.empty()) radii = {1e2, 1e3, 1e4};
  if (directions.empty()) directions = lattice_directions();

  EllipticityReport report;
  report.margin = margin;
  bool first = true;
  for (double r : radii) {
    for (const auto& d : directions) {
      const Eigen::Matrix3d a =
          r * (field.eval(r * d, 0).g - Eigen::Matrix3d::Identity());
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (first) {
        report.min_eigenvalue = lo;
        report.max_eigenvalue = hi;
        first = false;
      } else {
        report.min_eigenvalue = std::min(report.min_eigenvalue, lo);
        report.max_eigenvalue = std::max(report.max_eigenvalue, hi);
      }
    }
  }
  report.elliptic = report.min_eigenvalue >= margin;
  return report;
}

double sobolev_distance_to_delta(const MetricField& field, int m) {
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Eigen::VectorXd c = field.h1(i, j).coefficients();
      if (i == j) c[0] -= 1.0 / kA0;
      const SphereFunction diff(field.h1_basis(), std::move(c));
      const double w = diff.sobolev_norm(m);
      total += (i == j ? 1.0 : 2.0) * w * w;
    }
  }
  return std::sqrt(total);
}

}  // namespace aftk
