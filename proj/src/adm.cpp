#include "aftk/adm.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace aftk {
namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_radii(const std::vector<double>& radii) {
  if (radii.size() < 3) {
    throw std::invalid_argument("flux extrapolation needs at least 3 radii");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) {
      throw std::invalid_argument("flux radii must be strictly increasing");
    }
  }
  if (!(radii.front() > 0.0)) {
    throw std::invalid_argument("flux radii must be positive");
  }
}

// per-node integrands against the quadrature measure d(Omega):
//   mass: (d_j h_ij - d_i h_jj) nu^i  * dmu/dOmega
//   moment correction: (h_ia nu^i - h_ii nu^a) * dmu/dOmega
struct NodeFlux {
  double mass = 0.0;
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
};

NodeFlux node_flux(const MetricValue& mv, const Eigen::Vector3d& u,
                   const Eigen::Vector3d& xhat_theta,
                   const Eigen::Vector3d& xhat_phi, double sin_theta,
                   double r) {
  const Eigen::Matrix3d h = mv.g - Eigen::Matrix3d::Identity();

  // unit outward normal of the coordinate sphere in the metric
  Eigen::Vector3d w = mv.g_inv * u;
  w /= std::sqrt(w.dot(mv.g * w));

  // induced area form against the round-sphere measure
  const Eigen::Vector3d t1 = r * xhat_theta;
  const Eigen::Vector3d t2 = r * xhat_phi;
  const double q11 = t1.dot(mv.g * t1);
  const double q12 = t1.dot(mv.g * t2);
  const double q22 = t2.dot(mv.g * t2);
  const double area = std::sqrt(q11 * q22 - q12 * q12) / sin_theta;

  NodeFlux out;
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      s += mv.dg[j](i, j) - mv.dg[i](j, j);
    }
    out.mass += s * w[i];
  }
  out.mass *= area;

  const double trace_h = h.trace();
  for (int a = 0; a < 3; ++a) {
    out.moment[a] = (h.row(a).dot(w) - trace_h * w[a]) * area;
  }
  return out;
}

struct FitResult {
  double intercept = 0.0;
  double residual = 0.0;
};

FitResult fit_with_residual(const std::vector<double>& radii,
                            const std::vector<double>& values) {
  const auto [a, b] = fit_inverse_radius(radii, values);
  FitResult out;
  out.intercept = a;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    out.residual =
        std::max(out.residual, std::abs(a + b / radii[i] - values[i]));
  }
  return out;
}

bool diffs_settle(const std::vector<double>& v) {
  const std::size_t n = v.size();
  const double scale = 1.0 + std::abs(v.back());
  const double d_prev = std::abs(v[n - 2] - v[n - 3]);
  const double d_last = std::abs(v[n - 1] - v[n - 2]);
  return d_last <= 0.75 * d_prev + 1e-12 * scale;
}

AdmReport flux_report(const MetricEvaluator& field, std::vector<double> radii,
                      int lmax, bool with_center) {
  if (radii.empty()) radii = default_adm_radii();
  validate_radii(radii);

  const HarmonicBasis basis(lmax);
  AdmReport report;
  report.radii = radii;

  std::vector<Eigen::Vector3d> raw_first(radii.size());
  std::vector<Eigen::Vector3d> raw_second(radii.size());

  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double mass_sum = 0.0;
    Eigen::Vector3d first = Eigen::Vector3d::Zero();
    Eigen::Vector3d second = Eigen::Vector3d::Zero();
    for (int i = 0; i < basis.n_theta(); ++i) {
      const double st = std::sin(basis.theta(i));
      const double ct = std::cos(basis.theta(i));
      for (int j = 0; j < basis.n_phi(); ++j) {
        const double sp = std::sin(basis.phi(j));
        const double cp = std::cos(basis.phi(j));
        const Eigen::Vector3d u(st * cp, st * sp, ct);
        const Eigen::Vector3d ut(ct * cp, ct * sp, -st);
        const Eigen::Vector3d up(-st * sp, st * cp, 0.0);

        const int node = basis.node(i, j);
        const MetricValue mv = field.eval(r * u, 1);
        const NodeFlux nf = node_flux(mv, u, ut, up, st, r);
        const double wq = basis.weights()[node];
        mass_sum += wq * nf.mass;
        if (with_center) {
          first += wq * (r * u) * nf.mass;
          second += wq * nf.moment;
        }
      }
    }
    report.mass_at_radius.push_back(mass_sum / (16.0 * kPi));
    raw_first[k] = first / (16.0 * kPi);
    raw_second[k] = second / (16.0 * kPi);
  }

  const FitResult mass_fit = fit_with_residual(radii, report.mass_at_radius);
  report.mass = mass_fit.intercept;
  report.mass_residual = mass_fit.residual;
  report.cauchy = diffs_settle(report.mass_at_radius);

  if (with_center) {
    if (std::abs(report.mass) < 1e-8) {
      throw std::domain_error(
          "center of mass is undefined for a field of numerically zero mass");
    }
    report.has_center = true;
    report.center_at_radius.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
      report.center_at_radius[k] =
          (raw_first[k] - raw_second[k]) / report.mass;
    }
    for (int a = 0; a < 3; ++a) {
      std::vector<double> comp(radii.size());
      for (std::size_t k = 0; k < radii.size(); ++k) {
        comp[k] = report.center_at_radius[k][a];
      }
      const FitResult fit = fit_with_residual(radii, comp);
      report.center[a] = fit.intercept;
      report.center_residual = std::max(report.center_residual, fit.residual);
    }
  }
  return report;
}

}  // namespace

std::pair<double, double> fit_inverse_radius(
    const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size()) {
    throw std::invalid_argument("fit_inverse_radius: size mismatch");
  }
  if (radii.size() < 2) {
    throw std::invalid_argument("fit_inverse_radius: needs at least 2 samples");
  }
  Eigen::MatrixXd A(radii.size(), 2);
  Eigen::VectorXd v(values.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = 1.0 / radii[i];
    v[i] = values[i];
  }
  const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(v);
  return {sol[0], sol[1]};
}

std::vector<double> default_adm_radii() {
  std::vector<double> out;
  double r = 100.0;
  for (int k = 0; k < 6; ++k) {
    out.push_back(r);
    r *= 2.0;
  }
  return out;
}

AdmReport adm_mass(const MetricEvaluator& field, std::vector<double> radii,
                   int lmax) {
  return flux_report(field, std::move(radii), lmax, false);
}

AdmReport center_of_mass(const MetricEvaluator& field,
                         std::vector<double> radii, int lmax) {
  return flux_report(field, std::move(radii), lmax, true);
}

}  // namespace aftk
