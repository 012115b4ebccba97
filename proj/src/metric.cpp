#include "aftk/metric.hpp"

#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aftk {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// isotropic conformal factor phi = 1 + m/(2s) and the tail
//   G(s) = phi^4 - 1 = e (4 + e (6 + e (4 + e))),  e = m/(2s),
// written so no leading digits cancel when s is large
double phi4_minus_one(double m, double s) {
  const double e = m / (2.0 * s);
  return e * (4.0 + e * (6.0 + e * (4.0 + e)));
}

double phi4_d1(double m, double s) {
  const double phi = 1.0 + m / (2.0 * s);
  return -2.0 * m * phi * phi * phi / (s * s);
}

double phi4_d2(double m, double s) {
  const double phi = 1.0 + m / (2.0 * s);
  const double s2 = s * s;
  return 3.0 * m * m * phi * phi / (s2 * s2) +
         4.0 * m * phi * phi * phi / (s2 * s);
}

// splits "builtin:name,k1=v1,k2=v2" after the colon
std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("metric spec: bad value for '" + key +
                                "': '" + text + "'");
  }
  return v;
}

}  // namespace

int MetricField::component_index(int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2) {
    throw std::invalid_argument("metric component index out of range");
  }
  if (i > j) std::swap(i, j);
  // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
  static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[i][j];
}

MetricField::MetricField(std::array<SphereFunction, 6> h1, double inner_radius)
    : h1_(std::move(h1)), inner_radius_(inner_radius) {
  if (!(inner_radius_ > 0.0)) {
    throw std::invalid_argument("metric inner radius must be positive");
  }
  for (const auto& f : h1_) {
    if (!f.basis()) {
      throw std::invalid_argument("metric component has no basis");
    }
    if (f.basis() != h1_[0].basis()) {
      throw std::invalid_argument("metric components must share one basis");
    }
  }
  check_positive_definite();
}

MetricField MetricField::flat(double inner_radius) {
  auto basis = std::make_shared<const HarmonicBasis>(4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis->size());
  std::array<SphereFunction, 6> h1 = {
      SphereFunction(basis, zero), SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, zero)};
  return MetricField(std::move(h1), inner_radius);
}

MetricField MetricField::conformal(double inner_radius) {
  auto basis = std::make_shared<const HarmonicBasis>(4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis->size());
  Eigen::VectorXd one = zero;
  one[0] = 1.0 / kA0;  // constant function 1 on the sphere
  std::array<SphereFunction, 6> h1 = {
      SphereFunction(basis, one),  SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, one),
      SphereFunction(basis, zero), SphereFunction(basis, one)};
  return MetricField(std::move(h1), inner_radius);
}

MetricField MetricField::schwarzschild(double mass,
                                       const Eigen::Vector3d& center,
                                       double inner_radius) {
  auto basis = std::make_shared<const HarmonicBasis>(4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(basis->size());
  Eigen::VectorXd diag = zero;
  diag[0] = 2.0 * mass / kA0;  // constant 2m on the sphere
  std::array<SphereFunction, 6> h1 = {
      SphereFunction(basis, diag), SphereFunction(basis, zero),
      SphereFunction(basis, zero), SphereFunction(basis, diag),
      SphereFunction(basis, zero), SphereFunction(basis, diag)};
  MetricField out(std::move(h1), inner_radius);
  out.set_q_schwarzschild_tail(mass, center);
  return out;
}

void MetricField::set_q_schwarzschild_tail(double mass,
                                           const Eigen::Vector3d& center) {
  q_model_ = QModel::schwarzschild_tail;
  q_mass_ = mass;
  q_center_ = center;
  q_callable_ = nullptr;
  check_positive_definite();
}

void MetricField::set_q_callable(QCallable q) {
  if (!q) throw std::invalid_argument("metric remainder callable is empty");
  q_model_ = QModel::callable;
  q_callable_ = std::move(q);
  check_positive_definite();
}

void MetricField::check_positive_definite() const {
  const HarmonicBasis& basis = *h1_[0].basis();
  const double radii[3] = {inner_radius_, 2.0 * inner_radius_,
                           10.0 * inner_radius_};
  for (double r : radii) {
    for (int n = 0; n < basis.n_nodes(); ++n) {
      const Eigen::Vector3d x = r * basis.node_unit(n);
      MetricValue mv = eval(x, 0);
      if (!mv.g.allFinite()) {
        throw std::domain_error("metric is not finite at sample radius " +
                                detail::format_double(r));
      }
      Eigen::LLT<Eigen::Matrix3d> llt(mv.g);
      if (llt.info() != Eigen::Success) {
        throw std::domain_error(
            "metric is not positive definite at sample radius " +
            detail::format_double(r));
      }
    }
  }
}

Eigen::Matrix3d MetricField::q_value(const Eigen::Vector3d& x) const {
  switch (q_model_) {
    case QModel::none:
      return Eigen::Matrix3d::Zero();
    case QModel::schwarzschild_tail: {
      const double s = (x - q_center_).norm();
      const double r = x.norm();
      const double tail = phi4_minus_one(q_mass_, s) - 2.0 * q_mass_ / r;
      return tail * Eigen::Matrix3d::Identity();
    }
    case QModel::callable:
      return q_callable_(x);
  }
  return Eigen::Matrix3d::Zero();
}

void MetricField::add_q(const Eigen::Vector3d& x, int order,
                        MetricValue& mv) const {
  if (q_model_ == QModel::none) return;

  if (q_model_ == QModel::schwarzschild_tail) {
    const Eigen::Vector3d d = x - q_center_;
    const double s = d.norm();
    const double r = x.norm();
    const double m = q_mass_;
    mv.g += (phi4_minus_one(m, s) - 2.0 * m / r) *
            Eigen::Matrix3d::Identity();
    if (order < 1) return;
    const Eigen::Vector3d sh = d / s;
    const Eigen::Vector3d u = x / r;
    const double f1 = phi4_d1(m, s);
    // grad of phi^4(s) - 2m/r acting on the identity part
    for (int k = 0; k < 3; ++k) {
      const double gk = f1 * sh[k] + 2.0 * m * u[k] / (r * r);
      mv.dg[k] += gk * Eigen::Matrix3d::Identity();
    }
    if (order < 2) return;
    const double f2 = phi4_d2(m, s);
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        const double kl = (k == l) ? 1.0 : 0.0;
        double hkl = f2 * sh[k] * sh[l] + f1 * (kl - sh[k] * sh[l]) / s;
        hkl += 2.0 * m * (kl - 3.0 * u[k] * u[l]) / (r * r * r);
        mv.d2g[k][l] += hkl * Eigen::Matrix3d::Identity();
      }
    }
    return;
  }

  // user callable: value exactly, derivatives by central differences with a
  // step proportional to the radius (the remainder varies on that scale)
  mv.g += q_callable_(x);
  if (order < 1) return;
  const double h = 1e-4 * x.norm();
  std::array<Eigen::Matrix3d, 3> qp1, qm1, qp2, qm2;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d ek = Eigen::Vector3d::Zero();
    ek[k] = h;
    qp1[k] = q_callable_(x + ek);
    qm1[k] = q_callable_(x - ek);
    qp2[k] = q_callable_(x + 2.0 * ek);
    qm2[k] = q_callable_(x - 2.0 * ek);
    mv.dg[k] += (qm2[k] - qp2[k] + 8.0 * (qp1[k] - qm1[k])) / (12.0 * h);
  }
  if (order < 2) return;
  const Eigen::Matrix3d q0 = q_callable_(x);
  for (int k = 0; k < 3; ++k) {
    mv.d2g[k][k] += (-qp2[k] - qm2[k] + 16.0 * (qp1[k] + qm1[k]) - 30.0 * q0) /
                    (12.0 * h * h);
  }
  for (int k = 0; k < 3; ++k) {
    for (int l = k + 1; l < 3; ++l) {
      Eigen::Vector3d ek = Eigen::Vector3d::Zero();
      Eigen::Vector3d el = Eigen::Vector3d::Zero();
      ek[k] = h;
      el[l] = h;
      auto cross = [&](double c) -> Eigen::Matrix3d {
        return (q_callable_(x + c * (ek + el)) - q_callable_(x + c * (ek - el)) -
                q_callable_(x - c * (ek - el)) + q_callable_(x - c * (ek + el))) /
               (4.0 * c * c * h * h);
      };
      // second-order cross stencils at h and 2h, Richardson-combined
      const Eigen::Matrix3d mixed = (4.0 * cross(1.0) - cross(2.0)) / 3.0;
      mv.d2g[k][l] += mixed;
      mv.d2g[l][k] += mixed;
    }
  }
}

MetricValue MetricField::eval(const Eigen::Vector3d& x, int order) const {
  const double r = x.norm();
  // the slack keeps points constructed as (inner radius) * (unit vector)
  // inside the domain despite rounding in the norm
  if (!(r >= inner_radius_ * (1.0 - 8.0 * kEps))) {
    throw std::domain_error("metric evaluated inside its inner radius");
  }

  MetricValue mv;
  mv.g = Eigen::Matrix3d::Identity();
  if (order >= 1) {
    for (auto& m : mv.dg) m.setZero();
    for (auto& m : mv.christoffel) m.setZero();
  }
  if (order >= 2) {
    for (auto& row : mv.d2g) {
      for (auto& m : row) m.setZero();
    }
  }

  if (order <= 0) {
    Eigen::VectorXd modes;
    h1_[0].basis()->eval_values(x / r, modes);
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        const double t = modes.dot(h1_[component_index(i, j)].coefficients());
        mv.g(i, j) += t / r;
        if (i != j) mv.g(j, i) += t / r;
      }
    }
    add_q(x, order, mv);
    mv.g_inv = mv.g.inverse();
    return mv;
  }

  std::vector<Jet2> jets;
  h1_[0].basis()->eval_jets(x / r, jets);
  const double r3 = r * r * r;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const AngularJet t = combine_cartesian_jets(
          jets, h1_[component_index(i, j)].coefficients(), x, order);
      mv.g(i, j) += t.value / r;
      if (i != j) mv.g(j, i) += t.value / r;
      for (int k = 0; k < 3; ++k) {
        // d_k (T/r) = (d_k T)/r - T x_k / r^3
        const double dk = t.grad[k] / r - t.value * x[k] / r3;
        mv.dg[k](i, j) += dk;
        if (i != j) mv.dg[k](j, i) += dk;
      }
      if (order >= 2) {
        const double r5 = r3 * r * r;
        for (int k = 0; k < 3; ++k) {
          for (int l = 0; l < 3; ++l) {
            const double kl = (k == l) ? 1.0 : 0.0;
            double d2 = t.hess(k, l) / r - t.grad[k] * x[l] / r3 -
                        t.grad[l] * x[k] / r3 +
                        t.value * (3.0 * x[k] * x[l] / r5 - kl / r3);
            mv.d2g[k][l](i, j) += d2;
            if (i != j) mv.d2g[k][l](j, i) += d2;
          }
        }
      }
    }
  }

  add_q(x, order, mv);

  mv.g_inv = mv.g.inverse();
  mv.has_first = true;
  mv.has_second = order >= 2;
  mv.christoffel = christoffel_symbols(mv.g_inv, mv.dg);
  return mv;
}

std::array<Eigen::Matrix3d, 3> christoffel_symbols(
    const Eigen::Matrix3d& g_inv, const std::array<Eigen::Matrix3d, 3>& dg) {
  std::array<Eigen::Matrix3d, 3> gamma;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) {
          s += g_inv(k, m) * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
        }
        gamma[k](i, j) = 0.5 * s;
      }
    }
  }
  return gamma;
}

Eigen::Matrix3d ricci_tensor(const MetricValue& mv) {
  if (!mv.has_second) {
    throw std::invalid_argument(
        "ricci tensor needs second metric derivatives");
  }
  // d_k g^{ab} = -g^{am} (d_k g_mn) g^{nb}
  std::array<Eigen::Matrix3d, 3> dginv;
  for (int k = 0; k < 3; ++k) {
    dginv[k] = -mv.g_inv * mv.dg[k] * mv.g_inv;
  }
  // d_k Gamma^a_ij
  auto dgamma = [&](int k, int a, int i, int j) {
    double s = 0.0;
    for (int m = 0; m < 3; ++m) {
      s += dginv[k](a, m) *
           (mv.dg[i](m, j) + mv.dg[j](m, i) - mv.dg[m](i, j));
      s += mv.g_inv(a, m) *
           (mv.d2g[k][i](m, j) + mv.d2g[k][j](m, i) - mv.d2g[k][m](i, j));
    }
    return 0.5 * s;
  };
  Eigen::Matrix3d ric;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        s += dgamma(k, k, i, j) - dgamma(i, k, k, j);
        for (int l = 0; l < 3; ++l) {
          s += mv.christoffel[k](k, l) * mv.christoffel[l](i, j) -
               mv.christoffel[k](i, l) * mv.christoffel[l](k, j);
        }
      }
      ric(i, j) = s;
    }
  }
  return ric;
}

double scalar_curvature(const MetricValue& mv) {
  const Eigen::Matrix3d ric = ricci_tensor(mv);
  return (mv.g_inv * ric).trace();
}

double scalar_curvature(const MetricEvaluator& field,
                        const Eigen::Vector3d& x) {
  return scalar_curvature(field.eval(x, 2));
}

Eigen::Vector3d coordinate_laplacian(const MetricEvaluator& field,
                                     const Eigen::Vector3d& x) {
  const MetricValue mv = field.eval(x, 1);
  Eigen::Vector3d out;
  for (int k = 0; k < 3; ++k) {
    out[k] = -(mv.g_inv.array() * mv.christoffel[k].array()).sum();
  }
  return out;
}

void MetricField::save(const std::string& path) const {
  if (q_model_ == QModel::callable) {
    throw std::invalid_argument(
        "a metric with a user callable remainder cannot be saved");
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open metric file: " + path);
  os << "aftk-metric v1\n";
  os << "inner_radius " << detail::format_double(inner_radius_) << "\n";
  if (q_model_ == QModel::schwarzschild_tail) {
    os << "qmodel schwarzschild_tail " << detail::format_double(q_mass_) << " "
       << detail::format_double(q_center_[0]) << " "
       << detail::format_double(q_center_[1]) << " "
       << detail::format_double(q_center_[2]) << "\n";
  } else {
    os << "qmodel none\n";
  }
  static const char* names[6] = {"11", "12", "13", "22", "23", "33"};
  for (int c = 0; c < 6; ++c) {
    os << "component " << names[c] << "\n";
    write_coefficient_block(h1_[c], os);
  }
  if (!os) throw std::runtime_error("failed writing metric file: " + path);
}

MetricField MetricField::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open metric file: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "aftk-metric v1") {
    throw std::runtime_error("bad metric file header in " + path);
  }

  double inner_radius = 0.0;
  {
    std::string key;
    is >> key >> inner_radius;
    if (!is || key != "inner_radius") {
      throw std::runtime_error("metric file missing inner_radius: " + path);
    }
  }

  std::string key, model;
  is >> key >> model;
  if (!is || key != "qmodel") {
    throw std::runtime_error("metric file missing qmodel: " + path);
  }
  double mass = 0.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  if (model == "schwarzschild_tail") {
    is >> mass >> center[0] >> center[1] >> center[2];
    if (!is) {
      throw std::runtime_error("metric file has bad qmodel line: " + path);
    }
  } else if (model != "none") {
    throw std::runtime_error("metric file has unknown qmodel '" + model +
                             "': " + path);
  }

  static const char* names[6] = {"11", "12", "13", "22", "23", "33"};
  std::array<SphereFunction, 6> h1;
  std::shared_ptr<const HarmonicBasis> basis;
  for (int c = 0; c < 6; ++c) {
    std::string word, name;
    is >> word >> name;
    if (!is || word != "component" || name != names[c]) {
      throw std::runtime_error("metric file: expected 'component " +
                               std::string(names[c]) + "' in " + path);
    }
    h1[c] = read_coefficient_block(is, basis);
    basis = h1[c].basis();
  }

  MetricField out(std::move(h1), inner_radius);
  if (model == "schwarzschild_tail") {
    out.set_q_schwarzschild_tail(mass, center);
  }
  return out;
}

MetricField parse_metric_spec(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) != 0) {
    return MetricField::load(spec);
  }
  std::vector<std::string> parts = split_csv(spec.substr(prefix.size()));
  const std::string name = parts[0];

  double mass = 1.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double rin = 10.0;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    const std::size_t eq = p.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("metric spec: expected key=value, got '" +
                                  p + "'");
    }
    const std::string key = p.substr(0, eq);
    const double v = parse_number(key, p.substr(eq + 1));
    if (key == "m") {
      mass = v;
    } else if (key == "cx") {
      center[0] = v;
    } else if (key == "cy") {
      center[1] = v;
    } else if (key == "cz") {
      center[2] = v;
    } else if (key == "rin") {
      rin = v;
    } else {
      throw std::invalid_argument("metric spec: unknown key '" + key + "'");
    }
  }

  if (name == "flat") return MetricField::flat(rin);
  if (name == "conformal") return MetricField::conformal(rin);
  if (name == "schwarzschild") return MetricField::schwarzschild(mass, center, rin);
  throw std::invalid_argument("metric spec: unknown builtin '" + name + "'");
}

}  // namespace aftk
