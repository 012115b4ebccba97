#include "aftk/harmonics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aftk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration on P_n
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * pp * pp);
  }
}

// Real solid harmonics, orthonormal on the unit sphere, evaluated by the
// pole-free Cartesian recurrence.  T is double for plain values or Jet2 for
// values with exact polynomial partials.  Output order matches mode_index.
template <class T>
void solid_harmonics(int lmax, const T& x, const T& y, const T& z,
                     const T& rr, std::vector<T>& out) {
  const int nl = (lmax + 1) * (lmax + 2) / 2;
  static thread_local std::vector<T> cs, sn;
  cs.assign(nl, T{});
  sn.assign(nl, T{});
  auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };

  cs[0] = T(kA0);  // seeds the orthonormal scaling through the recurrence
  for (int l = 1; l <= lmax; ++l) {
    const double fd = (l == 1) ? std::sqrt(3.0)
                               : std::sqrt((2.0 * l + 1.0) / (2.0 * l));
    const T& cp = cs[tri(l - 1, l - 1)];
    const T& sp = sn[tri(l - 1, l - 1)];
    cs[tri(l, l)] = fd * (x * cp - y * sp);
    sn[tri(l, l)] = fd * (y * cp + x * sp);
    for (int m = 0; m < l; ++m) {
      const double den = static_cast<double>(l - m) * (l + m);
      const double f1 = std::sqrt((2.0 * l - 1.0) * (2.0 * l + 1.0) / den);
      cs[tri(l, m)] = f1 * (z * cs[tri(l - 1, m)]);
      sn[tri(l, m)] = f1 * (z * sn[tri(l - 1, m)]);
      if (l - 2 >= m) {
        const double f2 = -std::sqrt((2.0 * l + 1.0) * (l - m - 1.0) *
                                     (l + m - 1.0) / ((2.0 * l - 3.0) * den));
        cs[tri(l, m)] += f2 * (rr * cs[tri(l - 2, m)]);
        sn[tri(l, m)] += f2 * (rr * sn[tri(l - 2, m)]);
      }
    }
  }

  out.resize((lmax + 1) * (lmax + 1));
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m)
      out[HarmonicBasis::mode_index(l, m)] =
          (m >= 0) ? cs[tri(l, m)] : sn[tri(l, -m)];
}

}  // namespace

HarmonicBasis::HarmonicBasis(int lmax) : lmax_(lmax) {
  if (lmax < 1) throw std::invalid_argument("HarmonicBasis: lmax must be >= 1");
  n_theta_ = lmax + 1;
  n_phi_ = 2 * lmax + 2;

  std::vector<double> t, wt;
  gauss_legendre(n_theta_, t, wt);
  theta_.resize(n_theta_);
  for (int i = 0; i < n_theta_; ++i) theta_[i] = std::acos(t[i]);
  phi_.resize(n_phi_);
  for (int j = 0; j < n_phi_; ++j) phi_[j] = 2.0 * kPi * j / n_phi_;

  weights_.resize(n_nodes());
  const double wphi = 2.0 * kPi / n_phi_;
  for (int i = 0; i < n_theta_; ++i)
    for (int j = 0; j < n_phi_; ++j) weights_[node(i, j)] = wt[i] * wphi;

  const int nm = size();
  mode_l_.resize(nm);
  mode_m_.resize(nm);
  for (int l = 0; l <= lmax_; ++l)
    for (int m = -l; m <= l; ++m) {
      mode_l_[mode_index(l, m)] = l;
      mode_m_[mode_index(l, m)] = m;
    }

  values_.resize(nm, n_nodes());
  Eigen::VectorXd col(nm);
  for (int nd = 0; nd < n_nodes(); ++nd) {
    eval_values(node_unit(nd), col);
    values_.col(nd) = col;
  }
}

Eigen::Vector3d HarmonicBasis::node_unit(int nd) const {
  const double th = node_theta(nd), ph = node_phi(nd);
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
          std::cos(th)};
}

void HarmonicBasis::eval_values(const Eigen::Vector3d& u,
                                Eigen::VectorXd& out) const {
  const Eigen::Vector3d n = u.normalized();
  static thread_local std::vector<double> vals;
  solid_harmonics(lmax_, n.x(), n.y(), n.z(), 1.0, vals);
  out.resize(size());
  for (int i = 0; i < size(); ++i) out[i] = vals[i];
}

void HarmonicBasis::eval_jets(const Eigen::Vector3d& u,
                              std::vector<Jet2>& out) const {
  const Eigen::Vector3d n = u.normalized();
  const Jet2 x = Jet2::variable(n.x(), 0);
  const Jet2 y = Jet2::variable(n.y(), 1);
  const Jet2 z = Jet2::variable(n.z(), 2);
  const Jet2 rr = x * x + y * y + z * z;
  solid_harmonics(lmax_, x, y, z, rr, out);
}

void HarmonicBasis::build_chart_tables() const {
  const int nm = size(), nn = n_nodes();
  dtheta_.resize(nm, nn);
  dphi_.resize(nm, nn);
  dtheta2_.resize(nm, nn);
  dthetaphi_.resize(nm, nn);
  dphi2_.resize(nm, nn);

  std::vector<Jet2> jets;
  for (int nd = 0; nd < nn; ++nd) {
    const double th = node_theta(nd), ph = node_phi(nd);
    const double st = std::sin(th), ct = std::cos(th);
    const double sp = std::sin(ph), cp = std::cos(ph);
    const Eigen::Vector3d u(st * cp, st * sp, ct);
    const Eigen::Vector3d ut(ct * cp, ct * sp, -st);
    const Eigen::Vector3d up(-st * sp, st * cp, 0.0);
    const Eigen::Vector3d utt = -u;
    const Eigen::Vector3d utp(-ct * sp, ct * cp, 0.0);
    const Eigen::Vector3d upp(-st * cp, -st * sp, 0.0);

    eval_jets(u, jets);
    for (int n = 0; n < nm; ++n) {
      const Jet2& j = jets[n];
      const Eigen::Vector3d g(j.g[0], j.g[1], j.g[2]);
      Eigen::Matrix3d h;
      h << j.h[0], j.h[1], j.h[2], j.h[1], j.h[3], j.h[4], j.h[2], j.h[4],
          j.h[5];
      dtheta_(n, nd) = g.dot(ut);
      dphi_(n, nd) = g.dot(up);
      dtheta2_(n, nd) = ut.dot(h * ut) + g.dot(utt);
      dthetaphi_(n, nd) = ut.dot(h * up) + g.dot(utp);
      dphi2_(n, nd) = up.dot(h * up) + g.dot(upp);
    }
  }
  chart_built_ = true;
}

const Eigen::MatrixXd& HarmonicBasis::dtheta() const {
  if (!chart_built_) build_chart_tables();
  return dtheta_;
}
const Eigen::MatrixXd& HarmonicBasis::dphi() const {
  if (!chart_built_) build_chart_tables();
  return dphi_;
}
const Eigen::MatrixXd& HarmonicBasis::dtheta2() const {
  if (!chart_built_) build_chart_tables();
  return dtheta2_;
}
const Eigen::MatrixXd& HarmonicBasis::dthetaphi() const {
  if (!chart_built_) build_chart_tables();
  return dthetaphi_;
}
const Eigen::MatrixXd& HarmonicBasis::dphi2() const {
  if (!chart_built_) build_chart_tables();
  return dphi2_;
}

SphereFunction::SphereFunction(std::shared_ptr<const HarmonicBasis> basis,
                               Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coeff_(std::move(coefficients)) {
  if (!basis_) throw std::invalid_argument("SphereFunction: null basis");
  if (coeff_.size() != basis_->size())
    throw std::invalid_argument(
        "SphereFunction: coefficient count does not match basis size");
}

double SphereFunction::sobolev_norm(int m) const {
  double s = 0.0;
  for (int n = 0; n < coeff_.size(); ++n) {
    const double w = std::pow(1.0 - basis_->eigenvalue(n), m);
    s += w * coeff_[n] * coeff_[n];
  }
  return std::sqrt(s);
}

double SphereFunction::eval(const Eigen::Vector3d& u) const {
  static thread_local Eigen::VectorXd vals;
  basis_->eval_values(u, vals);
  return vals.dot(coeff_);
}

AngularJet combine_cartesian_jets(const std::vector<Jet2>& jets,
                                  const Eigen::VectorXd& coeff,
                                  const Eigen::Vector3d& x, int order) {
  const double r = x.norm();
  Jet2 acc;
  for (int n = 0; n < coeff.size(); ++n) acc += coeff[n] * jets[n];

  AngularJet out;
  out.value = acc.v;
  if (order < 1) return out;
  const Eigen::Vector3d u = x / r;
  const Eigen::Vector3d dp(acc.g[0], acc.g[1], acc.g[2]);
  const double du = dp.dot(u);
  out.grad = (dp - du * u) / r;
  if (order >= 2) {
    Eigen::Matrix3d d2p;
    d2p << acc.h[0], acc.h[1], acc.h[2], acc.h[1], acc.h[3], acc.h[4],
        acc.h[2], acc.h[4], acc.h[5];
    const Eigen::Matrix3d jac =
        (Eigen::Matrix3d::Identity() - u * u.transpose()) / r;
    out.hess = jac * d2p * jac;
    out.hess += (3.0 * du * u * u.transpose() - u * dp.transpose() -
                 dp * u.transpose() - du * Eigen::Matrix3d::Identity()) /
                (r * r);
  }
  return out;
}

AngularJet SphereFunction::eval_cartesian(const Eigen::Vector3d& x,
                                          int order) const {
  const double r = x.norm();
  if (r == 0.0)
    throw std::domain_error("SphereFunction: evaluation at the origin");
  if (order <= 0) {
    AngularJet out;
    out.value = eval(x / r);
    return out;
  }
  static thread_local std::vector<Jet2> jets;
  basis_->eval_jets(x / r, jets);
  return combine_cartesian_jets(jets, coeff_, x, order);
}

SphereFunction& SphereFunction::operator+=(const SphereFunction& o) {
  if (basis_ != o.basis_ && basis_->lmax() != o.basis_->lmax())
    throw std::invalid_argument("SphereFunction: basis mismatch");
  coeff_ += o.coeff_;
  return *this;
}
SphereFunction& SphereFunction::operator-=(const SphereFunction& o) {
  if (basis_ != o.basis_ && basis_->lmax() != o.basis_->lmax())
    throw std::invalid_argument("SphereFunction: basis mismatch");
  coeff_ -= o.coeff_;
  return *this;
}
SphereFunction& SphereFunction::operator*=(double s) {
  coeff_ *= s;
  return *this;
}
SphereFunction operator+(SphereFunction a, const SphereFunction& b) {
  return a += b;
}
SphereFunction operator-(SphereFunction a, const SphereFunction& b) {
  return a -= b;
}
SphereFunction operator*(SphereFunction a, double s) { return a *= s; }

SphereFunction analyze(std::shared_ptr<const HarmonicBasis> basis,
                       const Eigen::VectorXd& node_values) {
  if (!basis) throw std::invalid_argument("analyze: null basis");
  if (node_values.size() != basis->n_nodes())
    throw std::invalid_argument("analyze: sample count does not match grid");
  const Eigen::VectorXd weighted =
      node_values.cwiseProduct(basis->weights());
  Eigen::VectorXd c = basis->values() * weighted;
  return SphereFunction(std::move(basis), std::move(c));
}

Eigen::VectorXd synthesize(const SphereFunction& f) {
  return f.basis()->values().transpose() * f.coefficients();
}

SphereFunction invert_laplacian(const SphereFunction& f) {
  const Eigen::VectorXd& c = f.coefficients();
  const double scale = c.norm();
  if (std::abs(c[0]) > 1e-9 * scale)
    throw std::domain_error(
        "invert_laplacian: input has nonzero mean, no solution exists");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.size());
  for (int n = 1; n < c.size(); ++n) out[n] = c[n] / f.basis()->eigenvalue(n);
  return SphereFunction(f.basis(), std::move(out));
}

SphereFunction change_basis(const SphereFunction& f,
                            std::shared_ptr<const HarmonicBasis> basis) {
  if (!basis) throw std::invalid_argument("change_basis: basis is null");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis->size());
  const int keep = std::min<int>(out.size(), f.coefficients().size());
  out.head(keep) = f.coefficients().head(keep);
  return SphereFunction(std::move(basis), std::move(out));
}

namespace detail {
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

void write_coefficient_block(const SphereFunction& f, std::ostream& os) {
  const HarmonicBasis& b = *f.basis();
  os << "lmax " << b.lmax() << "\n";
  for (int n = 0; n < b.size(); ++n)
    os << b.mode_l(n) << " " << b.mode_m(n) << " "
       << detail::format_double(f.coefficients()[n]) << "\n";
}

SphereFunction read_coefficient_block(
    std::istream& is, std::shared_ptr<const HarmonicBasis> basis) {
  std::string key;
  int lmax = -1;
  if (!(is >> key >> lmax) || key != "lmax")
    throw std::invalid_argument("coefficient block: missing lmax header");
  if (basis) {
    if (basis->lmax() != lmax)
      throw std::invalid_argument(
          "coefficient block: lmax does not match supplied basis");
  } else {
    basis = std::make_shared<HarmonicBasis>(lmax);
  }
  Eigen::VectorXd c(basis->size());
  for (int n = 0; n < basis->size(); ++n) {
    int l = 0, m = 0;
    double v = 0.0;
    if (!(is >> l >> m >> v))
      throw std::invalid_argument("coefficient block: truncated mode list");
    if (HarmonicBasis::mode_index(l, m) != n)
      throw std::invalid_argument("coefficient block: modes out of order");
    c[n] = v;
  }
  return SphereFunction(std::move(basis), std::move(c));
}

void save_coefficients(const SphereFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_coefficient_block(f, os);
}

SphereFunction load_coefficients(const std::string& path,
                                 std::shared_ptr<const HarmonicBasis> basis) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_coefficient_block(is, std::move(basis));
}

}  // namespace aftk
