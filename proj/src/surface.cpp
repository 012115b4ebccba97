#include "aftk/surface.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace aftk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// unit vector of the parameter sphere and its chart derivatives; the
// second theta derivative is -u and is inlined where needed
struct ChartFrame {
  double sin_theta;
  Eigen::Vector3d u, ut, up, utp, upp;
};

ChartFrame chart_frame(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  ChartFrame f;
  f.sin_theta = st;
  f.u = {st * cp, st * sp, ct};
  f.ut = {ct * cp, ct * sp, -st};
  f.up = {-st * sp, st * cp, 0.0};
  f.utp = {-ct * sp, ct * cp, 0.0};
  f.upp = {-st * cp, -st * sp, 0.0};
  return f;
}

// embedding derivatives of the radial graph at one node
struct NodeJet {
  Eigen::Vector3d pos, xt, xp, xtt, xtp, xpp;
};

NodeJet node_jet(const Eigen::Vector3d& center, const ChartFrame& f, double r,
                 double rt, double rp, double rtt, double rtp, double rpp) {
  NodeJet n;
  n.pos = center + r * f.u;
  n.xt = rt * f.u + r * f.ut;
  n.xp = rp * f.u + r * f.up;
  n.xtt = rtt * f.u + 2.0 * rt * f.ut - r * f.u;
  n.xtp = rtp * f.u + rt * f.up + rp * f.ut + r * f.utp;
  n.xpp = rpp * f.u + 2.0 * rp * f.up + r * f.upp;
  return n;
}

double contract(const Eigen::Matrix2d& inv, const Eigen::Matrix2d& t) {
  return (inv.array() * t.array()).sum();
}

Eigen::Matrix2d invert2(const Eigen::Matrix2d& q) {
  const double det = q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0);
  Eigen::Matrix2d inv;
  inv << q(1, 1), -q(0, 1), -q(1, 0), q(0, 0);
  return inv / det;
}

// squared tensor norm of a symmetric bilinear form against a metric
double norm2_form(const Eigen::Matrix2d& inv, const Eigen::Matrix2d& t) {
  return ((inv * t) * (inv * t)).trace();
}

struct DerivativeTables {
  Eigen::VectorXd rt, rp, rtt, rtp, rpp;
};

DerivativeTables rho_derivatives(const SphereFunction& rho) {
  const HarmonicBasis& b = *rho.basis();
  const Eigen::VectorXd& c = rho.coefficients();
  DerivativeTables d;
  d.rt = b.dtheta().transpose() * c;
  d.rp = b.dphi().transpose() * c;
  d.rtt = b.dtheta2().transpose() * c;
  d.rtp = b.dthetaphi().transpose() * c;
  d.rpp = b.dphi2().transpose() * c;
  return d;
}

}  // namespace

GraphSurface::GraphSurface(const Eigen::Vector3d& center, SphereFunction rho)
    : center_(center), rho_(std::move(rho)) {
  if (!rho_.basis())
    throw std::invalid_argument("graph surface needs a radius with a basis");
  node_rho_ = synthesize(rho_);
  r0_ = std::numeric_limits<double>::infinity();
  r1_ = 0.0;
  const HarmonicBasis& b = *rho_.basis();
  for (int n = 0; n < b.n_nodes(); ++n) {
    const double r = node_rho_[n];
    if (!std::isfinite(r) || !(r > 0.0)) {
      throw std::domain_error(
          "graph surface requires a positive finite radius at every node");
    }
    const double dist = (center_ + r * b.node_unit(n)).norm();
    r0_ = std::min(r0_, dist);
    r1_ = std::max(r1_, dist);
  }
}

Eigen::Vector3d GraphSurface::position(int node) const {
  return center_ + node_rho_[node] * rho_.basis()->node_unit(node);
}

double SurfaceReport::integrate_g(const Eigen::VectorXd& f) const {
  if (f.size() != area_g.size())
    throw std::invalid_argument("integrate_g: node vector has the wrong size");
  return (basis->weights().array() * f.array() * area_g.array()).sum();
}

double SurfaceReport::integrate_e(const Eigen::VectorXd& f) const {
  if (f.size() != area_e.size())
    throw std::invalid_argument("integrate_e: node vector has the wrong size");
  return (basis->weights().array() * f.array() * area_e.array()).sum();
}

SurfaceReport surface_geometry(const GraphSurface& s,
                               const MetricEvaluator& field) {
  const auto basis = s.basis();
  const HarmonicBasis& b = *basis;
  const int nn = b.n_nodes();
  const DerivativeTables d = rho_derivatives(s.rho());
  const Eigen::VectorXd& rho = s.node_radii();

  SurfaceReport rep;
  rep.basis = basis;
  rep.position.resize(nn);
  rep.tangent_theta.resize(nn);
  rep.tangent_phi.resize(nn);
  rep.metric_g.resize(nn);
  rep.metric_e.resize(nn);
  rep.second_g.resize(nn);
  rep.second_e.resize(nn);
  rep.traceless_g.resize(nn);
  rep.traceless_e.resize(nn);
  rep.normal_g.resize(nn);
  rep.normal_e.resize(nn);
  rep.mean_g.resize(nn);
  rep.mean_e.resize(nn);
  rep.gauss_e.resize(nn);
  rep.area_g.resize(nn);
  rep.area_e.resize(nn);
  rep.radius.resize(nn);
  rep.support_g.resize(nn);
  rep.second_norm2_g.resize(nn);
  rep.traceless_norm2_g.resize(nn);
  rep.traceless_norm2_e.resize(nn);

  for (int i = 0; i < b.n_theta(); ++i) {
    for (int j = 0; j < b.n_phi(); ++j) {
      const int n = b.node(i, j);
      const ChartFrame f = chart_frame(b.theta(i), b.phi(j));
      const NodeJet nj = node_jet(s.center(), f, rho[n], d.rt[n], d.rp[n],
                                  d.rtt[n], d.rtp[n], d.rpp[n]);

      Eigen::Matrix2d qe;
      qe(0, 0) = nj.xt.dot(nj.xt);
      qe(0, 1) = qe(1, 0) = nj.xt.dot(nj.xp);
      qe(1, 1) = nj.xp.dot(nj.xp);
      const Eigen::Vector3d cross = nj.xt.cross(nj.xp);
      const double cross_norm = cross.norm();
      if (!std::isfinite(cross_norm) || !(cross_norm > 0.0)) {
        throw std::domain_error(
            "surface is not immersed: degenerate induced metric at a node");
      }
      // the cross product points outward for radial graphs
      const Eigen::Vector3d nu_e = cross / cross_norm;

      Eigen::Matrix2d ae;
      ae(0, 0) = -nj.xtt.dot(nu_e);
      ae(0, 1) = ae(1, 0) = -nj.xtp.dot(nu_e);
      ae(1, 1) = -nj.xpp.dot(nu_e);
      const Eigen::Matrix2d qe_inv = invert2(qe);
      const double he = contract(qe_inv, ae);
      const double dete = qe(0, 0) * qe(1, 1) - qe(0, 1) * qe(1, 0);
      const double ke = (ae(0, 0) * ae(1, 1) - ae(0, 1) * ae(1, 0)) / dete;

      const MetricValue mv = field.eval(nj.pos, 1);
      Eigen::Matrix2d qg;
      qg(0, 0) = nj.xt.dot(mv.g * nj.xt);
      qg(0, 1) = qg(1, 0) = nj.xt.dot(mv.g * nj.xp);
      qg(1, 1) = nj.xp.dot(mv.g * nj.xp);
      // unit conormal and normal in g from the flat conormal direction
      const double len = std::sqrt(nu_e.dot(mv.g_inv * nu_e));
      const Eigen::Vector3d omega = nu_e / len;
      const Eigen::Vector3d nu = mv.g_inv * omega;

      auto gamma = [&](const Eigen::Vector3d& a,
                       const Eigen::Vector3d& bb) -> Eigen::Vector3d {
        return {a.dot(mv.christoffel[0] * bb), a.dot(mv.christoffel[1] * bb),
                a.dot(mv.christoffel[2] * bb)};
      };
      Eigen::Matrix2d ag;
      ag(0, 0) = -omega.dot(nj.xtt + gamma(nj.xt, nj.xt));
      ag(0, 1) = ag(1, 0) = -omega.dot(nj.xtp + gamma(nj.xt, nj.xp));
      ag(1, 1) = -omega.dot(nj.xpp + gamma(nj.xp, nj.xp));
      const Eigen::Matrix2d qg_inv = invert2(qg);
      const double hg = contract(qg_inv, ag);

      rep.position[n] = nj.pos;
      rep.tangent_theta[n] = nj.xt;
      rep.tangent_phi[n] = nj.xp;
      rep.metric_g[n] = qg;
      rep.metric_e[n] = qe;
      rep.second_g[n] = ag;
      rep.second_e[n] = ae;
      rep.traceless_g[n] = ag - 0.5 * hg * qg;
      rep.traceless_e[n] = ae - 0.5 * he * qe;
      rep.normal_g[n] = nu;
      rep.normal_e[n] = nu_e;
      rep.mean_g[n] = hg;
      rep.mean_e[n] = he;
      rep.gauss_e[n] = ke;
      rep.area_g[n] = std::sqrt(qg(0, 0) * qg(1, 1) - qg(0, 1) * qg(1, 0)) /
                      f.sin_theta;
      rep.area_e[n] = cross_norm / f.sin_theta;
      rep.radius[n] = nj.pos.norm();
      rep.support_g[n] = nj.pos.dot(mv.g * nu);
      rep.second_norm2_g[n] = norm2_form(qg_inv, ag);
      rep.traceless_norm2_g[n] = norm2_form(qg_inv, rep.traceless_g[n]);
      rep.traceless_norm2_e[n] = norm2_form(qe_inv, rep.traceless_e[n]);
    }
  }

  const Eigen::VectorXd& w = b.weights();
  rep.area = (w.array() * rep.area_g.array()).sum();
  rep.area_euclidean = (w.array() * rep.area_e.array()).sum();
  rep.willmore =
      0.5 * (w.array() * rep.mean_e.array().square() * rep.area_e.array())
                .sum();
  rep.r0 = rep.radius.minCoeff();
  rep.r1 = rep.radius.maxCoeff();
  double chord2 = 0.0;
  for (int m = 0; m < nn; ++m) {
    for (int k = m + 1; k < nn; ++k) {
      chord2 = std::max(chord2,
                        (rep.position[m] - rep.position[k]).squaredNorm());
    }
  }
  rep.diameter_chord = std::sqrt(chord2);
  rep.diameter_upper = 0.5 * kPi * rep.diameter_chord;
  return rep;
}

Eigen::VectorXd mean_curvature_nodes(const GraphSurface& s,
                                     const MetricEvaluator& field) {
  const HarmonicBasis& b = *s.basis();
  const DerivativeTables d = rho_derivatives(s.rho());
  const Eigen::VectorXd& rho = s.node_radii();
  Eigen::VectorXd out(b.n_nodes());
  for (int i = 0; i < b.n_theta(); ++i) {
    for (int j = 0; j < b.n_phi(); ++j) {
      const int n = b.node(i, j);
      const ChartFrame f = chart_frame(b.theta(i), b.phi(j));
      const NodeJet nj = node_jet(s.center(), f, rho[n], d.rt[n], d.rp[n],
                                  d.rtt[n], d.rtp[n], d.rpp[n]);
      const Eigen::Vector3d cross = nj.xt.cross(nj.xp);
      const double cross_norm = cross.norm();
      if (!std::isfinite(cross_norm) || !(cross_norm > 0.0)) {
        throw std::domain_error(
            "surface is not immersed: degenerate induced metric at a node");
      }
      const Eigen::Vector3d nu_e = cross / cross_norm;
      const MetricValue mv = field.eval(nj.pos, 1);
      Eigen::Matrix2d qg;
      qg(0, 0) = nj.xt.dot(mv.g * nj.xt);
      qg(0, 1) = qg(1, 0) = nj.xt.dot(mv.g * nj.xp);
      qg(1, 1) = nj.xp.dot(mv.g * nj.xp);
      const double len = std::sqrt(nu_e.dot(mv.g_inv * nu_e));
      const Eigen::Vector3d omega = nu_e / len;
      auto gamma = [&](const Eigen::Vector3d& a,
                       const Eigen::Vector3d& bb) -> Eigen::Vector3d {
        return {a.dot(mv.christoffel[0] * bb), a.dot(mv.christoffel[1] * bb),
                a.dot(mv.christoffel[2] * bb)};
      };
      Eigen::Matrix2d ag;
      ag(0, 0) = -omega.dot(nj.xtt + gamma(nj.xt, nj.xt));
      ag(0, 1) = ag(1, 0) = -omega.dot(nj.xtp + gamma(nj.xt, nj.xp));
      ag(1, 1) = -omega.dot(nj.xpp + gamma(nj.xp, nj.xp));
      out[n] = contract(invert2(qg), ag);
    }
  }
  return out;
}

CurvatureSplit mean_curvature_difference(const GraphSurface& s,
                                         const MetricEvaluator& field) {
  const SurfaceReport rep = surface_geometry(s, field);
  const int nn = rep.mean_g.size();
  CurvatureSplit out;
  out.direct = rep.mean_g - rep.mean_e;
  out.expansion.resize(nn);
  for (int n = 0; n < nn; ++n) {
    const MetricValue mv = field.eval(rep.position[n], 1);
    const Eigen::Matrix3d h = mv.g - Eigen::Matrix3d::Identity();
    const Eigen::Vector3d& xt = rep.tangent_theta[n];
    const Eigen::Vector3d& xp = rep.tangent_phi[n];
    const Eigen::Vector3d& nu = rep.normal_g[n];
    const Eigen::Matrix2d qg_inv = invert2(rep.metric_g[n]);

    Eigen::Matrix2d hq;  // h pulled back to the chart
    hq(0, 0) = xt.dot(h * xt);
    hq(0, 1) = hq(1, 0) = xt.dot(h * xp);
    hq(1, 1) = xp.dot(h * xp);
    const double t1 =
        -((qg_inv * hq) * (qg_inv * rep.second_g[n])).trace();
    const double t2 = 0.5 * rep.mean_g[n] * nu.dot(h * nu);

    const Eigen::Vector3d dh_nu[2] = {
        {xt.dot(mv.dg[0] * nu), xt.dot(mv.dg[1] * nu), xt.dot(mv.dg[2] * nu)},
        {xp.dot(mv.dg[0] * nu), xp.dot(mv.dg[1] * nu), xp.dot(mv.dg[2] * nu)}};
    const Eigen::Vector3d tangents[2] = {xt, xp};
    Eigen::Matrix2d deriv_mixed;   // tangent^i (d_i h_jl) tangent^j nu^l
    Eigen::Matrix2d deriv_normal;  // tangent^i tangent^j (nu^l d_l h_ij)
    const Eigen::Matrix3d dg_nu =
        nu[0] * mv.dg[0] + nu[1] * mv.dg[1] + nu[2] * mv.dg[2];
    for (int a = 0; a < 2; ++a) {
      for (int bb = 0; bb < 2; ++bb) {
        deriv_mixed(a, bb) = tangents[a].dot(dh_nu[bb]);
        deriv_normal(a, bb) = tangents[a].dot(dg_nu * tangents[bb]);
      }
    }
    const double t3 = -contract(qg_inv, deriv_mixed);
    const double t4 = 0.5 * contract(qg_inv, deriv_normal);
    out.expansion[n] = t1 + t2 + t3 + t4;
  }
  out.residual = out.direct - out.expansion;
  return out;
}

std::vector<double> dyadic_band_edges(double r_lo, double r_hi,
                                      double efolds) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo) || !(efolds > 0.0))
    throw std::invalid_argument("band edges need 0 < r_lo <= r_hi, efolds > 0");
  const double step = std::exp(efolds);
  std::vector<double> edges{r_lo};
  double e = r_lo;
  do {
    e *= step;
    edges.push_back(e);
  } while (e < r_hi * (1.0 + 1e-12));
  return edges;
}

GaussMapReport gauss_map_diagnostics(const GraphSurface& s,
                                     const MetricEvaluator& field,
                                     std::vector<double> band_edges) {
  const SurfaceReport rep = surface_geometry(s, field);
  if (band_edges.empty()) band_edges = dyadic_band_edges(rep.r0, rep.r1);
  if (band_edges.size() < 2)
    throw std::invalid_argument("band edges need at least two entries");
  for (std::size_t k = 0; k + 1 < band_edges.size(); ++k) {
    if (!(band_edges[k] > 0.0) || !(band_edges[k + 1] > band_edges[k]))
      throw std::invalid_argument("band edges must be positive increasing");
  }

  const HarmonicBasis& b = *rep.basis;
  const int nn = b.n_nodes();
  const Eigen::VectorXd& w = b.weights();

  // spectral surface gradient of the flat mean curvature for the tension
  const SphereFunction hf = analyze(rep.basis, rep.mean_e);
  const Eigen::VectorXd ht = b.dtheta().transpose() * hf.coefficients();
  const Eigen::VectorXd hp = b.dphi().transpose() * hf.coefficients();

  // Gauss map components on the grid for the quadratic differential
  Eigen::MatrixXd vt(3, nn), vp(3, nn);
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd comp(nn);
    for (int n = 0; n < nn; ++n) comp[n] = rep.normal_e[n][c];
    const SphereFunction cf = analyze(rep.basis, comp);
    vt.row(c) = (b.dtheta().transpose() * cf.coefficients()).transpose();
    vp.row(c) = (b.dphi().transpose() * cf.coefficients()).transpose();
  }

  GaussMapReport out;
  out.bands.resize(band_edges.size() - 1);
  for (std::size_t k = 0; k + 1 < band_edges.size(); ++k) {
    out.bands[k].r_lo = band_edges[k];
    out.bands[k].r_hi = band_edges[k + 1];
  }

  for (int n = 0; n < nn; ++n) {
    const double st = std::sin(b.node_theta(n));
    // Dirichlet density |A_e|^2 = |traceless|^2 + H_e^2 / 2
    const double energy_density =
        rep.traceless_norm2_e[n] + 0.5 * rep.mean_e[n] * rep.mean_e[n];
    const double energy = w[n] * energy_density * rep.area_e[n];

    const Eigen::Matrix2d qe_inv = invert2(rep.metric_e[n]);
    const double grad2 = qe_inv(0, 0) * ht[n] * ht[n] +
                         2.0 * qe_inv(0, 1) * ht[n] * hp[n] +
                         qe_inv(1, 1) * hp[n] * hp[n];
    const double r2 = rep.radius[n] * rep.radius[n];
    const double tension = r2 * std::sqrt(std::max(grad2, 0.0));

    // conformal chart t = log tan(theta/2): d/dt = sin(theta) d/dtheta,
    // chart measure dt dphi = (round measure) / sin^2(theta)
    const Eigen::Vector3d dvt = st * vt.col(n);
    const Eigen::Vector3d dvp = vp.col(n);
    const double re = dvt.squaredNorm() - dvp.squaredNorm();
    const double im = -2.0 * dvt.dot(dvp);
    const double hopf = std::hypot(re, im) * w[n] / (st * st);

    out.dirichlet_energy += energy;
    out.tension_sup = std::max(out.tension_sup, tension);
    out.hopf_l1 += hopf;

    const double rr = rep.radius[n];
    if (rr < band_edges.front() || rr > band_edges.back()) continue;
    const auto it =
        std::upper_bound(band_edges.begin(), band_edges.end(), rr);
    const int k = std::min<int>(
        std::max<int>(0, int(it - band_edges.begin()) - 1),
        int(out.bands.size()) - 1);
    out.bands[k].node_count += 1;
    out.bands[k].dirichlet_energy += energy;
    out.bands[k].tension_sup = std::max(out.bands[k].tension_sup, tension);
    out.bands[k].hopf_l1 += hopf;
  }
  for (auto& band : out.bands) band.skipped = (band.node_count == 0);
  return out;
}

Eigen::VectorXd stability_potential(const SurfaceReport& report,
                                    const MetricEvaluator& field) {
  if (!report.basis || report.position.empty())
    throw std::invalid_argument("stability potential needs a filled report");
  const int nn = int(report.position.size());
  Eigen::VectorXd pot(nn);
  for (int n = 0; n < nn; ++n) {
    const MetricValue mv = field.eval(report.position[n], 2);
    const Eigen::Matrix3d ric = ricci_tensor(mv);
    const Eigen::Vector3d& nu = report.normal_g[n];
    pot[n] = report.second_norm2_g[n] + nu.dot(ric * nu);
  }
  return pot;
}

JacobiSpectrum jacobi_spectrum(const GraphSurface& s,
                               const MetricEvaluator& field, int n_eigs) {
  const SurfaceReport rep = surface_geometry(s, field);
  const HarmonicBasis& b = *rep.basis;
  const int nn = b.n_nodes();
  const int nm = b.size();
  if (n_eigs < 1 || n_eigs > nm - 1)
    throw std::invalid_argument("n_eigs must be in [1, basis size - 1]");

  const Eigen::VectorXd pot = stability_potential(rep, field);
  const Eigen::VectorXd wg =
      b.weights().array() * rep.area_g.array();

  Eigen::VectorXd qtt(nn), qtp(nn), qpp(nn);
  for (int n = 0; n < nn; ++n) {
    const Eigen::Matrix2d qi = invert2(rep.metric_g[n]);
    qtt[n] = qi(0, 0);
    qtp[n] = qi(0, 1);
    qpp[n] = qi(1, 1);
  }

  const Eigen::MatrixXd& v = b.values();
  const Eigen::MatrixXd& dt = b.dtheta();
  const Eigen::MatrixXd& dp = b.dphi();
  Eigen::MatrixXd stiff =
      dt * (wg.array() * qtt.array()).matrix().asDiagonal() * dt.transpose() +
      dt * (wg.array() * qtp.array()).matrix().asDiagonal() * dp.transpose() +
      dp * (wg.array() * qtp.array()).matrix().asDiagonal() * dt.transpose() +
      dp * (wg.array() * qpp.array()).matrix().asDiagonal() * dp.transpose() -
      v * (wg.array() * pot.array()).matrix().asDiagonal() * v.transpose();
  Eigen::MatrixXd mass = v * wg.asDiagonal() * v.transpose();

  // Householder basis of the subspace orthogonal to the dmu means
  Eigen::VectorXd means = v * wg;
  Eigen::VectorXd refl = means;
  refl[0] += (means[0] >= 0.0 ? 1.0 : -1.0) * means.norm();
  refl.normalize();
  const Eigen::MatrixXd house =
      Eigen::MatrixXd::Identity(nm, nm) - 2.0 * refl * refl.transpose();
  const Eigen::MatrixXd u = house.rightCols(nm - 1);

  Eigen::MatrixXd stiff_r = u.transpose() * stiff * u;
  Eigen::MatrixXd mass_r = u.transpose() * mass * u;
  stiff_r = 0.5 * (stiff_r + stiff_r.transpose()).eval();
  mass_r = 0.5 * (mass_r + mass_r.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiff_r,
                                                               mass_r);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("stability eigensolve failed to converge");

  JacobiSpectrum out;
  out.eigenvalues = es.eigenvalues().head(n_eigs);
  out.stability_integral = (wg.array() * pot.array()).sum();
  return out;
}

RadialIdentityCheck radial_identity_check(const SurfaceReport& report,
                                          double mean_curvature, double a) {
  const Eigen::ArrayXd r = report.radius.array();
  const Eigen::ArrayXd sup = report.support_g.array();
  const Eigen::ArrayXd ra = r.pow(-a);
  RadialIdentityCheck out;
  const double i_r = report.integrate_g(ra.matrix());
  const double i_sup2 = report.integrate_g((sup.square() * ra / r.square()).matrix());
  const double i_sup = report.integrate_g((sup * ra).matrix());
  out.gap = std::abs((2.0 - a) * i_r + a * i_sup2 - mean_curvature * i_sup);
  out.comparison = report.integrate_g((ra / r).matrix());
  out.ratio = out.gap / out.comparison;
  return out;
}

double enclosing_flux(const SurfaceReport& report) {
  const int nn = int(report.position.size());
  Eigen::VectorXd f(nn);
  for (int n = 0; n < nn; ++n) {
    const double r = report.radius[n];
    f[n] = 2.0 * report.position[n].dot(report.normal_e[n]) / (r * r * r);
  }
  return report.integrate_e(f);
}

void write_surface_block(const GraphSurface& s, std::ostream& os) {
  os << "aftk-surface v1\n";
  os << "center " << detail::format_double(s.center()[0]) << " "
     << detail::format_double(s.center()[1]) << " "
     << detail::format_double(s.center()[2]) << "\n";
  write_coefficient_block(s.rho(), os);
}

GraphSurface read_surface_block(std::istream& is,
                                std::shared_ptr<const HarmonicBasis> basis) {
  std::string line;
  if (!std::getline(is, line) || line != "aftk-surface v1")
    throw std::runtime_error("bad surface header");
  std::string key;
  Eigen::Vector3d center;
  is >> key >> center[0] >> center[1] >> center[2];
  if (!is || key != "center")
    throw std::runtime_error("surface file missing center line");
  std::getline(is, line);  // finish the center line
  SphereFunction rho = read_coefficient_block(is, std::move(basis));
  return GraphSurface(center, std::move(rho));
}

void save_surface(const GraphSurface& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open surface file: " + path);
  write_surface_block(s, os);
  if (!os) throw std::runtime_error("failed writing surface file: " + path);
}

GraphSurface load_surface(const std::string& path,
                          std::shared_ptr<const HarmonicBasis> basis) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open surface file: " + path);
  try {
    return read_surface_block(is, std::move(basis));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " in " + path);
  }
}

}  // namespace aftk
