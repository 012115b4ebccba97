#ifndef AFTK_SURFACE_HPP
#define AFTK_SURFACE_HPP

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "aftk/harmonics.hpp"
#include "aftk/metric.hpp"

namespace aftk {

// Sphere-topology surface written as a radial graph about a center,
//   x(theta) = center + rho(theta) * unit(theta),
// with rho a positive band-limited function on the parameter sphere.
// Radial graphs with rho > 0 are automatically immersed, so construction
// only has to reject nonpositive or nonfinite radii.
class GraphSurface {
 public:
  GraphSurface(const Eigen::Vector3d& center, SphereFunction rho);

  const Eigen::Vector3d& center() const { return center_; }
  const SphereFunction& rho() const { return rho_; }
  const std::shared_ptr<const HarmonicBasis>& basis() const {
    return rho_.basis();
  }

  // graph radii at the quadrature nodes
  const Eigen::VectorXd& node_radii() const { return node_rho_; }
  // embedded position of a quadrature node
  Eigen::Vector3d position(int node) const;

  // extremes of the coordinate distance |x| over the nodes
  double r0() const { return r0_; }
  double r1() const { return r1_; }

 private:
  Eigen::Vector3d center_;
  SphereFunction rho_;
  Eigen::VectorXd node_rho_;
  double r0_ = 0.0;
  double r1_ = 0.0;
};

// Node-wise geometry of a graph surface in the ambient metric and in the
// flat background, plus the integrated scalars built from it.  Per-node
// area entries are densities against the round measure of the parameter
// sphere, so integrals are plain weighted sums:
//   integral of f dmu = sum_n weights[n] * f[n] * area_g[n].
// Chart-indexed 2x2 tensors use (theta, phi) order.
struct SurfaceReport {
  std::shared_ptr<const HarmonicBasis> basis;

  std::vector<Eigen::Vector3d> position;
  std::vector<Eigen::Vector3d> tangent_theta;
  std::vector<Eigen::Vector3d> tangent_phi;
  std::vector<Eigen::Matrix2d> metric_g;     // induced first form in g
  std::vector<Eigen::Matrix2d> metric_e;     // induced first form, flat
  std::vector<Eigen::Matrix2d> second_g;     // second form in g
  std::vector<Eigen::Matrix2d> second_e;     // second form, flat
  std::vector<Eigen::Matrix2d> traceless_g;  // second_g - (H/2) metric_g
  std::vector<Eigen::Matrix2d> traceless_e;
  std::vector<Eigen::Vector3d> normal_g;  // outward unit normal in g
  std::vector<Eigen::Vector3d> normal_e;  // outward unit normal, flat
  Eigen::VectorXd mean_g;                 // H
  Eigen::VectorXd mean_e;                 // H_e
  Eigen::VectorXd gauss_e;                // flat Gauss curvature
  Eigen::VectorXd area_g;                 // dmu density
  Eigen::VectorXd area_e;                 // flat area density
  Eigen::VectorXd radius;                 // coordinate distance |x|
  Eigen::VectorXd support_g;              // <position, normal_g> in g
  Eigen::VectorXd second_norm2_g;         // |A|^2 in g
  Eigen::VectorXd traceless_norm2_g;
  Eigen::VectorXd traceless_norm2_e;

  double area = 0.0;
  double area_euclidean = 0.0;
  // half the integral of H_e^2 against the flat measure; 8*pi on round
  // spheres
  double willmore = 0.0;
  // largest node-to-node chord, a lower proxy for the diameter, and the
  // convex-case upper estimate (pi/2 times the chord)
  double diameter_chord = 0.0;
  double diameter_upper = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;

  // integral of f against dmu (or the flat measure) as a weighted node sum
  double integrate_g(const Eigen::VectorXd& f) const;
  double integrate_e(const Eigen::VectorXd& f) const;
};

SurfaceReport surface_geometry(const GraphSurface& s,
                               const MetricEvaluator& field);

// just the ambient-metric mean curvature at the nodes; the cheap inner-loop
// evaluation for the CMC solver, skipping the flat-side and integrated parts
Eigen::VectorXd mean_curvature_nodes(const GraphSurface& s,
                                     const MetricEvaluator& field);

// The difference H - H_e two ways: directly from the two curvatures, and
// from the leading-order expansion in h = g - delta,
//   -f^{ik} h_kl f^{lj} A_ij + (H/2) h(nu,nu) - f^{ij} nu^l d_i h_jl
//   + (1/2) f^{ij} nu^l d_l h_ij
// with f^{ij} the inverse induced metric pushed to ambient indices.  The
// residual is (direct - expansion) and shrinks one power of r faster than
// the difference itself.
struct CurvatureSplit {
  Eigen::VectorXd direct;
  Eigen::VectorXd expansion;
  Eigen::VectorXd residual;
};

CurvatureSplit mean_curvature_difference(const GraphSurface& s,
                                         const MetricEvaluator& field);

// Diagnostics of the flat Gauss map over coordinate-radius annuli.
// Per band: the (conformally invariant) Dirichlet energy of the Gauss map,
// which equals the integral of |A_e|^2 against the flat measure; the sup of
// the rescaled tension r^2 |grad H_e|; and the L1 norm of the quadratic
// differential
//   Phi = |dv/dt|^2 - |dv/dphi|^2 - 2i (dv/dt . dv/dphi)
// in the conformal chart t = log tan(theta/2) of the parameter sphere.
// All three vanish on round spheres.  Band membership is nodal, so per-band
// values carry a binning error of order one grid spacing.
struct BandDiagnostics {
  double r_lo = 0.0;
  double r_hi = 0.0;
  int node_count = 0;
  double dirichlet_energy = 0.0;
  double tension_sup = 0.0;
  double hopf_l1 = 0.0;
  bool skipped = false;  // no nodes fell inside the annulus
};

struct GaussMapReport {
  std::vector<BandDiagnostics> bands;
  double dirichlet_energy = 0.0;  // whole-surface totals
  double tension_sup = 0.0;
  double hopf_l1 = 0.0;
};

// annulus edges r_lo * e^(k * efolds) clamped to cover [r_lo, r_hi]
std::vector<double> dyadic_band_edges(double r_lo, double r_hi,
                                      double efolds = 1.0);

// band_edges empty means dyadic_band_edges(r0, r1) of the surface
GaussMapReport gauss_map_diagnostics(const GraphSurface& s,
                                     const MetricEvaluator& field,
                                     std::vector<double> band_edges = {});

// Smallest generalized eigenvalues of the second-variation (stability)
// form
//   f -> integral of |grad f|^2 - (|A|^2 + Ric(nu,nu)) f^2 dmu
// over the mean-zero subspace (mean against dmu) of the harmonic basis,
// with the dmu-weighted Gram matrix on the right-hand side.  Also reports
// the integral of the potential, which is at most 8*pi on stable spheres
// with equality in the round flat case.
struct JacobiSpectrum {
  Eigen::VectorXd eigenvalues;        // ascending
  double stability_integral = 0.0;    // integral of (|A|^2 + Ric) dmu
};

JacobiSpectrum jacobi_spectrum(const GraphSurface& s,
                               const MetricEvaluator& field, int n_eigs);

// potential |A|^2 + Ric(nu,nu) at the nodes; needs second metric
// derivatives
Eigen::VectorXd stability_potential(const SurfaceReport& report,
                                    const MetricEvaluator& field);

// Flux identities used by the leaf verification battery.  For a surface of
// constant mean curvature H the first-variation formula makes
//   (2-a) I[r^-a] + a I[<X,nu>^2 r^-a-2] - H I[<X,nu> r^-a]
// small of order I[r^-a-1]; gap is the left-hand side, comparison the
// right-hand integral (all against dmu).
struct RadialIdentityCheck {
  double gap = 0.0;
  double comparison = 0.0;
  double ratio = 0.0;  // gap / comparison
};

RadialIdentityCheck radial_identity_check(const SurfaceReport& report,
                                          double mean_curvature, double a);

// integral of (2/r^3) <x, nu_e> against the flat measure; 8*pi whenever the
// surface encloses the origin
double enclosing_flux(const SurfaceReport& report);

// plain-text surface files: a header with the center then the rho
// coefficient block
void save_surface(const GraphSurface& s, const std::string& path);
GraphSurface load_surface(const std::string& path,
                          std::shared_ptr<const HarmonicBasis> basis = nullptr);
void write_surface_block(const GraphSurface& s, std::ostream& os);
GraphSurface read_surface_block(
    std::istream& is, std::shared_ptr<const HarmonicBasis> basis = nullptr);

}  // namespace aftk

#endif
