#ifndef AFTK_HARMONIC_COORDS_HPP
#define AFTK_HARMONIC_COORDS_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "aftk/harmonics.hpp"
#include "aftk/metric.hpp"

namespace aftk {

// the r^-2 angular source of Delta_g x^k, one function per coordinate,
// recovered from a constant-plus-1/r fit across sample radii
struct SourceTerm {
  std::array<SphereFunction, 3> components;
  // max over nodes of (fit deviation / sup of the recovered source)
  double max_relative_residual = 0.0;
  // set when the fit deviates by more than 10 percent somewhere, meaning
  // the r^-2 and r^-3 parts did not separate cleanly at these radii
  bool poor_separation = false;
};

std::vector<double> default_source_radii();  // 1000 * 2^k, k = 0..3

SourceTerm source_term(const MetricField& field,
                       std::vector<double> r_samples = {});

// coordinate change y^k(x) = x^k + a^k log r + G^k(theta) with a^k the
// mode-0 source coefficient (normalized) and G^k mean-zero angular parts
class CoordinateMap {
 public:
  CoordinateMap(Eigen::Vector3d lambda0,
                std::array<SphereFunction, 3> angular_parts,
                double invertibility_radius);

  const Eigen::Vector3d& lambda0() const { return lambda0_; }
  const SphereFunction& angular_part(int k) const { return angular_[k]; }
  double invertibility_radius() const { return invertibility_radius_; }

  Eigen::Vector3d forward(const Eigen::Vector3d& x) const;
  // J(k, i) = dy^k / dx^i, exact
  Eigen::Matrix3d jacobian(const Eigen::Vector3d& x) const;
  // [k](i, j) = d_i d_j y^k, exact
  std::array<Eigen::Matrix3d, 3> hessian(const Eigen::Vector3d& x) const;
  // Newton inversion of the forward map; throws when it leaves the
  // invertible region or fails to settle
  Eigen::Vector3d inverse(const Eigen::Vector3d& y) const;

  // diagnostics carried over from the source fit
  double source_residual = 0.0;
  bool poor_separation = false;

 private:
  Eigen::Vector3d lambda0_;
  std::array<SphereFunction, 3> angular_;
  double invertibility_radius_;
};

CoordinateMap build_harmonic_map(const MetricField& field,
                                 std::vector<double> r_samples = {});

// Delta_g y^k for the mapped coordinates, all three components
Eigen::Vector3d harmonic_residual(const MetricEvaluator& field,
                                  const CoordinateMap& map,
                                  const Eigen::Vector3d& x);

// pullback evaluator g~_ij(y) = (dx/dy)^T g (dx/dy) at x = map^-1(y);
// supports orders 0 and 1 (second derivatives would need third
// derivatives of the map, which the construction does not provide)
class TransformedMetric final : public MetricEvaluator {
 public:
  TransformedMetric(CoordinateMap map, MetricField field);

  MetricValue eval(const Eigen::Vector3d& y, int order = 1) const override;
  double inner_radius() const override;

  Eigen::Vector3d base_point(const Eigen::Vector3d& y) const;
  const CoordinateMap& map() const { return map_; }
  const MetricField& base_field() const { return field_; }

 private:
  CoordinateMap map_;
  MetricField field_;
};

TransformedMetric transform_metric(const CoordinateMap& map,
                                   const MetricField& field);

// first-order prediction of the transformed deviation g~ - delta, written
// in the original coordinates; the pullback agrees with it to O(r^-2)
Eigen::Matrix3d closed_form_h_tilde(const CoordinateMap& map,
                                    const MetricField& field,
                                    const Eigen::Vector3d& x);

// eigenvalue extrema of r * (g - delta) over a sample grid; the deviation
// is uniformly elliptic when even the smallest eigenvalue clears the margin
struct EllipticityReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double margin = 0.0;
  bool elliptic = false;
};

// the 26 directions of the {-1,0,1}^3 lattice, normalized, in
// lexicographic order
std::vector<Eigen::Vector3d> lattice_directions();

EllipticityReport ellipticity_check(
    const MetricEvaluator& field, std::vector<double> radii = {},
    std::vector<Eigen::Vector3d> directions = {}, double margin = 0.05);

// spectral Sobolev distance of the 1/r coefficient from the flat one,
// sqrt(sum over components of |h1_ij - delta_ij|^2 in W^{m,2})
double sobolev_distance_to_delta(const MetricField& field, int m);

}  // namespace aftk

#endif
