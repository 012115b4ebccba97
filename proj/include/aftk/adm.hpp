#ifndef AFTK_ADM_HPP
#define AFTK_ADM_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "aftk/metric.hpp"

namespace aftk {

// mass and center extracted from flux integrals over coordinate spheres,
// extrapolated in 1/r across a schedule of radii
struct AdmReport {
  double mass = 0.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  bool has_center = false;

  std::vector<double> radii;
  std::vector<double> mass_at_radius;
  std::vector<Eigen::Vector3d> center_at_radius;

  // max absolute deviation of the samples from the fitted a + b/r
  double mass_residual = 0.0;
  double center_residual = 0.0;

  // whether successive mass samples settle the way a 1/r tail must;
  // fields with slower decay are reported, not guessed at
  bool cauchy = true;
};

// least-squares fit of v ~ a + b/r over the samples; returns (a, b)
std::pair<double, double> fit_inverse_radius(const std::vector<double>& radii,
                                             const std::vector<double>& values);

// geometric schedule 100 * 2^k, k = 0..5
std::vector<double> default_adm_radii();

// flux integral (1/16 pi) over |x| = r of (d_j h_ij - d_i h_jj) nu^i against
// the metric normal and induced area, fitted in 1/r; radii must be strictly
// increasing with at least 3 entries (defaults applied when empty)
AdmReport adm_mass(const MetricEvaluator& field,
                   std::vector<double> radii = {}, int lmax = 16);

// the mass flux weighted by x, corrected by the first-order moment integral
// and normalized by 16 pi m; fails for (numerically) massless fields
AdmReport center_of_mass(const MetricEvaluator& field,
                         std::vector<double> radii = {}, int lmax = 16);

}  // namespace aftk

#endif
