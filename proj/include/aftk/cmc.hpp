#ifndef AFTK_CMC_HPP
#define AFTK_CMC_HPP

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aftk/surface.hpp"

namespace aftk {

// Newton failed to reach the residual target; carries the last sup residual
// so callers can decide whether a looser tolerance would have done
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& message, double last_residual)
      : std::runtime_error(message), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

struct CmcOptions {
  int lmax = 8;
  // relative target: sup |H(theta) - H| <= tol * |H|
  double tol = 1e-10;
  int max_iterations = 50;
  // finite-difference step per coefficient, times the target radius
  double fd_step_scale = 1e-6;
};

struct CmcSolution {
  GraphSurface surface;
  double mean_curvature = 0.0;
  // sup |H(theta) - H| re-evaluated on a grid of twice the degree; the
  // certificate that the discrete solution is a surface-wise solution
  double residual = 0.0;
  // the same sup on the solve grid
  double grid_residual = 0.0;
  int iterations = 0;
  // near-null directions of the Jacobian at the solution; 3 in flat space
  // where translations cost nothing
  int null_directions = 0;
};

// Radial CMC graph about the given center with mean radius fixed to
// target_radius.  Unknowns are the radius coefficients plus the scalar H;
// the Jacobian is assembled by forward differences and steps are damped by
// halving, with a minimum-norm solve so translation-degenerate problems
// stay at the leaf nearest the initial guess.
CmcSolution solve_cmc(const MetricEvaluator& field,
                      const Eigen::Vector3d& center, double target_radius,
                      const CmcOptions& opts = {});

// warm start from an existing surface (rescaled by the caller); the
// initial surface must share the solve center
CmcSolution solve_cmc_warm(const MetricEvaluator& field,
                           const GraphSurface& initial,
                           double initial_mean_curvature, double target_radius,
                           const CmcOptions& opts = {});

// Identity battery for one converged leaf.  Quantities with a pinned value
// get a pass flag; scale-dependent integrals are reported for decay fits
// at the foliation level.
struct LeafVerification {
  double support_flux = 0.0;   // integral of <X,nu> r^-4 dmu
  double support_bound = 0.0;  // H^2 * area, the flux upper bound
  double radial_ratio_a2 = 0.0;
  double radial_ratio_a3 = 0.0;
  double mean_square = 0.0;       // integral of H^2 dmu, 16 pi + decay
  double traceless_square = 0.0;  // integral of |Aring|^2 dmu
  double stability_integral = 0.0;
  double gauss_bonnet = 0.0;
  Eigen::Vector3d balancing = Eigen::Vector3d::Zero();
  double enclosing = 0.0;  // 8 pi for surfaces enclosing the origin
  double min_jacobi = 0.0;
  double willmore = 0.0;
  double area = 0.0;
  double r0 = 0.0;
  double r1 = 0.0;

  bool support_ok = false;
  bool stability_ok = false;
  bool gauss_bonnet_ok = false;
  bool balancing_ok = false;
  bool enclosing_ok = false;
  bool jacobi_ok = false;
  bool all_ok = false;
};

LeafVerification verify_leaf(const CmcSolution& sol,
                             const MetricEvaluator& field, double tol = 1e-10);

struct FoliationLeaf {
  double target_radius = 0.0;
  bool converged = false;
  std::string message;  // failure note when the solve diverged
  std::optional<CmcSolution> solution;
  std::optional<LeafVerification> verification;
};

struct Foliation {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  std::vector<FoliationLeaf> leaves;
  bool complete = false;  // every scheduled leaf converged
  bool ordered = false;   // H strictly decreasing along the schedule
  bool nested = false;    // node radii strictly increasing between leaves
  // least-squares decay exponents over the converged leaves:
  // |H R / 2 - 1| ~ R^-p and |mean_square - 16 pi| ~ r0^-p
  bool decay_fitted = false;
  double mean_curvature_exponent = 0.0;
  double mean_square_exponent = 0.0;
};

// Solves the schedule in order with warm starts; a diverged leaf is
// recorded with its message and the next leaf starts cold.  The center
// defaults to the computed center of mass when the mass is nonzero.
Foliation build_foliation(const MetricEvaluator& field,
                          const std::vector<double>& schedule,
                          const Eigen::Vector3d& center,
                          const CmcOptions& opts = {});
Foliation build_foliation(const MetricEvaluator& field,
                          const std::vector<double>& schedule,
                          const CmcOptions& opts = {});

}  // namespace aftk

#endif
