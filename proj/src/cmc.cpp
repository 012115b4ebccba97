#include "aftk/cmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "aftk/adm.hpp"

namespace aftk {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_options(const CmcOptions& opts) {
  if (opts.lmax < 2)
    throw std::invalid_argument("cmc solver needs lmax >= 2");
  if (!(opts.tol > 0.0))
    throw std::invalid_argument("cmc solver tolerance must be positive");
  if (opts.max_iterations < 1)
    throw std::invalid_argument("cmc solver needs at least one iteration");
  if (!(opts.fd_step_scale > 0.0))
    throw std::invalid_argument("cmc Jacobian step must be positive");
}

struct Residual {
  Eigen::VectorXd equations;  // analyzed curvature modes + normalization row
  double sup = 0.0;           // sup |H(theta) - H| over the grid
};

// the full nonlinear system at one iterate
Residual evaluate_system(const MetricEvaluator& field,
                         const Eigen::Vector3d& center,
                         const std::shared_ptr<const HarmonicBasis>& basis,
                         const Eigen::VectorXd& coeff, double mean_curvature,
                         double target_radius) {
  const GraphSurface s(center, SphereFunction(basis, coeff));
  const Eigen::VectorXd nodes = mean_curvature_nodes(s, field);
  const SphereFunction modes = analyze(basis, nodes);
  const int nm = basis->size();
  Residual out;
  out.equations.resize(nm + 1);
  out.equations.head(nm) = modes.coefficients();
  // subtracting the constant H only touches the mean mode
  out.equations[0] -= mean_curvature / kA0;
  out.equations[nm] = coeff[0] * kA0 - target_radius;
  out.sup = (nodes.array() - mean_curvature).abs().maxCoeff();
  return out;
}

Eigen::MatrixXd assemble_jacobian(const MetricEvaluator& field,
                                  const Eigen::Vector3d& center,
                                  const std::shared_ptr<const HarmonicBasis>& basis,
                                  const Eigen::VectorXd& coeff,
                                  double mean_curvature, double target_radius,
                                  const Residual& current, double step) {
  const int nm = basis->size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nm + 1, nm + 1);
  // forward differences in the coefficients; the H column and the
  // normalization row are exact
  for (int k = 0; k < nm; ++k) {
    Eigen::VectorXd pert = coeff;
    pert[k] += step;
    const Residual shifted = evaluate_system(field, center, basis, pert,
                                             mean_curvature, target_radius);
    jac.col(k) = (shifted.equations - current.equations) / step;
  }
  // the low modes respond to translation-like moves only through the
  // metric gradient, a signal that drowns in rounding noise at the
  // default step; remeasure those columns with wide central differences
  const double wide = 1e-3 * target_radius;
  for (int k = 0; k < nm && basis->mode_l(k) <= 1; ++k) {
    Eigen::VectorXd up = coeff, down = coeff;
    up[k] += wide;
    down[k] -= wide;
    const Residual plus = evaluate_system(field, center, basis, up,
                                          mean_curvature, target_radius);
    const Residual minus = evaluate_system(field, center, basis, down,
                                           mean_curvature, target_radius);
    jac.col(k) = (plus.equations - minus.equations) / (2.0 * wide);
  }
  jac(0, nm) = -1.0 / kA0;
  jac.row(nm).setZero();
  jac(nm, 0) = kA0;
  return jac;
}

CmcSolution solve_core(const MetricEvaluator& field,
                       const Eigen::Vector3d& center,
                       std::shared_ptr<const HarmonicBasis> basis,
                       Eigen::VectorXd coeff, double mean_curvature,
                       double target_radius, const CmcOptions& opts) {
  const int nm = basis->size();
  const double step = opts.fd_step_scale * target_radius;

  // Unknown split.  The l = 1 coefficients translate the surface almost
  // rigidly: the curvature responds only at the metric-gradient scale, and
  // the radial-graph chart is quadratically nonlinear along them (a moved
  // sphere is not a linear shift of rho).  Newton on the full system either
  // inverts that soft block against rounding noise or crawls through the
  // line search fighting the chart nonlinearity.  So the stiff block
  // (everything else plus H) is corrected with a frozen factorization, and
  // the soft block moves by Schur-complement steps that are judged on the
  // residual left after the stiff correction.
  std::vector<int> stiff;
  std::vector<int> soft;
  for (int n = 0; n < nm; ++n)
    (basis->mode_l(n) == 1 ? soft : stiff).push_back(n);
  const int nr = int(stiff.size()) + 1;  // the H column rides along

  auto stiff_rows = [&](const Eigen::VectorXd& eq) {
    Eigen::VectorXd out(nr);
    for (int i = 0; i < nr - 1; ++i) out[i] = eq[stiff[i]];
    out[nr - 1] = eq[nm];  // normalization row belongs to the stiff block
    return out;
  };
  auto soft_rows = [&](const Eigen::VectorXd& eq) {
    return Eigen::Vector3d(eq[soft[0]], eq[soft[1]], eq[soft[2]]);
  };

  Residual current = evaluate_system(field, center, basis, coeff,
                                     mean_curvature, target_radius);
  int iterations = 0;
  std::optional<Eigen::MatrixXd> last_jacobian;

  const auto converged = [&]() {
    return current.sup <= opts.tol * std::abs(mean_curvature) &&
           std::abs(current.equations[nm]) <= opts.tol * target_radius;
  };
  // once the tolerance is met, one extra soft step drives the translation
  // modes to their floor so that independently seeded solves agree
  bool sharpened = false;

  for (; iterations < opts.max_iterations; ++iterations) {
    if (converged()) {
      if (sharpened ||
          soft_rows(current.equations).cwiseAbs().maxCoeff() <= 1e-12)
        break;
      sharpened = true;
    }

    const Eigen::MatrixXd jac = assemble_jacobian(
        field, center, basis, coeff, mean_curvature, target_radius, current,
        step);
    last_jacobian = jac;

    Eigen::MatrixXd arr(nr, nr), art(nr, 3), atr(3, nr);
    Eigen::Matrix3d att;
    for (int i = 0; i < nr; ++i) {
      const int ri = i < nr - 1 ? stiff[i] : nm;
      for (int j = 0; j < nr; ++j)
        arr(i, j) = jac(ri, j < nr - 1 ? stiff[j] : nm);
      for (int j = 0; j < 3; ++j) art(i, j) = jac(ri, soft[j]);
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < nr; ++j)
        atr(i, j) = jac(soft[i], j < nr - 1 ? stiff[j] : nm);
      for (int j = 0; j < 3; ++j) att(i, j) = jac(soft[i], soft[j]);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> arr_qr(arr);

    // a few frozen-factorization corrections of the stiff rows; domain
    // excursions are damped internally and the entry evaluation may throw
    auto polish = [&](Eigen::VectorXd& c, double& h) {
      Residual res = evaluate_system(field, center, basis, c, h,
                                     target_radius);
      for (int k = 0; k < 6; ++k) {
        const Eigen::VectorXd fr = stiff_rows(res.equations);
        if (fr.cwiseAbs().maxCoeff() <=
            std::max(0.05 * opts.tol * std::abs(h), 1e-15))
          break;
        Eigen::VectorXd du = arr_qr.solve(-fr);
        for (int half = 0; half < 4; ++half, du *= 0.5) {
          Eigen::VectorXd trial_c = c;
          for (int i = 0; i < nr - 1; ++i) trial_c[stiff[i]] += du[i];
          const double trial_h = h + du[nr - 1];
          try {
            res = evaluate_system(field, center, basis, trial_c, trial_h,
                                  target_radius);
            c = trial_c;
            h = trial_h;
            break;
          } catch (const std::domain_error&) {
            // halve the correction and retry
          }
        }
      }
      return res;
    };

    current = polish(coeff, mean_curvature);
    if (converged()) {
      if (sharpened ||
          soft_rows(current.equations).cwiseAbs().maxCoeff() <= 1e-12) {
        ++iterations;
        break;
      }
      sharpened = true;
    }

    // reduced system for the soft block; directions below the rounding
    // noise of the wide columns (flat-space translations, whose response is
    // exactly zero) are dropped, which keeps the leaf nearest the initial
    // guess.  The noise scales like the 1/R evaluation error over the
    // 1e-3*R step, hence the 1/R^2 cutoff; genuine mass couplings sit well
    // above it for any radius reachable in double precision.
    const Eigen::Matrix3d schur = att - atr * arr_qr.solve(art);
    const Eigen::Vector3d reduced = soft_rows(current.equations);
    Eigen::JacobiSVD<Eigen::Matrix3d> ssvd(
        schur, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double soft_cutoff = 1e-6 / (target_radius * target_radius);
    Eigen::Vector3d dt = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) {
      if (ssvd.singularValues()[i] > soft_cutoff) {
        dt -= ssvd.matrixV().col(i) *
              (ssvd.matrixU().col(i).dot(reduced) /
               ssvd.singularValues()[i]);
      }
    }

    const double base_norm = current.equations.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 9; ++half, lambda *= 0.5) {
      Eigen::VectorXd trial_coeff = coeff;
      for (int i = 0; i < 3; ++i) trial_coeff[soft[i]] += lambda * dt[i];
      // first-order stiff response that keeps those rows near zero
      const Eigen::VectorXd du = arr_qr.solve(
          -(stiff_rows(current.equations) + lambda * (art * dt)));
      for (int i = 0; i < nr - 1; ++i) trial_coeff[stiff[i]] += du[i];
      double trial_mean = mean_curvature + du[nr - 1];
      try {
        const Residual trial = polish(trial_coeff, trial_mean);
        if (trial.equations.norm() <= (1.0 - 0.1 * lambda) * base_norm) {
          coeff = std::move(trial_coeff);
          mean_curvature = trial_mean;
          current = trial;
          accepted = true;
          break;
        }
      } catch (const std::domain_error&) {
        // radius dipped nonpositive or left the metric domain; damp harder
      }
    }
    if (!accepted) {
      if (converged()) break;  // sharpening found nothing left to gain
      if (base_norm <= 1e-12) {
        // the analyzed system is at its rounding floor but the grid
        // residual still exceeds the tolerance: the requested tol is below
        // what this expansion degree can represent
        throw DivergedError(
            "cmc grid residual floored above the requested tolerance",
            current.sup);
      }
      throw DivergedError("cmc newton step failed to reduce the residual",
                          current.sup);
    }
  }

  if (current.sup > opts.tol * std::abs(mean_curvature) ||
      std::abs(current.equations[nm]) > opts.tol * target_radius) {
    throw DivergedError("cmc solve did not converge after " +
                            std::to_string(opts.max_iterations) +
                            " iterations",
                        current.sup);
  }

  CmcSolution sol{GraphSurface(center, SphereFunction(basis, coeff)),
                  mean_curvature};
  sol.grid_residual = current.sup;
  sol.iterations = iterations;

  // certificate: the same sup residual on a grid of twice the degree
  auto fine = std::make_shared<HarmonicBasis>(2 * opts.lmax);
  const GraphSurface refined(
      center, change_basis(sol.surface.rho(), std::move(fine)));
  const Eigen::VectorXd fine_nodes = mean_curvature_nodes(refined, field);
  sol.residual = (fine_nodes.array() - mean_curvature).abs().maxCoeff();

  // rank of the Jacobian at the solution, for the translation-degenerate
  // flat case; reuse the last assembled one when available
  if (!last_jacobian) {
    last_jacobian = assemble_jacobian(field, center, basis, coeff,
                                      mean_curvature, target_radius, current,
                                      step);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(*last_jacobian);
  const double cutoff = 1e-8 * svd.singularValues()[0];
  sol.null_directions =
      int((svd.singularValues().array() < cutoff).count());
  return sol;
}

void validate_target(const MetricEvaluator& field,
                     const Eigen::Vector3d& center, double target_radius) {
  if (!(target_radius > 0.0))
    throw std::invalid_argument("cmc target radius must be positive");
  if (!(target_radius * (1.0 - 1e-6) >=
        field.inner_radius() + center.norm())) {
    throw std::domain_error(
        "cmc target sphere reaches inside the metric inner radius");
  }
}

std::vector<double> fit_log_decay(const std::vector<double>& scales,
                                  const std::vector<double>& deviations) {
  // least squares slope of log|d| against log(scale); returns {p} with
  // d ~ scale^-p, empty when too few usable points
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (deviations[i] > 1e-14) {
      xs.push_back(std::log(scales[i]));
      ys.push_back(std::log(deviations[i]));
    }
  }
  if (xs.size() < 2) return {};
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {-slope};
}

}  // namespace

CmcSolution solve_cmc(const MetricEvaluator& field,
                      const Eigen::Vector3d& center, double target_radius,
                      const CmcOptions& opts) {
  validate_options(opts);
  validate_target(field, center, target_radius);
  auto basis = std::make_shared<HarmonicBasis>(opts.lmax);
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis->size());
  coeff[0] = target_radius / kA0;
  return solve_core(field, center, std::move(basis), std::move(coeff),
                    2.0 / target_radius, target_radius, opts);
}

CmcSolution solve_cmc_warm(const MetricEvaluator& field,
                           const GraphSurface& initial,
                           double initial_mean_curvature, double target_radius,
                           const CmcOptions& opts) {
  validate_options(opts);
  validate_target(field, initial.center(), target_radius);
  if (!(initial_mean_curvature > 0.0))
    throw std::invalid_argument("warm-start mean curvature must be positive");
  auto basis = std::make_shared<HarmonicBasis>(opts.lmax);
  const SphereFunction rho = change_basis(initial.rho(), basis);
  // rescale so the mean radius starts at the target
  const double mean = rho.mean();
  if (!(mean > 0.0))
    throw std::invalid_argument("warm-start surface has nonpositive mean");
  const double scale = target_radius / mean;
  Eigen::VectorXd coeff = rho.coefficients() * scale;
  return solve_core(field, initial.center(), std::move(basis),
                    std::move(coeff), initial_mean_curvature / scale,
                    target_radius, opts);
}

LeafVerification verify_leaf(const CmcSolution& sol,
                             const MetricEvaluator& field, double tol) {
  const SurfaceReport rep = surface_geometry(sol.surface, field);
  const double mean = sol.mean_curvature;
  LeafVerification v;

  v.support_flux = rep.integrate_g(
      (rep.support_g.array() / rep.radius.array().pow(4.0)).matrix());
  v.support_bound = mean * mean * rep.area;
  v.radial_ratio_a2 = radial_identity_check(rep, mean, 2.0).ratio;
  v.radial_ratio_a3 = radial_identity_check(rep, mean, 3.0).ratio;
  v.mean_square = rep.integrate_g(rep.mean_g.array().square().matrix());
  v.traceless_square = rep.integrate_g(rep.traceless_norm2_g);
  v.gauss_bonnet = rep.integrate_e(rep.gauss_e);
  v.enclosing = enclosing_flux(rep);
  v.willmore = rep.willmore;
  v.area = rep.area;
  v.r0 = rep.r0;
  v.r1 = rep.r1;

  const Eigen::VectorXd difference = rep.mean_g - rep.mean_e;
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd f(difference.size());
    for (int n = 0; n < difference.size(); ++n)
      f[n] = difference[n] * rep.normal_e[n][axis];
    v.balancing[axis] = rep.integrate_e(f);
  }

  const JacobiSpectrum spec = jacobi_spectrum(sol.surface, field, 1);
  v.min_jacobi = spec.eigenvalues[0];
  v.stability_integral = spec.stability_integral;

  v.support_ok = v.support_flux <= v.support_bound;
  v.stability_ok = v.stability_integral <= 8.0 * kPi + 1e-6;
  v.gauss_bonnet_ok = std::abs(v.gauss_bonnet / (4.0 * kPi) - 1.0) <= 1e-6;
  const double balance_scale =
      10.0 * std::max(tol * std::abs(mean), sol.residual) *
      rep.area_euclidean;
  v.balancing_ok = v.balancing.cwiseAbs().maxCoeff() <=
                   std::max(balance_scale, 1e-12);
  v.enclosing_ok = std::abs(v.enclosing / (8.0 * kPi) - 1.0) <= 1e-6;
  v.jacobi_ok = v.min_jacobi >= -tol;
  v.all_ok = v.support_ok && v.stability_ok && v.gauss_bonnet_ok &&
             v.balancing_ok && v.enclosing_ok && v.jacobi_ok;
  return v;
}

Foliation build_foliation(const MetricEvaluator& field,
                          const std::vector<double>& schedule,
                          const Eigen::Vector3d& center,
                          const CmcOptions& opts) {
  validate_options(opts);
  if (schedule.empty())
    throw std::invalid_argument("foliation schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0) ||
        (i > 0 && !(schedule[i] > schedule[i - 1]))) {
      throw std::invalid_argument(
          "foliation schedule must be positive and strictly increasing");
    }
  }

  Foliation out;
  out.center = center;
  const CmcSolution* previous = nullptr;
  for (double target : schedule) {
    FoliationLeaf leaf;
    leaf.target_radius = target;
    try {
      CmcSolution sol =
          previous ? solve_cmc_warm(field, previous->surface,
                                    previous->mean_curvature, target, opts)
                   : solve_cmc(field, center, target, opts);
      leaf.converged = true;
      leaf.solution = std::move(sol);
      leaf.verification = verify_leaf(*leaf.solution, field, opts.tol);
    } catch (const DivergedError& e) {
      leaf.message = e.what();
    } catch (const std::domain_error& e) {
      leaf.message = e.what();
    }
    out.leaves.push_back(std::move(leaf));
    previous =
        out.leaves.back().converged ? &*out.leaves.back().solution : nullptr;
  }

  out.complete = true;
  out.ordered = true;
  out.nested = true;
  const FoliationLeaf* last = nullptr;
  for (const FoliationLeaf& leaf : out.leaves) {
    if (!leaf.converged) {
      out.complete = false;
      continue;
    }
    if (last) {
      if (leaf.solution->mean_curvature >= last->solution->mean_curvature)
        out.ordered = false;
      const Eigen::VectorXd gap = leaf.solution->surface.node_radii() -
                                  last->solution->surface.node_radii();
      if (!(gap.minCoeff() > 0.0)) out.nested = false;
    }
    last = &leaf;
  }

  std::vector<double> radii, mean_dev, inner, square_dev;
  for (const FoliationLeaf& leaf : out.leaves) {
    if (!leaf.converged) continue;
    radii.push_back(leaf.target_radius);
    mean_dev.push_back(std::abs(
        leaf.solution->mean_curvature * leaf.target_radius / 2.0 - 1.0));
    inner.push_back(leaf.verification->r0);
    square_dev.push_back(
        std::abs(leaf.verification->mean_square - 16.0 * kPi));
  }
  const std::vector<double> p1 = fit_log_decay(radii, mean_dev);
  const std::vector<double> p2 = fit_log_decay(inner, square_dev);
  if (!p1.empty() && !p2.empty()) {
    out.decay_fitted = true;
    out.mean_curvature_exponent = p1[0];
    out.mean_square_exponent = p2[0];
  }
  return out;
}

Foliation build_foliation(const MetricEvaluator& field,
                          const std::vector<double>& schedule,
                          const CmcOptions& opts) {
  // center at the mass center when there is mass to define one
  const AdmReport mass = adm_mass(field);
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  if (std::abs(mass.mass) > 1e-8) {
    center = center_of_mass(field).center;
  }
  return build_foliation(field, schedule, center, opts);
}

}  // namespace aftk
