// End-to-end acceptance gate.  Each criterion prints exactly one PASS/FAIL
// line with its key numbers and wall time; the exit status is the number of
// failed criteria.  Tolerances are pinned here on purpose so a regression
// anywhere in the pipeline shows up as a flipped line, not a silent drift.

#include <aftk/adm.hpp>
#include <aftk/cmc.hpp>
#include <aftk/harmonic_coords.hpp>
#include <aftk/harmonics.hpp>
#include <aftk/metric.hpp>
#include <aftk/surface.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace aftk;

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool ok = true;
  std::string detail;
};

void note(Outcome& out, const std::string& text) {
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += text;
}

void require(Outcome& out, bool condition, const std::string& what) {
  if (!condition) {
    out.ok = false;
    note(out, "FAILED " + what);
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

GraphSurface round_sphere(double radius, int lmax) {
  auto basis = std::make_shared<HarmonicBasis>(lmax);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(basis->size());
  coef[0] = radius / kA0;
  return GraphSurface(Eigen::Vector3d::Zero(), SphereFunction(basis, coef));
}

// sup of the nonconstant modes relative to the constant one; zero for a
// perfectly round graph
double roundness_tail(const GraphSurface& s) {
  const Eigen::VectorXd& c = s.rho().coefficients();
  return c.tail(c.size() - 1).cwiseAbs().maxCoeff() / std::abs(c[0]);
}

// flat plus a fixed-seed band-limited 1/r deviation of degree 4; the
// diagonal keeps the unit part so the field stays a small perturbation
MetricField delta_plus_random(unsigned seed, double amplitude) {
  auto basis = std::make_shared<HarmonicBasis>(4);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-amplitude, amplitude);
  std::array<SphereFunction, 6> h1;
  for (int c = 0; c < 6; ++c) {
    Eigen::VectorXd coef(basis->size());
    for (int n = 0; n < basis->size(); ++n) coef[n] = uni(rng);
    if (c == 0 || c == 3 || c == 5) coef[0] += 1.0 / kA0;
    h1[c] = SphereFunction(basis, coef);
  }
  return MetricField(std::move(h1), 10.0);
}

// deterministic full-component deviation with no symmetry to lean on
MetricField generic_field() {
  auto basis = std::make_shared<HarmonicBasis>(3);
  std::array<SphereFunction, 6> h1;
  for (int c = 0; c < 6; ++c) {
    Eigen::VectorXd coef(basis->size());
    for (int n = 0; n < basis->size(); ++n)
      coef[n] = 0.1 * std::sin(1.0 + n + 2.7 * c);
    h1[c] = SphereFunction(basis, coef);
  }
  return MetricField(std::move(h1), 10.0);
}

// the schwarzschild m = 1 foliation shared by criteria 6, 7 and 8
const Foliation& unit_mass_foliation() {
  static const Foliation fol = [] {
    CmcOptions opts;
    opts.lmax = 8;
    return build_foliation(MetricField::schwarzschild(1.0),
                           {100.0, 200.0, 400.0, 800.0, 1600.0},
                           Eigen::Vector3d::Zero(), opts);
  }();
  return fol;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// 1. vacuum baseline: zero mass, exactly round CMC spheres, and the flat
//    mean-curvature energy at its round-sphere value
Outcome criterion_flat_baseline() {
  Outcome out;
  const MetricField flat = MetricField::flat();

  const AdmReport adm = adm_mass(flat);
  note(out, "mass " + num(adm.mass));
  require(out, std::abs(adm.mass) <= 1e-10, "|mass| <= 1e-10");

  CmcOptions opts;
  opts.lmax = 16;
  const CmcSolution sol = solve_cmc(flat, Eigen::Vector3d::Zero(), 20.0, opts);
  note(out, "residual " + num(sol.residual));
  require(out, sol.residual <= 1e-12, "certified residual <= 1e-12");
  require(out, sol.grid_residual <= 1e-12, "grid residual <= 1e-12");
  require(out, std::abs(sol.mean_curvature - 0.1) <= 1e-12, "H = 2/R");
  require(out, roundness_tail(sol.surface) <= 1e-12, "round graph");

  const SurfaceReport rep = surface_geometry(sol.surface, flat);
  const double energy = 2.0 * rep.willmore;
  note(out, "flat H energy rel err " + num(energy / (16.0 * kPi) - 1.0));
  require(out, std::abs(energy / (16.0 * kPi) - 1.0) <= 1e-8,
          "flat H^2 integral = 16 pi within 1e-8");
  return out;
}

// 2. mass extraction against the two closed-form fields
Outcome criterion_mass_extraction() {
  Outcome out;
  const std::vector<double> radii = {100.0,  200.0,  400.0,
                                     800.0,  1600.0, 3200.0};
  const double m_conf = adm_mass(MetricField::conformal(), radii, 16).mass;
  const double m_schw = adm_mass(MetricField::schwarzschild(1.0), radii,
                                 16).mass;
  note(out, "conformal " + num(m_conf) + ", schwarzschild " + num(m_schw));
  require(out, std::abs(m_conf - 0.5) <= 1e-3, "conformal mass 1/2");
  require(out, std::abs(m_schw - 1.0) <= 1e-3, "schwarzschild mass 1");
  return out;
}

// 3. conformal field closed forms: radial source, the -1/4 degree-1 map
//    coefficient, and the transformed deviation with its spectrum
Outcome criterion_conformal_closed_forms() {
  Outcome out;
  const MetricField conf = MetricField::conformal();
  const std::vector<double> fit_radii = {1e4, 2e4, 4e4, 8e4};

  const SourceTerm src = source_term(conf, fit_radii);
  const auto& basis = *src.components[0].basis();
  double node_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd values = synthesize(src.components[k]);
    for (int n = 0; n < basis.n_nodes(); ++n)
      node_err = std::max(node_err,
                          std::abs(values[n] - 0.5 * basis.node_unit(n)[k]));
  }
  note(out, "source node err " + num(node_err));
  require(out, node_err <= 1e-6, "source is half the unit vector");

  const CoordinateMap map = build_harmonic_map(conf, fit_radii);
  const double unit_norm = std::sqrt(4.0 * kPi / 3.0);
  const int modes[3] = {HarmonicBasis::mode_index(1, 1),
                        HarmonicBasis::mode_index(1, -1),
                        HarmonicBasis::mode_index(1, 0)};
  double coef_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double c =
        map.angular_part(k).coefficients()[modes[k]] / unit_norm;
    coef_err = std::max(coef_err, std::abs(c + 0.25));
  }
  note(out, "map coef err " + num(coef_err));
  require(out, coef_err <= 1e-8, "angular coefficient -1/4 within 1e-8");

  const TransformedMetric tm = transform_metric(map, conf);
  const auto dirs = lattice_directions();
  double dev_max = 0.0;
  for (double r : {1e2, 1e3, 1e4}) {
    for (const auto& d : dirs) {
      const Eigen::Vector3d y = r * d;
      const Eigen::Matrix3d h = tm.eval(y, 0).g - Eigen::Matrix3d::Identity();
      const Eigen::Matrix3d ref =
          1.5 / r * Eigen::Matrix3d::Identity() -
          y * y.transpose() / (2.0 * r * r * r);
      dev_max = std::max(dev_max, (h - ref).norm() * r * r);
    }
  }
  note(out, "r^2 deviation " + num(dev_max));
  require(out, dev_max <= 2.0, "r^2-scaled deviation bounded by 2");

  double eig_err = 0.0, trace_err = 0.0;
  for (const auto& d : dirs) {
    const Eigen::Matrix3d h =
        tm.eval(1e3 * d, 0).g - Eigen::Matrix3d::Identity();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(1e3 * h);
    const Eigen::Vector3d e = es.eigenvalues();
    eig_err = std::max({eig_err, std::abs(e[0] - 1.0),
                        std::abs(e[1] - 1.5), std::abs(e[2] - 1.5)});
    trace_err = std::max(trace_err, std::abs(1e3 * h.trace() - 4.0));
  }
  note(out, "eig err " + num(eig_err) + ", trace err " + num(trace_err));
  require(out, eig_err <= 1e-2, "eigenvalues {1, 3/2, 3/2} within 1e-2");
  require(out, trace_err <= 1e-2, "trace 4 within 1e-2");
  return out;
}

// 4. harmonicity gain: the mapped coordinates keep r^3 |laplacian| flat
//    across two decades while the raw coordinates grow linearly
Outcome criterion_harmonicity_gain() {
  Outcome out;
  const auto dirs = lattice_directions();
  const double radii[3] = {1e2, 1e3, 1e4};

  const auto scan = [&](const MetricField& field, const CoordinateMap& map,
                        const char* tag) {
    require(out, map.source_residual <= 1e-6,
            std::string(tag) + " source fit residual <= 1e-6");
    require(out, !map.poor_separation,
            std::string(tag) + " source scales separate");
    double ey[3], ex[3];
    for (int i = 0; i < 3; ++i) {
      const double r = radii[i];
      ey[i] = ex[i] = 0.0;
      for (const auto& d : dirs) {
        const Eigen::Vector3d x = r * d;
        ey[i] = std::max(
            ey[i], harmonic_residual(field, map, x).cwiseAbs().maxCoeff());
        ex[i] = std::max(
            ex[i], coordinate_laplacian(field, x).cwiseAbs().maxCoeff());
      }
      ey[i] *= r * r * r;
      ex[i] *= r * r * r;
    }
    note(out, std::string(tag) + " r^3|dy| " + num(ey[0]) + " " + num(ey[1]) +
                  " " + num(ey[2]));
    for (int i = 1; i < 3; ++i) {
      require(out, ey[i] <= 1.2 * ey[i - 1] + 1e-9,
              std::string(tag) + " mapped residual has no growth trend");
      const double ratio = ex[i] / ex[i - 1];
      require(out, ratio >= 8.0 && ratio <= 12.0,
              std::string(tag) + " raw residual grows linearly");
    }
    return ex[0];
  };

  const MetricField conf = MetricField::conformal();
  const double ex0 =
      scan(conf, build_harmonic_map(conf, {1e4, 2e4, 4e4, 8e4}), "conformal");
  // the conformal source level itself is closed form, so pin it too
  require(out, ex0 / 1e2 >= 0.4 && ex0 / 1e2 <= 0.6,
          "conformal r^2|dx| near 1/2");

  const MetricField rnd = delta_plus_random(7u, 0.05);
  scan(rnd, build_harmonic_map(rnd), "random");
  return out;
}

// 5. the direct curvature difference and its first-order expansion agree
//    one power of r beyond the difference itself
Outcome criterion_curvature_split() {
  Outcome out;
  const MetricField conf = MetricField::conformal();
  std::vector<double> scaled;
  for (double r : {1e2, 1e3, 1e4}) {
    const GraphSurface s = round_sphere(r, 12);
    const CurvatureSplit split = mean_curvature_difference(s, conf);
    scaled.push_back(split.residual.cwiseAbs().maxCoeff() * r * r * r);
  }
  note(out, "r^3 residual " + num(scaled[0]) + " " + num(scaled[1]) + " " +
                num(scaled[2]));
  for (double v : scaled)
    require(out, v > 0.0 && v <= 2.0, "r^3-scaled residual bounded by 2");
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  require(out, *hi <= 1.25 * *lo, "scaled residual flat across decades");
  return out;
}

// 6. stability operator spectrum: translation kernel and the 4/R^2 gap on
//    the round sphere, strict positivity on the mass foliation leaves
Outcome criterion_jacobi_spectrum() {
  Outcome out;
  const double radius = 7.0;
  const GraphSurface s = round_sphere(radius, 8);
  const JacobiSpectrum js = jacobi_spectrum(s, MetricField::flat(1.0), 5);
  const double r2 = radius * radius;
  note(out, "kernel " + num(js.eigenvalues.head(3).cwiseAbs().maxCoeff() * r2) +
                "/R^2, gap rel err " +
                num(js.eigenvalues[3] * r2 / 4.0 - 1.0));
  for (int k = 0; k < 3; ++k)
    require(out, std::abs(js.eigenvalues[k]) <= 1e-6 / r2,
            "translation eigenvalue within 1e-6/R^2 of zero");
  require(out, std::abs(js.eigenvalues[3] * r2 / 4.0 - 1.0) <= 0.01,
          "next eigenvalue 4/R^2 within 1 percent");

  double min_jacobi = std::numeric_limits<double>::infinity();
  for (const auto& leaf : unit_mass_foliation().leaves) {
    require(out, leaf.converged && leaf.verification.has_value(),
            "foliation leaf converged");
    if (leaf.verification)
      min_jacobi = std::min(min_jacobi, leaf.verification->min_jacobi);
  }
  note(out, "min leaf eigenvalue " + num(min_jacobi));
  require(out, min_jacobi > 0.0, "leaf spectrum strictly positive");
  return out;
}

// 7. the mass foliation is complete, ordered, nested, spherically symmetric
//    leaf by leaf, and the curvature defect decays like 1/R
Outcome criterion_foliation_asymptotics() {
  Outcome out;
  const Foliation& fol = unit_mass_foliation();
  require(out, fol.complete, "every scheduled leaf converged");
  require(out, fol.ordered, "mean curvature strictly decreasing");
  require(out, fol.nested, "leaves strictly nested");
  require(out, fol.decay_fitted, "decay exponents fitted");
  note(out, "H defect exponent " + num(fol.mean_curvature_exponent));
  require(out,
          fol.mean_curvature_exponent >= 0.8 &&
              fol.mean_curvature_exponent <= 1.2,
          "H defect exponent in [0.8, 1.2]");
  double tail = 0.0;
  for (const auto& leaf : fol.leaves)
    if (leaf.solution) tail = std::max(tail, roundness_tail(leaf.solution->surface));
  note(out, "symmetry tail " + num(tail));
  require(out, tail <= 1e-8, "leaves spherically symmetric within 1e-8");
  return out;
}

// 8. integral identity battery on every converged leaf
Outcome criterion_leaf_identities() {
  Outcome out;
  const Foliation& fol = unit_mass_foliation();
  const double tol = CmcOptions{}.tol;
  double worst_enclosing = 0.0, worst_gauss = 0.0, worst_balance = 0.0;
  for (const auto& leaf : fol.leaves) {
    if (!leaf.solution || !leaf.verification) {
      require(out, false, "leaf missing verification");
      continue;
    }
    const LeafVerification& v = *leaf.verification;
    worst_enclosing =
        std::max(worst_enclosing, std::abs(v.enclosing / (8.0 * kPi) - 1.0));
    worst_gauss =
        std::max(worst_gauss, std::abs(v.gauss_bonnet / (4.0 * kPi) - 1.0));
    require(out, v.stability_integral <= 8.0 * kPi + 1e-6,
            "stability integral at most 8 pi");
    const double balance_cap =
        10.0 * tol * leaf.solution->mean_curvature * v.area;
    for (int a = 0; a < 3; ++a)
      worst_balance =
          std::max(worst_balance, std::abs(v.balancing[a]) / balance_cap);
  }
  note(out, "enclosing rel " + num(worst_enclosing) + ", gauss rel " +
                num(worst_gauss) + ", balance frac " + num(worst_balance));
  require(out, worst_enclosing <= 1e-6, "enclosing flux 8 pi within 1e-6");
  require(out, worst_gauss <= 1e-6, "total curvature 4 pi within 1e-6");
  require(out, worst_balance <= 1.0, "balancing within 10 tol H area");
  note(out, "H^2 defect exponent " + num(fol.mean_square_exponent));
  require(out,
          fol.mean_square_exponent >= 0.8 && fol.mean_square_exponent <= 1.2,
          "H^2 defect exponent in [0.8, 1.2]");
  return out;
}

// 9. Gauss map diagnostics: exact zeros on the round sphere, then the
//    per-band energy envelope on a generic leaf, which is expected to be
//    largest in the end bands and smaller through the middle
Outcome criterion_gauss_map_bands() {
  Outcome out;
  const GraphSurface round = round_sphere(10.0, 8);
  const GaussMapReport flat_rep =
      gauss_map_diagnostics(round, MetricField::flat());
  note(out, "round tension " + num(flat_rep.tension_sup) + ", hopf " +
                num(flat_rep.hopf_l1));
  require(out, flat_rep.tension_sup <= 1e-10, "round sphere tension zero");
  require(out, flat_rep.hopf_l1 <= 1e-10, "round sphere hopf zero");

  const MetricField gen = generic_field();
  CmcOptions opts;
  opts.lmax = 12;
  opts.tol = 1e-3;
  const CmcSolution sol = solve_cmc(gen, Eigen::Vector3d::Zero(), 100.0, opts);
  const int n_bands = 7;
  std::vector<double> edges(n_bands + 1);
  for (int i = 0; i <= n_bands; ++i)
    edges[i] = sol.surface.r0() *
               std::pow(sol.surface.r1() / sol.surface.r0(),
                        double(i) / n_bands);
  const GaussMapReport rep =
      gauss_map_diagnostics(sol.surface, gen, std::move(edges));
  std::vector<double> energy;
  std::string profile;
  for (const auto& band : rep.bands)
    if (!band.skipped) {
      energy.push_back(band.dirichlet_energy);
      profile += (profile.empty() ? "" : " ") + num(band.dirichlet_energy);
    }
  note(out, "band energies [" + profile + "]");
  require(out, energy.size() >= 3, "at least three populated bands");
  if (energy.size() >= 3) {
    const double interior_max =
        *std::max_element(energy.begin() + 1, energy.end() - 1);
    require(out, energy.front() >= interior_max,
            "innermost band energy maximal");
    require(out, energy.back() >= interior_max,
            "outermost band energy maximal");
  }
  return out;
}

// 10. byte-identical file round trips and bitwise-identical repeated solves
Outcome criterion_determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "aftk_acceptance";
  fs::create_directories(dir);

  auto basis = std::make_shared<HarmonicBasis>(4);
  Eigen::VectorXd coef(basis->size());
  for (int n = 0; n < basis->size(); ++n) coef[n] = std::sin(1.0 + 0.7 * n);
  const SphereFunction f(basis, coef);
  save_coefficients(f, (dir / "c1.coef").string());
  const SphereFunction g = load_coefficients((dir / "c1.coef").string());
  save_coefficients(g, (dir / "c2.coef").string());
  require(out, slurp(dir / "c1.coef") == slurp(dir / "c2.coef"),
          "coefficient file round trip byte-identical");

  const MetricField field = MetricField::schwarzschild(1.0);
  CmcOptions opts;
  opts.lmax = 8;
  const CmcSolution a = solve_cmc(field, Eigen::Vector3d::Zero(), 100.0, opts);
  const CmcSolution b = solve_cmc(field, Eigen::Vector3d::Zero(), 100.0, opts);
  const double coef_gap = (a.surface.rho().coefficients() -
                           b.surface.rho().coefficients())
                              .cwiseAbs()
                              .maxCoeff();
  require(out, coef_gap == 0.0, "repeated solves bitwise identical");
  require(out, a.mean_curvature == b.mean_curvature,
          "repeated curvature bitwise identical");

  save_surface(a.surface, (dir / "s1.surf").string());
  save_surface(b.surface, (dir / "s2.surf").string());
  require(out, slurp(dir / "s1.surf") == slurp(dir / "s2.surf"),
          "surfaces from repeated solves byte-identical");
  const GraphSurface loaded = load_surface((dir / "s1.surf").string());
  save_surface(loaded, (dir / "s3.surf").string());
  require(out, slurp(dir / "s1.surf") == slurp(dir / "s3.surf"),
          "surface file round trip byte-identical");
  note(out, "coef gap " + num(coef_gap));
  return out;
}

struct Criterion {
  int id;
  const char* label;
  double time_limit;  // seconds; zero means no pinned budget
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "flat baseline", 5.0, criterion_flat_baseline},
      {2, "mass extraction", 10.0, criterion_mass_extraction},
      {3, "conformal closed forms", 30.0, criterion_conformal_closed_forms},
      {4, "harmonicity gain", 0.0, criterion_harmonicity_gain},
      {5, "curvature split", 0.0, criterion_curvature_split},
      {6, "jacobi spectrum", 0.0, criterion_jacobi_spectrum},
      {7, "foliation asymptotics", 120.0, criterion_foliation_asymptotics},
      {8, "leaf identities", 0.0, criterion_leaf_identities},
      {9, "gauss map bands", 0.0, criterion_gauss_map_bands},
      {10, "determinism", 0.0, criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      note(out, std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.time_limit > 0.0 && elapsed > c.time_limit)
      require(out, false,
              "runtime " + num(elapsed) + " s over " + num(c.time_limit) +
                  " s budget");
    if (!out.ok) ++failures;
    std::printf("criterion %02d %s  %s (%.1f s)%s%s\n", c.id,
                out.ok ? "PASS" : "FAIL", c.label, elapsed,
                out.detail.empty() ? "" : ": ", out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
