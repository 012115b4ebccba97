// command line front end: flux integrals, harmonic gauge, constant mean
// curvature leaves, foliations and surface diagnostics.  Summaries go to
// standard output as "key = value" lines; tables are CSV with a header row,
// written into --out when given and appended to standard output otherwise.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "aftk/adm.hpp"
#include "aftk/cmc.hpp"
#include "aftk/harmonic_coords.hpp"
#include "aftk/metric.hpp"
#include "aftk/surface.hpp"

namespace {

using aftk::detail::format_double;

const char* kAxis[3] = {"x", "y", "z"};

void kv(const std::string& key, const std::string& value) {
  std::cout << key << " = " << value << "\n";
}
void kv(const std::string& key, double value) { kv(key, format_double(value)); }
void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
void kv(const std::string& key, bool value) {
  kv(key, std::string(value ? "true" : "false"));
}
void kv3(const std::string& key, const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) kv(key + "_" + kAxis[i], v[i]);
}

// csv rows built from pre-formatted cells so every number goes through the
// same fixed-width formatting
void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    os << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void emit_table(const std::string& out_dir, const std::string& name,
                const std::function<void(std::ostream&)>& fill) {
  if (out_dir.empty()) {
    std::cout << "\ntable " << name << "\n";
    fill(std::cout);
    return;
  }
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / (name + ".csv");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  fill(os);
  kv("wrote_" + name, path.string());
}

std::string artifact_path(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / name).string();
}

Eigen::Vector3d parse_center(const std::string& text) {
  Eigen::Vector3d c;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &c[0], &c[1], &c[2], &tail) !=
      3)
    throw CLI::ValidationError("--center", "expected three numbers x,y,z");
  return c;
}

// shared flag bundle; each subcommand registers the subset it uses
struct Args {
  std::string metric;
  std::string surface;
  std::string center;
  std::string out;
  std::vector<double> radii;
  double radius = 0.0;
  double tol = 1e-10;
  int lmax = 8;
};

void add_metric(CLI::App* cmd, Args& a) {
  cmd->add_option("--metric", a.metric,
                  "metric spec: builtin:flat, builtin:conformal, "
                  "builtin:schwarzschild,m=..[,cx=..,cy=..,cz=..][,rin=..], "
                  "or a metric file path")
      ->required();
}
void add_surface(CLI::App* cmd, Args& a) {
  cmd->add_option("--surface", a.surface, "surface file to load")->required();
}
void add_out(CLI::App* cmd, Args& a) {
  cmd->add_option("--out", a.out, "directory for emitted artifacts");
}
CLI::Option* add_center(CLI::App* cmd, Args& a) {
  return cmd->add_option("--center", a.center, "leaf center as x,y,z");
}
void add_tol(CLI::App* cmd, Args& a) {
  cmd->add_option("--tol", a.tol, "relative tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}
void add_lmax(CLI::App* cmd, Args& a, int def) {
  a.lmax = def;
  cmd->add_option("--lmax", a.lmax, "angular resolution (max degree)")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
}
CLI::Option* add_radii(CLI::App* cmd, Args& a, const char* help) {
  return cmd->add_option("--radii", a.radii, help)
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
}

void run_mass(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::AdmReport rep = aftk::adm_mass(field, a.radii, a.lmax);
  kv("mass", rep.mass);
  kv("mass_residual", rep.mass_residual);
  kv("cauchy", rep.cauchy);
  emit_table(a.out, "mass_flux", [&](std::ostream& os) {
    csv_row(os, {"radius", "mass_estimate"});
    for (size_t i = 0; i < rep.radii.size(); ++i)
      csv_row(os, {format_double(rep.radii[i]),
                   format_double(rep.mass_at_radius[i])});
  });
}

void run_com(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::AdmReport rep = aftk::center_of_mass(field, a.radii, a.lmax);
  kv3("center", rep.center);
  kv("center_residual", rep.center_residual);
  kv("has_center", rep.has_center);
  kv("cauchy", rep.cauchy);
  emit_table(a.out, "center_flux", [&](std::ostream& os) {
    csv_row(os, {"radius", "center_x", "center_y", "center_z"});
    for (size_t i = 0; i < rep.radii.size(); ++i)
      csv_row(os, {format_double(rep.radii[i]),
                   format_double(rep.center_at_radius[i][0]),
                   format_double(rep.center_at_radius[i][1]),
                   format_double(rep.center_at_radius[i][2])});
  });
}

void run_harmonize(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::CoordinateMap map = aftk::build_harmonic_map(field, a.radii);
  kv3("lambda0", map.lambda0());
  kv("invertibility_radius", map.invertibility_radius());
  kv("source_residual", map.source_residual);
  kv("poor_separation", map.poor_separation);

  // coefficient of the i-th unit vector in the degree-one part of the k-th
  // angular correction; the natural check value for conformal-type fields
  const double unit = std::sqrt(4.0 * M_PI / 3.0);
  const int modes[3] = {aftk::HarmonicBasis::mode_index(1, 1),
                        aftk::HarmonicBasis::mode_index(1, -1),
                        aftk::HarmonicBasis::mode_index(1, 0)};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      kv(std::string("angular_linear_") + kAxis[k] + "_" + kAxis[i],
         map.angular_part(k).coefficients()[modes[i]] / unit);

  if (!a.out.empty())
    for (int k = 0; k < 3; ++k) {
      const std::string path = artifact_path(
          a.out, std::string("angular_") + kAxis[k] + ".coef");
      aftk::save_coefficients(map.angular_part(k), path);
      kv(std::string("wrote_angular_") + kAxis[k], path);
    }
}

void run_geometry(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::GraphSurface s = aftk::load_surface(a.surface);
  const aftk::SurfaceReport rep = surface_geometry(s, field);
  kv("nodes", rep.basis->n_nodes());
  kv("area", rep.area);
  kv("area_euclidean", rep.area_euclidean);
  kv("willmore", rep.willmore);
  kv("r0", rep.r0);
  kv("r1", rep.r1);
  kv("diameter_chord", rep.diameter_chord);
  kv("diameter_upper", rep.diameter_upper);
  kv("mean_curvature_min", rep.mean_g.minCoeff());
  kv("mean_curvature_max", rep.mean_g.maxCoeff());
  emit_table(a.out, "geometry_nodes", [&](std::ostream& os) {
    csv_row(os, {"theta", "phi", "radius", "mean_g", "mean_e", "gauss_e",
                 "area_g", "area_e", "traceless_norm2_g"});
    for (int n = 0; n < rep.basis->n_nodes(); ++n)
      csv_row(os, {format_double(rep.basis->node_theta(n)),
                   format_double(rep.basis->node_phi(n)),
                   format_double(rep.radius[n]), format_double(rep.mean_g[n]),
                   format_double(rep.mean_e[n]), format_double(rep.gauss_e[n]),
                   format_double(rep.area_g[n]), format_double(rep.area_e[n]),
                   format_double(rep.traceless_norm2_g[n])});
  });
}

void print_solution(const aftk::CmcSolution& sol, double target) {
  kv("target_radius", target);
  kv("mean_curvature", sol.mean_curvature);
  kv("iterations", sol.iterations);
  kv("grid_residual", sol.grid_residual);
  kv("certified_residual", sol.residual);
  kv("null_directions", sol.null_directions);
  kv("r0", sol.surface.r0());
  kv("r1", sol.surface.r1());
  const Eigen::VectorXd vals = synthesize(sol.surface.rho());
  kv("sup_deviation", (vals.array() - target).abs().maxCoeff());
}

void run_solve_cmc(const Args& a, bool has_center) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  aftk::CmcOptions opts;
  opts.lmax = a.lmax;
  opts.tol = a.tol;
  const Eigen::Vector3d center =
      has_center ? parse_center(a.center) : Eigen::Vector3d::Zero();
  const aftk::CmcSolution sol = solve_cmc(field, center, a.radius, opts);
  kv3("center", center);
  print_solution(sol, a.radius);
  if (!a.out.empty()) {
    const std::string path = artifact_path(a.out, "leaf.surf");
    aftk::save_surface(sol.surface, path);
    kv("wrote_leaf", path);
  }
}

void run_foliate(const Args& a, bool has_center) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  aftk::CmcOptions opts;
  opts.lmax = a.lmax;
  opts.tol = a.tol;
  const aftk::Foliation fol =
      has_center
          ? build_foliation(field, a.radii, parse_center(a.center), opts)
          : build_foliation(field, a.radii, opts);
  kv3("center", fol.center);
  kv("complete", fol.complete);
  kv("ordered", fol.ordered);
  kv("nested", fol.nested);
  kv("decay_fitted", fol.decay_fitted);
  if (fol.decay_fitted) {
    kv("mean_curvature_exponent", fol.mean_curvature_exponent);
    kv("mean_square_exponent", fol.mean_square_exponent);
  }
  for (size_t k = 0; k < fol.leaves.size(); ++k)
    if (!fol.leaves[k].converged)
      kv("leaf" + std::to_string(k) + "_message", fol.leaves[k].message);

  emit_table(a.out, "foliation", [&](std::ostream& os) {
    csv_row(os, {"radius", "converged", "mean_curvature", "iterations",
                 "grid_residual", "certified_residual", "min_jacobi",
                 "all_ok"});
    for (const auto& leaf : fol.leaves) {
      if (!leaf.converged) {
        csv_row(os, {format_double(leaf.target_radius), "0", "nan", "0", "nan",
                     "nan", "nan", "0"});
        continue;
      }
      csv_row(os, {format_double(leaf.target_radius), "1",
                   format_double(leaf.solution->mean_curvature),
                   std::to_string(leaf.solution->iterations),
                   format_double(leaf.solution->grid_residual),
                   format_double(leaf.solution->residual),
                   format_double(leaf.verification->min_jacobi),
                   leaf.verification->all_ok ? "1" : "0"});
    }
  });
  if (!a.out.empty())
    for (size_t k = 0; k < fol.leaves.size(); ++k)
      if (fol.leaves[k].converged) {
        const std::string path =
            artifact_path(a.out, "leaf_" + std::to_string(k) + ".surf");
        aftk::save_surface(fol.leaves[k].solution->surface, path);
        kv("wrote_leaf" + std::to_string(k), path);
      }
}

void print_verification(const aftk::LeafVerification& v) {
  kv("support_flux", v.support_flux);
  kv("support_bound", v.support_bound);
  kv("radial_ratio_a2", v.radial_ratio_a2);
  kv("radial_ratio_a3", v.radial_ratio_a3);
  kv("mean_square", v.mean_square);
  kv("traceless_square", v.traceless_square);
  kv("stability_integral", v.stability_integral);
  kv("gauss_bonnet", v.gauss_bonnet);
  kv3("balancing", v.balancing);
  kv("enclosing", v.enclosing);
  kv("min_jacobi", v.min_jacobi);
  kv("willmore", v.willmore);
  kv("area", v.area);
  kv("support_ok", v.support_ok);
  kv("stability_ok", v.stability_ok);
  kv("gauss_bonnet_ok", v.gauss_bonnet_ok);
  kv("balancing_ok", v.balancing_ok);
  kv("enclosing_ok", v.enclosing_ok);
  kv("jacobi_ok", v.jacobi_ok);
  kv("all_ok", v.all_ok);
}

void run_verify(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::GraphSurface s = aftk::load_surface(a.surface);
  const aftk::SurfaceReport rep = surface_geometry(s, field);
  // treat the area-weighted mean as the constant the surface claims to hold
  const double mean = rep.integrate_g(rep.mean_g) / rep.area;
  const double sup =
      (rep.mean_g.array() - mean).abs().maxCoeff();
  aftk::CmcSolution sol{s, mean, sup, sup, 0, 0};
  kv("mean_curvature", mean);
  kv("grid_residual", sup);
  print_verification(verify_leaf(sol, field, a.tol));
}

void run_diagnose_gauss(const Args& a) {
  const aftk::MetricField field = aftk::parse_metric_spec(a.metric);
  const aftk::GraphSurface s = aftk::load_surface(a.surface);
  const aftk::GaussMapReport rep =
      aftk::gauss_map_diagnostics(s, field, a.radii);
  kv("dirichlet_energy", rep.dirichlet_energy);
  kv("tension_sup", rep.tension_sup);
  kv("hopf_l1", rep.hopf_l1);
  kv("bands", int(rep.bands.size()));
  emit_table(a.out, "gauss_bands", [&](std::ostream& os) {
    csv_row(os, {"r_lo", "r_hi", "node_count", "dirichlet_energy",
                 "tension_sup", "hopf_l1", "skipped"});
    for (const auto& b : rep.bands)
      csv_row(os, {format_double(b.r_lo), format_double(b.r_hi),
                   std::to_string(b.node_count),
                   format_double(b.dirichlet_energy),
                   format_double(b.tension_sup), format_double(b.hopf_l1),
                   b.skipped ? "1" : "0"});
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "asymptotically flat toolkit: mass and center fluxes, harmonic "
      "gauge, constant mean curvature leaves and foliations.\n"
      "Summaries print as 'key = value'; tables are CSV written to --out "
      "or appended to standard output."};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI config file; command-line flags take precedence over "
                 "file values, file values over built-in defaults");

  Args mass_a, com_a, harm_a, geom_a, solve_a, fol_a, ver_a, gauss_a;

  CLI::App* mass = app.add_subcommand("mass", "ADM mass flux integral");
  add_metric(mass, mass_a);
  add_radii(mass, mass_a, "sample radii for the inverse-radius fit");
  add_lmax(mass, mass_a, 16);
  add_out(mass, mass_a);
  mass->callback([&] { run_mass(mass_a); });

  CLI::App* com = app.add_subcommand("com", "center of mass flux integral");
  add_metric(com, com_a);
  add_radii(com, com_a, "sample radii for the inverse-radius fit");
  add_lmax(com, com_a, 16);
  add_out(com, com_a);
  com->callback([&] { run_com(com_a); });

  CLI::App* harm = app.add_subcommand(
      "harmonize", "build asymptotically harmonic coordinates");
  add_metric(harm, harm_a);
  add_radii(harm, harm_a, "sample radii for the source separation fit");
  add_out(harm, harm_a);
  harm->callback([&] { run_harmonize(harm_a); });

  CLI::App* geom = app.add_subcommand(
      "geometry", "node geometry report for a surface in a metric");
  add_metric(geom, geom_a);
  add_surface(geom, geom_a);
  add_out(geom, geom_a);
  geom->callback([&] { run_geometry(geom_a); });

  CLI::App* solve = app.add_subcommand(
      "solve-cmc", "solve one constant mean curvature leaf");
  add_metric(solve, solve_a);
  solve->add_option("--radius", solve_a.radius, "target mean coordinate radius")
      ->check(CLI::PositiveNumber)
      ->required();
  CLI::Option* solve_center = add_center(solve, solve_a);
  add_lmax(solve, solve_a, 8);
  add_tol(solve, solve_a);
  add_out(solve, solve_a);
  solve->callback([&] { run_solve_cmc(solve_a, solve_center->count() > 0); });

  CLI::App* fol = app.add_subcommand(
      "foliate", "solve a radius schedule of leaves and fit decay exponents");
  add_metric(fol, fol_a);
  add_radii(fol, fol_a, "increasing schedule of target radii")->required();
  CLI::Option* fol_center = add_center(fol, fol_a);
  fol->get_option("--center")->description(
      "leaf center as x,y,z; defaults to the recovered center of mass");
  add_lmax(fol, fol_a, 8);
  add_tol(fol, fol_a);
  add_out(fol, fol_a);
  fol->callback([&] { run_foliate(fol_a, fol_center->count() > 0); });

  CLI::App* ver = app.add_subcommand(
      "verify", "identity battery on a surface file (reported, not asserted)");
  add_metric(ver, ver_a);
  add_surface(ver, ver_a);
  add_tol(ver, ver_a);
  ver->callback([&] { run_verify(ver_a); });

  CLI::App* gauss = app.add_subcommand(
      "diagnose-gauss", "flat Gauss map diagnostics over radius bands");
  add_metric(gauss, gauss_a);
  add_surface(gauss, gauss_a);
  add_radii(gauss, gauss_a, "band edges; defaults to dyadic bands");
  add_out(gauss, gauss_a);
  gauss->callback([&] { run_diagnose_gauss(gauss_a); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
