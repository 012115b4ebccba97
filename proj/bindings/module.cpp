// python bindings for the core operations; thin registration only, all
// numerics live in the library

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include <aftk/adm.hpp>
#include <aftk/cmc.hpp>
#include <aftk/harmonic_coords.hpp>
#include <aftk/harmonics.hpp>
#include <aftk/metric.hpp>
#include <aftk/surface.hpp>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace aftk;

PYBIND11_MODULE(_core, m) {
  m.doc() = "numerical toolkit for asymptotically flat 3-manifold ends";

  py::register_exception<DivergedError>(m, "DivergedError");

  py::class_<HarmonicBasis, std::shared_ptr<HarmonicBasis>>(m, "HarmonicBasis")
      .def(py::init<int>(), "lmax"_a)
      .def_property_readonly("lmax", &HarmonicBasis::lmax)
      .def_property_readonly("size", &HarmonicBasis::size)
      .def_property_readonly("n_nodes", &HarmonicBasis::n_nodes)
      .def("node_unit", &HarmonicBasis::node_unit, "node"_a)
      .def("node_theta", &HarmonicBasis::node_theta, "node"_a)
      .def("node_phi", &HarmonicBasis::node_phi, "node"_a)
      .def("weights", &HarmonicBasis::weights)
      .def("mode_l", &HarmonicBasis::mode_l, "n"_a)
      .def("mode_m", &HarmonicBasis::mode_m, "n"_a)
      .def_static("mode_index", &HarmonicBasis::mode_index, "l"_a, "m"_a);

  py::class_<SphereFunction>(m, "SphereFunction")
      .def(py::init<std::shared_ptr<const HarmonicBasis>, Eigen::VectorXd>(),
           "basis"_a, "coefficients"_a)
      .def_property_readonly(
          "coefficients",
          [](const SphereFunction& f) -> Eigen::VectorXd {
            return f.coefficients();
          })
      .def_property_readonly("mean", &SphereFunction::mean)
      .def("norm", &SphereFunction::norm)
      .def("sobolev_norm", &SphereFunction::sobolev_norm, "m"_a)
      .def("eval", &SphereFunction::eval, "u"_a);

  m.def("analyze", &analyze, "basis"_a, "node_values"_a);
  m.def("synthesize", &synthesize, "f"_a);
  m.def("save_coefficients", &save_coefficients, "f"_a, "path"_a);
  m.def(
      "load_coefficients",
      [](const std::string& path) { return load_coefficients(path); },
      "path"_a);

  py::class_<MetricEvaluator>(m, "MetricEvaluator")
      .def("metric",
           [](const MetricEvaluator& f, const Eigen::Vector3d& x) {
             return f.eval(x, 0).g;
           },
           "x"_a)
      .def("inner_radius", &MetricEvaluator::inner_radius);

  py::class_<MetricField, MetricEvaluator>(m, "MetricField")
      .def_static("flat", &MetricField::flat, "inner_radius"_a = 10.0)
      .def_static("conformal", &MetricField::conformal,
                  "inner_radius"_a = 10.0)
      .def_static("schwarzschild", &MetricField::schwarzschild, "mass"_a,
                  "center"_a = Eigen::Vector3d::Zero(), "inner_radius"_a = 10.0)
      .def("save", &MetricField::save, "path"_a)
      .def_static("load", &MetricField::load, "path"_a);

  m.def("parse_metric_spec", &parse_metric_spec, "spec"_a);
  m.def("scalar_curvature",
        py::overload_cast<const MetricEvaluator&, const Eigen::Vector3d&>(
            &scalar_curvature),
        "field"_a, "x"_a);
  m.def("coordinate_laplacian", &coordinate_laplacian, "field"_a, "x"_a);

  py::class_<AdmReport>(m, "AdmReport")
      .def_readonly("mass", &AdmReport::mass)
      .def_readonly("center", &AdmReport::center)
      .def_readonly("has_center", &AdmReport::has_center)
      .def_readonly("radii", &AdmReport::radii)
      .def_readonly("mass_at_radius", &AdmReport::mass_at_radius)
      .def_readonly("center_at_radius", &AdmReport::center_at_radius)
      .def_readonly("mass_residual", &AdmReport::mass_residual)
      .def_readonly("center_residual", &AdmReport::center_residual)
      .def_readonly("cauchy", &AdmReport::cauchy);

  m.def("adm_mass", &adm_mass, "field"_a, "radii"_a = std::vector<double>{},
        "lmax"_a = 16);
  m.def("center_of_mass", &center_of_mass, "field"_a,
        "radii"_a = std::vector<double>{}, "lmax"_a = 16);
  m.def("default_adm_radii", &default_adm_radii);

  py::class_<CoordinateMap>(m, "CoordinateMap")
      .def_property_readonly("lambda0", &CoordinateMap::lambda0)
      .def("angular_part", &CoordinateMap::angular_part, "k"_a)
      .def_property_readonly("invertibility_radius",
                             &CoordinateMap::invertibility_radius)
      .def("forward", &CoordinateMap::forward, "x"_a)
      .def("jacobian", &CoordinateMap::jacobian, "x"_a)
      .def("inverse", &CoordinateMap::inverse, "y"_a)
      .def_readonly("source_residual", &CoordinateMap::source_residual)
      .def_readonly("poor_separation", &CoordinateMap::poor_separation);

  m.def("build_harmonic_map", &build_harmonic_map, "field"_a,
        "r_samples"_a = std::vector<double>{});
  m.def("harmonic_residual", &harmonic_residual, "field"_a, "map"_a, "x"_a);
  m.def("default_source_radii", &default_source_radii);
  m.def("lattice_directions", &lattice_directions);

  py::class_<TransformedMetric, MetricEvaluator>(m, "TransformedMetric")
      .def("base_point", &TransformedMetric::base_point, "y"_a);
  m.def("transform_metric", &transform_metric, "map"_a, "field"_a);

  py::class_<GraphSurface>(m, "GraphSurface")
      .def(py::init<const Eigen::Vector3d&, SphereFunction>(), "center"_a,
           "rho"_a)
      .def_property_readonly("center", &GraphSurface::center)
      .def_property_readonly("rho", &GraphSurface::rho)
      .def_property_readonly("r0", &GraphSurface::r0)
      .def_property_readonly("r1", &GraphSurface::r1)
      .def("node_radii", &GraphSurface::node_radii);

  m.def("save_surface", &save_surface, "surface"_a, "path"_a);
  m.def(
      "load_surface",
      [](const std::string& path) { return load_surface(path); }, "path"_a);

  py::class_<SurfaceReport>(m, "SurfaceReport")
      .def_readonly("mean_g", &SurfaceReport::mean_g)
      .def_readonly("mean_e", &SurfaceReport::mean_e)
      .def_readonly("area_g", &SurfaceReport::area_g)
      .def_readonly("radius", &SurfaceReport::radius)
      .def_readonly("area", &SurfaceReport::area)
      .def_readonly("area_euclidean", &SurfaceReport::area_euclidean)
      .def_readonly("willmore", &SurfaceReport::willmore)
      .def_readonly("diameter_chord", &SurfaceReport::diameter_chord)
      .def_readonly("diameter_upper", &SurfaceReport::diameter_upper)
      .def_readonly("r0", &SurfaceReport::r0)
      .def_readonly("r1", &SurfaceReport::r1)
      .def("integrate_g", &SurfaceReport::integrate_g, "f"_a)
      .def("integrate_e", &SurfaceReport::integrate_e, "f"_a);

  m.def("surface_geometry", &surface_geometry, "surface"_a, "field"_a);
  m.def("mean_curvature_nodes", &mean_curvature_nodes, "surface"_a, "field"_a);
  m.def("enclosing_flux", &enclosing_flux, "report"_a);

  py::class_<CurvatureSplit>(m, "CurvatureSplit")
      .def_readonly("direct", &CurvatureSplit::direct)
      .def_readonly("expansion", &CurvatureSplit::expansion)
      .def_readonly("residual", &CurvatureSplit::residual);
  m.def("mean_curvature_difference", &mean_curvature_difference, "surface"_a,
        "field"_a);

  py::class_<BandDiagnostics>(m, "BandDiagnostics")
      .def_readonly("r_lo", &BandDiagnostics::r_lo)
      .def_readonly("r_hi", &BandDiagnostics::r_hi)
      .def_readonly("node_count", &BandDiagnostics::node_count)
      .def_readonly("dirichlet_energy", &BandDiagnostics::dirichlet_energy)
      .def_readonly("tension_sup", &BandDiagnostics::tension_sup)
      .def_readonly("hopf_l1", &BandDiagnostics::hopf_l1)
      .def_readonly("skipped", &BandDiagnostics::skipped);

  py::class_<GaussMapReport>(m, "GaussMapReport")
      .def_readonly("bands", &GaussMapReport::bands)
      .def_readonly("dirichlet_energy", &GaussMapReport::dirichlet_energy)
      .def_readonly("tension_sup", &GaussMapReport::tension_sup)
      .def_readonly("hopf_l1", &GaussMapReport::hopf_l1);

  m.def("gauss_map_diagnostics", &gauss_map_diagnostics, "surface"_a,
        "field"_a, "band_edges"_a = std::vector<double>{});
  m.def("dyadic_band_edges", &dyadic_band_edges, "r_lo"_a, "r_hi"_a,
        "efolds"_a = 1.0);

  py::class_<JacobiSpectrum>(m, "JacobiSpectrum")
      .def_readonly("eigenvalues", &JacobiSpectrum::eigenvalues)
      .def_readonly("stability_integral", &JacobiSpectrum::stability_integral);
  m.def("jacobi_spectrum", &jacobi_spectrum, "surface"_a, "field"_a,
        "n_eigs"_a);

  py::class_<CmcOptions>(m, "CmcOptions")
      .def(py::init<>())
      .def_readwrite("lmax", &CmcOptions::lmax)
      .def_readwrite("tol", &CmcOptions::tol)
      .def_readwrite("max_iterations", &CmcOptions::max_iterations)
      .def_readwrite("fd_step_scale", &CmcOptions::fd_step_scale);

  py::class_<CmcSolution>(m, "CmcSolution")
      .def_readonly("surface", &CmcSolution::surface)
      .def_readonly("mean_curvature", &CmcSolution::mean_curvature)
      .def_readonly("residual", &CmcSolution::residual)
      .def_readonly("grid_residual", &CmcSolution::grid_residual)
      .def_readonly("iterations", &CmcSolution::iterations)
      .def_readonly("null_directions", &CmcSolution::null_directions);

  py::class_<LeafVerification>(m, "LeafVerification")
      .def_readonly("support_flux", &LeafVerification::support_flux)
      .def_readonly("support_bound", &LeafVerification::support_bound)
      .def_readonly("radial_ratio_a2", &LeafVerification::radial_ratio_a2)
      .def_readonly("radial_ratio_a3", &LeafVerification::radial_ratio_a3)
      .def_readonly("mean_square", &LeafVerification::mean_square)
      .def_readonly("traceless_square", &LeafVerification::traceless_square)
      .def_readonly("stability_integral",
                    &LeafVerification::stability_integral)
      .def_readonly("gauss_bonnet", &LeafVerification::gauss_bonnet)
      .def_readonly("balancing", &LeafVerification::balancing)
      .def_readonly("enclosing", &LeafVerification::enclosing)
      .def_readonly("min_jacobi", &LeafVerification::min_jacobi)
      .def_readonly("willmore", &LeafVerification::willmore)
      .def_readonly("area", &LeafVerification::area)
      .def_readonly("r0", &LeafVerification::r0)
      .def_readonly("r1", &LeafVerification::r1)
      .def_readonly("support_ok", &LeafVerification::support_ok)
      .def_readonly("stability_ok", &LeafVerification::stability_ok)
      .def_readonly("gauss_bonnet_ok", &LeafVerification::gauss_bonnet_ok)
      .def_readonly("balancing_ok", &LeafVerification::balancing_ok)
      .def_readonly("enclosing_ok", &LeafVerification::enclosing_ok)
      .def_readonly("jacobi_ok", &LeafVerification::jacobi_ok)
      .def_readonly("all_ok", &LeafVerification::all_ok);

  py::class_<FoliationLeaf>(m, "FoliationLeaf")
      .def_readonly("target_radius", &FoliationLeaf::target_radius)
      .def_readonly("converged", &FoliationLeaf::converged)
      .def_readonly("message", &FoliationLeaf::message)
      .def_readonly("solution", &FoliationLeaf::solution)
      .def_readonly("verification", &FoliationLeaf::verification);

  py::class_<Foliation>(m, "Foliation")
      .def_readonly("center", &Foliation::center)
      .def_readonly("leaves", &Foliation::leaves)
      .def_readonly("complete", &Foliation::complete)
      .def_readonly("ordered", &Foliation::ordered)
      .def_readonly("nested", &Foliation::nested)
      .def_readonly("decay_fitted", &Foliation::decay_fitted)
      .def_readonly("mean_curvature_exponent",
                    &Foliation::mean_curvature_exponent)
      .def_readonly("mean_square_exponent", &Foliation::mean_square_exponent);

  m.def("solve_cmc", &solve_cmc, "field"_a, "center"_a, "target_radius"_a,
        "options"_a = CmcOptions{});
  m.def("solve_cmc_warm", &solve_cmc_warm, "field"_a, "initial"_a,
        "initial_mean_curvature"_a, "target_radius"_a,
        "options"_a = CmcOptions{});
  m.def("verify_leaf", &verify_leaf, "solution"_a, "field"_a, "tol"_a = 1e-10);
  m.def(
      "build_foliation",
      [](const MetricEvaluator& field, const std::vector<double>& schedule,
         const std::optional<Eigen::Vector3d>& center,
         const CmcOptions& options) {
        return center ? build_foliation(field, schedule, *center, options)
                      : build_foliation(field, schedule, options);
      },
      "field"_a, "schedule"_a, "center"_a = std::nullopt,
      "options"_a = CmcOptions{});
}
