"""Numerical toolkit for asymptotically flat 3-manifold ends.

Mass and center extraction from flux integrals, asymptotically harmonic
coordinate charts, a spectral CMC sphere solver with its verification
battery, and Gauss map diagnostics.  All numerics live in the compiled
extension; this package only re-exports it.
"""

from aftk._core import (
    AdmReport,
    BandDiagnostics,
    CmcOptions,
    CmcSolution,
    CoordinateMap,
    CurvatureSplit,
    DivergedError,
    Foliation,
    FoliationLeaf,
    GaussMapReport,
    GraphSurface,
    HarmonicBasis,
    JacobiSpectrum,
    LeafVerification,
    MetricEvaluator,
    MetricField,
    SphereFunction,
    SurfaceReport,
    TransformedMetric,
    adm_mass,
    analyze,
    build_foliation,
    build_harmonic_map,
    center_of_mass,
    coordinate_laplacian,
    default_adm_radii,
    default_source_radii,
    dyadic_band_edges,
    enclosing_flux,
    gauss_map_diagnostics,
    harmonic_residual,
    jacobi_spectrum,
    lattice_directions,
    load_coefficients,
    load_surface,
    mean_curvature_difference,
    mean_curvature_nodes,
    parse_metric_spec,
    save_coefficients,
    save_surface,
    scalar_curvature,
    solve_cmc,
    solve_cmc_warm,
    surface_geometry,
    synthesize,
    transform_metric,
    verify_leaf,
)

__all__ = [name for name in dir() if not name.startswith("_")]
