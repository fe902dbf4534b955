"""Peano approximants, canonical phase-space maps, the Hermite-function basis
and discrete-phase-space Klein-Gordon fields."""

__version__ = "0.1.0"

from .discrete_ops import LatticeField, LatticeRangeError, LatticeSequence, delta_sharp, delta_sharp_axis, laplacian_sharp
from .hermite import XiBatch, completeness_errors, completeness_kernel, orthonormality_matrix, xi, xi_batch
from .kg_field import (
    DegenerateModeError,
    FieldLattice,
    Observables,
    QuadConfig,
    SpectralDensity,
    commutator_kernel_check,
    kg_residual_field,
    kg_residual_mode,
    mode_field,
    observables,
    omega,
    synthesize,
)
from .peano import CoverageReport, PeanoApproximant, build_approximant, coverage, evaluate, limit_point, sup_distance
from .phase_maps import (
    AnnulusRegion,
    DomainError,
    HyperTorus,
    PeanoCircle,
    ProductBundleSample,
    RectRegionDM,
    RectRegionDMn,
    areas,
    bundle_sample,
    composite_map,
    g_Mn,
    h_M,
    h_Mn,
    hyper_torus,
    peano_circle,
    winding_number,
)
from .quadrature import QuadratureRule, gauss_hermite, gauss_legendre, integrate_nd
