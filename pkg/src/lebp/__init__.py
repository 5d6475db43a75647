"""Nonintersecting loop-erased paths and their determinantal statistics.

Subpackages cover the discrete side (walk matrices on weighted networks and
their Fomin determinants), the continuum side (Poisson kernels of a rectangle,
first-passage densities for families of paths, determinantal correlation
kernels in a strip and a half-disk), and a lattice-refinement bridge between
the two.
"""

from .errors import (
    DomainError,
    EnumerationBudgetError,
    PrecisionError,
    TruncationError,
)
from .correlation import (
    basis_phi,
    basis_phi_hat,
    coincident_limit_value,
    corr_strip,
    density_semicircle,
    joint_pdf_special_start,
    joint_pdf_special_start_dets,
    kernel_semicircle,
    kernel_semicircle_equal_radius,
    kernel_strip,
    kernel_strip_dual,
    limit_kernel,
    pdf_special_start,
    schur_limit_factor,
    two_point_semicircle,
)
from .graph_fomin import (
    BoundaryTuple,
    Network,
    brute_force_fomin,
    fomin_det,
    lerw_weight,
    load_network,
    loop_erase,
    save_network,
    square_grid_network,
    walk_green,
    walk_weight,
)
from .lattice_validation import (
    LatticeStrip,
    boundary_refinement,
    density_refinement,
    discrete_first_passage_density,
    discrete_green,
    exit_right,
    first_passage_decomposition,
    ordered_minor_sum,
)
from .numerics import (
    DEFAULT_POLICY,
    QuadratureRule,
    SeriesPolicy,
    TailBoundedValue,
    chamber_integrate,
    det_lu,
    gauss_legendre,
    sinh_ratio,
)
from .passage_densities import (
    ChamberSequence,
    joint_pdf,
    norm_boundary,
    norm_inner,
    ordered_sine_det_integral,
    pdf_first_passage,
    pdf_first_passage_finite,
    start_weight,
    transition_factor,
)
from .rect_kernels import (
    RectConfig,
    WeylPoint,
    as_weyl,
    boundary_poisson_rect,
    crossing_decay_rate,
    crossing_prefactor,
    crossing_ratio,
    fomin_boundary_det,
    fomin_expansion,
    fomin_inner_det,
    hat_h,
    partitions,
    poisson_rect,
)
from .validation import CheckResult, run_suite, suite_report

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EnumerationBudgetError",
    "PrecisionError",
    "TruncationError",
    "basis_phi",
    "basis_phi_hat",
    "coincident_limit_value",
    "corr_strip",
    "density_semicircle",
    "joint_pdf_special_start",
    "joint_pdf_special_start_dets",
    "kernel_semicircle",
    "kernel_semicircle_equal_radius",
    "kernel_strip",
    "kernel_strip_dual",
    "limit_kernel",
    "pdf_special_start",
    "schur_limit_factor",
    "two_point_semicircle",
    "BoundaryTuple",
    "Network",
    "brute_force_fomin",
    "fomin_det",
    "lerw_weight",
    "load_network",
    "loop_erase",
    "save_network",
    "square_grid_network",
    "walk_green",
    "walk_weight",
    "LatticeStrip",
    "boundary_refinement",
    "density_refinement",
    "discrete_first_passage_density",
    "discrete_green",
    "exit_right",
    "first_passage_decomposition",
    "ordered_minor_sum",
    "DEFAULT_POLICY",
    "QuadratureRule",
    "SeriesPolicy",
    "TailBoundedValue",
    "chamber_integrate",
    "det_lu",
    "gauss_legendre",
    "sinh_ratio",
    "ChamberSequence",
    "joint_pdf",
    "norm_boundary",
    "norm_inner",
    "ordered_sine_det_integral",
    "pdf_first_passage",
    "pdf_first_passage_finite",
    "start_weight",
    "transition_factor",
    "RectConfig",
    "WeylPoint",
    "as_weyl",
    "boundary_poisson_rect",
    "crossing_decay_rate",
    "crossing_prefactor",
    "crossing_ratio",
    "fomin_boundary_det",
    "fomin_expansion",
    "fomin_inner_det",
    "hat_h",
    "partitions",
    "poisson_rect",
    "CheckResult",
    "run_suite",
    "suite_report",
    "__version__",
]
