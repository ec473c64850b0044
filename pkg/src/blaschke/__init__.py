"""Finite Blaschke products, forward iteration, and their stability classes."""

__version__ = "0.1.0"

from .errors import (
    BlaschkeError,
    DegreeCapError,
    DomainError,
    InconclusiveError,
    NonconvergenceError,
    RootFindingError,
)
from .hyperbolic import (
    DISK_MARGIN,
    disk_point,
    hyp_dist,
    hyp_distortion,
    moebius,
    schwarz_lower_bound,
)
from .multiset import TAU_CLUSTER, PointMultiset
from .products import (
    DEGREE_CAP,
    CompositionChain,
    FiniteBlaschke,
    TaylorTailWarning,
    blaschke_sum,
    compose_explicit,
    critical_set,
    default_probe_grid,
    make_explicit,
    map_distance,
    preimages,
    taylor_coeff,
    taylor_coeffs,
    zero_multiset,
)
from .iteration import (
    CONVERGED_CONSTANT,
    CONVERGED_NONCONSTANT,
    NOT_CONVERGED,
    ConvergenceReport,
    MapSequence,
    covering_certificate,
    criterion_partial_sums,
    default_grid,
    detect_convergence,
    equisummability_bounds,
    explicit_sequence,
    forward_chain,
    forward_eval,
    moebius_family,
    normalize_sequence,
    order_of_zero,
    rotation_family,
    squaring_family,
    tail_map,
    tangential_family,
    zero_monotonicity_check,
)
from .indestructible import (
    McLaughlinReport,
    mclaughlin_nonzero,
    mclaughlin_zero,
    verify_stability_ibp,
)
from .maximal import (
    DecompositionReport,
    PseudometricField,
    SolverResult,
    canonicalize,
    curvature,
    curvature_probe,
    decomposition_check,
    lambda_callable,
    lambda_field,
    lambda_values,
    sigma_field,
    sigma_values,
    solve_maximal,
    verify_maximal,
)

__all__ = [name for name in dir() if not name.startswith("_")]
