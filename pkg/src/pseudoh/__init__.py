"""Geometry and conjugate points of pseudo-H-type 2-step nilpotent Lie groups."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraVector,
    CausalClass,
    MetricNilpotentAlgebra,
    Verdict,
    bracket,
    causal_class,
    inner,
    is_pseudo_h_type,
    is_pseudoregular,
    j_operator,
    jz_rank,
    validate_algebra,
)
from .analytic import (  # noqa: E402
    Branch,
    ConjugatePoint,
    GeodesicInvariants,
    SolverConfig,
    analytic_conjugate_points,
    geodesic_invariants,
    multiplicity,
    solve_transcendental,
)
from .catalog import example_nonpseudoregular, example_singular, heisenberg_h_type  # noqa: E402
from .geometry import (  # noqa: E402
    GeodesicIC,
    connection,
    curvature,
    exp_tJ,
    geodesic_velocity,
    is_totally_geodesic_subalgebra,
    jacobi_operator_along,
    make_ic,
)
from .numeric import (  # noqa: E402
    IntegratorConfig,
    JacobiEndpointMatrix,
    cross_validate,
    detect_conjugate_points,
    integrate_jacobi_basis,
    jacobi_system_rhs,
    numeric_default_window,
)
