"""Carnot groups, homogeneous gauges, and measures on nilpotent Lie groups.

Finite-dimensional graded nilpotent Lie algebras with exact rational
structure constants, the group law in exponential coordinates, homogeneous
gauges, reproducible Monte Carlo measures, and hypoelliptic heat kernels.
"""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    GradedLieAlgebra,
    Grading,
    SubalgebraBasis,
    abelian,
    build_free_nilpotent,
    build_from_constants,
    build_heisenberg_like,
    build_l2_triple_truncation,
    commutator_ideal,
    coordinate_subalgebra,
    full_subalgebra,
    heisenberg,
    subalgebra_closure,
)
from .group import (  # noqa: E402
    GroupElement,
    dilate,
    dilate_batch,
    inverse,
    multiply,
    multiply_batch,
    psi,
    psi_jacobian,
)
from .kernels import backend  # noqa: E402
from .metrics import (  # noqa: E402
    HomogeneousGauge,
    calibrate_gauge,
    distance,
    holder_constants,
    quotient_distance,
)
from .rng import SamplerStream  # noqa: E402
from .stats import two_sample_ks  # noqa: E402

__all__ = [
    "GradedLieAlgebra", "Grading", "SubalgebraBasis", "abelian", "build_free_nilpotent",
    "build_from_constants", "build_heisenberg_like", "build_l2_triple_truncation",
    "commutator_ideal", "coordinate_subalgebra", "full_subalgebra", "heisenberg",
    "subalgebra_closure", "GroupElement", "dilate", "dilate_batch", "inverse", "multiply",
    "multiply_batch", "psi", "psi_jacobian", "backend", "HomogeneousGauge", "calibrate_gauge",
    "distance", "holder_constants", "quotient_distance", "SamplerStream", "two_sample_ks",
]
