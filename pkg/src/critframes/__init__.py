"""Critical outscribed parallelotopes and Birkhoff-James orthonormal bases.

Numerical search, certification and counting of critical frames, together
with the closed-form topological lower bounds on their number.
"""
__version__ = "0.1.0"

from .bj import bj_residual, bj_residual_matrix, det_objective_and_derivative
from .bounds import (
    BoundsReport,
    bounds_report,
    config_cat_lower,
    critical_count_lower,
    padic_digit_bound,
    stiefel_genus,
)
from .estimator import CriticalFrameCensus
from .frames import Frame, GroupElement, act, canonicalize, orbit_distance, random_frame, retract
from .geometry import (
    Ellipsoid,
    GaugeNorm,
    MinkowskiSum,
    PBall,
    PNorm,
    norm_eval,
    support,
    validate_and_build,
)
from .grid import scan_2d
from .parallelotope import (
    Parallelotope,
    criticality_residual,
    outscribe,
    volume,
    volume_directional_derivative,
)
from .solver import (
    BJProblem,
    Census,
    CriticalOrbit,
    ParallelotopeProblem,
    SolverConfig,
    classify_critical,
    multistart_census,
    newton_refine,
    verify_lower_bound,
)
