"""Analytic solutions of perturbed Lane-Emden equations on [0, 1].

The package builds power-series solutions at the singular endpoints x=0
and x=1, continues them to an interior point, and finds global solutions as
intersections of the two resulting phase-plane curves.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticRegime,
    EnvelopeFit,
    fit_envelope,
    large_c_convergence,
    le_series,
    le_trajectory,
    regime,
    rescale_from_le,
    rescale_to_le,
)
from .continuation import IntegrationOptions, Trajectory, integrate, lyapunov_H, monitor
from .equation import (
    Equation1,
    FactoredP,
    GeneralEquation,
    check_matching_condition,
    constant_solution,
    derived_constants,
    embed_equation1,
    gamma_for_matching,
    lane_emden,
    singular_solution,
    wrapping_point,
)
from .errors import *  # noqa: F401,F403
from .local import Endpoint, LocalSolution, expand_at_one, expand_at_zero, phase_state, resonance_report
from .matching import (
    CurveSettings,
    FamilyCase,
    FamilyClassification,
    GlobalSolution,
    Intersection,
    PhaseCurve,
    Which,
    assemble,
    classify,
    find_intersections,
    trace_curve,
)
from .series import PhasePoint, PowerSeries, evaluate, evaluate_with_derivative, mul, power
