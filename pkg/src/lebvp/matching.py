"""Phase-plane matching of the two endpoint families.

Solutions regular at x=0 (parameter c = u(0)) and at x=1 (parameter
b = u(1)) are continued to an interior abscissa x0.  Their images trace two
curves C0 and C1 in the (u, u') plane; every crossing is a global analytic
solution.  Crossings are located on the polylines and polished by Newton's
method on ``C0(c) - C1(b) = 0``.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .continuation import Direction, IntegrationOptions, Termination, Trajectory, integrate
from .equation import (
    as_general,
    check_matching_condition,
    general_constant_solution,
    wrapping_point,
)
from .errors import DomainError, MatchDegraded, NonConvergence
from .local import (
    DEFAULT_EPSILON,
    LocalSolution,
    expand_at_one,
    expand_at_zero,
    phase_state,
)
from .series import DEFAULT_ORDER, PhasePoint, evaluate_with_derivative

log = logging.getLogger(__name__)

PARAM_TOL = 1e-6
REFINE_TOL = 1e-9
MISMATCH_TOL = 1e-7


class Which(enum.Enum):
    C0 = "C0"
    C1 = "C1"


@dataclass(frozen=True)
class CurveSettings:
    order: int = DEFAULT_ORDER
    epsilon: float = DEFAULT_EPSILON
    opts: IntegrationOptions = field(default_factory=IntegrationOptions)


def _local(eq, which: Which, param: float, settings: CurveSettings) -> LocalSolution:
    if which is Which.C0:
        return expand_at_zero(eq, param, settings.order)
    return expand_at_one(eq, param, settings.order)


def continue_branch(eq, which: Which, param: float, x0: float, settings: CurveSettings,
                    record: bool = False, x_eval=None) -> tuple[LocalSolution, float, Trajectory]:
    """Expand at the endpoint, step off by epsilon and integrate to ``x0``."""
    sol = _local(eq, which, param, settings)
    eps = sol.default_epsilon(settings.epsilon)
    start = phase_state(sol, eps)
    if start.x == x0:
        traj = Trajectory(np.array([x0]), np.array([start.u]), np.array([start.du]),
                          Direction.FORWARD, Termination.REACHED_TARGET)
        return sol, eps, traj
    traj = integrate(eq, start, x0, settings.opts, x_eval=x_eval, record=record)
    return sol, eps, traj


def curve_point(eq, which: Which, param: float, x0: float, settings: CurveSettings):
    """``(u, u')`` at ``x0`` for one parameter value, or ``None`` on blow-up."""
    _, _, traj = continue_branch(eq, which, param, x0, settings)
    if not traj.reached:
        return None
    return traj.end.u, traj.end.du


@dataclass(frozen=True)
class PhaseCurve:
    which: Which
    x0: float
    params: np.ndarray
    points: np.ndarray  # shape (n, 2): u, u'
    failures: tuple = ()

    def __len__(self):
        return self.params.size

    @property
    def u(self):
        return self.points[:, 0]

    @property
    def du(self):
        return self.points[:, 1]


def _map_points(eq, which, params, x0, settings, workers):
    args = [(eq, which, float(c), x0, settings) for c in params]
    if workers and workers > 1 and len(args) > 8:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(curve_point, *zip(*args), chunksize=8))
    return [curve_point(*a) for a in args]


def trace_curve(
    eq,
    which: Which,
    x0: float,
    params,
    settings: CurveSettings | None = None,
    refine: bool = True,
    max_gap: float = 0.05,
    max_depth: int = 8,
    workers: int = 1,
    focus=None,
) -> PhaseCurve:
    """Phase-plane image at ``x0`` of the family over the sorted grid ``params``.

    With ``refine`` set, segments longer than ``max_gap`` (relative to the
    curve's extent, floored at 1) are bisected in parameter space up to
    ``max_depth`` times.  Parameters whose continuation blows up are listed
    in ``failures``.  ``focus = (u_lo, u_hi, du_lo, du_hi)`` restricts
    refinement to segments whose bounding box meets that rectangle.
    """
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (0, 1), got {x0}")
    eq = as_general(eq)
    settings = settings or CurveSettings()
    params = np.unique(np.asarray(params, dtype=float))
    if params.size == 0:
        return PhaseCurve(which, x0, params, np.zeros((0, 2)))

    pts = dict(zip(params.tolist(), _map_points(eq, which, params, x0, settings, workers)))
    for _ in range(max_depth if refine else 0):
        ok = sorted(k for k, v in pts.items() if v is not None)
        if len(ok) < 2:
            break
        arr = np.array([pts[k] for k in ok])
        scale = max(1.0, float(np.max(np.abs(arr))))
        gaps = np.hypot(*np.diff(arr, axis=0).T) / scale
        wide = gaps > max_gap
        if focus is not None:
            a, b = arr[:-1], arr[1:]
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            wide &= (hi[:, 0] >= focus[0]) & (lo[:, 0] <= focus[1])
            wide &= (hi[:, 1] >= focus[2]) & (lo[:, 1] <= focus[3])
        new = [0.5 * (ok[i] + ok[i + 1]) for i in np.flatnonzero(wide)]
        if not new:
            break
        pts.update(zip(new, _map_points(eq, which, new, x0, settings, workers)))

    keys = sorted(pts)
    good = [k for k in keys if pts[k] is not None]
    failures = tuple(k for k in keys if pts[k] is None)
    points = np.array([pts[k] for k in good], dtype=float).reshape(-1, 2)
    return PhaseCurve(which, x0, np.array(good), points, failures)


def default_c_grid(c_max: float = 50.0, n_linear: int = 41, per_efold: int = 40, extra=()) -> np.ndarray:
    """Linear on [0, 1] joined to log-uniform on [1, c_max].

    The log part carries ``per_efold`` points per unit of ``ln c`` so the
    large-c spiral, whose phase advances linearly in ``ln c``, is resolved
    uniformly.
    """
    grid = [np.linspace(0.0, min(1.0, c_max), n_linear)]
    if c_max > 1.0:
        grid.append(np.geomspace(1.0, c_max, max(2, math.ceil(per_efold * math.log(c_max)) + 1)))
    grid.append(np.asarray([e for e in extra if 0.0 <= e <= c_max], dtype=float))
    return np.unique(np.concatenate(grid))


def bounding_box(curve: PhaseCurve, pad: float = 0.1):
    """Padded ``(u_lo, u_hi, du_lo, du_hi)`` of a curve, for ``focus``."""
    if len(curve) == 0:
        return None
    lo, hi = curve.points.min(axis=0), curve.points.max(axis=0)
    m = pad * np.maximum(hi - lo, 1e-3)
    return (lo[0] - m[0], hi[0] + m[0], lo[1] - m[1], hi[1] + m[1])


def default_b_grid(b_stop: float, n: int = 121, extra=()) -> np.ndarray:
    grid = np.linspace(0.0, b_stop, n)
    extra = np.asarray([e for e in extra if 0.0 <= e <= b_stop], dtype=float)
    return np.unique(np.concatenate([grid, extra]))


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class Intersection:
    c_star: float
    b_star: float
    point: PhasePoint
    refine_residual: float


def _segment_crossings(P, Q, tol=1e-9):
    """Index pairs and local parameters of crossing segments of two polylines."""
    if len(P) < 2 or len(Q) < 2:
        return []
    a0, a1 = P[:-1], P[1:]
    b0, b1 = Q[:-1], Q[1:]
    d = a1 - a0
    e = b1 - b0
    # solve a0 + s d = b0 + t e for every pair
    cross = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]
    w = b0[None, :, :] - a0[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w[..., 0] * e[None, :, 1] - w[..., 1] * e[None, :, 0]) / cross
        t = (w[..., 0] * d[:, None, 1] - w[..., 1] * d[:, None, 0]) / cross
    hit = (cross != 0) & (s >= -tol) & (s <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)
    # shared vertices (curves meeting at a node) count as crossings too
    for i, j in zip(*np.nonzero(np.all(np.isclose(a0[:, None, :], b0[None, :, :], rtol=0, atol=1e-12), axis=-1))):
        hit[i, j] = True
        s[i, j] = t[i, j] = 0.0
    last_p, last_q = len(P) - 2, len(Q) - 2
    if np.allclose(P[-1], Q[-1], rtol=0, atol=1e-12):
        hit[last_p, last_q] = True
        s[last_p, last_q] = t[last_p, last_q] = 1.0
    out = []
    for i, j in zip(*np.nonzero(hit)):
        out.append((int(i), int(j), float(np.clip(s[i, j], 0, 1)), float(np.clip(t[i, j], 0, 1))))
    return out


def refine_intersection(eq, x0, c, b, settings, c_bounds, b_bounds, tol=REFINE_TOL, max_iter=30):
    """Damped Newton on ``C0(c) - C1(b)`` with finite-difference tangents."""
    def F(c, b):
        p0 = curve_point(eq, Which.C0, c, x0, settings)
        p1 = curve_point(eq, Which.C1, b, x0, settings)
        if p0 is None or p1 is None:
            raise NonConvergence("continuation blew up during refinement")
        return np.subtract(p0, p1), np.asarray(p1)

    clamp = lambda v, lo_hi: min(max(v, lo_hi[0]), lo_hi[1])
    r, p1 = F(c, b)
    for _ in range(max_iter):
        scale = 1.0 + float(np.max(np.abs(p1)))
        nr = float(np.max(np.abs(r)))
        if nr < tol * scale:
            return c, b, p1, nr
        hc = 1e-7 * max(1.0, abs(c))
        hb = 1e-7 * max(1.0, abs(b))
        sc = hc if c + hc <= c_bounds[1] else -hc
        sb = hb if b + hb <= b_bounds[1] else -hb
        dc = (F(c + sc, b)[0] - r) / sc
        db = (F(c, b + sb)[0] - r) / sb
        J = np.column_stack([dc, db])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise NonConvergence("singular Jacobian") from None
        lam = 1.0
        while lam > 1e-4:
            cn = clamp(c + lam * step[0], c_bounds)
            bn = clamp(b + lam * step[1], b_bounds)
            try:
                rn, p1n = F(cn, bn)
            except NonConvergence:
                lam *= 0.5
                continue
            if np.max(np.abs(rn)) < nr:
                break
            lam *= 0.5
        else:
            raise NonConvergence(f"no descent from residual {nr:.3e}")
        c, b, r, p1 = cn, bn, rn, p1n
    nr = float(np.max(np.abs(r)))
    if nr < tol * (1.0 + float(np.max(np.abs(p1)))):
        return c, b, p1, nr
    raise NonConvergence(f"residual {nr:.3e} after {max_iter} iterations")


def find_intersections(eq, c_curve: PhaseCurve, b_curve: PhaseCurve,
                       settings: CurveSettings | None = None) -> list[Intersection]:
    """All refined crossings of C0 and C1, sorted by ``c_star``."""
    if c_curve.x0 != b_curve.x0:
        raise DomainError("curves are traced at different x0")
    eq = as_general(eq)
    settings = settings or CurveSettings()
    x0 = c_curve.x0
    if len(c_curve) == 0 or len(b_curve) == 0:
        return []
    c_bounds = (float(c_curve.params[0]), float(c_curve.params[-1]))
    b_bounds = (float(b_curve.params[0]), float(b_curve.params[-1]))
    found: list[Intersection] = []
    for i, j, s, t in _segment_crossings(c_curve.points, b_curve.points):
        c = c_curve.params[i] + s * (c_curve.params[i + 1] - c_curve.params[i])
        b = b_curve.params[j] + t * (b_curve.params[j + 1] - b_curve.params[j])
        try:
            c, b, pt, res = refine_intersection(eq, x0, float(c), float(b), settings, c_bounds, b_bounds)
        except NonConvergence as exc:
            log.info("dropping candidate near c=%.6g, b=%.6g: %s", c, b, exc)
            continue
        if any(abs(h.c_star - c) < PARAM_TOL * max(1.0, abs(c)) and abs(h.b_star - b) < PARAM_TOL
               for h in found):
            continue
        found.append(Intersection(float(c), float(b), PhasePoint(x0, float(pt[0]), float(pt[1])), float(res)))
    return sorted(found, key=lambda h: h.c_star)


def write_curves_csv(curves, path) -> None:
    """Write curves as rows ``which,param,u,du``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["which", "param", "u", "du"])
        for curve in curves:
            for prm, (u, du) in zip(curve.params, curve.points):
                w.writerow([curve.which.value, repr(float(prm)), repr(float(u)), repr(float(du))])


def intersections_to_json(hits) -> str:
    recs = [{"c_star": h.c_star, "b_star": h.b_star, "u": h.point.u, "du": h.point.du,
             "residual": h.refine_residual} for h in hits]
    return json.dumps(recs, indent=2)


# ---------------------------------------------------------------------------
# global solutions


@dataclass(frozen=True)
class GlobalSolution:
    eq: object
    c_star: float
    b_star: float
    x0: float
    left: Trajectory
    right: Trajectory
    left_local: LocalSolution
    right_local: LocalSolution
    eps_left: float
    eps_right: float
    mismatch: float

    def sample(self, xs, settings: CurveSettings | None = None) -> np.ndarray:
        """Rows ``(x, u, u')`` on ``xs`` in [0, 1]; series cover the endpoint zones."""
        settings = settings or CurveSettings()
        xs = np.asarray(xs, dtype=float)
        out = np.empty((xs.size, 3))
        out[:, 0] = xs
        lo, hi = self.eps_left, 1.0 - self.eps_right
        left_x = [x for x in xs if lo < x <= self.x0]
        right_x = [x for x in xs if self.x0 < x < hi]
        tl = tr = None
        if left_x:
            _, _, tl = continue_branch(self.eq, Which.C0, self.c_star, self.x0, settings, x_eval=left_x)
        if right_x:
            _, _, tr = continue_branch(self.eq, Which.C1, self.b_star, self.x0, settings, x_eval=right_x)
        for k, x in enumerate(xs):
            if x <= lo:
                pt = evaluate_with_derivative(self.left_local.series, x)
                out[k, 1:] = pt.u, pt.du
            elif x >= hi:
                pt = evaluate_with_derivative(self.right_local.series, 1.0 - x)
                out[k, 1:] = pt.u, -pt.du
            else:
                pt = (tl if x <= self.x0 else tr).at(x)
                out[k, 1:] = pt.u, pt.du
        return out


def assemble(eq, x0: float, hit: Intersection, settings: CurveSettings | None = None,
             strict: bool = True) -> GlobalSolution:
    """Re-run both continuations at ``(c*, b*)`` and measure the mismatch at ``x0``."""
    eq = as_general(eq)
    settings = settings or CurveSettings()
    sl, el, left = continue_branch(eq, Which.C0, hit.c_star, x0, settings, record=True)
    sr, er, right = continue_branch(eq, Which.C1, hit.b_star, x0, settings, record=True)
    a, b = left.end, right.end
    mismatch = max(abs(a.u - b.u), abs(a.du - b.du))
    if strict and not mismatch < MISMATCH_TOL * (1.0 + abs(a.u)):
        raise MatchDegraded(f"mismatch {mismatch:.3e} at x0={x0}")
    return GlobalSolution(eq, hit.c_star, hit.b_star, x0, left, right, sl, sr, el, er, mismatch)


# ---------------------------------------------------------------------------
# classification


class FamilyCase(enum.Enum):
    COUNTABLE = "CountableFamily"
    FINITE = "FiniteFamily"
    SPECIAL_ONLY = "SpecialOnly"
    TRIVIAL_ONLY = "TrivialOnly"


@dataclass(frozen=True)
class FamilyClassification:
    """Family label plus the evidence it rests on.

    The distance fields are ``None`` when the singular solution (and so the
    wrapping point) does not exist.
    """

    case_id: FamilyCase
    distance_to_P_inf: float | None
    relative_distance: float | None
    b_closest: float | None
    matching_residual: float | None
    n_intersections: int
    n_nontrivial: int
    has_trivial: bool
    has_constant: bool

    def as_dict(self) -> dict:
        return {
            "case": self.case_id.value,
            "distance_to_P_inf": self.distance_to_P_inf,
            "relative_distance": self.relative_distance,
            "b_closest": self.b_closest,
            "matching_residual": self.matching_residual,
            "n_intersections": self.n_intersections,
            "n_nontrivial": self.n_nontrivial,
            "has_trivial": self.has_trivial,
            "has_constant": self.has_constant,
        }


def _tally(eq, intersections):
    u0 = general_constant_solution(eq)
    trivial = constant = False
    nontrivial = 0
    for h in intersections:
        if abs(h.c_star) < 1e-8 and abs(h.b_star) < 1e-8:
            trivial = True
        elif u0 is not None and abs(h.c_star - u0) < 1e-8 and abs(h.b_star - u0) < 1e-8:
            constant = True
        else:
            nontrivial += 1
    return trivial, constant, nontrivial


def _case(nontrivial, constant):
    if nontrivial > 0:
        return FamilyCase.FINITE
    return FamilyCase.SPECIAL_ONLY if constant else FamilyCase.TRIVIAL_ONLY


def classify_counts(eq, intersections) -> FamilyClassification:
    """Classification from intersections alone, for equations without ``P_inf``."""
    eq = as_general(eq)
    trivial, constant, nontrivial = _tally(eq, intersections)
    return FamilyClassification(_case(nontrivial, constant), None, None, None, None,
                                len(intersections), nontrivial, trivial, constant)


def distance_to_point(eq, b_curve: PhaseCurve, target, settings: CurveSettings | None = None):
    """Minimum phase-plane distance from C1 to ``target`` and the minimizing b."""
    settings = settings or CurveSettings()
    if len(b_curve) == 0:
        return math.inf, math.nan
    target = np.asarray(target, dtype=float)
    d = np.hypot(*(b_curve.points - target).T)
    i = int(np.argmin(d))
    lo = b_curve.params[max(i - 1, 0)]
    hi = b_curve.params[min(i + 1, len(b_curve) - 1)]
    best_b, best_d = float(b_curve.params[i]), float(d[i])
    if hi > lo:
        def dist(b):
            p = curve_point(eq, Which.C1, b, b_curve.x0, settings)
            return math.inf if p is None else float(np.hypot(*(np.asarray(p) - target)))
        res = minimize_scalar(dist, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        if res.fun < best_d:
            best_b, best_d = float(res.x), float(res.fun)
    return best_d, best_b


def classify(eq, x0: float, b_curve: PhaseCurve, intersections, tol_P: float = 1e-3,
             settings: CurveSettings | None = None) -> FamilyClassification:
    """Label the global-solution family.

    ``CountableFamily`` when C1 passes within ``tol_P * |P_inf|`` of the
    wrapping point and the matching condition holds to 1e-10; otherwise the
    label follows from the intersections found.  Raises AmplitudeUndefined
    when there is no wrapping point.
    """
    eq = as_general(eq)
    P_inf = wrapping_point(eq, x0)
    residual = float(np.max(np.abs(check_matching_condition(eq))))
    dist, b_at = distance_to_point(eq, b_curve, (P_inf.u, P_inf.du), settings)
    rel = dist / math.hypot(P_inf.u, P_inf.du)
    trivial, constant, nontrivial = _tally(eq, intersections)
    if rel < tol_P and residual < 1e-10:
        case = FamilyCase.COUNTABLE
    else:
        case = _case(nontrivial, constant)
    return FamilyClassification(case, dist, rel, b_at, residual, len(intersections),
                                nontrivial, trivial, constant)
