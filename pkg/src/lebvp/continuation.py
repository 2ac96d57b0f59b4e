"""Numerical continuation across the interior of the unit interval.

The second-order equation is integrated as the first-order system

    u' = v,   v' = -(q(x) v + r(x) u + delta u**p) / p(x)

with the Dormand-Prince 5(4) pair and a PI step-size controller (Hairer,
Norsett & Wanner, Solving ODEs I, section II.4).  The stepper works on
plain Python floats: the system has two components, so array overhead
would dominate.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equation import as_general
from .errors import DomainError, NonconstantR
from .series import PhasePoint

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


class Direction(enum.Enum):
    FORWARD = 1
    BACKWARD = -1


class Termination(enum.Enum):
    REACHED_TARGET = "reached_target"
    BLOW_UP = "blow_up"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class IntegrationOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    bound: float = 1e8
    h_min: float = 1e-14
    max_steps: int = 200_000
    safety: float = 0.9


@dataclass(frozen=True)
class Trajectory:
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    direction: Direction
    terminated: Termination
    n_steps: int = 0
    n_rejected: int = 0

    @property
    def reached(self) -> bool:
        return self.terminated is Termination.REACHED_TARGET

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(float(self.x[0]), float(self.u[0]), float(self.du[0]))

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(float(self.x[-1]), float(self.u[-1]), float(self.du[-1]))

    def at(self, x: float) -> PhasePoint:
        """Sample recorded exactly at ``x`` (requested through ``x_eval``)."""
        idx = np.flatnonzero(self.x == x)
        if idx.size == 0:
            raise KeyError(f"no sample at x={x}; pass it in x_eval")
        i = idx[0]
        return PhasePoint(float(x), float(self.u[i]), float(self.du[i]))

    def __len__(self):
        return self.x.size


def vector_field(eq):
    """Return ``f(x, u, v) -> (u', v')`` for the equation."""
    eq = as_general(eq)
    p_at, q_at, r_at = eq.p_at, eq.q_at, eq.r_at
    delta, power = eq.delta, eq.p

    def f(x, u, v):
        return v, -(q_at(x) * v + r_at(x) * u + delta * u**power) / p_at(x)

    return f


def _check_span(eq, x_s, x_t):
    if x_s == x_t:
        raise DomainError("integration span is empty")
    lo, hi = min(x_s, x_t), max(x_s, x_t)
    if lo <= 0.0:
        raise DomainError(f"span [{lo}, {hi}] touches the singular point x=0")
    if eq.singular_at_one and hi >= 1.0:
        raise DomainError(f"span [{lo}, {hi}] touches the singular point x=1")


def integrate(
    eq,
    start: PhasePoint,
    x_target: float,
    opts: IntegrationOptions | None = None,
    x_eval: Sequence[float] | None = None,
    record: bool = True,
) -> Trajectory:
    """Continue ``start`` to ``x_target`` with adaptive Dormand-Prince steps.

    Steps are shortened to land exactly on every abscissa in ``x_eval``.
    With ``record=False`` only the start, the ``x_eval`` points and the end
    are kept.  Blow-up (``|u|`` or ``|u'|`` above ``opts.bound`` times the
    size of the starting state, floored at 1) and step
    underflow end the run early; the status is reported, not raised.
    """
    eq = as_general(eq)
    opts = opts or IntegrationOptions()
    x = float(start.x)
    _check_span(eq, x, x_target)
    f = vector_field(eq)
    sign = 1.0 if x_target > x else -1.0
    direction = Direction.FORWARD if sign > 0 else Direction.BACKWARD

    stops = sorted({float(v) for v in (() if x_eval is None else x_eval) if (v - x) * sign > 0 and (x_target - v) * sign > 0})
    stops = stops if sign > 0 else stops[::-1]
    stops.append(float(x_target))
    stop_set = set(stops)

    u, v = float(start.u), float(start.du)
    limit = opts.bound * max(1.0, abs(u), abs(v))
    xs, us, vs = [x], [u], [v]
    rtol, atol = opts.rtol, opts.atol

    k1u, k1v = f(x, u, v)
    span = abs(x_target - x)
    # initial step from the local derivative scale
    d0 = max(abs(u), abs(v))
    d1 = max(abs(k1u), abs(k1v))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * max(1.0, abs(x))
    h = min(h, span, 0.1 * abs(x))
    h = max(h, 10 * opts.h_min * max(1.0, abs(x)))

    facold = 1e-4
    n_steps = n_rej = 0
    status = Termination.REACHED_TARGET
    si = 0
    while True:
        target = stops[si]
        if n_steps + n_rej >= opts.max_steps:
            status = Termination.STEP_UNDERFLOW
            break
        last = False
        h_free = h
        if h >= (1.0 - 1e-3) * abs(target - x):
            # snap onto the stop rather than leave a sliver behind
            h = abs(target - x)
            last = True
        if h < opts.h_min * max(1.0, abs(x)):
            status = Termination.STEP_UNDERFLOW
            break
        hs = sign * h
        k2u, k2v = f(x + C2 * hs, u + hs * A21 * k1u, v + hs * A21 * k1v)
        k3u, k3v = f(x + C3 * hs, u + hs * (A31 * k1u + A32 * k2u), v + hs * (A31 * k1v + A32 * k2v))
        k4u, k4v = f(
            x + C4 * hs,
            u + hs * (A41 * k1u + A42 * k2u + A43 * k3u),
            v + hs * (A41 * k1v + A42 * k2v + A43 * k3v),
        )
        k5u, k5v = f(
            x + C5 * hs,
            u + hs * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
            v + hs * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
        )
        xn = target if last else x + hs
        k6u, k6v = f(
            xn,
            u + hs * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
            v + hs * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
        )
        un = u + hs * (A71 * k1u + A73 * k3u + A74 * k4u + A75 * k5u + A76 * k6u)
        vn = v + hs * (A71 * k1v + A73 * k3v + A74 * k4v + A75 * k5v + A76 * k6v)
        if not (math.isfinite(un) and math.isfinite(vn)):
            n_rej += 1
            h *= 0.2
            continue
        k7u, k7v = f(xn, un, vn)
        eu = hs * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ev = hs * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
        err = max(
            abs(eu) / (atol + rtol * max(abs(u), abs(un))),
            abs(ev) / (atol + rtol * max(abs(v), abs(vn))),
        )
        fac11 = err**0.17 if err > 0.0 else 0.0
        if err <= 1.0:
            n_steps += 1
            fac = fac11 / facold**0.04 / opts.safety
            fac = min(5.0, max(0.1, fac)) if fac > 0 else 0.1
            # PI controller in Hairer's form: h_new = h / fac
            facold = max(err, 1e-4)
            x, u, v = xn, un, vn
            k1u, k1v = k7u, k7v
            h_new = h / fac
            if last:
                h_new = max(h_new, h_free)
                if record or x in stop_set:
                    xs.append(x)
                    us.append(u)
                    vs.append(v)
                si += 1
                if si == len(stops):
                    break
            elif record:
                xs.append(x)
                us.append(u)
                vs.append(v)
            if abs(u) > limit or abs(v) > limit:
                if not record and xs[-1] != x:
                    xs.append(x)
                    us.append(u)
                    vs.append(v)
                status = Termination.BLOW_UP
                break
            h = h_new
        else:
            n_rej += 1
            h = h / min(10.0, fac11 / opts.safety)

    if not record and xs[-1] != x:
        xs.append(x)
        us.append(u)
        vs.append(v)
    return Trajectory(
        np.array(xs), np.array(us), np.array(vs), direction, status, n_steps, n_rej
    )


# ---------------------------------------------------------------------------
# Lyapunov monitoring


def lyapunov_H(eq, x: float, point) -> float:
    """``p(x) u'**2 / 2 + delta u**(p+1) / (p+1) + r u**2 / 2`` for constant r."""
    eq = as_general(eq)
    if not eq.r_is_constant:
        raise NonconstantR("the Lyapunov function needs a constant r(x)")
    r = eq._r_poly[0]
    u, du = point[-2], point[-1]
    return 0.5 * eq.p_at(x) * du * du + eq.delta * u ** (eq.p + 1) / (eq.p + 1) + 0.5 * r * u * u


def dissipation_sign_ok(eq, lo: float, hi: float, n: int = 401) -> bool:
    """True when ``p'(x)/2 - q(x) < 0`` at ``n`` sample points of ``[lo, hi]``."""
    eq = as_general(eq)
    xs = np.linspace(lo, hi, n)
    return all(0.5 * eq.dp_at(x) - eq.q_at(x) < 0.0 for x in xs)


@dataclass(frozen=True)
class LyapunovTrace:
    values: np.ndarray
    violations: int
    skipped: str | None = None
    increments: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def monitor(eq, traj: Trajectory, rel_tol: float = 1e-9) -> LyapunovTrace:
    """Evaluate H along ``traj`` and count increases in the direction of growing x.

    Monitoring is skipped (with a warning) when r is not constant, p is even,
    or the dissipation sign condition fails on the trajectory's span.
    """
    eq = as_general(eq)
    reason = None
    if not eq.r_is_constant:
        reason = "r(x) is not constant"
    elif eq.p % 2 == 0:
        reason = "p is even"
    elif len(traj) and not dissipation_sign_ok(eq, float(traj.x.min()), float(traj.x.max())):
        reason = "p'(x)/2 - q(x) < 0 fails on the span"
    if reason is not None:
        warnings.warn(f"Lyapunov monitoring skipped: {reason}", RuntimeWarning, stacklevel=2)
        return LyapunovTrace(np.full(len(traj), np.nan), 0, reason)
    H = np.array([lyapunov_H(eq, x, (u, du)) for x, u, du in zip(traj.x, traj.u, traj.du)])
    order = np.argsort(traj.x)
    Hx = H[order]
    inc = np.diff(Hx)
    violations = int(np.sum(inc > rel_tol * (1.0 + np.abs(Hx[:-1]))))
    return LyapunovTrace(H, violations, None, inc)


def write_trajectory_csv(path, traj: Trajectory, trace: LyapunovTrace | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u", "du", "H"])
        for i in range(len(traj)):
            H = ""
            if trace is not None and trace.skipped is None:
                H = repr(float(trace.values[i]))
            w.writerow([repr(float(traj.x[i])), repr(float(traj.u[i])), repr(float(traj.du[i])), H])
