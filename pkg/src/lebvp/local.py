"""Power-series solutions at the two singular endpoints.

Both expansions come from one engine.  The equation is first multiplied by
x (at x=0) or by 1 - y (at x=1, y = 1 - x) so that every coefficient is a
polynomial; the coefficient of the lowest unknown then isolates one new
series coefficient per order:

    at x=0:  (m+1)(m + alpha) h_{m+1} = -(known terms)
    at x=1:  (l+1)(A l - B)   d_{l+1} = -(known terms)

The nonlinear term is handled through the incremental Cauchy power.  For
large data the expansion variable is rescaled by ``(|delta| |u0|**(p-1))**-1/2``
(the Lane-Emden self-similar scale) so the coefficients stay O(1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .equation import as_general, derived_constants
from .errors import OutsideTrustRadius, RecurrenceBreakdown, ResonantParameter
from .series import (
    DEFAULT_ORDER,
    PhasePoint,
    PowerSeries,
    differentiate,
    evaluate,
    evaluate_with_derivative,
    power_coefficient,
    radius_estimate,
)

DEFAULT_EPSILON = 0.01
RESONANCE_TOL = 1e-9
TRUST_FLOOR = 1e-12
TRUST_CAP = 1.0


class Endpoint(enum.Enum):
    ZERO = 0
    ONE = 1


@dataclass(frozen=True)
class LocalSolution:
    endpoint: Endpoint
    parameter: float
    series: PowerSeries
    trust_radius: float

    @property
    def x_center(self) -> float:
        return 0.0 if self.endpoint is Endpoint.ZERO else 1.0

    def default_epsilon(self, epsilon: float = DEFAULT_EPSILON) -> float:
        """``epsilon`` reduced, if needed, to half the trust radius."""
        return min(epsilon, 0.5 * self.trust_radius)


@dataclass(frozen=True)
class ResonanceReport:
    k_res: float
    is_resonant: bool
    leading_roots: tuple


def _solve(P, Q, R, D, q_sign, h0, order, p, breakdown):
    """Coefficients of ``P u'' + q_sign Q u' + R u + D u**p = 0`` with ``u(0) = h0``."""
    h = np.zeros(order + 1)
    c = np.zeros(order + 1)
    h[0] = h0
    if h0 == 0.0:
        # the zero function is the unique solution with zero data
        return h
    P1 = P[1] if P.size > 1 else 0.0
    Q0 = Q[0]
    for m in range(order):
        c[m] = power_coefficient(h, c, m, p)
        s = 0.0
        for i in range(2, min(P.size, m + 3)):
            j = m - i + 2
            s += P[i] * j * (j - 1) * h[j]
        for i in range(1, min(Q.size, m + 2)):
            j = m - i + 1
            s += q_sign * Q[i] * j * h[j]
        for i in range(min(R.size, m + 1)):
            s += R[i] * h[m - i]
        for i in range(min(D.size, m + 1)):
            s += D[i] * c[m - i]
        lead = (m + 1) * (m * P1 + q_sign * Q0)
        if lead == 0.0 or abs(lead) < 1e-12 * (m + 1) * (m * abs(P1) + abs(Q0)):
            raise breakdown(f"zero denominator at order {m + 1}")
        h[m + 1] = -s / lead
    return h


def _natural_scale(eq, u0: float) -> float:
    amp = abs(eq.delta) * abs(u0) ** (eq.p - 1)
    return 1.0 if amp <= 1.0 else amp**-0.5


def _rescale(P, Q, R, D, s):
    """Coefficient vectors after substituting ``x = s t`` and multiplying by ``s``."""
    if s == 1.0:
        return P, Q, R, D
    w = lambda v, shift: v * s ** (np.arange(v.size) + shift)
    return w(P, -1), w(Q, 0), w(R, 1), w(D, 1)


def _trust_radius(series: PowerSeries) -> float:
    if series.order < 8:
        return TRUST_FLOOR
    r = 0.5 * radius_estimate(series)
    return float(min(max(r, TRUST_FLOOR), TRUST_CAP))


def expand_at_zero(eq, c: float, order: int = DEFAULT_ORDER) -> LocalSolution:
    """Analytic solution at x=0 with ``u(0) = c``.

    When ``c_{-1} = 0`` the linear coefficient vanishes.
    """
    if order < 4:
        raise ValueError("order must be at least 4")
    eq = as_general(eq)
    scale = _natural_scale(eq, c)
    xp, xq, xr, xd = _rescale(*eq.x_form(), scale)
    h = _solve(xp, xq, xr, xd, 1.0, float(c), order, eq.p, RecurrenceBreakdown)
    s = PowerSeries(h, 0.0, scale)
    return LocalSolution(Endpoint.ZERO, float(c), s, _trust_radius(s))


def resonance_report(eq) -> ResonanceReport:
    """Resonance status at x=1 and the real roots of ``d0 (C + delta d0**(p-1)) = 0``."""
    eq = as_general(eq)
    dc = derived_constants(eq)
    k = dc.k_res
    kr = round(k)
    resonant = kr >= 0 and abs(k - kr) < RESONANCE_TOL
    roots = [0.0]
    val = -dc.C / eq.delta
    deg = eq.p - 1
    if val > 0.0:
        r = val ** (1.0 / deg)
        roots.append(r)
        if deg % 2 == 0:
            roots.append(-r)
    elif val < 0.0 and deg % 2 == 1:
        roots.append(-((-val) ** (1.0 / deg)))
    return ResonanceReport(k, resonant, tuple(sorted(roots)))


def expand_at_one(eq, b: float, order: int = DEFAULT_ORDER) -> LocalSolution:
    """Analytic solution at x=1 with ``u(1) = b``, as a series in ``y = 1 - x``.

    Raises ResonantParameter when ``B/A`` is a nonnegative integer; the
    finite-form solutions of that case are not constructed.
    """
    if order < 4:
        raise ValueError("order must be at least 4")
    eq = as_general(eq)
    rep = resonance_report(eq)  # raises DegenerateExpansion when A = 0
    if rep.is_resonant:
        raise ResonantParameter(f"k = B/A = {rep.k_res} is a nonnegative integer")
    scale = _natural_scale(eq, b)
    P, Q, R, D = _rescale(*eq.y_form(), scale)
    h = _solve(P, Q, R, D, -1.0, float(b), order, eq.p, ResonantParameter)
    s = PowerSeries(h, 0.0, scale)
    return LocalSolution(Endpoint.ONE, float(b), s, _trust_radius(s))


def phase_state(sol: LocalSolution, epsilon: float = DEFAULT_EPSILON) -> PhasePoint:
    """``(x, u, u')`` at distance ``epsilon`` from the solution's endpoint."""
    if not 0.0 < epsilon <= 0.5 * sol.trust_radius * (1 + 1e-12):
        raise OutsideTrustRadius(
            f"epsilon = {epsilon:.3g} must lie in (0, {0.5 * sol.trust_radius:.3g}]"
        )
    pt = evaluate_with_derivative(sol.series, epsilon)
    if sol.endpoint is Endpoint.ZERO:
        return PhasePoint(epsilon, pt.u, pt.du)
    return PhasePoint(1.0 - epsilon, pt.u, -pt.du)


def series_residual(eq, sol: LocalSolution, t: float) -> float:
    """ODE residual of the truncated series at distance ``t`` from its endpoint."""
    eq = as_general(eq)
    s = sol.series
    d1 = differentiate(s)
    u = evaluate(s, t)
    du = evaluate(d1, t)
    d2u = evaluate(differentiate(d1), t)
    if sol.endpoint is Endpoint.ZERO:
        return eq.residual(t, u, du, d2u)
    return eq.residual(1.0 - t, u, -du, d2u)

