"""Asymptotics of the Lane-Emden core ``u'' + (alpha/x) u' + delta u**p = 0``.

Large solutions of the perturbed problem look, after the self-similar
rescaling ``u = c w``, ``y = c**((p-1)/2) x``, like Lane-Emden solutions
with ``w(0) = 1``.  Those oscillate about the singular solution
``b_inf y**(-2/(p-1))`` with a log-periodic correction

    w ~ b_inf y**(-2/(p-1)) (1 + A_0 y**e sin(omega ln y + phi)),

when ``f(p, alpha) < 0``.  This module holds the closed forms, the
rescaling map, and a fit that recovers ``omega`` and ``e`` from data.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .continuation import IntegrationOptions, Trajectory, integrate
from .equation import as_general, lane_emden, singular_solution
from .errors import InsufficientOscillations
from .local import expand_at_zero, phase_state
from .series import DEFAULT_ORDER, PowerSeries, evaluate_with_derivative, power_coefficient


@dataclass(frozen=True)
class AsymptoticRegime:
    p: int
    alpha: float
    f_val: float
    p_Q: float | None  # None when alpha == 1
    omega: float | None  # real frequency, defined when f_val < 0
    oscillatory: bool

    @property
    def decay(self) -> float:
        """Envelope exponent ``(alpha + 3 + p (1 - alpha)) / (2 (p - 1))``."""
        return (self.alpha + 3 + self.p * (1 - self.alpha)) / (2 * (self.p - 1))


def f_value(p: float, alpha: float) -> float:
    return (alpha - 1) ** 2 + p**2 * (9 - 10 * alpha + alpha**2) - 2 * p * (alpha**2 - 6 * alpha - 3)


def regime(p: int, alpha: float) -> AsymptoticRegime:
    """Oscillation data of the Lane-Emden core around its singular solution.

    Examples
    --------
    >>> r = regime(7, 2.0)
    >>> r.f_val, round(r.omega, 5), r.oscillatory
    (-188.0, 1.14264, True)
    """
    f = float(f_value(p, alpha))
    p_Q = None if alpha == 1 else (alpha + 3) / (alpha - 1)
    omega = math.sqrt(-f) / (2 * (p - 1)) if f < 0 else None
    osc = int(p) == p and p % 2 == 1 and p != p_Q and f < 0
    return AsymptoticRegime(int(p), float(alpha), f, p_Q, omega, bool(osc))


def le_series(alpha: float, delta: float, p: int, a0: float, order: int = DEFAULT_ORDER) -> PowerSeries:
    """Regular Lane-Emden series with ``u(0) = a0``.

    Only even powers occur: ``a_1 = 0`` and
    ``a_{k+2} = -delta c_k / ((k+2)(k+1+alpha))`` where ``c_k`` are the
    coefficients of ``u**p``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    a = np.zeros(order + 1)
    c = np.zeros(order + 1)
    a[0] = a0
    if a0 == 0.0:
        return PowerSeries(a)
    for k in range(order - 1):
        c[k] = power_coefficient(a, c, k, p)
        a[k + 2] = -delta * c[k] / ((k + 2) * (k + 1 + alpha))
    return PowerSeries(a)


def rescale_to_le(eq, c: float, point) -> tuple[float, float, float]:
    """Map ``(x, u, u')`` to Lane-Emden variables ``(y, w, w')`` for amplitude ``c``."""
    if not c > 0:
        raise ValueError("c must be positive")
    gamma_s = (as_general(eq).p - 1) / 2
    k = c**gamma_s
    x, u, du = point
    return x * k, u / c, du / (c * k)


def rescale_from_le(eq, c: float, point) -> tuple[float, float, float]:
    """Inverse of :func:`rescale_to_le`."""
    if not c > 0:
        raise ValueError("c must be positive")
    gamma_s = (as_general(eq).p - 1) / 2
    k = c**gamma_s
    y, w, dw = point
    return y / k, w * c, dw * c * k


@dataclass(frozen=True)
class EnvelopeFit:
    omega_hat: float
    decay_hat: float
    A_0: float
    phi: float
    fit_window: tuple[float, float]
    residual: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        return d


def _alternating_fit(t, y):
    """Least squares ``y_i = a + b t_i + d (-1)**i``; returns ``b``.

    The alternating term absorbs the unequal half-cycles produced by the
    quadratic part of the nonlinearity.
    """
    alt = (-1.0) ** np.arange(t.size)
    cols = [np.ones_like(t), t] + ([alt] if t.size >= 4 else [])
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), y, rcond=None)
    return float(coef[1])


def fit_signal(t, s, min_crossings: int = 3) -> EnvelopeFit:
    """Fit ``s = A_0 exp(e t) sin(omega t + phi)`` on samples in ``t = ln x``.

    ``omega`` comes from the spacing of zero crossings and ``e`` from the
    regression of log extremum magnitudes on their abscissae.  Both are
    located on a cubic spline of the samples.  ``A_0`` and ``phi`` are then
    the linear least-squares amplitude and phase at fixed ``(omega, e)``.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    spl = CubicSpline(t, s)
    z = spl.roots(extrapolate=False)
    z = z[(z > t[0]) & (z < t[-1])]
    if z.size < min_crossings:
        raise InsufficientOscillations(f"{z.size} zero crossings, need {min_crossings}")
    n = np.arange(z.size)
    omega = math.pi / _alternating_fit(n.astype(float), z)
    et = spl.derivative().roots(extrapolate=False)
    et = et[(et > t[0]) & (et < t[-1])]
    ev = np.abs(spl(et))
    if et.size < 2:
        raise InsufficientOscillations("fewer than two interior extrema")
    decay = _alternating_fit(et, np.log(ev))
    env = np.exp(decay * t)
    M = np.column_stack([env * np.sin(omega * t), env * np.cos(omega * t)])
    (cs, cc), *_ = np.linalg.lstsq(M, s, rcond=None)
    A0, phi = math.hypot(cs, cc), math.atan2(cc, cs)
    res = float(np.sqrt(np.mean((M @ [cs, cc] - s) ** 2)))
    return EnvelopeFit(omega, decay, A0, phi, (float(math.exp(t[0])), float(math.exp(t[-1]))), res)


def fit_envelope(traj: Trajectory, reg: AsymptoticRegime, delta: float = 1.0,
                 x_lo: float | None = None, min_crossings: int = 3) -> EnvelopeFit:
    """Fit the log-periodic correction of a Lane-Emden trajectory.

    The reduced signal ``u x**(2/(p-1)) / b_inf - 1`` is fitted on
    ``x >= x_lo`` (default: from the first zero crossing of the signal, which
    leaves out the initial approach from the regular centre).
    """
    if not reg.oscillatory:
        raise InsufficientOscillations("regime is not oscillatory")
    b_inf = singular_solution(lane_emden(reg.alpha, delta, reg.p)).b_inf
    x, u = traj.x, traj.u
    keep = x > 0
    x, u = x[keep], u[keep]
    s = u * x ** (2.0 / (reg.p - 1)) / b_inf - 1.0
    t = np.log(x)
    if x_lo is None:
        z = CubicSpline(t, s).roots(extrapolate=False)
        if z.size == 0:
            raise InsufficientOscillations("reduced signal never changes sign")
        t_lo = z[0] - 0.25 * math.pi / reg.omega
    else:
        t_lo = math.log(x_lo)
    w = t >= t_lo
    return fit_signal(t[w], s[w], min_crossings)


def le_trajectory(alpha: float, delta: float, p: int, y_max: float, a0: float = 1.0,
                  epsilon: float = 0.01, opts: IntegrationOptions | None = None,
                  n_samples: int | None = 4000) -> Trajectory:
    """Lane-Emden solution with ``w(0) = a0`` integrated from its series to ``y_max``.

    With ``n_samples`` set the trajectory is recorded on that many
    log-spaced abscissae instead of at every accepted step.
    """
    eq = lane_emden(alpha, delta, p)
    start = phase_state(expand_at_zero(eq, a0), epsilon)
    x_eval = None
    if n_samples:
        x_eval = np.geomspace(start.x, y_max, n_samples)[1:-1]
    return integrate(eq, start, y_max, opts, x_eval=x_eval, record=n_samples is None)


def _solution_at(eq, c, x, opts):
    sol = expand_at_zero(eq, c)
    eps = sol.default_epsilon()
    if x <= eps:
        pt = evaluate_with_derivative(sol.series, x)
        return pt.u, pt.du
    tr = integrate(eq, phase_state(sol, eps), x, opts, record=False)
    return tr.end.u, tr.end.du


def large_c_convergence(eq, y_probe: float, c_list, opts: IntegrationOptions | None = None) -> list[float]:
    """``|w_full(y) - w_LE(y)|`` at fixed rescaled abscissa for each ``c``.

    The full solution with ``u(0) = c`` is evaluated at
    ``x = y_probe / c**((p-1)/2)`` and rescaled; the reference is the
    Lane-Emden solution with ``w(0) = 1``.
    """
    eq = as_general(eq)
    opts = opts or IntegrationOptions(rtol=1e-13, atol=1e-15)
    le = lane_emden(eq.alpha, eq.delta, eq.p)
    w_le, _ = _solution_at(le, 1.0, y_probe, opts)
    out = []
    for c in c_list:
        x = y_probe / c ** ((eq.p - 1) / 2)
        u, du = _solution_at(eq, c, x, opts)
        _, w, _ = rescale_to_le(eq, c, (x, u, du))
        out.append(abs(w - w_le))
    return out
