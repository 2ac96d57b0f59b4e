"""Truncated power series about a fixed center.

Local solutions at both singular endpoints are carried as dense
coefficient vectors.  Products are truncated Cauchy convolutions and
integer powers use the classical J.C.P. Miller recurrence

    c_0 = a_0**p,
    c_m = 1/(m a_0) * sum_{l=1}^{m} (l p - m + l) a_l c_{m-l},

which costs O(N**2) regardless of the exponent.  The recurrence loses
accuracy when the constant term does not dominate the tail
(``max_l (|a_l|/|a_0|)**(1/l) > 1``); :func:`power` then multiplies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    CenterMismatch,
    OutsideTrustRadius,
    OutsideTrustRadiusWarning,
    ZeroLeadingCoefficient,
)

DEFAULT_ORDER = 40


class PhasePoint(NamedTuple):
    """State ``(u, u')`` at abscissa ``x``."""

    x: float
    u: float
    du: float


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Truncated series ``sum_k coeffs[k] * ((x - center) / scale)**k``.

    Coefficients are stored as a read-only float array of length
    ``order + 1``.  ``scale`` keeps the coefficients of rapidly varying
    local solutions representable; it is 1 for ordinary series.
    """

    coeffs: np.ndarray
    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True).ravel()
        if c.size == 0:
            raise ValueError("a power series needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("power series coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "scale", float(self.scale))
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, value: float, order: int = DEFAULT_ORDER, center: float = 0.0) -> "PowerSeries":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c, center)

    def _like(self, coeffs) -> "PowerSeries":
        return PowerSeries(coeffs, self.center, self.scale)

    @classmethod
    def variable(cls, order: int = DEFAULT_ORDER, center: float = 0.0) -> "PowerSeries":
        """The series of ``x - center``."""
        c = np.zeros(order + 1)
        if order >= 1:
            c[1] = 1.0
        return cls(c, center)

    def truncate(self, order: int) -> "PowerSeries":
        c = np.zeros(order + 1)
        m = min(order, self.order) + 1
        c[:m] = self.coeffs[:m]
        return self._like(c)

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        sc = f", scale={self.scale}" if self.scale != 1.0 else ""
        return f"PowerSeries(order={self.order}, center={self.center}{sc}, coeffs={self.coeffs!r})"

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            _check_center(self, other)
            n = min(self.order, other.order) + 1
            return self._like(self.coeffs[:n] + other.coeffs[:n])
        c = self.coeffs.copy()
        c[0] += other
        return self._like(c)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            return mul(self, other)
        return self._like(self.coeffs * other)

    __rmul__ = __mul__

    def __pow__(self, p):
        return power(self, p)

    def __call__(self, x):
        return evaluate(self, x)


def _check_center(s: PowerSeries, t: PowerSeries) -> None:
    if s.center != t.center or s.scale != t.scale:
        raise CenterMismatch(
            f"series in (x - {s.center})/{s.scale} and (x - {t.center})/{t.scale}"
        )


def mul(s: PowerSeries, t: PowerSeries) -> PowerSeries:
    """Cauchy product truncated to ``min(s.order, t.order)``."""
    _check_center(s, t)
    n = min(s.order, t.order) + 1
    c = np.convolve(s.coeffs[:n], t.coeffs[:n])[:n]
    return s._like(c)


def power_by_multiplication(s: PowerSeries, p: int) -> PowerSeries:
    """``s**p`` by repeated truncated multiplication."""
    if p < 0 or int(p) != p:
        raise ValueError("p must be a nonnegative integer")
    n = s.coeffs.size
    out = np.zeros(n)
    out[0] = 1.0
    for _ in range(int(p)):
        out = np.convolve(out, s.coeffs)[:n]
    return s._like(out)


def power_recurrence(a: Sequence[float], p: int) -> np.ndarray:
    """Coefficients of ``(sum a_l x**l)**p`` via the Miller recurrence.

    Raises ZeroLeadingCoefficient when ``a[0] == 0``.
    """
    a = np.asarray(a, dtype=float)
    if a[0] == 0.0:
        raise ZeroLeadingCoefficient("the power recurrence divides by a_0")
    n = a.size
    c = np.empty(n)
    c[0] = a[0] ** p
    for m in range(1, n):
        l = np.arange(1, m + 1)
        c[m] = np.dot((l * p - m + l) * a[1 : m + 1], c[m - l]) / (m * a[0])
    return c


def recurrence_growth(a: Sequence[float]) -> float:
    """``max_l (|a_l| / |a_0|)**(1/l)``; the recurrence is reliable at <= 1."""
    a = np.abs(np.asarray(a, dtype=float))
    if a[0] == 0.0:
        return math.inf
    if a.size == 1:
        return 0.0
    l = np.arange(1, a.size)
    return float(np.max((a[1:] / a[0]) ** (1.0 / l)))


def power(s: PowerSeries, p: int, method: str = "auto") -> PowerSeries:
    """``s**p`` truncated at ``s.order``.

    ``method`` is ``"recurrence"``, ``"multiply"`` or ``"auto"``.  The
    automatic choice takes the recurrence when the constant term dominates
    and repeated multiplication otherwise (always for ``a_0 == 0``).
    """
    if int(p) != p or p < 0:
        raise ValueError("p must be a nonnegative integer")
    p = int(p)
    if p == 0:
        return s._like(np.eye(1, s.order + 1)[0])
    if p == 1:
        return s
    if method == "auto":
        method = "recurrence" if recurrence_growth(s.coeffs) <= 1.0 else "multiply"
    if method == "multiply":
        return power_by_multiplication(s, p)
    if method != "recurrence":
        raise ValueError(f"unknown method {method!r}")
    return s._like(power_recurrence(s.coeffs, p))


def power_coefficient(a: np.ndarray, c: np.ndarray, m: int, p: int) -> float:
    """Coefficient ``m`` of ``u**p`` given ``a[0..m]`` and ``c[0..m-1]``.

    Incremental form of :func:`power_recurrence` for recurrence engines that
    discover the coefficients of ``u`` one at a time.  When ``a[0] == 0``
    the value is computed by direct convolution.
    """
    if m == 0:
        return a[0] ** p
    if a[0] != 0.0:
        l = np.arange(1, m + 1)
        return float(np.dot((l * p - m + l) * a[1 : m + 1], c[m - l]) / (m * a[0]))
    return float(power_by_multiplication(PowerSeries(a[: m + 1]), p).coeffs[m])


def differentiate(s: PowerSeries) -> PowerSeries:
    """Termwise derivative with respect to x (order drops by one)."""
    if s.order == 0:
        return s._like([0.0])
    k = np.arange(1, s.order + 1)
    return s._like(k * s.coeffs[1:] / s.scale)


def _check_radius(s, x, radius, strict):
    if radius is None:
        return
    if abs(x - s.center) > radius:
        msg = f"|x - center| = {abs(x - s.center):.3g} exceeds trust radius {radius:.3g}"
        if strict:
            raise OutsideTrustRadius(msg)
        warnings.warn(msg, OutsideTrustRadiusWarning, stacklevel=3)


def evaluate(s: PowerSeries, x: float, radius: float | None = None, strict: bool = False) -> float:
    """Horner evaluation at ``x``.

    If ``radius`` is given, points farther than it from the center warn
    (or raise OutsideTrustRadius when ``strict``).
    """
    _check_radius(s, x, radius, strict)
    t = (x - s.center) / s.scale
    acc = 0.0
    for c in s.coeffs[::-1]:
        acc = acc * t + c
    return float(acc)


def evaluate_with_derivative(
    s: PowerSeries, x: float, radius: float | None = None, strict: bool = False
) -> PhasePoint:
    _check_radius(s, x, radius, strict)
    t = (x - s.center) / s.scale
    u = 0.0
    du = 0.0
    for c in s.coeffs[::-1]:
        du = du * t + u
        u = u * t + c
    return PhasePoint(float(x), float(u), float(du / s.scale))


def radius_estimate(s: PowerSeries, rtol: float = 1e-13) -> float:
    """Heuristic radius of convergence from the coefficient tail.

    Fits ``log|a_k| ~ const - k log R`` over the nonzero coefficients in
    the upper half of the series.  Returns ``inf`` when the tail vanishes.
    """
    if s.order < 8:
        raise ValueError("radius estimate needs order >= 8")
    a = np.abs(s.coeffs)
    scale = a.max()
    if scale == 0.0:
        return math.inf
    k = np.arange(s.order // 2, s.order + 1)
    tail = a[k]
    keep = tail > rtol * scale
    if keep.sum() < 2:
        return math.inf
    slope = np.polyfit(k[keep], np.log(tail[keep]), 1)[0]
    return float(s.scale * math.exp(-slope))
