"""Coefficient data for the perturbed Lane-Emden family.

The general equation reads

    p(x) u'' + q(x) u' + r(x) u + delta u**p = 0,
    p(x) = 1 + sum_{k=-1}^{n} a_k x**(k+2),
    q(x) = alpha/x + sum_{k=-1}^{n} b_k x**(k+1),
    r(x) = c_{-1}/x + sum_{k=0}^{n} c_k x**k,

with fixed singularities at x=0 (the alpha/x term) and x=1 (p(1) = 0).
Coefficient lists are stored in index order ``a[0] = a_{-1}``,
``a[1] = a_0`` and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial import Polynomial

from .errors import AmplitudeUndefined, DegenerateExpansion, InvalidEquation, NoConstantSolution
from .series import PhasePoint

P_ONE_TOL = 1e-14
MATCHING_TOL = 1e-12


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _real_root(value: float, degree: int) -> float:
    """Real ``degree``-th root of ``value``; raises for even roots of negatives."""
    if value >= 0.0:
        return value ** (1.0 / degree)
    if degree % 2 == 0:
        raise AmplitudeUndefined(f"no real {degree}-th root of {value}")
    return -((-value) ** (1.0 / degree))


@dataclass(frozen=True)
class GeneralEquation:
    """Perturbed Lane-Emden equation with singular endpoints 0 and 1.

    Set ``singular_at_one=False`` to build equations without the x=1
    singularity (the pure Lane-Emden core); the p(1)=0 and positivity
    checks are then skipped.
    """

    alpha: float
    delta: float
    p: int
    a: tuple = (0.0,)
    b: tuple = (0.0,)
    c: tuple = (0.0,)
    singular_at_one: bool = True

    # scalar-evaluation caches, filled in __post_init__
    _p_poly: tuple = field(init=False, repr=False, compare=False)
    _dp_poly: tuple = field(init=False, repr=False, compare=False)
    _q_poly: tuple = field(init=False, repr=False, compare=False)
    _r_poly: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = max(len(self.a), len(self.b), len(self.c), 1)
        pad = lambda v: tuple(float(x) for x in v) + (0.0,) * (m - len(v))
        object.__setattr__(self, "a", pad(self.a))
        object.__setattr__(self, "b", pad(self.b))
        object.__setattr__(self, "c", pad(self.c))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "delta", float(self.delta))
        if int(self.p) != self.p:
            raise InvalidEquation("the nonlinearity power p must be an integer")
        object.__setattr__(self, "p", int(self.p))
        if not all(math.isfinite(v) for v in (self.alpha, self.delta, *self.a, *self.b, *self.c)):
            raise InvalidEquation("coefficients must be finite")
        if not self.alpha > 0:
            raise InvalidEquation(f"alpha must be positive, got {self.alpha}")
        if self.delta == 0:
            raise InvalidEquation("delta must be nonzero")
        if self.p <= 1:
            raise InvalidEquation(f"p must be an integer > 1, got {self.p}")

        pc = np.zeros(m + 1)
        pc[0] = 1.0
        pc[1:] += self.a
        qc = np.array(self.b)  # b_{-1} + b_0 x + ... (the alpha/x term is separate)
        rc = np.array(self.c[1:]) if m > 1 else np.zeros(1)
        object.__setattr__(self, "_p_poly", tuple(pc))
        object.__setattr__(self, "_dp_poly", tuple(Polynomial(pc).deriv().coef))
        object.__setattr__(self, "_q_poly", tuple(qc))
        object.__setattr__(self, "_r_poly", tuple(rc))

        if self.singular_at_one:
            p1 = sum(self._p_poly)
            if abs(p1) > P_ONE_TOL:
                raise InvalidEquation(f"no singularity at x=1: p(1) = {p1:.3e} != 0")
            xs = np.linspace(0.0, 1.0, 2001)[:-1]
            xs = np.concatenate([xs, 1.0 - np.logspace(-8, -3, 30)])
            if np.any(Polynomial(pc)(xs) <= 0.0):
                raise InvalidEquation("p(x) must be positive on [0, 1)")

    @property
    def n(self) -> int:
        return len(self.a) - 2

    @property
    def c_minus1(self) -> float:
        return self.c[0]

    def p_at(self, x: float) -> float:
        return _horner(self._p_poly, x)

    def dp_at(self, x: float) -> float:
        return _horner(self._dp_poly, x)

    def q_at(self, x: float) -> float:
        return self.alpha / x + _horner(self._q_poly, x)

    def r_at(self, x: float) -> float:
        r = _horner(self._r_poly, x)
        if self.c[0] != 0.0:
            r += self.c[0] / x
        return r

    def residual(self, x: float, u: float, du: float, d2u: float) -> float:
        return self.p_at(x) * d2u + self.q_at(x) * du + self.r_at(x) * u + self.delta * u**self.p

    @property
    def r_is_constant(self) -> bool:
        return self.c[0] == 0.0 and all(v == 0.0 for v in self._r_poly[1:])

    # polynomial forms with the poles cleared, used by the recurrence engines

    def x_form(self):
        """Coefficient vectors of ``x p(x)``, ``x q(x)``, ``x r(x)``, ``delta x``.

        Multiplying the equation by x gives
        ``xp u'' + xq u' + xr u + (delta x) u**p = 0`` with polynomial
        coefficients.
        """
        xp = np.concatenate([[0.0], self._p_poly])
        xq = np.concatenate([[self.alpha], self._q_poly])
        xr = np.concatenate([[self.c[0]], self._r_poly])
        return xp, xq, xr, np.array([0.0, self.delta])

    def y_form(self):
        """Coefficient vectors in ``y = 1 - x`` after multiplying through by ``1 - y``.

        Returns ``(P, Q, R, D)`` such that ``P u_yy - Q u_y + R u + D u**p = 0``.
        """
        shift = Polynomial([1.0, -1.0])  # x = 1 - y
        P = shift * Polynomial(self._p_poly)(shift)
        Q = self.alpha + shift * Polynomial(self._q_poly)(shift)
        R = self.c[0] + shift * Polynomial(self._r_poly)(shift)
        D = self.delta * shift
        P = P.coef.copy()
        if self.singular_at_one:
            P[0] = 0.0  # p(1) = 0 up to rounding
        return P, np.atleast_1d(Q.coef), np.atleast_1d(R.coef), D.coef

    def to_dict(self) -> dict[str, Any]:
        return {
            "form": "general",
            "alpha": self.alpha,
            "delta": self.delta,
            "p": self.p,
            "a": list(self.a),
            "b": list(self.b),
            "c": list(self.c),
        }

    @classmethod
    def from_factored(cls, alpha, delta, p, abar, b=(0.0,), c=(0.0,)) -> "GeneralEquation":
        """Build from ``p(x) = (1 - x) pbar(x)``, ``pbar = 1 + abar_{-1} x + ...``."""
        fp = FactoredP(tuple(abar))
        return cls(alpha, delta, p, fp.a_coefficients(), b, c)


def lane_emden(alpha: float, delta: float, p: int) -> GeneralEquation:
    """The unperturbed core ``u'' + (alpha/x) u' + delta u**p = 0``."""
    return GeneralEquation(alpha, delta, p, singular_at_one=False)


@dataclass(frozen=True)
class FactoredP:
    """Coefficients of ``pbar`` in ``p(x) = (1 - x) pbar(x)``."""

    abar: tuple

    def __post_init__(self):
        object.__setattr__(self, "abar", tuple(float(v) for v in self.abar))
        roots = self.roots()
        if roots.size and np.min(np.abs(roots)) <= 1.0:
            raise InvalidEquation("pbar must have all zeros outside the closed unit disk")

    def poly(self) -> Polynomial:
        return Polynomial((1.0, *self.abar))

    def roots(self) -> np.ndarray:
        return self.poly().roots()

    def a_coefficients(self) -> tuple:
        """``a_{-1} .. a_n`` of the expanded ``p(x)``."""
        full = (Polynomial([1.0, -1.0]) * self.poly()).coef
        out = np.zeros(len(self.abar) + 1)
        out[: full.size - 1] = full[1:]
        return tuple(out)


@dataclass(frozen=True)
class Equation1:
    """``(1 - x**2) u'' + (alpha/x + beta x) u' - gamma u + delta u**p = 0``."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    p: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidEquation(f"alpha must be positive, got {self.alpha}")
        if self.delta == 0:
            raise InvalidEquation("delta must be nonzero")
        if int(self.p) != self.p or self.p <= 1:
            raise InvalidEquation(f"p must be an integer > 1, got {self.p}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "form": "equation1",
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "delta": self.delta,
            "p": self.p,
        }


def embed_equation1(eq1: Equation1) -> GeneralEquation:
    """Map Equation1 onto the general form (n = 0)."""
    return GeneralEquation(
        eq1.alpha,
        eq1.delta,
        eq1.p,
        a=(0.0, -1.0),
        b=(0.0, eq1.beta),
        c=(0.0, -eq1.gamma),
    )


def as_general(eq) -> GeneralEquation:
    return embed_equation1(eq) if isinstance(eq, Equation1) else eq


def equation_from_dict(d: dict[str, Any]):
    form = d.get("form", "general")
    try:
        if form == "general":
            return GeneralEquation(d["alpha"], d["delta"], d["p"], tuple(d["a"]), tuple(d["b"]), tuple(d["c"]))
        if form == "factored":
            return GeneralEquation.from_factored(
                d["alpha"], d["delta"], d["p"], d["abar"], tuple(d.get("b", (0.0,))), tuple(d.get("c", (0.0,)))
            )
        if form == "equation1":
            return Equation1(d["alpha"], d["beta"], d["gamma"], d["delta"], d["p"])
    except KeyError as exc:
        raise InvalidEquation(f"missing field {exc.args[0]!r} for form {form!r}") from None
    raise InvalidEquation(f"unknown equation form {form!r}")


# ---------------------------------------------------------------------------
# singular solution and matching condition


@dataclass(frozen=True)
class SingularSolutionData:
    """``u_inf(x) = b_inf * x**a_exp``."""

    a_exp: float
    b_inf: float

    def __call__(self, x):
        return self.b_inf * np.power(x, self.a_exp)

    def derivative(self, x):
        return self.a_exp * self.b_inf * np.power(x, self.a_exp - 1.0)

    def second_derivative(self, x):
        return self.a_exp * (self.a_exp - 1.0) * self.b_inf * np.power(x, self.a_exp - 2.0)


def singular_solution(eq) -> SingularSolutionData:
    eq = as_general(eq)
    p = eq.p
    a_exp = -2.0 / (p - 1)
    value = 2.0 * (eq.alpha * (p - 1) - (p + 1)) / (eq.delta * (p - 1) ** 2)
    return SingularSolutionData(a_exp, _real_root(value, p - 1))


def check_matching_condition(eq) -> np.ndarray:
    """Residuals ``a(a-1) a_k + a b_k + c_k`` for k = -1..n.

    The power-law solution exists iff all of them vanish (max below 1e-12).
    """
    eq = as_general(eq)
    sol = singular_solution(eq)  # raises AmplitudeUndefined when b_inf is not real
    a = sol.a_exp
    return a * (a - 1.0) * np.array(eq.a) + a * np.array(eq.b) + np.array(eq.c)


def satisfies_matching_condition(eq, tol: float = MATCHING_TOL) -> bool:
    return float(np.max(np.abs(check_matching_condition(eq)))) < tol


def singular_solution_residual(eq, xs) -> np.ndarray:
    """Relative residual of ``u_inf`` substituted into the equation at ``xs``.

    Each residual is divided by the largest individual term at that point.
    """
    eq = as_general(eq)
    s = singular_solution(eq)
    out = []
    for x in np.atleast_1d(xs):
        u, du, d2u = s(x), s.derivative(x), s.second_derivative(x)
        terms = [eq.p_at(x) * d2u, eq.q_at(x) * du, eq.r_at(x) * u, eq.delta * u**eq.p]
        out.append(abs(sum(terms)) / max(abs(t) for t in terms))
    return np.array(out)


def wrapping_point(eq, x0: float) -> PhasePoint:
    """Phase-plane image ``(u_inf(x0), u_inf'(x0))`` of the singular solution."""
    if not 0.0 < x0 <= 1.0:
        raise ValueError(f"x0 must lie in (0, 1], got {x0}")
    s = singular_solution(eq)
    u = s.b_inf * x0**s.a_exp
    return PhasePoint(x0, u, s.a_exp * u / x0)


def gamma_for_matching(alpha: float, beta: float, p: int) -> float:
    """The gamma that makes Equation1 admit the power-law solution."""
    return (2.0 / (1.0 - p)) * ((p + 1.0) / (p - 1.0) + beta)


def constant_solution(eq1: Equation1) -> float:
    """Nonzero constant solution ``(gamma/delta)**(1/(p-1))`` of Equation1."""
    try:
        return _real_root(eq1.gamma / eq1.delta, eq1.p - 1)
    except AmplitudeUndefined:
        raise NoConstantSolution(f"gamma/delta = {eq1.gamma / eq1.delta} has no real root") from None


def general_constant_solution(eq) -> float | None:
    """Constant solution of a general equation, if one exists and is nonzero.

    A constant ``u0`` solves the equation iff ``r(x) u0 + delta u0**p`` vanishes
    identically, i.e. r is a constant ``r0`` and ``u0**(p-1) = -r0/delta``.
    """
    if isinstance(eq, Equation1):
        try:
            u0 = constant_solution(eq)
        except NoConstantSolution:
            return None
        return u0 if u0 != 0.0 else None
    if not eq.r_is_constant:
        return None
    r0 = eq._r_poly[0]
    try:
        u0 = _real_root(-r0 / eq.delta, eq.p - 1)
    except AmplitudeUndefined:
        return None
    return u0 if u0 != 0.0 else None


@dataclass(frozen=True)
class DerivedConstants:
    A: float
    B: float
    C: float

    @property
    def k_res(self) -> float:
        return self.B / self.A


def derived_constants(eq) -> DerivedConstants:
    """Leading constants of the x=1 expansion.

    ``A`` is the coefficient of ``y u_yy``, ``B`` that of ``-u_y`` and ``C``
    that of ``u`` at ``y = 0`` in the cleared y-form.  The resonance
    parameter is ``B / A``.
    """
    eq = as_general(eq)
    P, Q, R, _ = eq.y_form()
    A = float(P[1]) if P.size > 1 else 0.0
    if A == 0.0 or abs(A) < 1e-14:
        raise DegenerateExpansion("A = 0: x=1 is not a simple zero of p(x)")
    return DerivedConstants(A, float(Q[0]), float(R[0]))
