import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lebvp.errors import CenterMismatch, OutsideTrustRadius, OutsideTrustRadiusWarning, ZeroLeadingCoefficient
from lebvp.series import (
    PowerSeries,
    differentiate,
    evaluate,
    evaluate_with_derivative,
    mul,
    power,
    power_by_multiplication,
    power_coefficient,
    power_recurrence,
    radius_estimate,
    recurrence_growth,
)

coeff = st.floats(-2.0, 2.0, allow_nan=False)
series_st = st.lists(coeff, min_size=1, max_size=12).map(PowerSeries)


def same_order(*ss):
    n = min(s.order for s in ss)
    return [s.truncate(n) for s in ss]


def test_constant_and_variable():
    one = PowerSeries.constant(1.0, order=5)
    x = PowerSeries.variable(order=5)
    assert one.coeffs.tolist() == [1, 0, 0, 0, 0, 0]
    assert x.coeffs.tolist() == [0, 1, 0, 0, 0, 0]
    assert ((one + x) * (one - x)).coeffs.tolist() == [1, 0, -1, 0, 0, 0]


def test_coefficients_are_read_only_and_finite():
    s = PowerSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        s.coeffs[0] = 3.0
    with pytest.raises(ValueError):
        PowerSeries([1.0, math.inf])
    with pytest.raises(ValueError):
        PowerSeries([])


def test_center_mismatch():
    with pytest.raises(CenterMismatch):
        mul(PowerSeries([1.0, 1.0]), PowerSeries([1.0, 1.0], center=1.0))
    with pytest.raises(CenterMismatch):
        PowerSeries([1.0]) + PowerSeries([1.0], scale=2.0)


def test_binomial_power():
    s = PowerSeries([1.0, 1.0, 0, 0, 0, 0])
    expected = [math.comb(5, k) for k in range(6)]
    for method in ("recurrence", "multiply", "auto"):
        np.testing.assert_allclose(power(s, 5, method).coeffs, expected, rtol=1e-15)


def test_power_edge_cases():
    s = PowerSeries([2.0, 1.0, 0.5])
    assert power(s, 0).coeffs.tolist() == [1, 0, 0]
    assert power(s, 1) is s
    with pytest.raises(ValueError):
        power(s, -1)
    with pytest.raises(ValueError):
        power(s, 2, method="bogus")


def test_recurrence_needs_nonzero_constant():
    with pytest.raises(ZeroLeadingCoefficient):
        power_recurrence([0.0, 1.0, 2.0], 3)
    # auto falls back to multiplication; x**3 truncated at order 4
    s = PowerSeries([0.0, 1.0, 0, 0, 0])
    assert power(s, 3).coeffs.tolist() == [0, 0, 0, 1, 0]


def test_recurrence_growth():
    assert recurrence_growth([1.0]) == 0.0
    assert recurrence_growth([0.0, 1.0]) == math.inf
    assert recurrence_growth([2.0, 1.0, 2.0]) == pytest.approx(1.0)


def test_power_coefficient_is_incremental_recurrence():
    a = np.array([1.5, -0.3, 0.2, 0.7, -0.1])
    c = np.zeros_like(a)
    for m in range(a.size):
        c[m] = power_coefficient(a, c, m, 4)
    np.testing.assert_allclose(c, power_by_multiplication(PowerSeries(a), 4).coeffs, rtol=1e-14)
    a0 = np.array([0.0, 1.0, 2.0, 0.0])
    c0 = np.zeros_like(a0)
    for m in range(a0.size):
        c0[m] = power_coefficient(a0, c0, m, 2)
    assert c0.tolist() == [0, 0, 1, 4]


def test_evaluate_matches_polyval():
    c = [0.3, -1.2, 0.5, 2.0]
    s = PowerSeries(c, center=0.5)
    for x in (0.1, 0.5, 0.9):
        assert evaluate(s, x) == pytest.approx(np.polyval(c[::-1], x - 0.5), rel=1e-15)
        pt = evaluate_with_derivative(s, x)
        assert pt.du == pytest.approx(np.polyval(np.polyder(c[::-1]), x - 0.5), rel=1e-14)


def test_scaled_series_is_the_same_function():
    c = np.array([1.0, 0.5, -0.25, 0.125])
    plain = PowerSeries(c)
    scaled = PowerSeries(c * 2.0 ** np.arange(4), scale=2.0)
    for x in (-0.3, 0.2, 0.7):
        assert evaluate(scaled, x) == pytest.approx(evaluate(plain, x), rel=1e-14)
        assert evaluate_with_derivative(scaled, x).du == pytest.approx(
            evaluate_with_derivative(plain, x).du, rel=1e-14)
    assert evaluate(differentiate(scaled), 0.3) == pytest.approx(evaluate(differentiate(plain), 0.3))


def test_trust_radius_warning_and_error():
    s = PowerSeries([1.0, 1.0])
    with pytest.warns(OutsideTrustRadiusWarning):
        evaluate(s, 0.6, radius=0.5)
    with pytest.raises(OutsideTrustRadius):
        evaluate_with_derivative(s, 0.6, radius=0.5, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate(s, 0.4, radius=0.5)


def test_radius_estimate_geometric():
    s = PowerSeries(0.5 ** np.arange(41))  # 1/(1 - x/2)
    assert radius_estimate(s) == pytest.approx(2.0, rel=1e-10)
    assert radius_estimate(PowerSeries([1.0] + [0.0] * 20)) == math.inf
    with pytest.raises(ValueError):
        radius_estimate(PowerSeries([1.0, 1.0]))


@given(series_st, series_st)
def test_mul_commutes(a, b):
    a, b = same_order(a, b)
    np.testing.assert_allclose((a * b).coeffs, (b * a).coeffs, atol=1e-12)


@given(series_st, series_st, series_st)
def test_mul_associates(a, b, c):
    a, b, c = same_order(a, b, c)
    np.testing.assert_allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-10)


@given(series_st, series_st)
def test_product_rule(a, b):
    a, b = same_order(a, b)
    if a.order == 0:
        return
    lhs = differentiate(a * b)
    rhs = differentiate(a) * b.truncate(a.order - 1) + a.truncate(a.order - 1) * differentiate(b)
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


@settings(max_examples=50)
@given(series_st, st.integers(2, 9))
def test_power_matches_repeated_product(a, p):
    ref = a
    for _ in range(p - 1):
        ref = ref * a
    bound = power_by_multiplication(PowerSeries(np.abs(a.coeffs)), p).coeffs
    err = np.abs(power(a, p).coeffs - ref.coeffs)
    assert np.all(err <= 1e-12 * bound + 1e-300)
