import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lebvp.asymptotics import (
    fit_envelope,
    fit_signal,
    large_c_convergence,
    le_series,
    le_trajectory,
    regime,
    rescale_from_le,
    rescale_to_le,
)
from lebvp.equation import GeneralEquation, lane_emden
from lebvp.errors import InsufficientOscillations
from lebvp.series import differentiate, evaluate


def test_regime_values():
    r = regime(3, 2.0)
    assert r.f_val == 4.0 and not r.oscillatory and r.omega is None
    assert regime(5, 2.0).p_Q == 5.0
    r7 = regime(7, 2.0)
    assert r7.f_val == -188.0
    assert r7.omega == pytest.approx(math.sqrt(188) / 12)
    assert r7.oscillatory
    assert r7.decay == pytest.approx(-1 / 6)
    assert regime(7, 1.0).p_Q is None


@given(st.integers(2, 15), st.floats(0.1, 10.0))
def test_omega_defined_iff_f_negative(p, alpha):
    r = regime(p, alpha)
    assert (r.omega is not None and r.omega > 0) == (r.f_val < 0)
    if r.oscillatory:
        assert p % 2 == 1


def test_le_series_closed_forms():
    assert not np.any(le_series(2.0, 1.0, 7, 0.0).coeffs)
    s5 = le_series(2.0, 1.0, 5, 1.0)
    assert s5[1] == 0.0
    assert s5[2] == pytest.approx(-1 / 6) and s5[4] == pytest.approx(1 / 24)
    assert le_series(2.0, 1.0, 7, 1.0)[2] == pytest.approx(-1 / 6)
    with pytest.raises(ValueError):
        le_series(0.0, 1.0, 5, 1.0)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_le_series_solves_equation(p):
    s = le_series(2.0, 1.0, p, 1.0, order=40)
    d1 = differentiate(s)
    d2 = differentiate(d1)
    for x in (0.1, 0.25, 0.4):
        terms = [evaluate(d2, x), 2 / x * evaluate(d1, x), evaluate(s, x) ** p]
        assert abs(sum(terms)) < 1e-12 * max(map(abs, terms))


def test_le_series_agrees_with_general_engine():
    from lebvp.local import expand_at_zero

    # the engine may store a rescaled variable, so compare values
    a = le_series(2.5, 0.7, 5, 1.3, order=40)
    b = expand_at_zero(lane_emden(2.5, 0.7, 5), 1.3, order=40).series
    for x in (0.05, 0.15, 0.3):
        assert evaluate(a, x) == pytest.approx(evaluate(b, x), rel=1e-13)


def test_rescale(fig3):
    assert rescale_to_le(fig3, 1.0, (0.3, 0.2, -0.1)) == (0.3, 0.2, -0.1)
    assert rescale_to_le(fig3, 16.0, (0.0, 16.0, 0.0))[:2] == (0.0, 1.0)
    assert rescale_to_le(fig3, 16.0, (0.25, 1.0, 0.0))[0] == pytest.approx(1024.0)
    pt = (0.0123, 4.56, -78.9)
    back = rescale_from_le(fig3, 7.0, rescale_to_le(fig3, 7.0, pt))
    assert back == pytest.approx(pt, rel=1e-15)
    with pytest.raises(ValueError):
        rescale_to_le(fig3, 0.0, pt)


def test_fit_recovers_synthetic_model():
    t = np.linspace(0.0, 20.0, 4000)
    A0, decay, omega, phi = 0.3, -1 / 6, 1.14, 0.7
    s = A0 * np.exp(decay * t) * np.sin(omega * t + phi)
    fit = fit_signal(t, s)
    assert fit.omega_hat == pytest.approx(omega, abs=1e-6)
    assert fit.decay_hat == pytest.approx(decay, abs=1e-6)
    assert fit.A_0 == pytest.approx(A0, abs=1e-6)
    assert fit.phi == pytest.approx(phi, abs=1e-6)
    json.dumps(fit.to_dict())


def test_fit_lane_emden_asymptotics():
    reg = regime(7, 2.0)
    fit = fit_envelope(le_trajectory(2.0, 1.0, 7, 1e4), reg)
    assert fit.omega_hat == pytest.approx(reg.omega, rel=0.05)
    assert fit.decay_hat == pytest.approx(reg.decay, rel=0.10)
    assert fit.fit_window[1] == pytest.approx(1e4)
    assert math.isfinite(fit.residual)


def test_fit_guards():
    with pytest.raises(InsufficientOscillations):
        fit_envelope(le_trajectory(2.0, 1.0, 3, 10.0), regime(3, 2.0))
    t = np.linspace(0, 2, 100)
    with pytest.raises(InsufficientOscillations):
        fit_signal(t, np.sin(t))


def test_large_c_convergence(fig3):
    dev = large_c_convergence(fig3, 1.0, [2, 4, 8, 16])
    assert all(b < a for a, b in zip(dev, dev[1:]))
    assert len(large_c_convergence(fig3, 1.0, [3.0])) == 1
    # with no perturbation the equation is Lane-Emden itself
    pure = GeneralEquation(2.0, 1.0, 7, singular_at_one=False)
    assert max(large_c_convergence(pure, 1.0, [2, 4, 8])) < 1e-10
