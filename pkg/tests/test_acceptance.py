"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line."""

import math
import time

import numpy as np

from conftest import U0, figure_equation
from lebvp import (
    IntegrationOptions,
    PowerSeries,
    Which,
    check_matching_condition,
    classify,
    expand_at_one,
    expand_at_zero,
    find_intersections,
    integrate,
    lane_emden,
    large_c_convergence,
    monitor,
    phase_state,
    regime,
    wrapping_point,
)
from lebvp.asymptotics import fit_envelope, le_series, le_trajectory
from lebvp.equation import singular_solution_residual
from lebvp.matching import CurveSettings, bounding_box, continue_branch, default_b_grid, default_c_grid, trace_curve
from lebvp.series import evaluate_with_derivative, power, power_by_multiplication, power_recurrence

X0 = 0.5


def _curves(eq, c_max, scale=1):
    C0 = trace_curve(eq, Which.C0, X0, default_c_grid(c_max, 40 * scale + 1, 40 * scale, extra=[U0]),
                     max_gap=0.05 / scale)
    C1 = trace_curve(eq, Which.C1, X0, default_b_grid(2 * U0, 120 * scale + 1, extra=[U0]),
                     max_gap=0.05 / scale, focus=bounding_box(C0))
    return C0, C1


def test_criterion_1_figure3(acceptance):
    t = time.perf_counter()
    eq = figure_equation(3)
    C0, C1 = _curves(eq, 50.0)
    hits50 = find_intersections(eq, C0, C1)
    C0b = trace_curve(eq, Which.C0, X0, default_c_grid(100.0, extra=[U0]))
    hits100 = find_intersections(eq, C0b, C1)
    cls = classify(eq, X0, C1, hits50)
    res = float(np.max(np.abs(check_matching_condition(eq))))
    elapsed = time.perf_counter() - t

    P = wrapping_point(eq, X0)
    closed_form = (math.sqrt(2) / 3 ** (1 / 3), -2 * math.sqrt(2) / (3 * 3 ** (1 / 3)))
    ok = (
        math.isclose(P.u, closed_form[0], rel_tol=1e-14)
        and math.isclose(P.du, closed_form[1], rel_tol=1e-14)
        and cls.relative_distance < 1e-3
        and res < 1e-12
        and len(hits100) > len(hits50)
        and elapsed < 60
    )
    acceptance(1, ok, f"dist/|P_inf|={cls.relative_distance:.2e} residual={res:.1e} "
                      f"count {len(hits50)} -> {len(hits100)} ({elapsed:.1f}s)")
    assert ok


def test_criterion_2_figure5(acceptance):
    t = time.perf_counter()
    eq = figure_equation(5)
    hits = find_intersections(eq, *_curves(eq, 50.0))
    elapsed = time.perf_counter() - t
    ok = (
        len(hits) == 2
        and abs(hits[0].c_star) < 1e-8 and abs(hits[0].b_star) < 1e-8
        and abs(hits[1].c_star - U0) < 1e-8 and abs(hits[1].b_star - U0) < 1e-8
        and elapsed < 60
    )
    acceptance(2, ok, f"{len(hits)} intersections at c*={[round(h.c_star, 10) for h in hits]} ({elapsed:.1f}s)")
    assert ok


def test_criterion_3_figure4(acceptance):
    t = time.perf_counter()
    eq = figure_equation(4)
    C0, C1 = _curves(eq, 50.0)
    hits = find_intersections(eq, C0, C1)
    cls = classify(eq, X0, C1, hits)
    hits2 = find_intersections(eq, *_curves(eq, 50.0, scale=2))
    elapsed = time.perf_counter() - t
    ok = (
        cls.case_id.value == "FiniteFamily"
        and cls.relative_distance >= 1e-3
        and len(hits) == len(hits2)
        and elapsed < 60
    )
    acceptance(3, ok, f"{cls.case_id.value}, dist/|P_inf|={cls.relative_distance:.3f}, "
                      f"count {len(hits)} vs {len(hits2)} on doubled grid ({elapsed:.1f}s)")
    assert ok


def test_criterion_4_lane_emden_closed_form(acceptance):
    exact = lambda x: (1 + x * x / 3) ** -0.5
    s = le_series(2.0, 1.0, 5, 1.0, order=40)
    xs = np.linspace(0.01, 0.9, 90)
    err_series = max(abs(s(x) - exact(x)) for x in xs)
    eq = lane_emden(2.0, 1.0, 5)
    start = phase_state(expand_at_zero(eq, 1.0), 0.01)
    tr = integrate(eq, start, 0.9, x_eval=xs[1:-1])
    err_traj = float(np.max(np.abs(tr.u - exact(tr.x))))
    ok = err_series < 1e-8 and err_traj < 1e-8
    acceptance(4, ok, f"series err={err_series:.1e}, integrator err={err_traj:.1e}")
    assert ok


def test_criterion_5_le_asymptotics(acceptance):
    t = time.perf_counter()
    reg = regime(7, 2.0)
    fit = fit_envelope(le_trajectory(2.0, 1.0, 7, 1e4), reg)
    elapsed = time.perf_counter() - t
    e_om = abs(fit.omega_hat / reg.omega - 1)
    e_dec = abs(fit.decay_hat / reg.decay - 1)
    ok = e_om < 0.05 and e_dec < 0.10 and elapsed < 30
    acceptance(5, ok, f"omega_hat={fit.omega_hat:.4f} ({e_om:.1%}), decay_hat={fit.decay_hat:.4f} "
                      f"({e_dec:.1%}) ({elapsed:.1f}s)")
    assert ok


def test_criterion_6_series_vs_integrator(acceptance):
    eq = figure_equation(3)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for c, b in zip(rng.uniform(0.0, 50.0, 20), rng.uniform(0.0, 2 * U0, 20)):
        for sol in (expand_at_zero(eq, c), expand_at_one(eq, b)):
            eps = sol.default_epsilon()
            start = phase_state(sol, eps)
            sign = 1.0 if sol.x_center == 0.0 else -1.0
            probes = [sol.x_center + sign * eps * k for k in np.linspace(1.1, 2.0, 10)]
            tr = integrate(eq, start, probes[-1], x_eval=probes[:-1])
            for x in probes:
                got = tr.at(x)
                ref = evaluate_with_derivative(sol.series, abs(x - sol.x_center))
                ref_du = sign * ref.du
                worst = max(worst,
                            abs(got.u - ref.u) / max(1.0, abs(ref.u)),
                            abs(got.du - ref_du) / max(1.0, abs(ref_du)))
    ok = worst < 1e-8
    acceptance(6, ok, f"max scaled disagreement {worst:.1e} over 20 (c, b) pairs")
    assert ok


def test_criterion_7_cauchy_power(acceptance):
    rng = np.random.default_rng(7)
    worst_rec = worst_pow = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 31))
        p = int(rng.integers(2, 10))
        a = rng.uniform(-1.0, 1.0, n + 1)
        a[0] = rng.choice([-1, 1]) * rng.uniform(1.0, 2.0)
        a[1:] *= rng.uniform(0, 1) * abs(a[0])  # constant term dominates
        s = PowerSeries(a)
        ref = power_by_multiplication(s, p).coeffs
        bound = power_by_multiplication(PowerSeries(np.abs(a)), p).coeffs
        worst_rec = max(worst_rec, float(np.max(np.abs(power_recurrence(a, p) - ref) / bound)))
        b = rng.uniform(-2.0, 2.0, n + 1)
        sb = PowerSeries(b)
        ref_b = power_by_multiplication(sb, p).coeffs
        bound_b = power_by_multiplication(PowerSeries(np.abs(b)), p).coeffs
        worst_pow = max(worst_pow, float(np.max(np.abs(power(sb, p).coeffs - ref_b) / np.maximum(bound_b, 1e-300))))
    ok = worst_rec < 1e-12 and worst_pow < 1e-12
    acceptance(7, ok, f"recurrence vs multiply {worst_rec:.1e}, power() on general series {worst_pow:.1e}")
    assert ok


def test_criterion_8_lyapunov(acceptance):
    eq = figure_equation(3)
    violations = branches = skipped = 0
    s = CurveSettings()
    for which, grid in ((Which.C0, default_c_grid(50.0, extra=[U0])),
                        (Which.C1, default_b_grid(2 * U0, extra=[U0]))):
        for prm in grid:
            _, _, tr = continue_branch(eq, which, float(prm), X0, s, record=True)
            m = monitor(eq, tr)
            violations += m.violations
            skipped += m.skipped is not None
            branches += 1
    ok = violations == 0 and skipped == 0
    acceptance(8, ok, f"{violations} violations over {branches} branches")
    assert ok


def test_criterion_9_singular_solution(acceptance):
    eq = figure_equation(3)
    res = singular_solution_residual(eq, np.linspace(0.1, 0.9, 50))
    ok = float(np.max(res)) < 1e-10
    acceptance(9, ok, f"max relative residual {np.max(res):.1e}")
    assert ok


def test_criterion_10_large_c(acceptance):
    dev = large_c_convergence(figure_equation(3), 1.0, [2, 4, 8, 16])
    ok = all(b < a for a, b in zip(dev, dev[1:]))
    acceptance(10, ok, "deviations " + ", ".join(f"{d:.1e}" for d in dev))
    assert ok
