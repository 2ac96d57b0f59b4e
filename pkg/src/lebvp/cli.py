"""Command-line driver: ``check``, ``solve``, ``reproduce`` and ``sweep``.

Exit codes: 0 success, 2 malformed configuration, 3 invariant violation in
the equation or run settings, 4 pipeline failure (nothing confirmed).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .asymptotics import regime
from .continuation import IntegrationOptions, monitor
from .equation import (
    Equation1,
    as_general,
    check_matching_condition,
    derived_constants,
    equation_from_dict,
    general_constant_solution,
    singular_solution,
    wrapping_point,
)
from .errors import AmplitudeUndefined, InvalidEquation, LEBVPError, MatchDegraded
from .local import resonance_report
from .matching import (
    CurveSettings,
    PhaseCurve,
    Which,
    assemble,
    bounding_box,
    classify,
    classify_counts,
    default_b_grid,
    default_c_grid,
    find_intersections,
    trace_curve,
    write_curves_csv,
)

log = logging.getLogger("lebvp")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_FAILURE = 0, 2, 3, 4


class ConfigError(ValueError):
    """Configuration that cannot be parsed (exit code 2)."""


class ConfigInvariant(ValueError):
    """Parsed configuration that violates a run invariant (exit code 3)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class GridSpec:
    c_max: float = 50.0
    c_linear: int = 41
    c_per_efold: int = 40
    b_max: float | None = None  # None: twice the constant solution
    b_points: int = 121
    negative: bool = False


@dataclass
class Tolerances:
    rtol: float = 1e-10
    atol: float = 1e-12
    tol_P: float = 1e-3
    max_gap: float = 0.05


@dataclass
class RunConfig:
    equation: dict
    x0: float = 0.5
    epsilon: float = 0.01
    series_order: int = 40
    grids: GridSpec = field(default_factory=GridSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    out_dir: str = "out"
    threads: int = 1
    samples: int = 201

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict) or "equation" not in d:
            raise ConfigError("configuration must be an object with an 'equation' entry")
        d = dict(d)
        try:
            grids = GridSpec(**d.pop("grids", {}))
            tols = Tolerances(**d.pop("tolerances", {}))
            cfg = cls(grids=grids, tolerances=tols, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(cfg.equation, dict):
            raise ConfigError("'equation' must be an object")
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def validate(self):
        """Build the equation and check the run invariants; returns the equation."""
        try:
            eq = equation_from_dict(self.equation)
        except InvalidEquation as exc:
            raise ConfigInvariant(str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad equation entry: {exc}") from None
        if not 0.0 < self.x0 < 1.0:
            raise ConfigInvariant(f"x0 must lie in (0, 1), got {self.x0}")
        positive = {
            "epsilon": self.epsilon,
            "rtol": self.tolerances.rtol,
            "atol": self.tolerances.atol,
            "tol_P": self.tolerances.tol_P,
            "max_gap": self.tolerances.max_gap,
            "c_max": self.grids.c_max,
        }
        if self.grids.b_max is not None:
            positive["b_max"] = self.grids.b_max
        for name, v in positive.items():
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigInvariant(f"{name} must be positive and finite, got {v}")
        if self.series_order < 8:
            raise ConfigInvariant("series_order must be at least 8")
        if self.grids.negative and as_general(eq).p % 2 == 0:
            raise ConfigInvariant("negative branches need an odd power p")
        return eq

    def settings(self) -> CurveSettings:
        opts = IntegrationOptions(rtol=self.tolerances.rtol, atol=self.tolerances.atol)
        return CurveSettings(self.series_order, self.epsilon, opts)


def figure_config(figure: int) -> RunConfig:
    """Built-in parameter sets: alpha=2, gamma=1/4, delta=1, p=7, x0=0.5."""
    beta = {3: -25 / 12, 4: -29 / 12, 5: -31 / 12}
    if figure not in beta:
        raise ConfigError(f"no built-in configuration for figure {figure}")
    eq = Equation1(2.0, beta[figure], 0.25, 1.0, 7)
    return RunConfig(equation=eq.to_dict(), out_dir=f"out/fig{figure}")


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class RunReport:
    config: dict
    classification: dict
    intersections: list
    P_inf: dict | None
    matching_residuals: list
    diagnostics: dict
    check: dict
    timestamp: str | None = None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["version"] = __version__
        if self.timestamp is None:
            d.pop("timestamp")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)


@dataclass
class RunResult:
    report: RunReport
    curves: tuple
    solutions: list
    exit_code: int


def check_report(eq) -> dict:
    """Structural summary of an equation; raises only for invariant violations."""
    geq = as_general(eq)
    out: dict[str, Any] = {"equation": eq.to_dict()}
    dc = derived_constants(geq)  # DegenerateExpansion when x=1 is not simple
    rep = resonance_report(geq)
    out["derived_constants"] = {"A": dc.A, "B": dc.B, "C": dc.C, "k_res": dc.k_res}
    out["resonance"] = {"resonant": rep.is_resonant, "leading_roots": list(rep.leading_roots)}
    reg = regime(geq.p, geq.alpha)
    out["regime"] = {
        "f": reg.f_val,
        "p_Q": reg.p_Q,
        "omega": reg.omega,
        "oscillatory": reg.oscillatory,
        "decay": reg.decay,
    }
    out["u0"] = general_constant_solution(eq)
    try:
        sing = singular_solution(geq)
        res = check_matching_condition(geq)
        out["singular_solution"] = {"exponent": sing.a_exp, "b_inf": sing.b_inf}
        out["matching_residuals"] = [float(v) for v in res]
        out["matching_condition_holds"] = bool(np.max(np.abs(res)) < 1e-12)
    except AmplitudeUndefined as exc:
        out["singular_solution"] = None
        out["matching_residuals"] = None
        out["matching_condition_holds"] = False
        out["singular_solution_note"] = str(exc)
    return out


def _mirror(grid: np.ndarray) -> np.ndarray:
    return np.unique(np.concatenate([-grid, grid]))


def _b_stop(eq, cfg: RunConfig) -> float:
    if cfg.grids.b_max is not None:
        return float(cfg.grids.b_max)
    u0 = general_constant_solution(eq)
    if u0 is not None:
        return 2.0 * abs(u0)
    try:
        return 2.0 * abs(singular_solution(eq).b_inf)
    except AmplitudeUndefined:
        return 2.0


def _cut_at_blowup(curve: PhaseCurve) -> PhaseCurve:
    """Keep the C1 branch from b=0 up to the first blow-up on either side."""
    if not curve.failures:
        return curve
    f = np.asarray(curve.failures)
    hi = f[f > 0].min() if np.any(f > 0) else np.inf
    lo = f[f < 0].max() if np.any(f < 0) else -np.inf
    keep = (curve.params > lo) & (curve.params < hi)
    return dataclasses.replace(curve, params=curve.params[keep], points=curve.points[keep])


def run(cfg: RunConfig, timestamp: bool = False) -> RunResult:
    """Trace, intersect, assemble and classify for one configuration."""
    eq = cfg.validate()
    geq = as_general(eq)
    chk = check_report(eq)
    settings = cfg.settings()
    u0 = general_constant_solution(eq)
    extra = [] if u0 is None else [abs(u0)]

    c_grid = default_c_grid(cfg.grids.c_max, cfg.grids.c_linear, cfg.grids.c_per_efold, extra)
    b_grid = default_b_grid(_b_stop(eq, cfg), cfg.grids.b_points, extra)
    if cfg.grids.negative:
        c_grid, b_grid = _mirror(c_grid), _mirror(b_grid)

    kw = dict(settings=settings, max_gap=cfg.tolerances.max_gap, workers=cfg.threads)
    C0 = trace_curve(geq, Which.C0, cfg.x0, c_grid, **kw)
    C1 = _cut_at_blowup(trace_curve(geq, Which.C1, cfg.x0, b_grid, focus=bounding_box(C0), **kw))
    hits = find_intersections(geq, C0, C1, settings)

    solutions, records, degraded = [], [], []
    violations = 0
    for h in hits:
        try:
            g = assemble(geq, cfg.x0, h, settings)
        except MatchDegraded as exc:
            degraded.append({"c_star": h.c_star, "b_star": h.b_star, "error": str(exc)})
            continue
        solutions.append(g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for tr in (g.left, g.right):
                violations += monitor(geq, tr).violations
        records.append({
            "c_star": h.c_star,
            "b_star": h.b_star,
            "u": h.point.u,
            "du": h.point.du,
            "residual": h.refine_residual,
            "mismatch": g.mismatch,
        })
    kept = [h for h in hits if any(h.c_star == s.c_star and h.b_star == s.b_star for s in solutions)]

    try:
        P = wrapping_point(geq, cfg.x0)
        P_inf = {"x": P.x, "u": P.u, "du": P.du}
        cls = classify(geq, cfg.x0, C1, kept, cfg.tolerances.tol_P, settings)
    except AmplitudeUndefined:
        P_inf = None
        cls = classify_counts(geq, kept)

    diagnostics = {
        "c_failures": [float(v) for v in C0.failures],
        "b_failures": [float(v) for v in C1.failures],
        "degraded": degraded,
        "lyapunov_violations": int(violations),
        "n_curve_points": {"C0": len(C0), "C1": len(C1)},
    }
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat() if timestamp else None
    report = RunReport(
        config=cfg.to_dict(),
        classification=cls.as_dict(),
        intersections=records,
        P_inf=P_inf,
        matching_residuals=chk["matching_residuals"],
        diagnostics=diagnostics,
        check=chk,
        timestamp=stamp,
    )
    code = EXIT_OK if solutions else EXIT_FAILURE
    return RunResult(report, (C0, C1), solutions, code)


def write_outputs(result: RunResult, out_dir: Path, samples: int = 201) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_curves_csv(result.curves, out_dir / "curves.csv")
    xs = np.linspace(0.0, 1.0, samples)
    with open(out_dir / "solutions.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["solution_id", "x", "u", "du"])
        for k, g in enumerate(result.solutions):
            for x, u, du in g.sample(xs):
                w.writerow([k, repr(float(x)), repr(float(u)), repr(float(du))])
    (out_dir / "report.json").write_text(result.report.to_json() + "\n")


# ---------------------------------------------------------------------------
# sweep


SWEEP_HEADER = ["parameter", "value", "n_intersections", "n_nontrivial", "classification", "distance_to_P_inf"]


def _sweep_point(cfg_dict: dict, parameter: str, value: float) -> list:
    d = json.loads(json.dumps(cfg_dict))
    d["equation"][parameter] = value
    d["threads"] = 1
    try:
        res = run(RunConfig.from_dict(d))
        c = res.report.classification
        return [parameter, repr(value), c["n_intersections"], c["n_nontrivial"], c["case"],
                repr(c["distance_to_P_inf"]) if c["distance_to_P_inf"] is not None else ""]
    except (LEBVPError, ConfigError, ConfigInvariant, ValueError) as exc:
        log.warning("sweep point %s=%r failed: %s", parameter, value, exc)
        return [parameter, repr(value), "", "", "error", ""]


def sweep(cfg: RunConfig, parameter: str, values, workers: int = 1) -> list[list]:
    """Classification per value of one scalar equation parameter, in input order."""
    if parameter not in cfg.equation or not isinstance(cfg.equation[parameter], (int, float)):
        raise ConfigError(f"{parameter!r} is not a scalar entry of the equation")
    values = [float(v) for v in values]
    base = cfg.to_dict()
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, [base] * len(values), [parameter] * len(values), values))
    else:
        rows = [_sweep_point(base, parameter, v) for v in values]
    return rows


# ---------------------------------------------------------------------------
# argument handling


def _load_config(args) -> RunConfig:
    if getattr(args, "figure", None) is not None:
        cfg = figure_config(args.figure)
    elif args.config is None:
        raise ConfigError("--config is required")
    else:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = RunConfig.from_json(text)
    overrides = {
        "x0": args.x0,
        "epsilon": args.epsilon,
        "series_order": args.order,
        "out_dir": args.out_dir,
        "threads": args.threads,
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if args.c_max is not None:
        cfg.grids.c_max = args.c_max
    if args.b_max is not None:
        cfg.grids.b_max = args.b_max
    return cfg


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", help="run configuration (JSON)")
    p.add_argument("--x0", type=float, help="matching abscissa in (0, 1)")
    p.add_argument("--epsilon", type=float, help="offset from the singular endpoints")
    p.add_argument("--order", type=int, help="series truncation order")
    p.add_argument("--c-max", type=float, help="largest u(0) on the C0 grid")
    p.add_argument("--b-max", type=float, help="largest u(1) on the C1 grid")
    p.add_argument("--out-dir", help="directory for CSV/JSON output")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from report.json")
    p.add_argument("--threads", type=int, help="worker processes for curve tracing")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lebvp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("check", help="validate an equation and print derived data"))
    _common(sub.add_parser("solve", help="find and classify global solutions"))
    rp = sub.add_parser("reproduce", help="run a built-in figure configuration")
    rp.add_argument("figure", type=int, choices=(3, 4, 5))
    _common(rp, config=False)
    sw = sub.add_parser("sweep", help="classify over values of one equation parameter")
    _common(sw)
    sw.add_argument("--param", required=True, help="equation field to vary, e.g. beta")
    g = sw.add_mutually_exclusive_group(required=True)
    g.add_argument("--values", type=float, nargs="*", help="explicit parameter values")
    g.add_argument("--range", type=float, nargs=3, metavar=("START", "STOP", "NUM"),
                   help="NUM evenly spaced values from START to STOP")
    return ap


def _cmd_check(cfg: RunConfig) -> int:
    eq = cfg.validate()
    info = check_report(eq)
    info["x0"] = cfg.x0
    try:
        P = wrapping_point(eq, cfg.x0)
        info["P_inf"] = {"u": P.u, "du": P.du}
    except AmplitudeUndefined:
        info["P_inf"] = None
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_solve(cfg: RunConfig, timestamp: bool) -> int:
    result = run(cfg, timestamp=timestamp)
    write_outputs(result, Path(cfg.out_dir), cfg.samples)
    c = result.report.classification
    print(f"{c['case']}: {len(result.solutions)} global solutions; output in {cfg.out_dir}")
    for rec in result.report.intersections:
        print(f"  c*={rec['c_star']:.10g}  b*={rec['b_star']:.10g}  mismatch={rec['mismatch']:.2e}")
    return result.exit_code


def _cmd_sweep(cfg: RunConfig, args) -> int:
    cfg.validate()
    if args.range is not None:
        start, stop, num = args.range
        if num < 0 or int(num) != num:
            raise ConfigError("NUM must be a nonnegative integer")
        values = np.linspace(start, stop, int(num)).tolist()
    else:
        values = args.values or []
    rows = sweep(cfg, args.param, values, workers=cfg.threads)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)
    for r in rows:
        print(f"{r[0]}={float(r[1]):.6g}: {r[4]} ({r[2]} intersections)")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
        if args.command == "check":
            return _cmd_check(cfg)
        if args.command in ("solve", "reproduce"):
            return _cmd_solve(cfg, timestamp=not args.no_timestamp)
        return _cmd_sweep(cfg, args)
    except ConfigError as exc:
        print(f"error: malformed configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigInvariant, InvalidEquation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except LEBVPError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT if args.command == "check" else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
