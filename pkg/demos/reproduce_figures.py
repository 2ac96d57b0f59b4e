"""Solve the three built-in configurations and print their classification.

Run from the repository root::

    python3 demos/reproduce_figures.py
"""

from lebvp.cli import figure_config, run


def main():
    for fig in (3, 4, 5):
        cfg = figure_config(fig)
        res = run(cfg)
        cls = res.report.classification
        beta = cfg.equation["beta"]
        print(f"beta = {beta:+.5f}: {cls['case']}, {len(res.report.intersections)} intersections")
        for h in res.report.intersections:
            print(f"    u(0) = {h['c_star']:9.5f}   u(1) = {h['b_star']:8.5f}")
        if cls["relative_distance"] is not None:
            print(f"    relative distance from C1 to P_inf: {cls['relative_distance']:.2e}")


if __name__ == "__main__":
    main()
