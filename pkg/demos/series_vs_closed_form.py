"""Check the local expansion at x=0 against the closed-form p=5 Lane-Emden solution.

u(x) = (1 + x^2/3)^(-1/2) solves u'' + (2/x) u' + u^5 = 0 with u(0) = 1.
"""

import numpy as np

from lebvp import evaluate, expand_at_zero, lane_emden


def main():
    sol = expand_at_zero(lane_emden(2.0, 1.0, 5), 1.0, order=40)
    print(f"trust radius: {sol.trust_radius:.3f}")
    for x in np.linspace(0.1, 0.8 * min(sol.trust_radius, 1.7), 5):
        exact = (1 + x * x / 3) ** -0.5
        err = abs(evaluate(sol.series, x) - exact)
        print(f"x = {x:.3f}   series error {err:.1e}")


if __name__ == "__main__":
    main()
