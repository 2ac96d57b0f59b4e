"""Compare the decaying oscillation of a Lane-Emden solution with its predicted rate.

For p = 7 and alpha = 2 the reduced solution oscillates in ln x with angular
frequency ``omega`` and decays like exp(decay * ln x), both given by
``regime``. The fit below measures them from a long trajectory.
"""

from lebvp.asymptotics import fit_envelope, le_trajectory, regime


def main():
    reg = regime(7, 2.0)
    fit = fit_envelope(le_trajectory(2.0, 1.0, 7, 1e4), reg)
    print(f"omega: predicted {reg.omega:.4f}, fitted {fit.omega_hat:.4f}")
    print(f"decay: predicted {reg.decay:.4f}, fitted {fit.decay_hat:.4f}")
    print(f"fit window: x in [{fit.fit_window[0]:.2f}, {fit.fit_window[1]:.0f}]")


if __name__ == "__main__":
    main()
