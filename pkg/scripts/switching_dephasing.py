"""Single-qubit rethermalization dephasing with suddenly switched couplings.

Compares the integrated coherence decay rate with the static-displacement
estimate kappa (2 nbar + 1) (2 g / Delta)^2 / 2 and with the time-averaged
value for a displacement oscillating between 0 and 2 g / Delta.

Usage: python3 scripts/switching_dephasing.py
"""

import math

import numpy as np

from hotnet.lindblad import JointState, NoiseModel, evolve_cycle, thermal_state


def main():
    Delta, kappa, cycles = -1.0, 2e-3, 20
    print("g      nbar  measured     static      time-averaged")
    for g in (0.02, 0.05, 0.1):
        for nbar in (0.0, 0.582):
            state = JointState.product(np.full((2, 2), 0.5, complex), thermal_state(nbar, 24))
            cache = {}
            for _ in range(cycles):
                evolve_cycle(state, [g], 2 * math.pi, Delta, NoiseModel(0.0, kappa, nbar), 8, damping_cache=cache)
            rate = -math.log(2 * abs(state.spin_state()[0, 1])) / (cycles * 2 * math.pi)
            static = kappa * (2 * nbar + 1) * (2 * g / Delta) ** 2 / 2
            print(f"{g:<6.2f} {nbar:<5.3f} {rate:.4e}  {static:.4e}  {2 * static:.4e}")


if __name__ == "__main__":
    main()
