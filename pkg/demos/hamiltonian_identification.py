"""Maximum-likelihood estimate of a three-axis qubit Hamiltonian.

Free evolution from the +x, +y and +z states, 20 wait times each, with
Gaussian measurement noise of width 0.01.
"""

import numpy as np

from qctrlkit.identification import identify, simulate_data
from qctrlkit.scenarios.sysid import TRUE_RATES, ThreeAxisConfig, three_axis_experiments

exps = three_axis_experiments(ThreeAxisConfig(points=20))
data = simulate_data(TRUE_RATES, exps, 0.01, seed=0)
res = identify(exps, data, starts=30, seed=0)
mhz = 2 * np.pi * 1e6
for name, est, err, true in zip("xyz", res.theta, res.errors, TRUE_RATES):
    print(f"Omega_{name}: {est / mhz:.4f} +/- {err / mhz:.4f} (2 pi MHz), truth {true / mhz:.1f}")
