"""Dephasing filter functions of CPMG sequences and their link to infidelity.

Run with ``python demos/dephasing_filter_functions.py``.
"""

import numpy as np

from qctrlkit.filter_functions import filter_function, robust_infidelity_ff
from qctrlkit.noise import periodogram, psd_from_function, time_series
from qctrlkit.scenarios import DEPHASING, cpmg_sequence
from qctrlkit.simulator import NoiseChannel, robust_infidelity_mc

tau = 1e-6
omega = np.linspace(0, 2 * np.pi * 5e6, 1001)

# %% filter functions: free evolution is low-pass, CPMG-n peaks near n / (2 tau)
for n in (0, 1, 2, 4):
    ff = filter_function(cpmg_sequence(n, tau), DEPHASING, frequencies=omega, m=3000)
    peak = omega[np.argmax(ff.values)] / (2 * np.pi)
    print(f"CPMG-{n}: F(0) = {ff.values[0]:.3e} s^2, peak at {peak / 1e6:.2f} MHz")

# %% a 1/f-like dephasing spectrum and one synthesized realization
psd = psd_from_function(lambda w: 1 / (1 + w / (2 * np.pi * 2e6)), 2 * np.pi * 20e6, 401)
x = time_series(psd, seed=0)
print(f"\nseries: {x.size} samples, dt = {x.dt:.2e} s, variance {np.mean(x.samples ** 2):.3e}, "
      f"PSD power {psd.power():.3e}")
print("periodogram reproduces the input:", np.allclose(periodogram(x).samples, psd.samples))

# %% leading-order infidelity vs Monte Carlo as the noise weakens
ctrl = cpmg_sequence(2, tau)
ff = filter_function(ctrl, DEPHASING, frequencies=psd.frequencies)
unit = robust_infidelity_ff(ff, psd)
for target in (5e-2, 5e-3):
    scaled = psd.scaled(target / unit)
    mc = robust_infidelity_mc(ctrl, [NoiseChannel("additive", operator=DEPHASING, psd=scaled)],
                              trials=300, seed=1)
    print(f"I_ff = {target:.0e}: I_mc = {mc.value:.3e} +/- {mc.stderr:.1e}")
