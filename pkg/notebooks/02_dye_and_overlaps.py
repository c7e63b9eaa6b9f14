"""
Dye rates and overlap matrices
==============================

Kennard-Stepanov absorption and emission on the mode ladder, the
calibration of the peak rate, and the density-weighted overlaps h and f.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from pbecsim import build_basis, build_profiles, compute_f, compute_h, ks_rates
from pbecsim.dye import thermal_frequency
from pbecsim.dynamics import calibrate_peak_rate

basis = build_basis(6)
profiles = build_profiles(basis, 1e9, "uniform", pump_width=12.0)
kappa = 0.2

peak = calibrate_peak_rate(basis, profiles, kappa)
rates = ks_rates(basis.frequencies, peak_rate=peak)
print("k_B T / h at 300 K:", thermal_frequency(300.0), "THz")
print("A_p:", rates.absorption)
print("E_p:", rates.emission)
print("E_0 / A_0 =", rates.emission[0] / rates.absorption[0])

# %%
h = compute_h(basis, profiles)
print("A_0 h_00 / kappa =", rates.absorption[0] * h[0, 0] / kappa)

# a saturated hole around the pump spot couples modes 0 and 2 but never 0 and 1
fx = 0.3 + 0.4 * profiles.pump_shape
f = compute_f(basis, profiles, fx)
np.set_printoptions(precision=3, linewidth=120)
print(f / f[0, 0])

# %%
om = np.linspace(520, 560, 400)
spec = ks_rates(om, peak_rate=1.0)
fig, ax = plt.subplots(figsize=(6, 4))
ax.semilogy(om, spec.absorption, label="absorption")
ax.semilogy(om, spec.emission, label="emission")
for w in basis.frequencies:
    ax.axvline(w, color="0.8", lw=0.8)
ax.set_xlabel("frequency (THz)")
ax.legend()
plt.show()
