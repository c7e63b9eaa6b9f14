"""
Cavity mode basis
=================

Hermite-Gaussian modes on a symmetric grid, their orthonormality and the
frequency ladder used by every other step.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from pbecsim import build_basis, mode_value
from pbecsim.modes import quadrature_drift

basis = build_basis(6, width=10.0)
print("frequencies (THz):", basis.frequencies)
print("grid: %d points on [-%g, %g] um" % (basis.grid_points, basis.grid_extent, basis.grid_extent))

# %%
# Gram matrix under the trapezoid rule, and its change when the grid is refined
gram = basis.gram()
print("max |Gram - I| =", np.abs(gram - np.eye(6)).max())
print("G vs 2G drift  =", quadrature_drift(basis))

# %%
# parity is exact on the symmetric grid
for p in range(6):
    flip = basis.psi[p, ::-1]
    print(p, np.array_equal(flip, (-1) ** p * basis.psi[p]))

print("psi_0(0) =", mode_value(basis, 0, 0.0), " expected", np.pi ** -0.25 / np.sqrt(10.0))

# %%
fig, ax = plt.subplots(figsize=(7, 4))
for p in range(6):
    ax.plot(basis.x, basis.psi[p] + 0.15 * p, label=f"[{p}]  {basis.frequencies[p]:.1f} THz")
ax.set_xlim(-40, 40)
ax.set_xlabel("x (um)")
ax.set_ylabel(r"$\psi_p(x)$ (offset)")
ax.legend(fontsize=8)
plt.show()
