"""
Coherence times
===============

Closed-form ground-mode coherence time against the exactly propagated
two-time correlation, and the split of the ground population into the
emission-driven and correlation-driven parts.
"""

# %%
import numpy as np
import matplotlib.pyplot as plt

from pbecsim import coherence, generator, parse_config, run_sweep
from pbecsim.config import default_config_path

cfg = parse_config(default_config_path())
res = run_sweep(cfg)
pump = res.pumps
tau = res.column("tau0_ps")
tau_c = res.column("tau0_closed_ps")
k = int(np.nanargmax(tau_c))
print(f"closed-form tau0 peaks at pump {pump[k]:.3f} with {tau_c[k]:.0f} ps, "
      f"then falls to {tau_c[-1]:.0f} ps ({tau_c[k] / tau_c[-1]:.1f}x)")
print(f"n0 over the same range: {res.column('n_0')[k]:.0f} -> {res.column('n_0')[-1]:.0f}")

# %%
# the full propagation follows the slowest eigenvalue of the generator,
# which keeps growing with the total photon number
for j in (k, len(pump) - 1):
    lam = np.linalg.eigvals(generator(res.params[j], res.states[j])).real
    print(f"pump {pump[j]:.3f}: propagated {tau[j]:.0f} ps, 1/min eig(G) {1 / lam.min():.0f} ps, "
          f"2/G00 {tau_c[j]:.0f} ps")

# %%
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.semilogy(pump, tau, label="propagated")
ax1.semilogy(pump, tau_c, "x", label="closed form")
ax1.set_xlabel(r"$\Gamma_\uparrow/\Gamma_\downarrow$")
ax1.set_ylabel(r"$\tau_0$ (ps)")
ax1.legend()
ax2.semilogy(pump, res.column("n_0"), label=r"$n_0$")
ax2.semilogy(pump, res.column("ne"), label=r"$n_e$")
ax2.semilogy(pump, res.column("nc"), label=r"$n_c$")
ax2.set_xlabel(r"$\Gamma_\uparrow/\Gamma_\downarrow$")
ax2.legend()
plt.show()

# %%
# traces at the top pump point
top = coherence(res.params[-1], res.states[-1], t_max=5 * tau_c[-1])
for p in range(3):
    print(f"mode {p}: c_pp(t_max)/n_pp = {top.traces[p, -1]:.4f}")
