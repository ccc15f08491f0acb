"""
Photon and phonon statistics versus drive frequency
===================================================

Sweep the drive frequency across the lowest dressed transitions and compare
the master equation with the weak-drive amplitude method. A 4/4 truncation
keeps the script quick while staying converged at this drive strength.
"""

import numpy as np

from hybridqed import ModelParams, TruncationSpec, sweep
from hybridqed.sweep import local_extrema

grid = np.round(np.linspace(0.6, 1.4, 81), 12)
t = TruncationSpec(4, 4)
master = sweep(ModelParams(), grid, engine="master", truncation=t)
weak = sweep(ModelParams(), grid, engine="weakdrive", truncation=t)

i = int(np.argmin(np.abs(grid - 0.74)))
print(f"g2_a at omega_d = 0.74: master {master.g2_a[i]:.4f}, weak drive {weak.g2_a[i]:.4f}")
print("g2_a minima (master):", local_extrema(grid, master.g2_a, "min"))
print("g2_a maxima (master):", local_extrema(grid, master.g2_a, "max"))

# %%
# Near omega_d = 1 the photons bunch while the phonons stay antibunched.
for w in (0.96, 0.98, 1.0):
    k = int(np.argmin(np.abs(grid - w)))
    print(f"omega_d = {w}: g2_a = {master.g2_a[k]:9.3f}, g2_b = {master.g2_b[k]:.3f}, "
          f"g2_ab = {master.g2_ab[k]:.3f}")
