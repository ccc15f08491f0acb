"""
Dressed spectrum of the qubit-plasmon-phonon system
====================================================

Diagonalize the system Hamiltonian on a 5-photon / 5-phonon truncation,
look at the lowest transition energies and check the parity symmetry that
holds when the qubit couples only through sigma_x (theta = pi/2).
"""

import numpy as np

from hybridqed import (ModelParams, TruncationSpec, build_hs, build_parity, build_space,
                       commutator_norm, dress, spectrum_sweep)

space = build_space(TruncationSpec(5, 5))
print(f"Hilbert space dimension: {space.dimension}")

# Default point: g = 0.25, omega_p = 0.25 (units of the plasmon frequency)
d = dress(ModelParams(), space)
for j in (1, 2, 3):
    print(f"Delta_{j}0 = {d.gap(j, 0):.5f}")

# %%
# Parity: the commutator vanishes at theta = pi/2 and not at pi/4.
pi_op = build_parity(space)
for theta in (np.pi / 2, np.pi / 4):
    h = build_hs(ModelParams(theta=theta), space)
    print(f"theta = {theta:.4f}: ||[H, Pi]|| = {commutator_norm(h, pi_op):.2e}")
print("parity of the lowest ten dressed states:", d.parity[:10])

# %%
# Lowest levels versus the qubit coupling, relative to the ground state.
g = np.linspace(0.0, 0.5, 6)
levels = spectrum_sweep(ModelParams(), space, g, 6)
for gi, row in zip(g, levels):
    print(f"g = {gi:.2f}: " + " ".join(f"{e:7.4f}" for e in row - row[0]))
