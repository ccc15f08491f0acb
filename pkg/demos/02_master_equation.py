"""
Driven steady state from the dressed-basis master equation
==========================================================

Build the rotating-frame Liouvillian for a weak drive tuned to the first
dressed transition and solve for the steady state.
"""

import numpy as np

from hybridqed import (ModelParams, TruncationSpec, build_liouvillian, build_space, dress,
                       evolve, steady_state)

d = dress(ModelParams(), build_space(TruncationSpec(5, 5)))
wd = d.gap(1, 0)
L = build_liouvillian(d, omega_d=wd)
print(f"Liouvillian {L.shape}, trace-preservation residual {L.trace_residual():.1e}")

ss = steady_state(L)
print(f"method {ss.method}, residual {ss.residual:.1e}, purity {ss.purity:.5f}")
print("populations of the lowest five dressed states:")
print(np.array2string(ss.populations[:5], precision=6))

# %%
# Relaxation from the ground state towards the steady state.
rho0 = np.zeros((d.dimension, d.dimension), complex)
rho0[0, 0] = 1
times = np.linspace(0, 200, 5)
for t, rho in zip(times, evolve(L, rho0, times)):
    print(f"t = {t:5.0f}: p1 = {rho[1, 1].real:.3e}")
