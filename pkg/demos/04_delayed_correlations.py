"""
Delayed photon correlations with broken parity
==============================================

At theta = pi/4, drive the second dressed transition and follow g2(tau)
by quantum regression. The oscillation tracks the 2 -> 1 level spacing.
"""

import numpy as np

from hybridqed import (ModelParams, TruncationSpec, build_liouvillian, build_space, dress,
                       g2_delayed, steady_state)
from hybridqed.correlations import dominant_frequency, envelope_cutoff

d = dress(ModelParams(theta=np.pi / 4), build_space(TruncationSpec(4, 4)))
L = build_liouvillian(d, omega_d=d.gap(2, 0))
curve = g2_delayed(steady_state(L), L, d, "a")
taus, g2 = curve[:, 0], curve[:, 1]
print(f"g2(0) = {g2[0]:.3f}, g2(tau_max) = {g2[-1]:.3f}")

freq = dominant_frequency(taus, g2, min_frequency=envelope_cutoff(d))
print(f"dominant angular frequency {freq:.4f}; Delta_21 = {d.gap(2, 1):.4f}")
