"""Weak-drive amplitude engine.

For a weak coherent drive the no-jump evolution under the non-Hermitian
Hamiltonian ``H_eff = H_T - (i/2) sum_j Gamma_j |j><j|`` fixes the steady
amplitudes ``C_j`` with the ground amplitude pinned to ``C_0 = 1``. Manifold-K
amplitudes scale as ``Omega**K``. This engine serves as an independent check
of the master equation in the parity-conserving case.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dressed import DressedSystem
from .errors import ParityWarning, ZeroIntensity
from .numerics import linear_solve

INTENSITY_FLOOR = 1e-30


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """``H_eff`` restricted to the states of manifolds ``0..max_manifold``.

    ``states[i]`` is the dressed index of row/column ``i``; ``states[0] == 0``.
    """

    matrix: np.ndarray = field(repr=False)
    states: np.ndarray
    decay: np.ndarray = field(repr=False)
    omega_d: float
    max_manifold: int


@dataclass(frozen=True, eq=False)
class AmplitudeSolution:
    """Steady amplitudes ``C_j`` indexed by dressed state; zero outside the truncation."""

    amplitudes: np.ndarray = field(repr=False)
    max_manifold: int
    omega_d: float
    method: str = "linear"

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def decay_rates(d: DressedSystem) -> np.ndarray:
    """``Gamma_j``: total decay of ``|j>`` into the manifold just below it."""
    total = d.total_rates
    K = d.manifold
    lower = K[:, None] == (K[None, :] - 1)
    return np.sum(np.where(lower, total, 0.0), axis=0)


def effective_hamiltonian(d: DressedSystem, p=None, omega_d: float | None = None,
                          max_manifold: int = 2) -> EffectiveHamiltonian:
    """Non-Hermitian Hamiltonian on manifolds ``0..max_manifold``.

    Diagonal ``Delta_j0 - K(j) omega_d - i Gamma_j / 2``; off-diagonal drive
    elements ``K_mn`` between adjacent manifolds.
    """
    p = d.params if p is None else p
    if abs(p.theta - np.pi / 2) > 1e-12:
        warnings.warn("weak-drive amplitudes are derived for theta = pi/2",
                      ParityWarning, stacklevel=2)
    if max_manifold < 1:
        raise ValueError("max_manifold must be >= 1")
    wd = p.omega_d if omega_d is None else float(omega_d)
    states = np.flatnonzero(d.manifold <= max_manifold)
    K = d.manifold[states]
    gamma = decay_rates(d)[states]
    lam = d.energies[states] - d.energies[0] - K * wd - 0.5j * gamma
    adjacent = np.abs(K[:, None] - K[None, :]) == 1
    h = np.where(adjacent, d.K[np.ix_(states, states)], 0.0)
    h[np.diag_indices_from(h)] = lam
    return EffectiveHamiltonian(matrix=h, states=states, decay=gamma,
                                omega_d=wd, max_manifold=max_manifold)


def solve_amplitudes(H_eff: EffectiveHamiltonian, d: DressedSystem, N: int | None = None
                     ) -> AmplitudeSolution:
    """Steady state of ``i dC/dt = H_eff C`` with ``C_0 = 1``.

    ``N`` optionally lowers the manifold cap below that of ``H_eff``.
    """
    h, states = H_eff.matrix, H_eff.states
    M = H_eff.max_manifold if N is None else int(N)
    if M > H_eff.max_manifold:
        raise ValueError("N exceeds the manifold cap of H_eff")
    keep = d.manifold[states] <= M
    h, states = h[np.ix_(keep, keep)], states[keep]
    rhs = -h[1:, 0]
    x = linear_solve(h[1:, 1:], rhs)
    C = np.zeros(d.dimension, dtype=complex)
    C[0] = 1.0
    C[states[1:]] = x
    return AmplitudeSolution(amplitudes=C, max_manifold=M, omega_d=H_eff.omega_d)


def coupling_matrix(Kd: np.ndarray, lam2: np.ndarray, S1, S2, *, reverse: bool = False
                    ) -> np.ndarray:
    """``A_mn = -sum_{j in S2} K_mj K_jn / lambda_j`` for ``m, n`` in ``S1``.

    ``reverse`` accumulates the sum in the opposite order (a cross-check).
    """
    S1 = np.asarray(S1)
    order = range(len(S2) - 1, -1, -1) if reverse else range(len(S2))
    A = np.zeros((len(S1), len(S1)), dtype=complex)
    for i in order:
        j = S2[i]
        A -= np.outer(Kd[S1, j], Kd[j, S1]) / lam2[i]
    return A


def closed_form_n3(d: DressedSystem, p=None, omega_d: float | None = None) -> AmplitudeSolution:
    """Explicit amplitudes for manifolds 0, 1 (three states) and 2 (five states).

    Manifold-2 amplitudes are eliminated into the 3x3 manifold-1 system
    ``(lambda_m delta_mn + A_mn) C_n = -K_m0``, which is then solved by
    successive elimination of ``C_3`` and ``C_2``. Falls back to the general
    linear solve (``method="linear-fallback"``) if an elimination denominator
    vanishes.
    """
    H = effective_hamiltonian(d, p, omega_d, max_manifold=2)
    S1, S2 = d.members(1), d.members(2)
    if len(S1) != 3 or len(S2) != 5:
        raise ValueError(f"closed form needs 3 + 5 states in manifolds 1, 2; "
                         f"got {len(S1)} + {len(S2)}")
    Kd = d.K
    pos = {s: i for i, s in enumerate(H.states)}
    lam1 = np.array([H.matrix[pos[s], pos[s]] for s in S1])
    lam2 = np.array([H.matrix[pos[s], pos[s]] for s in S2])
    A = coupling_matrix(Kd, lam2, S1, S2) + np.diag(lam1)
    k0 = Kd[S1, 0]

    def elim(m, n):
        den = A[m, 1] * A[n, 2] - A[m, 2] * A[n, 1]
        Mmn = (A[m, 2] * k0[n] - A[n, 2] * k0[m]) / den
        Nmn = (A[m, 2] * A[n, 0] - A[m, 0] * A[n, 2]) / den
        return Mmn, Nmn, den

    M12, N12, den12 = elim(0, 1)
    M23, N23, den23 = elim(1, 2)
    if den12 == 0 or den23 == 0 or N12 == N23 or A[0, 2] == 0:
        warnings.warn("closed form degenerate at this drive frequency; using linear solve",
                      RuntimeWarning, stacklevel=2)
        sol = solve_amplitudes(H, d)
        return AmplitudeSolution(sol.amplitudes, 2, H.omega_d, method="linear-fallback")
    C1 = (M23 - M12) / (N12 - N23)
    C2 = M12 + N12 * C1
    C3 = -(k0[0] + A[0, 0] * C1 + A[0, 1] * C2) / A[0, 2]
    c1 = np.array([C1, C2, C3])
    C = np.zeros(d.dimension, dtype=complex)
    C[0] = 1.0
    C[S1] = c1
    C[S2] = -(Kd[np.ix_(S2, S1)] @ c1) / lam2
    return AmplitudeSolution(amplitudes=C, max_manifold=2, omega_d=H.omega_d,
                             method="closed-form")


def _field_sums(sol: AmplitudeSolution, d: DressedSystem, channel: str):
    if sol.max_manifold < 2:
        raise ValueError("analytic correlations need amplitudes on at least two manifolds")
    Y = d.Y[channel]
    C = sol.amplitudes
    S1, S2 = d.members(1), d.members(2)
    one = Y[0, S1] @ C[S1]
    two = Y[np.ix_(S1, S2)] @ C[S2]
    return Y[0, S1], one, two


def analytic_intensity(sol: AmplitudeSolution, d: DressedSystem, channel: str = "a") -> float:
    """Mean output intensity ``n`` from amplitudes (see :func:`analytic_g2`)."""
    _, one, two = _field_sums(sol, d, channel)
    return float(abs(one) ** 2 + np.sum(np.abs(two) ** 2))


def analytic_g2(sol: AmplitudeSolution, d: DressedSystem, channel: str = "a"):
    """Equal-time ``g2`` and mean output intensity from amplitudes.

    Returns ``(g2, n)`` with::

        n  = |sum_{n in M1} Y_0n C_n|^2 + sum_{j in M1} |sum_{n in M2} Y_jn C_n|^2
        g2 = |sum_{n in M2} sum_{j in M1} Y_0j Y_jn C_n|^2 / n^2

    where ``M1``, ``M2`` are the one- and two-excitation manifolds.
    """
    y0, one, two = _field_sums(sol, d, channel)
    n = float(abs(one) ** 2 + np.sum(np.abs(two) ** 2))
    if n < INTENSITY_FLOOR:
        raise ZeroIntensity(f"intensity {n:.3e} below floor")
    num = abs(y0 @ two) ** 2
    return float(num / n ** 2), n
