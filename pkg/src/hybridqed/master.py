"""Global Lindblad master equation in the dressed basis.

Density matrices are vectorized column-stacked (``vec(rho)[m + n*d] = rho[m, n]``),
so ``vec(A rho B) = (B^T kron A) vec(rho)``.

The generator lives in a frame rotating at ``E_0 + K(m) omega_d`` on each
dressed state, ``K(m)`` being its manifold label. In that frame the weak drive
is time independent once couplings between manifolds that are not adjacent are
discarded. Jump operators are the downward dressed transitions ``|j><k|``.
Transitions of one channel that share a frequency (within ``SECULAR_TOL``)
are merged into a single jump operator.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import numerics
from .dressed import CHANNELS, SECULAR_TOL, DressedSystem
from .errors import DegenerateKernel
from .model import ModelParams

log = logging.getLogger(__name__)

PRECONDITIONER_SHIFT = 1e-8
CLIP_FLOOR = -1e-8


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Time-independent rotating-frame generator.

    ``generator`` is sparse CSR, or a dense array when ``d**2 < DENSE_LIMIT``.
    ``undriven`` is the same generator with the drive switched off; it serves
    as a preconditioner for the steady-state solve.
    """

    generator: object = field(repr=False)
    undriven: object = field(repr=False)
    omega_d: float
    manifold: np.ndarray = field(repr=False)
    dimension: int
    jump_rates: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.generator.shape

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.generator @ vec(rho), self.dimension)

    def trace_residual(self) -> float:
        """``|| L^dag (I) ||``; zero for a trace-preserving generator."""
        ident = vec(np.eye(self.dimension))
        return float(np.linalg.norm(self.generator.conj().T @ ident))

    def frame_phases(self, tau: float) -> np.ndarray:
        """``exp(-i (K(k) - K(j)) omega_d tau)`` for each ``|j><k|`` component.

        This maps a rotating-frame operator component to its lab-frame value
        at time ``tau`` (taking ``tau = 0`` at a full drive period).
        """
        dk = self.manifold[None, :] - self.manifold[:, None]
        return np.exp(-1j * dk * self.omega_d * tau)


@dataclass(frozen=True, eq=False)
class SteadyState:
    rho: np.ndarray = field(repr=False)
    residual: float
    method: str = "nullspace"
    clipped: bool = False
    min_eigenvalue: float = 0.0

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def rotating_hamiltonian(d: DressedSystem, omega_d: float) -> np.ndarray:
    """``H_T``: detunings ``E_n - E_0 - K(n) omega_d`` plus adjacent-manifold drive."""
    K = d.manifold
    h = np.diag(d.energies - d.energies[0] - K * omega_d).astype(complex)
    adjacent = np.abs(K[:, None] - K[None, :]) == 1
    h += np.where(adjacent, d.K, 0.0)
    return h


def _frequency_groups(gaps: np.ndarray, j: np.ndarray, k: np.ndarray, tol: float):
    order = np.argsort(gaps, kind="stable")
    groups, current = [], [order[0]]
    for prev, nxt in zip(order[:-1], order[1:]):
        if gaps[nxt] - gaps[prev] < tol:
            current.append(nxt)
        else:
            groups.append(current)
            current = [nxt]
    groups.append(current)
    return [(j[g], k[g]) for g in groups]


def build_dissipator(d: DressedSystem, *, secular_tol: float = SECULAR_TOL) -> sp.csr_matrix:
    """Sum of Lindblad dissipators over all channels and downward transitions."""
    dim = d.dimension
    n2 = dim * dim
    rows, cols, vals = [], [], []
    out_rate = np.zeros(dim)
    merged = []
    p = d.params
    for c in CHANNELS:
        rate = d.rates[c]
        if np.any(rate < 0):
            raise ValueError(f"negative relaxation rate in channel {c}")
        scale = rate.max() if rate.size else 0.0
        if scale == 0:
            continue
        j, k = np.nonzero(rate > 1e-14 * scale)
        for gj, gk in _frequency_groups(d.gaps[j, k], j, k, secular_tol):
            if len(gj) == 1:
                r = rate[gj[0], gk[0]]
                rows.append(gj[0] * (dim + 1))
                cols.append(gk[0] * (dim + 1))
                vals.append(r)
                out_rate[gk[0]] += r
            else:
                omega = d.gaps[gj, gk].mean()
                jump = sp.csr_matrix((d.C[c][gj, gk], (gj, gk)), shape=(dim, dim))
                merged.append(p.gammas[c] * omega / p.omega0 * _lindblad_superop(jump))
    diag = -0.5 * (out_rate[:, None] + out_rate[None, :])
    D = sp.coo_matrix((vals, (rows, cols)), shape=(n2, n2)).tocsr()
    D = D + sp.diags(vec(diag), format="csr")
    for m in merged:
        D = D + m
    return D.tocsr()


def _lindblad_superop(J: sp.csr_matrix) -> sp.csr_matrix:
    ident = sp.identity(J.shape[0], dtype=complex, format="csr")
    JdJ = (J.conj().T @ J).tocsr()
    return (sp.kron(J.conj(), J) - 0.5 * sp.kron(ident, JdJ)
            - 0.5 * sp.kron(JdJ.T, ident)).tocsr()


def _coherent_superop(h: np.ndarray) -> sp.csr_matrix:
    hs = sp.csr_matrix(h)
    ident = sp.identity(h.shape[0], dtype=complex, format="csr")
    return (-1j * (sp.kron(ident, hs) - sp.kron(hs.T, ident))).tocsr()


def build_liouvillian(d: DressedSystem, p: ModelParams | None = None,
                      omega_d: float | None = None, *, dissipator=None) -> Liouvillian:
    """Rotating-frame generator at drive frequency ``omega_d``.

    ``p`` defaults to ``d.params``; only its drive frequency is read here (the
    drive strength is already folded into ``d.K``). A precomputed
    ``dissipator`` from :func:`build_dissipator` can be passed to save work
    in sweeps.
    """
    p = d.params if p is None else p
    wd = p.omega_d if omega_d is None else float(omega_d)
    D = build_dissipator(d) if dissipator is None else dissipator
    h = rotating_hamiltonian(d, wd)
    h0 = np.diag(np.diag(h))
    gen = (_coherent_superop(h) + D).tocsr()
    undriven = (_coherent_superop(h0) + D).tocsr()
    if gen.shape[0] < numerics.DENSE_LIMIT:
        gen, undriven = gen.toarray(), undriven.toarray()
    return Liouvillian(generator=gen, undriven=undriven, omega_d=wd,
                       manifold=d.manifold.copy(), dimension=d.dimension,
                       jump_rates=d.total_rates)


def steady_state(L: Liouvillian, *, method: str = "auto",
                 check_gap: bool = True) -> SteadyState:
    """Trace-one fixed point of ``L``.

    ``method="nullspace"`` raises :class:`DegenerateKernel` for an ambiguous
    kernel; ``"auto"`` then falls back to long-time propagation from the
    dressed ground state; ``"propagation"`` uses it directly.
    """
    d = L.dimension
    w = vec(np.eye(d))
    if method not in ("auto", "nullspace", "propagation"):
        raise ValueError(f"unknown method {method!r}")
    used = method
    if method == "propagation":
        x = _long_time_state(L)
    else:
        pre = None
        if sp.issparse(L.generator):
            pre = L.undriven - PRECONDITIONER_SHIFT * sp.identity(d * d, format="csr")
        try:
            x = numerics.null_vector(L.generator, normalization=w,
                                     preconditioner=pre, check_gap=check_gap)
            used = "nullspace"
        except DegenerateKernel:
            if method == "nullspace":
                raise
            log.warning("steady state kernel ill-conditioned; using long-time propagation")
            x = _long_time_state(L)
            used = "propagation"
    rho = unvec(x, d)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    evals, evecs = np.linalg.eigh(rho)
    clipped = False
    if evals[0] < 0:
        if evals[0] < CLIP_FLOOR:
            warnings.warn(f"steady state has eigenvalue {evals[0]:.3e} below {CLIP_FLOOR:g}",
                          RuntimeWarning, stacklevel=2)
        else:
            neg = evals < 0
            rho = rho - (evecs[:, neg] * evals[neg]) @ evecs[:, neg].conj().T
            rho = rho / np.trace(rho).real
            clipped = True
    residual = float(np.linalg.norm(L.generator @ vec(rho)))
    return SteadyState(rho=rho, residual=residual, method=used, clipped=clipped,
                       min_eigenvalue=float(evals[0]))


def _long_time_state(L: Liouvillian) -> np.ndarray:
    # slowest total decay out of any excited state sets the relaxation time
    out = L.jump_rates.sum(axis=0)[1:]
    out = out[out > 0]
    slowest = out.min() if out.size else 1.0
    rho0 = np.zeros((L.dimension, L.dimension), dtype=complex)
    rho0[0, 0] = 1.0
    return numerics.propagate(L.generator, vec(rho0), 50.0 / slowest)


def evolve(L: Liouvillian, rho0: np.ndarray, times) -> np.ndarray:
    """Density matrices ``exp(L t) rho0`` on an ascending time grid, shape ``(n_t, d, d)``."""
    vs = numerics.propagate_grid(L.generator, vec(rho0), times)
    d = L.dimension
    return np.stack([unvec(v, d) for v in vs])


def regression_correlator(L: Liouvillian, rho_ss: SteadyState, A: np.ndarray, B: np.ndarray,
                          taus, *, lab_phases: bool = True) -> np.ndarray:
    """``Tr[A^dag A(tau) exp(L tau)(B rho_ss B^dag)]`` on a grid of delays.

    With ``lab_phases`` each ``|j><k|`` component of ``A`` carries its
    lab-frame phase at delay ``tau`` (see :meth:`Liouvillian.frame_phases`),
    so the result is the lab-frame two-time correlator.
    """
    taus = np.asarray(taus, dtype=float)
    rho = rho_ss.rho
    x0 = B @ rho @ B.conj().T
    xs = numerics.propagate_grid(L.generator, vec(x0), taus)
    AdA = A.conj().T @ A
    d = L.dimension
    out = np.empty(len(taus), dtype=complex)
    for i, (tau, v) in enumerate(zip(taus, xs)):
        # (A(tau)^dag A(tau))_{kk'} picks up exp(+i (K(k) - K(k')) omega_d tau)
        op = AdA * L.frame_phases(tau) if lab_phases else AdA
        out[i] = np.sum(op * unvec(v, d).T)
    return out
