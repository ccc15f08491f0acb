"""Dressed-basis tables: gaps, transition elements, rates, drive elements, labels.

Index conventions: for a pair ``j < k`` (energy order) ``gaps[j, k] = E_k - E_j``
and the tables ``C[c][j, k]``, ``Y[c][j, k]``, ``rates[c][j, k]`` describe the
downward transition ``|k> -> |j>``. Entries with ``k <= j`` or a gap below
``GAP_FLOOR`` are zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import isqrt

import numpy as np

from .basis import BareSpace, total_excitation_number
from .errors import SecularityWarning
from .model import ModelParams, build_hs, build_parity, drive_operator
from .numerics import hermitian_eig

CHANNELS = ("a", "b", "sigma")
FIELD_CHANNELS = ("a", "b")

GAP_FLOOR = 1e-9
SECULAR_TOL = 1e-6
PARITY_THRESHOLD = 0.999

LABELLINGS = ("excitation", "index")


@dataclass(frozen=True, eq=False)
class DressedSystem:
    """Eigenpairs of ``H_s`` and every derived transition table.

    ``manifold[j]`` is the excitation manifold used by the rotating frame and
    the weak-drive engine. With ``labelling="excitation"`` it is the dominant
    bare excitation number of ``|j>``; with ``labelling="index"`` it is
    ``floor(sqrt(j))``. ``parity[j]`` is +1, -1, or 0 when undefined.
    """

    params: ModelParams
    space: BareSpace = field(repr=False)
    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    gaps: np.ndarray = field(repr=False)
    matrix_elements: dict = field(repr=False)
    C: dict = field(repr=False)
    Y: dict = field(repr=False)
    rates: dict = field(repr=False)
    K: np.ndarray = field(repr=False)
    manifold: np.ndarray = field(repr=False)
    parity: np.ndarray = field(repr=False)
    parity_expectation: np.ndarray = field(repr=False)
    labelling: str = "excitation"

    @property
    def dimension(self) -> int:
        return len(self.energies)

    @property
    def total_rates(self) -> np.ndarray:
        """``sum_c Gamma_c^{jk}`` as a ``(d, d)`` upper-triangular array."""
        return sum(self.rates[c] for c in CHANNELS)

    def members(self, K: int) -> np.ndarray:
        """Dressed indices in manifold ``K`` (ascending energy)."""
        return np.flatnonzero(self.manifold == K)

    def gap(self, k: int, j: int) -> float:
        return float(self.energies[k] - self.energies[j])


def manifold_of_index(j: int) -> int:
    """Index-based manifold label ``floor(sqrt(j))``."""
    if j < 0:
        raise ValueError("state index must be >= 0")
    return isqrt(j)


def _bare_manifold_weights(vectors: np.ndarray, s: BareSpace) -> np.ndarray:
    exc = total_excitation_number(s)
    weights = np.zeros((vectors.shape[1], exc.max() + 1))
    prob = np.abs(vectors) ** 2
    for n in range(exc.max() + 1):
        weights[:, n] = prob[exc == n].sum(axis=0)
    return weights


def dress(p: ModelParams, s: BareSpace, *, labelling: str = "excitation") -> DressedSystem:
    """Diagonalize ``H_s`` and build all dressed tables."""
    if labelling not in LABELLINGS:
        raise ValueError(f"labelling must be one of {LABELLINGS}")
    eig = hermitian_eig(build_hs(p, s))
    E, V = eig.values, eig.vectors
    Vh = V.conj().T
    d = len(E)

    gaps = E[None, :] - E[:, None]
    stored = np.triu(np.ones((d, d), dtype=bool), 1) & (gaps >= GAP_FLOOR)

    ops = {"a": s.a, "b": s.b, "sigma": s.sigma_minus}
    gammas = p.gammas
    elems, C, Y, rates = {}, {}, {}, {}
    for c, op in ops.items():
        m = Vh @ (op - op.conj().T).toarray() @ V
        elems[c] = m
        C[c] = np.where(stored, -1j * m, 0.0)
        rates[c] = np.where(stored, gammas[c] * gaps / p.omega0 * np.abs(C[c]) ** 2, 0.0)
        if c in FIELD_CHANNELS:
            Y[c] = np.where(stored, gaps * C[c], 0.0)

    K = 0.5 * p.drive_strength * (Vh @ drive_operator(s) @ V)
    K = 0.5 * (K + K.conj().T)

    pexp = np.einsum("ij,ii,ij->j", V.conj(), build_parity(s), V).real
    parity = np.where(np.abs(pexp) >= PARITY_THRESHOLD, np.sign(pexp), 0).astype(int)

    if labelling == "index":
        manifold = np.array([manifold_of_index(j) for j in range(d)])
    else:
        manifold = np.argmax(_bare_manifold_weights(V, s), axis=1)

    dressed = DressedSystem(
        params=p, space=s, energies=E, vectors=V, gaps=gaps,
        matrix_elements=elems, C=C, Y=Y, rates=rates, K=K,
        manifold=manifold, parity=parity, parity_expectation=pexp,
        labelling=labelling,
    )
    _check_secularity(dressed)
    return dressed


def coincident_transitions(d: DressedSystem, tol: float = SECULAR_TOL) -> list:
    """Groups of active transitions ``(j, k)`` whose gaps agree within ``tol``."""
    total = d.total_rates
    active = total > 1e-14 * max(total.max(), np.finfo(float).tiny)
    j, k = np.nonzero(active)
    if len(j) < 2:
        return []
    g = d.gaps[j, k]
    order = np.argsort(g, kind="stable")
    groups, current = [], [order[0]]
    for prev, nxt in zip(order[:-1], order[1:]):
        if g[nxt] - g[prev] < tol:
            current.append(nxt)
        else:
            if len(current) > 1:
                groups.append([(int(j[i]), int(k[i])) for i in current])
            current = [nxt]
    if len(current) > 1:
        groups.append([(int(j[i]), int(k[i])) for i in current])
    return groups


def _check_secularity(d: DressedSystem):
    groups = coincident_transitions(d)
    if groups:
        warnings.warn(
            f"{len(groups)} sets of transitions share a frequency within "
            f"{SECULAR_TOL:g}; their jump operators are merged in the dissipator",
            SecularityWarning, stacklevel=3)


def xdot_plus(d: DressedSystem, channel: str) -> np.ndarray:
    """Positive-frequency output operator ``sum_{k>j} Y_jk |j><k|`` (dressed basis)."""
    if channel not in FIELD_CHANNELS:
        raise ValueError(f"channel must be one of {FIELD_CHANNELS}")
    return d.Y[channel]


def xdot_minus(d: DressedSystem, channel: str) -> np.ndarray:
    return xdot_plus(d, channel).conj().T


@dataclass(frozen=True)
class ManifoldDiagnostic:
    """Per-state bare-excitation report.

    ``weights[j, n]`` is the probability that ``|j>`` carries ``n`` bare
    excitations (``n_a + n_b + [qubit excited]``).
    """

    mean_excitation: np.ndarray
    weights: np.ndarray
    dominant: np.ndarray
    index_manifold: np.ndarray

    @property
    def disagreement(self) -> np.ndarray:
        return self.dominant != self.index_manifold

    @property
    def flagged(self) -> np.ndarray:
        return np.flatnonzero(self.disagreement)


def manifold_diagnostic(d: DressedSystem, s: BareSpace | None = None) -> ManifoldDiagnostic:
    """Compare the index rule ``floor(sqrt(j))`` with each state's bare content."""
    s = d.space if s is None else s
    w = _bare_manifold_weights(d.vectors, s)
    n = np.arange(w.shape[1])
    return ManifoldDiagnostic(
        mean_excitation=w @ n,
        weights=w,
        dominant=np.argmax(w, axis=1),
        index_manifold=np.array([manifold_of_index(j) for j in range(d.dimension)]),
    )
