"""Truncated bare Hilbert space: photon Fock x phonon Fock x qubit.

Flat index ordering is row-major with the photon number slowest and the
qubit fastest::

    index(n_a, n_b, q) = (n_a * (n_phonon_max + 1) + n_b) * 2 + q

The qubit factor is ordered excited first (``q = 0`` is ``|e>``, ``q = 1`` is
``|g>``), so ``sigma_z = diag(+1, -1)`` and ``sigma_- = |g><e|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionOverflow, InvalidParams

EXCITED, GROUND = 0, 1

DEFAULT_DIMENSION_CAP = 4096


@dataclass(frozen=True)
class TruncationSpec:
    n_photon_max: int = 5
    n_phonon_max: int = 5

    def __post_init__(self):
        for name in ("n_photon_max", "n_phonon_max"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise InvalidParams(f"{name} must be an integer >= 1, got {val!r}")

    @property
    def dimension(self) -> int:
        return (self.n_photon_max + 1) * (self.n_phonon_max + 1) * 2


def _lowering(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_max + 1)), 1,
                    shape=(n_max + 1, n_max + 1), format="csr", dtype=complex)


@dataclass(frozen=True, eq=False)
class BareSpace:
    """Bare product space with embedded elementary operators (sparse CSR)."""

    truncation: TruncationSpec
    a: sp.csr_matrix = field(repr=False)
    b: sp.csr_matrix = field(repr=False)
    sigma_x: sp.csr_matrix = field(repr=False)
    sigma_z: sp.csr_matrix = field(repr=False)
    sigma_minus: sp.csr_matrix = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.truncation.dimension

    @property
    def n_phonon_levels(self) -> int:
        return self.truncation.n_phonon_max + 1

    def index(self, n_a: int, n_b: int, q: int) -> int:
        t = self.truncation
        if not (0 <= n_a <= t.n_photon_max and 0 <= n_b <= t.n_phonon_max and q in (0, 1)):
            raise IndexError(f"bare state ({n_a}, {n_b}, {q}) outside truncation")
        return (n_a * self.n_phonon_levels + n_b) * 2 + q

    def state(self, index: int) -> tuple[int, int, int]:
        if not 0 <= index < self.dimension:
            raise IndexError(index)
        rest, q = divmod(index, 2)
        n_a, n_b = divmod(rest, self.n_phonon_levels)
        return n_a, n_b, q

    @cached_property
    def labels(self) -> np.ndarray:
        """``(dimension, 3)`` integer array of ``(n_a, n_b, q)`` per flat index."""
        return np.array([self.state(i) for i in range(self.dimension)], dtype=int)

    def basis_vector(self, n_a: int, n_b: int, q: int) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=complex)
        v[self.index(n_a, n_b, q)] = 1.0
        return v

    @cached_property
    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dimension, dtype=complex, format="csr")


def build_space(t: TruncationSpec, *, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> BareSpace:
    """Construct the bare space and its embedded a, b, sigma_x, sigma_z, sigma_-."""
    if t.dimension > dimension_cap:
        raise DimensionOverflow(
            f"bare dimension {t.dimension} exceeds cap {dimension_cap}")
    ia = sp.identity(t.n_photon_max + 1, dtype=complex, format="csr")
    ib = sp.identity(t.n_phonon_max + 1, dtype=complex, format="csr")
    iq = sp.identity(2, dtype=complex, format="csr")
    sm = sp.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))  # |g><e|
    sz = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))

    def embed(op_a, op_b, op_q):
        return sp.kron(sp.kron(op_a, op_b), op_q, format="csr")

    return BareSpace(
        truncation=t,
        a=embed(_lowering(t.n_photon_max), ib, iq),
        b=embed(ia, _lowering(t.n_phonon_max), iq),
        sigma_x=embed(ia, ib, sm + sm.T),
        sigma_z=embed(ia, ib, sz),
        sigma_minus=embed(ia, ib, sm),
    )


def excitation_number_op(s: BareSpace) -> sp.csr_matrix:
    """``N = a^dag a + b^dag b``, diagonal with entries ``n_a + n_b``."""
    lab = s.labels
    return sp.diags((lab[:, 0] + lab[:, 1]).astype(complex), format="csr")


def total_excitation_number(s: BareSpace) -> np.ndarray:
    """Bare excitation count ``n_a + n_b + [q == e]`` per flat index."""
    lab = s.labels
    return lab[:, 0] + lab[:, 1] + (lab[:, 2] == EXCITED)
