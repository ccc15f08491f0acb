"""System Hamiltonian, couplings and parity for the qubit-plasmon-phonon model.

All frequencies are in units of the photon frequency ``omega0`` (default 1).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import BareSpace, excitation_number_op
from .errors import InvalidParams
from .numerics import hermitian_eig


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters.

    ``omega`` (qubit) and ``omega_to`` (phonon) default to ``None``, meaning
    the tied preset values ``omega = omega0 + 2 g_D`` and ``omega_to = omega``.
    Pass numbers to set them independently.
    """

    omega0: float = 1.0
    omega_to: Optional[float] = None
    omega: Optional[float] = None
    omega_p: float = 0.25
    g: float = 0.25
    theta: float = np.pi / 2
    gamma_a: float = 0.05
    gamma_b: float = 0.05
    gamma_sigma: float = 0.05
    drive_strength: float = 5e-3
    omega_d: float = 0.74

    def __post_init__(self):
        values = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        for name, val in values.items():
            if val is None:
                continue
            if not np.isfinite(val):
                raise InvalidParams(f"{name} must be finite, got {val!r}")
            if name != "theta" and val < 0:
                raise InvalidParams(f"{name} must be >= 0, got {val!r}")
        if self.omega0 <= 0:
            raise InvalidParams(f"omega0 must be > 0, got {self.omega0!r}")
        if not 0.0 <= self.theta <= np.pi:
            raise InvalidParams(f"theta must lie in [0, pi], got {self.theta!r}")

    @property
    def g_D(self) -> float:
        return self.omega_p ** 2 / (4.0 * self.omega0)

    @property
    def qubit_frequency(self) -> float:
        return self.omega0 + 2.0 * self.g_D if self.omega is None else self.omega

    @property
    def phonon_frequency(self) -> float:
        return self.qubit_frequency if self.omega_to is None else self.omega_to

    @property
    def gammas(self) -> dict:
        return {"a": self.gamma_a, "b": self.gamma_b, "sigma": self.gamma_sigma}

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def resolved(self) -> "ModelParams":
        """Copy with the tied frequencies written out explicitly."""
        return self.replace(omega=self.qubit_frequency, omega_to=self.phonon_frequency)


@dataclass(frozen=True)
class DerivedCouplings:
    g_C: float
    g_D: float


def coupling_constants(p: ModelParams) -> DerivedCouplings:
    """Plasmon-phonon coupling ``g_C = (w_p/2) sqrt(w_TO/w_0)`` and ``g_D = w_p^2/(4 w_0)``."""
    if p.omega0 <= 0:
        raise InvalidParams("omega0 must be > 0")
    w_to = p.phonon_frequency
    if w_to < 0:
        raise InvalidParams("omega_to must be >= 0")
    return DerivedCouplings(
        g_C=0.5 * p.omega_p * np.sqrt(w_to / p.omega0),
        g_D=p.omega_p ** 2 / (4.0 * p.omega0),
    )


def build_hs(p: ModelParams, s: BareSpace) -> np.ndarray:
    """Dense system Hamiltonian ``H_0 + H_int`` in the bare basis.

    Zero-point terms ``(omega0 + omega_to)/2`` are kept.
    """
    c = coupling_constants(p)
    a, b, I = s.a, s.b, s.identity
    ad, bd = a.conj().T, b.conj().T
    x_a = a + ad
    h0 = (p.omega0 * (ad @ a + 0.5 * I)
          + p.phonon_frequency * (bd @ b + 0.5 * I)
          + 0.5 * p.qubit_frequency * s.sigma_z)
    qubit_axis = np.cos(p.theta) * s.sigma_z - np.sin(p.theta) * s.sigma_x
    h_int = (1j * c.g_C * (x_a @ (b - bd))
             + c.g_D * (x_a @ x_a)
             + p.g * (x_a @ qubit_axis))
    h = (h0 + h_int).toarray()
    return 0.5 * (h + h.conj().T)


def drive_operator(s: BareSpace) -> np.ndarray:
    """Field quadrature ``a + a^dag`` the coherent drive couples to."""
    return (s.a + s.a.conj().T).toarray()


def build_parity(s: BareSpace) -> np.ndarray:
    """``Pi = -sigma_z exp(i pi N)``; diagonal with entries +-1."""
    n = excitation_number_op(s).diagonal().real.astype(int)
    sz = s.sigma_z.diagonal().real
    return np.diag(-sz * (-1.0) ** n).astype(complex)


def commutator_norm(h: np.ndarray, pi: np.ndarray) -> float:
    """Spectral norm of ``[h, pi]``."""
    return float(np.linalg.norm(h @ pi - pi @ h, 2))


def spectrum_sweep(p: ModelParams, s: BareSpace, g_values, n_levels: int) -> np.ndarray:
    """Lowest ``n_levels`` eigenvalues of ``H_s`` for each coupling in ``g_values``.

    Returns an array of shape ``(len(g_values), n_levels)`` with absolute
    energies (zero-point terms included).
    """
    g_values = np.asarray(g_values, dtype=float)
    if not np.all(np.isfinite(g_values)):
        raise InvalidParams("g_values must be finite")
    if not 1 <= n_levels <= s.dimension:
        raise InvalidParams(f"n_levels must be in [1, {s.dimension}]")
    out = np.empty((len(g_values), n_levels))
    for i, g in enumerate(g_values):
        out[i] = hermitian_eig(build_hs(p.replace(g=float(g)), s)).values[:n_levels]
    return out
