"""Output intensities and second-order correlations from a steady state.

Field operators are the dressed output operators ``X+ = sum_{k>j} Y_jk |j><k|``
and ``X- = (X+)^dag``. Intensities ``n_c = <X-_c X+_c>`` are in units of
``omega0**2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dressed import DressedSystem, xdot_plus
from .errors import ZeroIntensity
from .master import Liouvillian, SteadyState, regression_correlator

INTENSITY_FLOOR = 1e-30
IMAG_TOL = 1e-10
TAU_POINTS = 400
TAU_SPAN = 20.0


@dataclass(frozen=True)
class CorrelationRecord:
    """Observables at one drive frequency. Undefined ratios are ``nan``."""

    omega_d: float
    n_a: float
    n_b: float
    g2_a: float
    g2_b: float
    g2_ab: float
    g2_a_tau: Optional[np.ndarray] = None


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(abs(z), np.finfo(float).tiny):
        warnings.warn(f"{what} has imaginary part {z.imag:.3e} (value {z.real:.3e})",
                      RuntimeWarning, stacklevel=3)
    return float(z.real)


def _expect(op: np.ndarray, rho: np.ndarray) -> complex:
    # Tr[op rho] without forming the product
    return complex(np.sum(op * rho.T))


def intensity(rho_ss: SteadyState, d: DressedSystem, channel: str = "a") -> float:
    """``Tr[X- X+ rho]`` for the photon (``"a"``) or phonon (``"b"``) channel."""
    xp = xdot_plus(d, channel)
    return _real(_expect(xp.conj().T @ xp, rho_ss.rho), f"n_{channel}")


def _checked(n: float, channel: str) -> float:
    if n < INTENSITY_FLOOR:
        raise ZeroIntensity(f"n_{channel} = {n:.3e} below floor {INTENSITY_FLOOR:g}")
    return n


def g2_equal_time(rho_ss: SteadyState, d: DressedSystem, channel: str = "a") -> float:
    """``Tr[X- X- X+ X+ rho] / n**2``."""
    n = _checked(intensity(rho_ss, d, channel), channel)
    xp = xdot_plus(d, channel)
    xp2 = xp @ xp
    num = _real(_expect(xp2.conj().T @ xp2, rho_ss.rho), f"G2_{channel}")
    return num / n ** 2


def g2_cross(rho_ss: SteadyState, d: DressedSystem) -> float:
    """Photon-phonon coincidence ``<Xa- Xb- Xb+ Xa+> / (n_a n_b)``."""
    na = _checked(intensity(rho_ss, d, "a"), "a")
    nb = _checked(intensity(rho_ss, d, "b"), "b")
    ba = xdot_plus(d, "b") @ xdot_plus(d, "a")
    num = _real(_expect(ba.conj().T @ ba, rho_ss.rho), "G2_ab")
    return num / (na * nb)


def default_tau_grid(d: DressedSystem, points: int = TAU_POINTS) -> np.ndarray:
    """``points`` delays over ``[0, 20 / max(gamma)]``."""
    gmax = max(d.params.gammas.values())
    if gmax <= 0:
        raise ValueError("default delay grid needs a nonzero decay rate")
    return np.linspace(0.0, TAU_SPAN / gmax, points)


def g2_delayed(rho_ss: SteadyState, L: Liouvillian, d: DressedSystem, channel: str = "a",
               tau_grid=None) -> np.ndarray:
    """Lab-frame ``g2(tau)`` by quantum regression.

    Returns an array of shape ``(n_tau, 2)`` with columns ``tau`` and value.
    """
    taus = default_tau_grid(d) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("tau_grid must be a non-empty 1-D sequence")
    if taus[0] < 0 or np.any(np.diff(taus) < 0):
        raise ValueError("tau_grid must be nonnegative and ascending")
    n = _checked(intensity(rho_ss, d, channel), channel)
    xp = xdot_plus(d, channel)
    G = regression_correlator(L, rho_ss, xp, xp, taus)
    scale = np.maximum(np.abs(G), np.finfo(float).tiny)
    bad = np.abs(G.imag) > IMAG_TOL * scale
    if np.any(bad):
        worst = np.max(np.abs(G.imag[bad]) / scale[bad])
        warnings.warn(f"g2(tau) numerator has relative imaginary part up to {worst:.3e}",
                      RuntimeWarning, stacklevel=2)
    return np.column_stack([taus, G.real / n ** 2])


def dominant_frequency(taus, values, *, pad: int = 16, min_frequency: float = 0.0) -> float:
    """Angular frequency of the strongest Fourier component of ``values - mean``.

    A Hann window is applied and the record is zero-padded ``pad``-fold to
    interpolate the peak. ``taus`` must be uniformly spaced. Components below
    ``min_frequency`` are ignored; pass a multiple of the decay rate to skip
    the leakage of a non-oscillatory relaxation envelope.
    """
    taus = np.asarray(taus, dtype=float)
    y = np.asarray(values, dtype=float)
    if taus.size < 4:
        raise ValueError("need at least four samples")
    dt = np.diff(taus)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("taus must be uniformly spaced")
    y = (y - y.mean()) * np.hanning(y.size)
    nfft = pad * y.size
    power = np.abs(np.fft.rfft(y, nfft))
    freqs = 2 * np.pi * np.fft.rfftfreq(nfft, dt[0])
    power[freqs <= min_frequency] = 0.0
    power[0] = 0.0
    if not np.any(power > 0):
        raise ValueError("no spectral content above min_frequency")
    return float(freqs[np.argmax(power)])


def envelope_cutoff(d: DressedSystem, factor: float = 2.0) -> float:
    """Lower frequency bound ``factor * max(gamma)`` for oscillation extraction."""
    return factor * max(d.params.gammas.values())


def correlation_record(rho_ss: SteadyState, d: DressedSystem, omega_d: float, *,
                       L: Liouvillian | None = None, tau_grid=None) -> CorrelationRecord:
    """All equal-time observables, plus ``g2_a(tau)`` when ``L`` is given."""
    na, nb = intensity(rho_ss, d, "a"), intensity(rho_ss, d, "b")

    def safe(f, *args):
        try:
            return f(*args)
        except ZeroIntensity:
            return float("nan")

    tau = None
    if L is not None:
        tau = safe(g2_delayed, rho_ss, L, d, "a", tau_grid)
        tau = None if isinstance(tau, float) else tau
    return CorrelationRecord(
        omega_d=float(omega_d), n_a=na, n_b=nb,
        g2_a=safe(g2_equal_time, rho_ss, d, "a"),
        g2_b=safe(g2_equal_time, rho_ss, d, "b"),
        g2_ab=safe(g2_cross, rho_ss, d),
        g2_a_tau=tau,
    )
