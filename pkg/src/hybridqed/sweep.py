"""Drive-frequency sweeps for the master-equation and weak-drive engines.

Points are split into contiguous chunks, one per worker process; each chunk
rebuilds the dressed system and dissipator once and reuses them. Every point
is computed independently, so results do not depend on the worker count.
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import TruncationSpec, build_space
from .correlations import g2_cross, g2_equal_time, intensity
from .dressed import dress
from .errors import HybridQEDError, SecularityWarning, ZeroIntensity
from .master import build_dissipator, build_liouvillian, steady_state
from .model import ModelParams
from .weakdrive import (analytic_g2, analytic_intensity, effective_hamiltonian,
                        solve_amplitudes)

log = logging.getLogger(__name__)

ENGINES = ("master", "weakdrive")
N_POPULATIONS = 9
COLUMNS = ("populations", "n_a", "n_b", "g2_a", "g2_b", "g2_ab")


@dataclass
class SweepResult:
    """Per-drive-frequency observables. Failed or undefined points hold ``nan``.

    ``populations[i, j]`` is the population of dressed state ``j`` (``|C_j|^2``
    for the weak-drive engine).
    """

    engine: str
    omega_d: np.ndarray
    populations: np.ndarray
    n_a: np.ndarray
    n_b: np.ndarray
    g2_a: np.ndarray
    g2_b: np.ndarray
    g2_ab: np.ndarray
    failures: list = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(f"unknown column {name!r}; expected one of {COLUMNS}")
        return getattr(self, name)


def _nan_point(n_pop):
    return {"populations": np.full(n_pop, np.nan), "n_a": np.nan, "n_b": np.nan,
            "g2_a": np.nan, "g2_b": np.nan, "g2_ab": np.nan}


def _try(f, *args):
    try:
        return f(*args)
    except ZeroIntensity:
        return np.nan


def _master_chunk(p, t, labelling, omegas, n_pop):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SecularityWarning)
        d = dress(p, build_space(t), labelling=labelling)
    D = build_dissipator(d)
    out = []
    for wd in omegas:
        try:
            ss = steady_state(build_liouvillian(d, omega_d=wd, dissipator=D))
            out.append(({
                "populations": ss.populations[:n_pop],
                "n_a": intensity(ss, d, "a"), "n_b": intensity(ss, d, "b"),
                "g2_a": _try(g2_equal_time, ss, d, "a"),
                "g2_b": _try(g2_equal_time, ss, d, "b"),
                "g2_ab": _try(g2_cross, ss, d),
            }, None))
        except (HybridQEDError, ArithmeticError, ValueError) as exc:
            out.append((_nan_point(n_pop), f"{type(exc).__name__}: {exc}"))
    return out


def _weakdrive_chunk(p, t, labelling, omegas, n_pop, max_manifold=2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SecularityWarning)
        d = dress(p, build_space(t), labelling=labelling)
    out = []
    for wd in omegas:
        try:
            sol = solve_amplitudes(effective_hamiltonian(d, omega_d=wd,
                                                         max_manifold=max_manifold), d)
            out.append(({
                "populations": sol.populations[:n_pop],
                "n_a": analytic_intensity(sol, d, "a"), "n_b": analytic_intensity(sol, d, "b"),
                "g2_a": _try(lambda: analytic_g2(sol, d, "a")[0]),
                "g2_b": _try(lambda: analytic_g2(sol, d, "b")[0]),
                "g2_ab": np.nan,
            }, None))
        except (HybridQEDError, ArithmeticError, ValueError) as exc:
            out.append((_nan_point(n_pop), f"{type(exc).__name__}: {exc}"))
    return out


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def sweep(p: ModelParams, omega_d, *, engine: str = "master",
          truncation: TruncationSpec | None = None, labelling: str = "excitation",
          workers: int | None = None, n_populations: int = N_POPULATIONS) -> SweepResult:
    """Evaluate one engine on a grid of drive frequencies.

    Failures at individual points are logged, stored in ``failures`` as
    ``(omega_d, message)`` and leave ``nan`` in the arrays.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    t = TruncationSpec() if truncation is None else truncation
    grid = np.asarray(omega_d, dtype=float)
    workers = default_workers() if workers is None else max(1, int(workers))
    workers = min(workers, len(grid))
    chunks = [c for c in np.array_split(grid, workers) if len(c)]
    fn = _master_chunk if engine == "master" else _weakdrive_chunk
    n_pop = min(n_populations, t.dimension)
    if workers == 1:
        parts = [fn(p, t, labelling, c, n_pop) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, p, t, labelling, c, n_pop) for c in chunks]
            parts = [f.result() for f in futures]
    points = [pt for part in parts for pt in part]
    failures = []
    for wd, (_, err) in zip(grid, points):
        if err is not None:
            log.warning("sweep point omega_d=%.6g failed: %s", wd, err)
            failures.append((float(wd), err))
    rec = [pt for pt, _ in points]
    return SweepResult(
        engine=engine, omega_d=grid,
        populations=np.array([r["populations"] for r in rec]),
        n_a=np.array([r["n_a"] for r in rec]), n_b=np.array([r["n_b"] for r in rec]),
        g2_a=np.array([r["g2_a"] for r in rec]), g2_b=np.array([r["g2_b"] for r in rec]),
        g2_ab=np.array([r["g2_ab"] for r in rec]),
        failures=failures,
    )


def local_extrema(x, y, kind: str = "min") -> np.ndarray:
    """Grid positions of strict interior local minima (or maxima) of ``y``."""
    y = np.asarray(y, dtype=float)
    s = 1.0 if kind == "min" else -1.0
    z = s * y
    inner = (z[1:-1] < z[:-2]) & (z[1:-1] < z[2:])
    return np.asarray(x)[1:-1][inner]
