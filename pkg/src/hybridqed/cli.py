"""Command-line front end.

Subcommands::

    hybridqed run CONFIG.toml [--out DIR] [--param name=value ...]
    hybridqed run OLD_RUN/manifest.json [--out DIR]
    hybridqed preset NAME [--out DIR] [--param name=value ...]
    hybridqed validate CONFIG.toml [--param name=value ...]
    hybridqed list-presets

Each run writes one CSV per observable (17 significant digits) and a
``manifest.json``. Exit status is 0 on success, 1 on a configuration error
and 2 when some sweep points failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .basis import build_space
from .config import PRESETS, ExperimentConfig, config_from_manifest, validate_config
from .correlations import g2_delayed
from .dressed import dress
from .errors import ConfigError, HybridQEDError, SecularityWarning
from .master import build_liouvillian, steady_state
from .model import spectrum_sweep
from .sweep import sweep

log = logging.getLogger("hybridqed")

CSV_FORMAT = "%.17g"
MANIFEST = "manifest.json"
RESIDUALS = "engine_residuals.csv"

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


@dataclass
class RunReport:
    out_dir: Path
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    @property
    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.partial else EXIT_OK


def _write_csv(path: Path, header: list, columns: list):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=CSV_FORMAT, delimiter=",", header=",".join(header),
               comments="")


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, np.generic):
        return _json_safe(x.item())
    return x


def max_relative_deviation(reference, other, floor: float = 0.0) -> tuple[float, int]:
    """Largest ``|other - reference| / |reference|`` where both are finite and ``|reference| > floor``."""
    ref, oth = np.asarray(reference, float), np.asarray(other, float)
    mask = np.isfinite(ref) & np.isfinite(oth) & (np.abs(ref) > floor)
    if not np.any(mask):
        return float("nan"), 0
    return float(np.max(np.abs(oth[mask] - ref[mask]) / np.abs(ref[mask]))), int(mask.sum())


def _run_omega_d(cfg: ExperimentConfig, out: Path, report: RunReport):
    grid = cfg.sweep.grid()
    engines = ["master", "weakdrive"] if cfg.engine == "both" else [cfg.engine]
    results = {}
    for eng in engines:
        res = sweep(cfg.model, grid, engine=eng, truncation=cfg.truncation,
                    labelling=cfg.labelling, workers=cfg.workers)
        results[eng] = res
        report.failures += [{"engine": eng, "omega_d": w, "error": e} for w, e in res.failures]
    for obs in cfg.outputs:
        for eng, res in results.items():
            if obs == "g2_ab" and eng == "weakdrive":
                continue
            name = f"{obs}.csv" if len(engines) == 1 else f"{obs}_{eng}.csv"
            if obs == "populations":
                pops = res.populations
                header = ["omega_d"] + [f"p{j}" for j in range(pops.shape[1])]
                _write_csv(out / name, header, [grid] + list(pops.T))
            else:
                _write_csv(out / name, ["omega_d", obs], [grid, res.column(obs)])
            report.files.append(name)
    if len(engines) == 2:
        rows = []
        for obs in cfg.outputs:
            if obs in ("g2_ab", "populations"):
                continue
            floor = 0.01 if obs.startswith("g2") else 0.0
            dev, n = max_relative_deviation(results["master"].column(obs),
                                            results["weakdrive"].column(obs), floor)
            report.residuals[obs] = {"max_relative_deviation": dev, "points": n}
            rows.append(f"{obs},{CSV_FORMAT % dev},{n}")
        (out / RESIDUALS).write_text("observable,max_relative_deviation,points\n"
                                     + "".join(r + "\n" for r in rows))
        report.files.append(RESIDUALS)


def _run_g(cfg: ExperimentConfig, out: Path, report: RunReport):
    grid = cfg.sweep.grid()
    s = build_space(cfg.truncation)
    E = spectrum_sweep(cfg.model, s, grid, cfg.sweep.levels)
    header = ["g"] + [f"E{j}" for j in range(cfg.sweep.levels)]
    _write_csv(out / "spectrum.csv", header, [grid] + list(E.T))
    report.files.append("spectrum.csv")


def _run_tau(cfg: ExperimentConfig, out: Path, report: RunReport) -> dict:
    taus = cfg.sweep.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SecularityWarning)
        d = dress(cfg.model, build_space(cfg.truncation), labelling=cfg.labelling)
    drives = {j: float(d.energies[j] - d.energies[0]) for j in cfg.sweep.drive_levels}
    for obs in cfg.outputs:
        channel = obs.split("_")[1]
        cols, header = [taus], ["tau"]
        for j, wd in drives.items():
            header.append(f"{obs}_D{j}0")
            try:
                L = build_liouvillian(d, omega_d=wd)
                cols.append(g2_delayed(steady_state(L), L, d, channel, taus)[:, 1])
            except (HybridQEDError, ArithmeticError, ValueError) as exc:
                log.warning("g2(tau) at omega_d=%.6g failed: %s", wd, exc)
                report.failures.append({"omega_d": wd, "error": f"{type(exc).__name__}: {exc}"})
                cols.append(np.full(len(taus), np.nan))
        _write_csv(out / f"{obs}.csv", header, cols)
        report.files.append(f"{obs}.csv")
    return {f"D{j}0": w for j, w in drives.items()}


def run_experiment(cfg: ExperimentConfig, out_dir) -> RunReport:
    """Execute a resolved config, writing CSVs and the manifest into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(out_dir=out)
    t0 = time.perf_counter()
    extra = {}
    axis = cfg.sweep.axis
    if axis == "omega_d":
        _run_omega_d(cfg, out, report)
    elif axis == "g":
        _run_g(cfg, out, report)
    else:
        extra["drive_frequencies"] = _run_tau(cfg, out, report)
    manifest = {
        "code_version": __version__,
        "config": cfg.to_dict(),
        "defaults_applied": list(cfg.defaults),
        "files": report.files,
        "partial": report.partial,
        "failures": report.failures,
        "wall_time_s": time.perf_counter() - t0,
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
        **extra,
    }
    if report.residuals:
        manifest["engine_residuals"] = report.residuals
    if cfg.marker is not None:
        manifest["marker_g"] = cfg.marker
    (out / MANIFEST).write_text(json.dumps(_json_safe(manifest), indent=2) + "\n")
    return report


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridqed",
                                 description="Driven qubit-plasmon-phonon simulator")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def runner_args(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    runner_args(p)
    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name")
    runner_args(p)
    p = sub.add_parser("validate", help="check a config and print it resolved")
    p.add_argument("config")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    sub.add_parser("list-presets", help="list available presets")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-presets":
        for name, preset in PRESETS.items():
            print(f"{name:6s}  {preset['description']}")
        return EXIT_OK
    try:
        if args.command == "preset":
            text = f'preset = "{args.name}"\n'
            label = args.name
        else:
            text = Path(args.config).read_text()
            label = Path(args.config).stem
        overrides = list(args.param)
        if getattr(args, "workers", None) is not None:
            overrides.append(f"workers={args.workers}")
        if args.command != "preset" and args.config.endswith(".json"):
            # re-run from a previous manifest
            cfg = config_from_manifest(json.loads(text)["config"])
            if overrides:
                raise ConfigError("overrides are not accepted when re-running a manifest")
        else:
            cfg = validate_config(text, overrides)
    except (ConfigError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(_json_safe({"config": cfg.to_dict(),
                                     "defaults_applied": list(cfg.defaults)}), indent=2))
        return EXIT_OK
    out = Path(args.out) if args.out else Path("results") / label
    report = run_experiment(cfg, out)
    print(f"wrote {len(report.files)} files to {out}")
    if report.partial:
        print(f"{len(report.failures)} sweep points failed; see {out / MANIFEST}",
              file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
