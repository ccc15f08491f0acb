"""Experiment configuration: TOML schema, presets and parameter overrides.

Schema (every key optional)::

    preset = "fig4"            # start from a named preset
    engine = "master"          # master | weakdrive | both
    labelling = "excitation"   # excitation | index
    workers = 4

    [model]                    # any ModelParams field
    g = 0.25
    theta = 90
    theta_units = "deg"        # rad (default) | deg

    [truncation]
    n_photon_max = 5
    n_phonon_max = 5

    [sweep]
    axis = "omega_d"           # omega_d | g | tau
    start = 0.6
    stop = 1.4
    points = 161
    levels = 10                # g axis: number of energy levels
    drive_levels = [1, 2, 3]   # tau axis: drive at omega_d = E_j - E_0

    [outputs]
    observables = ["g2_a", "n_a"]

Overrides use ``section.name=value`` or a bare field name, which is looked up
in ``model``, ``truncation``, ``sweep`` and the top level in that order.
"""

from __future__ import annotations

import copy
import dataclasses
import logging
import math
import re
import sys
from dataclasses import dataclass, field

from .basis import TruncationSpec
from .errors import ConfigError, InvalidParams
from .model import ModelParams

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger(__name__)

ENGINES = ("master", "weakdrive", "both")
AXES = ("omega_d", "g", "tau")
OBSERVABLES = {
    "omega_d": ("populations", "n_a", "n_b", "g2_a", "g2_b", "g2_ab"),
    "g": ("spectrum",),
    "tau": ("g2_a_tau", "g2_b_tau"),
}
TOP_KEYS = {"preset", "engine", "labelling", "workers", "model", "truncation", "sweep", "outputs"}
MODEL_KEYS = {f.name for f in dataclasses.fields(ModelParams)} | {"theta_units"}
TRUNCATION_KEYS = {"n_photon_max", "n_phonon_max"}
SWEEP_KEYS = {"axis", "start", "stop", "points", "levels", "drive_levels"}
OUTPUT_KEYS = {"observables"}

DEFAULT_GRID = {"omega_d": (0.6, 1.4, 161), "g": (0.0, 0.5, 101), "tau": (0.0, 400.0, 400)}

_CORRELATIONS = ["g2_a", "g2_b", "g2_ab", "n_a", "n_b"]

PRESETS = {
    "fig2a": {
        "description": "spectrum versus g, theta = pi/2, marker at g = 0.25",
        "model": {"theta": math.pi / 2},
        "sweep": {"axis": "g", "start": 0.0, "stop": 0.5, "points": 101, "levels": 10},
        "outputs": {"observables": ["spectrum"]},
        "marker": 0.25,
    },
    "fig2b": {
        "description": "spectrum versus g, theta = pi/4, marker at g = 0.25",
        "model": {"theta": math.pi / 4},
        "sweep": {"axis": "g", "start": 0.0, "stop": 0.5, "points": 101, "levels": 10},
        "outputs": {"observables": ["spectrum"]},
        "marker": 0.25,
    },
    "fig3": {
        "description": "weak-drive populations |C_j|^2, j = 0..8, versus omega_d",
        "engine": "weakdrive",
        "model": {"theta": math.pi / 2},
        "sweep": {"axis": "omega_d", "start": 0.6, "stop": 1.4, "points": 161},
        "outputs": {"observables": ["populations"]},
    },
    "fig4": {
        "description": "g2 and intensities versus omega_d, theta = pi/2, both engines",
        "engine": "both",
        "model": {"theta": math.pi / 2},
        "sweep": {"axis": "omega_d", "start": 0.6, "stop": 1.4, "points": 161},
        "outputs": {"observables": _CORRELATIONS},
    },
    "fig5": {
        "description": "g2 and intensities versus omega_d, theta = pi/4",
        "engine": "master",
        "model": {"theta": math.pi / 4},
        "sweep": {"axis": "omega_d", "start": 0.6, "stop": 1.4, "points": 161},
        "outputs": {"observables": _CORRELATIONS},
    },
    "fig6": {
        "description": "delayed g2_a(tau) driven at D10, D20, D30, theta = pi/4",
        "engine": "master",
        "model": {"theta": math.pi / 4},
        "sweep": {"axis": "tau", "start": 0.0, "stop": 400.0, "points": 400,
                  "drive_levels": [1, 2, 3]},
        "outputs": {"observables": ["g2_a_tau"]},
    },
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "omega_d"
    start: float = 0.6
    stop: float = 1.4
    points: int = 161
    levels: int = 10
    drive_levels: tuple = (1, 2, 3)

    def grid(self):
        import numpy as np
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment. ``defaults`` lists the keys that were not given."""

    model: ModelParams
    truncation: TruncationSpec
    engine: str
    sweep: SweepSpec
    outputs: tuple
    preset: str | None = None
    labelling: str = "excitation"
    workers: int | None = None
    marker: float | None = None
    defaults: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "engine": self.engine,
            "labelling": self.labelling,
            "workers": self.workers,
            "model": dataclasses.asdict(self.model.resolved()),
            "truncation": dataclasses.asdict(self.truncation),
            "sweep": {**dataclasses.asdict(self.sweep),
                      "drive_levels": list(self.sweep.drive_levels)},
            "outputs": {"observables": list(self.outputs)},
            "marker": self.marker,
        }


def _line_of(text: str, key: str) -> int | None:
    if not text:
        return None
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_override(item: str) -> tuple[str, object]:
    """Split ``name=value``; the value is read as a TOML literal, else kept as a string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form name=value")
    name, raw = (s.strip() for s in item.split("=", 1))
    if not name:
        raise ConfigError(f"override {item!r} has an empty name")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return name, value


def _apply_override(doc: dict, name: str, value):
    if "." in name:
        section, key = name.split(".", 1)
        if section not in ("model", "truncation", "sweep", "outputs"):
            raise ConfigError(f"unknown section {section!r}", field=name)
        doc.setdefault(section, {})[key] = value
        return
    for section, keys in (("model", MODEL_KEYS), ("truncation", TRUNCATION_KEYS),
                          ("sweep", SWEEP_KEYS)):
        if name in keys:
            doc.setdefault(section, {})[name] = value
            return
    if name in TOP_KEYS - {"model", "truncation", "sweep", "outputs"}:
        doc[name] = value
        return
    if name == "observables":
        doc.setdefault("outputs", {})["observables"] = value
        return
    raise ConfigError(f"unknown parameter {name!r}", field=name)


def _merge(base: dict, top: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def validate_config(text: str = "", overrides=()) -> ExperimentConfig:
    """Parse a TOML experiment document and apply ``name=value`` overrides.

    Raises
    ------
    ConfigError
        On TOML syntax errors or schema violations, with the offending line
        and field where they can be located.
    """
    try:
        doc = tomllib.loads(text or "")
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}",
                          line=int(m.group(1)) if m else None) from None
    for item in overrides:
        name, value = item if isinstance(item, tuple) else parse_override(item)
        _apply_override(doc, name, value)
    return _resolve(doc, text)


def config_from_manifest(config: dict) -> ExperimentConfig:
    """Rebuild an :class:`ExperimentConfig` from the ``config`` block of a run manifest."""
    doc = {k: v for k, v in config.items() if k != "marker" and v is not None}
    cfg = _resolve(copy.deepcopy(doc), "")
    return dataclasses.replace(cfg, marker=config.get("marker"))


def _check_keys(section: dict, allowed: set, where: str, text: str):
    if not isinstance(section, dict):
        raise ConfigError(f"[{where}] must be a table", field=where, line=_line_of(text, where))
    for k in section:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in [{where}]", field=f"{where}.{k}",
                              line=_line_of(text, k))


def _resolve(doc: dict, text: str) -> ExperimentConfig:
    _check_keys(doc, TOP_KEYS, "top level", text)
    doc = dict(doc)
    doc["model"] = _to_radians(dict(doc.get("model", {})), text)
    preset = doc.get("preset")
    marker = None
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}",
                              field="preset", line=_line_of(text, "preset"))
        base = {k: v for k, v in PRESETS[preset].items() if k not in ("description", "marker")}
        marker = PRESETS[preset].get("marker")
        doc = _merge(base, doc)
    defaults = []

    def get(section, key, default):
        src = doc.get(section, {}) if section else doc
        if key in src:
            return src[key]
        defaults.append(f"{section}.{key}" if section else key)
        log.info("default %s%s = %r", f"{section}." if section else "", key, default)
        return default

    # model
    model = dict(doc.get("model", {}))
    for k, v in model.items():
        if v is not None:
            model[k] = _number(v, f"model.{k}", text)
    for f in dataclasses.fields(ModelParams):
        if f.name not in model:
            defaults.append(f"model.{f.name}")
            log.info("default model.%s = %r", f.name, f.default)
    try:
        params = ModelParams(**model)
    except InvalidParams as exc:
        key = str(exc).split()[0]
        raise ConfigError(str(exc), field=f"model.{key}", line=_line_of(text, key)) from None

    trunc = doc.get("truncation", {})
    _check_keys(trunc, TRUNCATION_KEYS, "truncation", text)
    try:
        truncation = TruncationSpec(
            n_photon_max=_integer(get("truncation", "n_photon_max", 5), "truncation.n_photon_max", text),
            n_phonon_max=_integer(get("truncation", "n_phonon_max", 5), "truncation.n_phonon_max", text),
        )
    except InvalidParams as exc:
        raise ConfigError(str(exc), field="truncation") from None

    engine = get(None, "engine", "master")
    if engine not in ENGINES:
        raise ConfigError(f"engine must be one of {ENGINES}", field="engine",
                          line=_line_of(text, "engine"))
    labelling = get(None, "labelling", "excitation")
    if labelling not in ("excitation", "index"):
        raise ConfigError("labelling must be 'excitation' or 'index'", field="labelling",
                          line=_line_of(text, "labelling"))
    workers = doc.get("workers")
    if workers is not None:
        workers = _integer(workers, "workers", text)
        if workers < 1:
            raise ConfigError("workers must be >= 1", field="workers",
                              line=_line_of(text, "workers"))

    sw = doc.get("sweep", {})
    _check_keys(sw, SWEEP_KEYS, "sweep", text)
    axis = get("sweep", "axis", "omega_d")
    if axis not in AXES:
        raise ConfigError(f"sweep axis must be one of {AXES}", field="sweep.axis",
                          line=_line_of(text, "axis"))
    g0, g1, gn = DEFAULT_GRID[axis]
    start = _number(get("sweep", "start", g0), "sweep.start", text)
    stop = _number(get("sweep", "stop", g1), "sweep.stop", text)
    points = _integer(get("sweep", "points", gn), "sweep.points", text)
    if not start < stop:
        raise ConfigError(f"sweep start {start} must be < stop {stop}", field="sweep.start",
                          line=_line_of(text, "start"))
    if points < 2:
        raise ConfigError("sweep points must be >= 2", field="sweep.points",
                          line=_line_of(text, "points"))
    if axis == "tau" and start < 0:
        raise ConfigError("delays must be >= 0", field="sweep.start", line=_line_of(text, "start"))
    levels = _integer(get("sweep", "levels", 10), "sweep.levels", text)
    if not 1 <= levels <= truncation.dimension:
        raise ConfigError(f"levels must lie in [1, {truncation.dimension}]",
                          field="sweep.levels", line=_line_of(text, "levels"))
    drive_levels = get("sweep", "drive_levels", [1, 2, 3])
    if not isinstance(drive_levels, list) or not drive_levels:
        raise ConfigError("drive_levels must be a non-empty list", field="sweep.drive_levels",
                          line=_line_of(text, "drive_levels"))
    drive_levels = tuple(_integer(j, "sweep.drive_levels", text) for j in drive_levels)
    if any(not 1 <= j < truncation.dimension for j in drive_levels):
        raise ConfigError("drive_levels must index excited dressed states",
                          field="sweep.drive_levels", line=_line_of(text, "drive_levels"))

    out = doc.get("outputs", {})
    _check_keys(out, OUTPUT_KEYS, "outputs", text)
    allowed = OBSERVABLES[axis]
    obs = get("outputs", "observables", list(allowed))
    if isinstance(obs, str):
        obs = [obs]
    for o in obs:
        if o not in allowed:
            raise ConfigError(f"unknown observable {o!r} for axis {axis!r}; "
                              f"allowed: {allowed}", field="outputs.observables",
                              line=_line_of(text, "observables"))
    if engine != "master" and axis != "omega_d":
        raise ConfigError(f"engine {engine!r} supports only the omega_d axis", field="engine",
                          line=_line_of(text, "engine"))
    if engine == "weakdrive" and "g2_ab" in obs:
        raise ConfigError("g2_ab is available from the master engine only",
                          field="outputs.observables", line=_line_of(text, "observables"))

    return ExperimentConfig(
        model=params, truncation=truncation, engine=engine,
        sweep=SweepSpec(axis=axis, start=start, stop=stop, points=points, levels=levels,
                        drive_levels=drive_levels),
        outputs=tuple(dict.fromkeys(obs)), preset=preset, labelling=labelling,
        workers=workers, marker=marker, defaults=tuple(defaults),
    )


def _to_radians(model: dict, text: str) -> dict:
    _check_keys(model, MODEL_KEYS, "model", text)
    units = model.pop("theta_units", "rad")
    if units not in ("rad", "deg"):
        raise ConfigError("theta_units must be 'rad' or 'deg'", field="model.theta_units",
                          line=_line_of(text, "theta_units"))
    if "theta" in model and units == "deg":
        model["theta"] = math.radians(_number(model["theta"], "model.theta", text))
    return model


def _number(v, name, text) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}", field=name,
                          line=_line_of(text, name.rsplit(".", 1)[-1]))
    return float(v)


def _integer(v, name, text) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(f"{name} must be an integer, got {v!r}", field=name,
                          line=_line_of(text, name.rsplit(".", 1)[-1]))
    return v
