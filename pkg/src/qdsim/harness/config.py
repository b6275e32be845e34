"""Experiment configuration: one TOML document, strict schema.

Every section maps to a frozen dataclass; unknown keys and wrong types are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from ..errors import ConfigError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LevelsConfig:
    B: float = 5.0  # T
    E0: float = 1_408_911.0  # ueV
    gamma: float = 16.0
    g_e: float = 0.54
    g_h: float = 0.94
    chi: float = math.pi / 2
    docp: float = 0.93
    resolution: float = 8.0  # ueV
    b_max: float = 5.0
    n_fields: int = 6
    energy_noise: float = 2.0  # ueV


@dataclass(frozen=True)
class PulseConfig:
    fwhm: float = 3.0  # ps
    kappa: float = 4 * math.pi / 2.5  # rad per uW^1/2
    dt: float = 0.005  # ps


@dataclass(frozen=True)
class DecoherenceConfig:
    t1: float = 1000.0  # ps
    t2star: float = 51.0  # ps
    branching_eta: float = 0.5
    eid_coeff: float = 0.02  # ps


@dataclass(frozen=True)
class CountsConfig:
    rep_rate: float = 80.0  # MHz
    integration_time: float = 14400 / 8192  # s
    efficiency: float = 0.002
    background_rate: float = 200.0
    power_background: float = 0.0
    noise_scale: float = 1.0


@dataclass(frozen=True)
class RabiConfig:
    sqrtp_max: float = 2.5
    n_points: int = 101
    leakage: float = 0.0


@dataclass(frozen=True)
class RamseyConfig:
    theta: float = math.pi / 2
    coarse_start: float = 66.7
    coarse_step: float = 3.33
    n_coarse: int = 21
    fine_span: float = 12.0
    n_fine: int = 48


@dataclass(frozen=True)
class Su2Config:
    coarse: float = 66.0
    sqrtp_max: float = 2.5
    n_power: int = 64
    n_fine: int = 128
    fine_span: float = 12.0


@dataclass(frozen=True)
class InterferometerConfig:
    lambda_qd: float = 880.0  # nm, assumed
    lambda_hene: float = 632.8
    drift_linear: float = 0.15  # nm / s
    drift_sigma_rw: float = 0.5  # nm / sqrt(s)
    hene_sign: int = 1
    hene_samples: int = 14401


@dataclass(frozen=True)
class PolarimetryConfig:
    n_angles: int = 360
    intensity_noise: float = 0.01  # relative


_SECTIONS = {
    "levels": LevelsConfig,
    "pulse": PulseConfig,
    "decoherence": DecoherenceConfig,
    "counts": CountsConfig,
    "rabi": RabiConfig,
    "ramsey": RamseyConfig,
    "su2": Su2Config,
    "interferometer": InterferometerConfig,
    "polarimetry": PolarimetryConfig,
}

# fields allowed to be zero (or negative, for signs)
_NONNEG = {"gamma", "docp", "chi", "energy_noise", "power_background", "noise_scale",
           "leakage", "drift_linear", "drift_sigma_rw", "intensity_noise", "background_rate",
           "branching_eta", "eid_coeff", "B"}
_FREE = {"E0", "g_e", "g_h", "hene_sign"}


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 7
    levels: LevelsConfig = field(default_factory=LevelsConfig)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    decoherence: DecoherenceConfig = field(default_factory=DecoherenceConfig)
    counts: CountsConfig = field(default_factory=CountsConfig)
    rabi: RabiConfig = field(default_factory=RabiConfig)
    ramsey: RamseyConfig = field(default_factory=RamseyConfig)
    su2: Su2Config = field(default_factory=Su2Config)
    interferometer: InterferometerConfig = field(default_factory=InterferometerConfig)
    polarimetry: PolarimetryConfig = field(default_factory=PolarimetryConfig)

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "seed": self.seed}
        for name in _SECTIONS:
            d[name] = dataclasses.asdict(getattr(self, name))
        return d

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **sections) -> "ExperimentConfig":
        """``cfg.replace(counts={'noise_scale': 0})`` style partial update."""
        kw = {}
        for name, upd in sections.items():
            if name == "seed":
                kw["seed"] = upd
            elif name in _SECTIONS:
                kw[name] = dataclasses.replace(getattr(self, name), **upd)
            else:
                raise ConfigError(f"unknown section {name!r}")
        return dataclasses.replace(self, **kw)


def validate(cfg: ExperimentConfig):
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    for name in _SECTIONS:
        sec = getattr(cfg, name)
        for f in dataclasses.fields(sec):
            v = getattr(sec, f.name)
            where = f"{name}.{f.name}"
            if f.type == "int":
                if not isinstance(v, int) or isinstance(v, bool):
                    raise ConfigError(f"{where} must be an integer")
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{where} must be a number")
            if not math.isfinite(v):
                raise ConfigError(f"{where} must be finite")
            if f.name in _FREE:
                continue
            if f.name in _NONNEG:
                if v < 0:
                    raise ConfigError(f"{where} must be >= 0")
            elif v <= 0:
                raise ConfigError(f"{where} must be > 0")
    if cfg.interferometer.hene_sign not in (-1, 1):
        raise ConfigError("interferometer.hene_sign must be +1 or -1")
    if not 0 <= cfg.levels.docp <= 1 or not 0 <= cfg.decoherence.branching_eta <= 1:
        raise ConfigError("docp and branching_eta must lie in [0, 1]")
    if cfg.levels.chi > math.pi:
        raise ConfigError("levels.chi must lie in [0, pi]")
    if cfg.rabi.leakage > 1:
        raise ConfigError("rabi.leakage must lie in [0, 1]")
    if 1 / cfg.decoherence.t2star < 0.5 / cfg.decoherence.t1:
        raise ConfigError("t2star may not exceed 2 t1")


def from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    version = d.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    kw = {}
    if "seed" in d:
        kw["seed"] = d.pop("seed")
    for name, cls in _SECTIONS.items():
        if name not in d:
            continue
        body = d.pop(name)
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(body) - set(known)
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {sorted(unknown)}")
        vals = {}
        for k, v in body.items():
            # TOML integers are accepted where floats are expected
            if known[k].type == "float" and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            vals[k] = v
        kw[name] = cls(**vals)
    if d:
        raise ConfigError(f"unknown top-level key(s): {sorted(d)}")
    return ExperimentConfig(**kw)


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(raw)


def dump_config(cfg: ExperimentConfig) -> str:
    import tomli_w

    return tomli_w.dumps(cfg.to_dict())
