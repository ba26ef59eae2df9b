"""Run configuration: a nested JSON document, validated up front."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .dynamics import ParaxialGeometry
from .grid import PhysicalConstants, _is_power_of_two
from .measurement import GAUSSIAN, TOPHAT, Aperture
from .protocols import M1, M2_UNCONDITIONAL, GridSpec
from .states import DiscreteEntangledSpec, EPRParams

SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    pass


@dataclass
class StateSection:
    kind: str = "epr"
    sigma_plus: float = 0.1
    sigma_minus: float = 10.0
    n_terms: int = 4
    spacing: float = 4.0
    peak_sigma: float = 0.3


@dataclass
class TimesSection:
    measurement_time: float = 0.0
    delays: list = field(default_factory=lambda: [0.0, 0.5, 1.0])


@dataclass
class ProtocolSection:
    blocks: int = 50
    pairs_per_block: int = 2000
    model: str = M2_UNCONDITIONAL
    delay: float = 1.0
    trials: int = 40000
    slit_high: dict = field(default_factory=lambda: {"kind": TOPHAT, "center": 0.0, "width": 1.0})
    slit_low: dict = field(default_factory=lambda: {"kind": TOPHAT, "center": 0.0, "width": 0.4})


@dataclass
class RunConfig:
    constants: dict = field(default_factory=lambda: {"hbar": 1.0, "mass": 1.0})
    grid: dict = field(default_factory=lambda: {"n": 1024, "x_min": -40.0, "x_max": 40.0})
    state: StateSection = field(default_factory=StateSection)
    aperture: dict = field(default_factory=lambda: {"kind": TOPHAT, "center": 0.0, "width": 1.0})
    times: TimesSection = field(default_factory=TimesSection)
    geometry: dict = field(default_factory=lambda: {"longitudinal_speed": 100.0, "source_time": 0.0})
    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    seed: int = 0
    workers: int = 1

    # typed views -------------------------------------------------------------
    @property
    def physical_constants(self) -> PhysicalConstants:
        return PhysicalConstants(**self.constants)

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(**self.grid)

    @property
    def epr(self) -> EPRParams:
        return EPRParams(self.state.sigma_plus, self.state.sigma_minus)

    @property
    def discrete(self) -> DiscreteEntangledSpec:
        return DiscreteEntangledSpec(self.state.n_terms, self.state.spacing, self.state.peak_sigma)

    @property
    def slit(self) -> Aperture:
        return Aperture(**self.aperture)

    @property
    def slit_high(self) -> Aperture:
        return Aperture(**self.protocol.slit_high)

    @property
    def slit_low(self) -> Aperture:
        return Aperture(**self.protocol.slit_low)

    @property
    def paraxial(self) -> ParaxialGeometry:
        return ParaxialGeometry(**self.geometry)

    def as_dict(self) -> dict:
        return asdict(self)


_SCHEMA = {
    "constants": {"hbar": float, "mass": float},
    "grid": {"n": int, "x_min": float, "x_max": float},
    "state": {
        "kind": str,
        "sigma_plus": float,
        "sigma_minus": float,
        "n_terms": int,
        "spacing": float,
        "peak_sigma": float,
    },
    "aperture": {"kind": str, "center": float, "width": float},
    "times": {"measurement_time": float, "delays": list},
    "geometry": {"longitudinal_speed": float, "source_time": float},
    "protocol": {
        "blocks": int,
        "pairs_per_block": int,
        "model": str,
        "delay": float,
        "trials": int,
        "slit_high": dict,
        "slit_low": dict,
    },
    "seed": int,
    "workers": int,
}

_APERTURE_KEYS = {"kind": str, "center": float, "width": float}


def _coerce(path: str, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return [_coerce(f"{path}[{i}]", v, float) for i, v in enumerate(value)]
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a table, got {value!r}")
        return _merge_section(path, {}, value, _APERTURE_KEYS)
    raise AssertionError(kind)


def _merge_section(path: str, base: dict, given: dict, schema: dict) -> dict:
    out = dict(base)
    for key, value in given.items():
        if key not in schema:
            raise ConfigError(f"{path}.{key}: unknown key")
        out[key] = _coerce(f"{path}.{key}", value, schema[key])
    return out


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _validate_aperture(path: str, ap: dict):
    _require(ap["kind"] in (TOPHAT, GAUSSIAN), f"{path}.kind", f"must be {TOPHAT!r} or {GAUSSIAN!r}")
    _require(ap["width"] > 0, f"{path}.width", "must be > 0")


def validate(cfg: RunConfig) -> RunConfig:
    c = cfg.constants
    _require(c["hbar"] > 0, "constants.hbar", "must be > 0")
    _require(c["mass"] > 0, "constants.mass", "must be > 0")
    g = cfg.grid
    _require(_is_power_of_two(g["n"]) and g["n"] >= 8, "grid.n", "must be a power of two >= 8")
    _require(g["x_max"] > g["x_min"], "grid.x_max", "must exceed grid.x_min")
    s = cfg.state
    _require(s.kind in ("epr", "discrete"), "state.kind", "must be 'epr' or 'discrete'")
    _require(s.sigma_plus > 0, "state.sigma_plus", "must be > 0")
    _require(s.sigma_minus > 0, "state.sigma_minus", "must be > 0")
    _require(s.n_terms >= 2, "state.n_terms", "must be >= 2")
    _require(s.peak_sigma > 0, "state.peak_sigma", "must be > 0")
    _require(s.spacing >= 6 * s.peak_sigma, "state.spacing", "must be >= 6 * peak_sigma")
    _validate_aperture("aperture", cfg.aperture)
    t = cfg.times
    _require(t.measurement_time >= 0, "times.measurement_time", "must be >= 0")
    _require(all(d >= 0 for d in t.delays), "times.delays", "must be nonnegative")
    _require(t.delays == sorted(t.delays), "times.delays", "must be ascending")
    _require(cfg.geometry["longitudinal_speed"] > 0, "geometry.longitudinal_speed", "must be > 0")
    p = cfg.protocol
    _require(p.blocks >= 20, "protocol.blocks", "must be >= 20")
    _require(p.pairs_per_block >= 100, "protocol.pairs_per_block", "must be >= 100")
    _require(p.model in (M1, M2_UNCONDITIONAL), "protocol.model", f"must be {M1!r} or {M2_UNCONDITIONAL!r}")
    _require(p.delay >= 0, "protocol.delay", "must be >= 0")
    _require(p.trials >= 1, "protocol.trials", "must be >= 1")
    _validate_aperture("protocol.slit_high", p.slit_high)
    _validate_aperture("protocol.slit_low", p.slit_low)
    wide = max(p.slit_high["width"], p.slit_low["width"])
    narrow = min(p.slit_high["width"], p.slit_low["width"])
    _require(wide >= 2 * narrow, "protocol.slit_low", "slit widths must differ by at least a factor of 2")
    _require(0 <= cfg.seed <= SEED_MAX, "seed", "must be an unsigned 64-bit integer")
    _require(cfg.workers >= 1, "workers", "must be >= 1")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a JSON document into a validated :class:`RunConfig`; empty text means all defaults."""
    if text.strip():
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed configuration: {exc}") from None
    else:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")

    cfg = RunConfig()
    for key, value in doc.items():
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown key")
        schema = _SCHEMA[key]
        if not isinstance(schema, dict):
            setattr(cfg, key, _coerce(key, value, schema))
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected a table")
        current = getattr(cfg, key)
        if isinstance(current, dict):
            setattr(cfg, key, _merge_section(key, current, value, schema))
        else:
            merged = _merge_section(key, asdict(current), value, schema)
            for sub in ("slit_high", "slit_low"):
                if sub in value:
                    defaults = asdict(ProtocolSection())[sub]
                    merged[sub] = _merge_section(f"{key}.{sub}", defaults, value[sub], _APERTURE_KEYS)
            setattr(cfg, key, type(current)(**merged))
    return validate(cfg)
