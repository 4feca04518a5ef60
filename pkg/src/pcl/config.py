"""Run configuration: one JSON file per run.

Defaults (all overridable):

* ``tol = 1e-12`` integrator tolerance, allowed range ``[1e-12, 1e-3]``.
* ``t_end = 0.4`` (``0.35`` for P6, starting at ``t0 = 0.2``); ``grid`` of 64 points on the default spectral segment.
* ``h_t = 4e-3`` time step of the certification differences (halved once for
  the order estimate), ``h_x = 1e-3`` for x-differences of the elliptic pair.
* auxiliary seeds ``g12_0 = v_0 = K_0 = 1``.
* ``samples = 10`` random ``(x, t)`` points drawn with ``sample_seed = 0``.
* ``out = "out"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError, PCLError
from .params import (
    P3Params,
    P4Params,
    P5Params,
    P6Params,
    PainleveKind,
    as_kind,
    decode_complex,
    default_params,
    encode_complex,
    make_params,
    params_from_json,
    params_to_json,
)

TOL_RANGE = (1e-12, 1e-3)
MAX_COUNT = 10_000
MIN_GRID = 5


@dataclass(frozen=True)
class GridSpec:
    """Uniform spectral grid; ``None`` endpoints select the default segment."""

    x_start: complex | None = None
    x_end: complex | None = None
    count: int = 64

    def to_json(self):
        return {
            "x_start": None if self.x_start is None else encode_complex(self.x_start),
            "x_end": None if self.x_end is None else encode_complex(self.x_end),
            "count": self.count,
        }

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("grid must be a JSON object")
        _no_extra(data, {"x_start", "x_end", "count"}, "grid")
        xs, xe = data.get("x_start"), data.get("x_end")
        return cls(
            None if xs is None else decode_complex(xs),
            None if xe is None else decode_complex(xe),
            _int(data.get("count", 64), "grid.count"),
        )


@dataclass(frozen=True)
class Seeds:
    g12_0: complex = 1.0
    v_0: complex = 1.0
    K_0: complex = 1.0

    def to_json(self):
        return {f.name: encode_complex(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("seeds must be a JSON object")
        _no_extra(data, {"g12_0", "v_0", "K_0"}, "seeds")
        return cls(**{k: decode_complex(v) for k, v in data.items()})

    def for_kind(self, kind):
        kind = as_kind(kind)
        if kind is PainleveKind.P3:
            return self.g12_0
        if kind is PainleveKind.P5:
            return self.v_0
        return self.K_0


@dataclass(frozen=True)
class RunConfig:
    kind: PainleveKind
    params: object
    t0: float
    u0: complex
    du0: complex
    t_end: float
    tol: float = 1e-12
    grid: GridSpec = field(default_factory=GridSpec)
    h_t: float = 4e-3
    h_x: float = 1e-3
    seeds: Seeds = field(default_factory=Seeds)
    samples: int = 10
    sample_seed: int = 0
    disable_shift: bool = False
    out: str = "out"

    def __post_init__(self):
        validate(self)

    def to_json(self) -> str:
        data = {
            "kind": self.kind.value,
            "params": params_to_json(self.params),
            "t0": self.t0,
            "u0": encode_complex(self.u0),
            "du0": encode_complex(self.du0),
            "t_end": self.t_end,
            "tol": self.tol,
            "grid": self.grid.to_json(),
            "h_t": self.h_t,
            "h_x": self.h_x,
            "seeds": self.seeds.to_json(),
            "samples": self.samples,
            "sample_seed": self.sample_seed,
            "disable_shift": self.disable_shift,
            "out": self.out,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def with_changes(self, **changes) -> "RunConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RunConfig(**values)


_KEYS = {f.name for f in fields(RunConfig)}


def _no_extra(data, allowed, where):
    extra = set(data) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _float(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a real number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    return v


def _int(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    return v


def validate(cfg: RunConfig):
    object.__setattr__(cfg, "kind", as_kind(cfg.kind))
    for name in ("t0", "t_end", "tol", "h_t", "h_x"):
        object.__setattr__(cfg, name, _float(getattr(cfg, name), name))
    for name in ("u0", "du0"):
        z = complex(getattr(cfg, name))
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ConfigError(f"{name} must be finite")
        object.__setattr__(cfg, name, z)
    lo, hi = TOL_RANGE
    if not lo <= cfg.tol <= hi:
        raise ConfigError(f"tol must lie in [{lo:g}, {hi:g}], got {cfg.tol:g}")
    if cfg.t_end == cfg.t0:
        raise ConfigError("t_end must differ from t0")
    if not 0 < cfg.h_t <= 0.05:
        raise ConfigError("h_t must lie in (0, 0.05]")
    if not 0 < cfg.h_x <= 0.05:
        raise ConfigError("h_x must lie in (0, 0.05]")
    if not isinstance(cfg.grid, GridSpec):
        raise ConfigError("grid must be a GridSpec")
    if not isinstance(cfg.seeds, Seeds):
        raise ConfigError("seeds must be a Seeds record")
    if not MIN_GRID <= _int(cfg.grid.count, "grid.count") <= MAX_COUNT:
        raise ConfigError(f"grid.count must lie in [{MIN_GRID}, {MAX_COUNT}]")
    if (cfg.grid.x_start is None) != (cfg.grid.x_end is None):
        raise ConfigError("grid needs both x_start and x_end, or neither")
    if not 1 <= _int(cfg.samples, "samples") <= MAX_COUNT:
        raise ConfigError(f"samples must lie in [1, {MAX_COUNT}]")
    _int(cfg.sample_seed, "sample_seed")
    if not isinstance(cfg.disable_shift, bool):
        raise ConfigError("disable_shift must be a boolean")
    if not isinstance(cfg.out, str) or not cfg.out:
        raise ConfigError("out must be a non-empty string")
    try:
        make_params(cfg.kind, **cfg.params.as_dict())
    except PCLError as exc:
        raise ConfigError(f"invalid params: {exc}") from None
    except (AttributeError, TypeError):
        raise ConfigError("params must be a parameter set") from None


# (params, t0, u0, du0, t_end); the P6 span stays where 1 - T is not tiny
_DEFAULT_DATA = {
    PainleveKind.P1: (None, 0.0, 0.5 + 0.1j, 0.2, 0.4),
    PainleveKind.P2: ({"alpha": 0.3}, 0.0, 0.5, 0.2 - 0.1j, 0.4),
    PainleveKind.P3_TRUNCATED: (None, 0.0, 0.3, 0.1, 0.4),
    PainleveKind.P3: (P3Params(0.7, 0.5, 0.2), 0.0, 0.3 + 0.1j, 0.1, 0.4),
    PainleveKind.P4: (P4Params(0.5, 0.3), 0.0, 0.7, 0.2, 0.4),
    PainleveKind.P5: (P5Params.from_xi_zeta_sigma(0.3, 0.4, 0.2), 0.0, 0.6 + 0.2j, 0.1, 0.4),
    PainleveKind.P6: (P6Params.from_xi(0.1, 0.2, 0.15, -0.8), 0.2, 0.3 + 0.1j, 0.2, 0.35),
}


def default_config(kind) -> RunConfig:
    """Generic parameters and initial data for ``kind``."""
    kind = as_kind(kind)
    p, t0, u0, du0, t_end = _DEFAULT_DATA[kind]
    if p is None:
        p = default_params(kind)
    elif isinstance(p, dict):
        p = make_params(kind, **p)
    return RunConfig(kind, p, t0, u0, du0, t_end)


def config_from_dict(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _no_extra(data, _KEYS, "config")
    if "kind" not in data:
        raise ConfigError("config needs a 'kind'")
    kind = as_kind(data["kind"])
    base = default_config(kind)
    values = {f.name: getattr(base, f.name) for f in fields(RunConfig)}
    for k, v in data.items():
        if k == "kind":
            continue
        if k == "params":
            values[k] = params_from_json(kind, v)
        elif k in ("u0", "du0"):
            values[k] = decode_complex(v)
        elif k == "grid":
            values[k] = GridSpec.from_json(v)
        elif k == "seeds":
            values[k] = Seeds.from_json(v)
        else:
            values[k] = v
    values["kind"] = kind
    if "t0" in data and "t_end" not in data:
        values["t_end"] = _float(data["t0"], "t0") + (base.t_end - base.t0)
    return RunConfig(**values)


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(data)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
