"""Equation kinds and their parameter sets."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, fields
from enum import Enum

from .errors import ConfigError, DomainError


class PainleveKind(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3_TRUNCATED = "P3_truncated"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"
    P6 = "P6"


ALL_KINDS = tuple(PainleveKind)


def as_kind(kind) -> PainleveKind:
    if isinstance(kind, PainleveKind):
        return kind
    try:
        return PainleveKind(str(kind))
    except ValueError:
        raise ConfigError(f"unknown equation kind {kind!r}") from None


def _c(value, name) -> complex:
    try:
        z = complex(value)
    except (TypeError, ValueError):
        raise DomainError(f"parameter {name} must be a number, got {value!r}") from None
    if not (cmath.isfinite(z)):
        raise DomainError(f"parameter {name} must be finite, got {value!r}")
    return z


class _Params:
    kind_names: tuple = ()

    def __post_init__(self):
        for f in fields(self):
            if f.name == "xis":
                continue
            object.__setattr__(self, f.name, _c(getattr(self, f.name), f.name))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "xis"}


@dataclass(frozen=True)
class P1Params(_Params):
    """No parameters."""


@dataclass(frozen=True)
class P2Params(_Params):
    alpha: complex = 0.0


@dataclass(frozen=True)
class P3Params(_Params):
    """``V = -nu^2 e^t cosh(2x - 2 rho) - mu^2 e^{2t} cosh(4x)``."""

    nu: complex = 1.0
    mu: complex = 0.5
    rho: complex = 0.0

    def original(self):
        """(alpha, beta, gamma, delta) of the standard form with ``y = e^{2u}``, ``T = e^t``."""
        n2 = self.nu**2
        return (
            2 * n2 * cmath.exp(-2 * self.rho),
            -2 * n2 * cmath.exp(2 * self.rho),
            4 * self.mu**2,
            -4 * self.mu**2,
        )


@dataclass(frozen=True)
class P4Params(_Params):
    alpha: complex = 0.0
    beta: complex = 0.0


@dataclass(frozen=True)
class P5Params(_Params):
    alpha: complex = 0.0
    beta: complex = 0.0
    gamma: complex = 0.0
    delta: complex = -0.5

    @classmethod
    def from_xi_zeta_sigma(cls, xi, zeta, sigma) -> "P5Params":
        xi, zeta, sigma = complex(xi), complex(zeta), complex(sigma)
        return cls(2 * (xi + sigma) ** 2, -2 * zeta**2, 2 * sigma - 1, -0.5)

    def jimbo_miwa(self):
        """Return ``((xi + sigma)^2, zeta^2, sigma)``; requires ``delta = -1/2``."""
        if abs(self.delta + 0.5) > 1e-14:
            raise DomainError("the P5 pair exists only for delta = -1/2")
        return self.alpha / 2, -self.beta / 2, (self.gamma + 1) / 2


def _from_xi(xi0, xi1, xi2, xi3):
    xi = xi0 + xi1 + xi2 + xi3
    return 2 * (xi + 0.5) ** 2, -2 * xi0**2, 2 * xi1**2, 0.5 - 2 * xi2**2


@dataclass(frozen=True)
class P6Params(_Params):
    """``V = -sum_k nu_k wp(x + omega_k)`` with ``nu = (alpha, -beta, gamma, 1/2 - delta)``.

    ``xis`` optionally pins the residue constants ``(xi_0, xi_1, xi_2, xi_3)`` of
    the rational pair; otherwise principal square roots are used.
    """

    alpha: complex = 0.0
    beta: complex = 0.0
    gamma: complex = 0.0
    delta: complex = 0.5
    xis: tuple | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.xis is not None:
            xs = tuple(_c(v, "xi") for v in self.xis)
            if len(xs) != 4:
                raise DomainError("xis must have four entries")
            object.__setattr__(self, "xis", xs)
            for name, ref in zip(("alpha", "beta", "gamma", "delta"), _from_xi(*xs)):
                if abs(ref - getattr(self, name)) > 1e-12 * (1 + abs(ref)):
                    raise DomainError(f"xis inconsistent with {name}")

    @classmethod
    def from_nu(cls, nu0, nu1, nu2, nu3) -> "P6Params":
        return cls(complex(nu0), -complex(nu1), complex(nu2), 0.5 - complex(nu3))

    @classmethod
    def from_xi(cls, xi0, xi1, xi2, xi3) -> "P6Params":
        return cls(*_from_xi(xi0, xi1, xi2, xi3), xis=(xi0, xi1, xi2, xi3))

    @property
    def nu(self):
        return (self.alpha, -self.beta, self.gamma, 0.5 - self.delta)

    def residues(self):
        """``(xi_0, xi_1, xi_2, xi_3, xi)`` with ``xi = sum xi_i``."""
        if self.xis is not None:
            x0, x1, x2, x3 = self.xis
            return x0, x1, x2, x3, x0 + x1 + x2 + x3
        x0 = cmath.sqrt(-self.beta / 2)
        x1 = cmath.sqrt(self.gamma / 2)
        x2 = cmath.sqrt((0.5 - self.delta) / 2)
        xi = cmath.sqrt(self.alpha / 2) - 0.5
        return x0, x1, x2, xi - x0 - x1 - x2, xi

    def as_dict(self) -> dict:
        d = super().as_dict()
        if self.xis is not None:
            d["xis"] = list(self.xis)
        return d


_PARAM_CLASS = {
    PainleveKind.P1: P1Params,
    PainleveKind.P2: P2Params,
    PainleveKind.P3_TRUNCATED: P3Params,
    PainleveKind.P3: P3Params,
    PainleveKind.P4: P4Params,
    PainleveKind.P5: P5Params,
    PainleveKind.P6: P6Params,
}


def params_class(kind):
    return _PARAM_CLASS[as_kind(kind)]


def check_params(kind, params):
    kind = as_kind(kind)
    cls = _PARAM_CLASS[kind]
    if not isinstance(params, cls):
        raise ConfigError(f"{kind.value} expects {cls.__name__}, got {type(params).__name__}")
    if kind is PainleveKind.P3_TRUNCATED and (params.mu != 0 or params.rho != 0):
        raise DomainError("the truncated P3 equation has mu = 0 and rho = 0")
    return params


def default_params(kind):
    kind = as_kind(kind)
    if kind is PainleveKind.P3_TRUNCATED:
        return P3Params(nu=1.0, mu=0.0, rho=0.0)
    return _PARAM_CLASS[kind]()


def make_params(kind, **values):
    kind = as_kind(kind)
    if kind is PainleveKind.P3_TRUNCATED:
        values.setdefault("mu", 0.0)
        values.setdefault("rho", 0.0)
    if kind is PainleveKind.P6 and "xis" in values and values["xis"] is not None:
        xs = values.pop("xis")
        p = P6Params.from_xi(*[complex(v) for v in xs])
        for k, v in values.items():
            if abs(complex(v) - getattr(p, k)) > 1e-12 * (1 + abs(complex(v))):
                raise ConfigError(f"P6 parameter {k} inconsistent with xis")
        return p
    try:
        return check_params(kind, _PARAM_CLASS[kind](**values))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def encode_complex(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def decode_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"not a number: {v!r}")
    return complex(v)


def params_to_json(params) -> dict:
    out = {}
    for k, v in params.as_dict().items():
        out[k] = [encode_complex(x) for x in v] if isinstance(v, (list, tuple)) else encode_complex(v)
    return out


def params_from_json(kind, data: dict):
    if not isinstance(data, dict):
        raise ConfigError("params must be a JSON object")
    values = {}
    for k, v in data.items():
        if k == "xis":
            values[k] = [decode_complex(x) for x in v]
        else:
            values[k] = decode_complex(v)
    return make_params(kind, **values)
