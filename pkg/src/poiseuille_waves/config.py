"""Run configuration: a flat JSON object whose keys mirror the command-line flags.

Schema (every key optional)::

    epsilons       list of float   sweep values, each in (0, eps_max]
    epsilon        float           single-run value
    sigmas         list of float   amplitudes for the residual-scaling check
    trend          list of [eps, sigma] pairs for the H^gamma trend
    gamma          float           Sobolev exponent, in [0, 3/2)
    nx, ny         int             channel grid (ny points on the half channel)
    field_ny       int             full-channel rows for field export
    slob_grid      int             cells per direction for the fractional seminorm
    quad_tol       float           absolute/relative quadrature tolerance
    root_tol       float           bracket width for the dispersion root
    inversion_tol  float           level-set inversion tolerance
    n_max          int             highest mode in the one-dimensionality check
    eps_max        float           largest accepted epsilon
    out            str             output directory
    tolerance      float           overrides every check tolerance (forced-failure runs)
    tolerances     object          per-check overrides, keyed by "group.check"
    groups         list of str     check groups run by verify (default: all)
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .profile import EPS_MAX

OUTDIR_ENV = "POISEUILLE_WAVES_OUTDIR"


class ConfigError(ValueError):
    """Invalid configuration value or unknown key."""


@dataclass(frozen=True)
class RunConfig:
    epsilons: tuple = (0.1, 0.05, 0.02, 0.01)
    epsilon: float = 0.05
    sigmas: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    trend: tuple = ((0.1, 0.1), (0.05, 0.05), (0.025, 0.025))
    gamma: float = 1.4
    nx: int = 128
    ny: int = 257
    field_ny: int = 129
    slob_grid: int = 64
    quad_tol: float = 1e-10
    root_tol: float = 1e-15
    inversion_tol: float = 1e-15
    n_max: int = 10
    eps_max: float = EPS_MAX
    out: str = "."
    tolerance: float | None = None
    tolerances: dict = field(default_factory=dict)
    groups: tuple | None = None

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "inversion_tol", "gamma", "eps_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        for key, val in self.tolerances.items():
            if not val > 0:
                raise ConfigError(f"tolerance for {key} must be positive")
        eps = list(self.epsilons) + [self.epsilon] + [e for e, _ in self.trend]
        for e in eps:
            if not 0.0 < e <= self.eps_max:
                raise ConfigError(f"epsilon={e} outside (0, {self.eps_max}]")
        if self.nx < 16 or self.ny < 3 or self.slob_grid < 4:
            raise ConfigError("grid sizes too small")
        if self.n_max < 2:
            raise ConfigError("n_max must be at least 2")

    def tol(self, name: str, default: float) -> float:
        """Check tolerance: global override, then per-check override, then default."""
        if self.tolerance is not None:
            return self.tolerance
        return float(self.tolerances.get(name, default))

    @property
    def outdir(self) -> Path:
        return Path(os.environ.get(OUTDIR_ENV) or self.out)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["sigmas"] = list(self.sigmas)
        d["trend"] = [list(p) for p in self.trend]
        d["groups"] = None if self.groups is None else list(self.groups)
        return d


_TUPLES = {"epsilons", "sigmas"}


def from_dict(data: dict, base: RunConfig | None = None) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    vals = {}
    for k, v in data.items():
        if v is None and k != "tolerance":
            continue
        if k in _TUPLES:
            v = tuple(float(x) for x in v)
        elif k == "trend":
            v = tuple((float(e), float(s)) for e, s in v)
        elif k == "groups":
            v = tuple(str(g) for g in v)
        elif k == "tolerances":
            v = {str(name): float(t) for name, t in v.items()}
        vals[k] = v
    try:
        return replace(base or RunConfig(), **vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(data)
