"""Domain configurations, the built-in registry and a seeded random field corpus."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml

from .certify import DEFAULT_K_GRID, Region
from .expr import Node, Point, parse

__all__ = [
    "DomainConfig", "ConfigError", "BUILTIN", "load_config", "builtin",
    "random_field", "random_defining", "random_point", "EXAMPLE6_R",
]

EXAMPLE6_R = "Re(w)+abs2(w)+Re(w)*abs2(z)+abs2(z)*abs2(w)+abs2(z)^2+abs2(z)^3"

Grid = Union[float, list]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DomainConfig:
    name: str
    r: str
    X: Optional[str] = None
    K: Grid = field(default_factory=lambda: list(DEFAULT_K_GRID))
    L: Optional[Grid] = None  # None: default magnitudes on the side chosen by the sign test
    center: tuple = (0.0, 0.0, 0.0, 0.0)
    radius: float = 0.3
    grid_n: int = 9
    inner: float = 0.0
    shape: str = "polydisc"
    p0: Optional[tuple] = None
    n_samples: int = 343
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if len(self.center) != 4:
            raise ConfigError("center needs four real coordinates x1, y1, x2, y2")
        if self.p0 is not None and len(self.p0) != 4:
            raise ConfigError("p0 needs four real coordinates x1, y1, x2, y2")
        if self.grid_n < 2:
            raise ConfigError("grid_n must be >= 2")
        if self.shape not in ("polydisc", "ball"):
            raise ConfigError(f"unknown shape {self.shape!r}")

    @property
    def r_node(self) -> Node:
        return parse(self.r)

    @property
    def X_node(self) -> Optional[Node]:
        return None if self.X is None else parse(self.X)

    @property
    def region(self) -> Region:
        return Region(Point.from_real(*self.center), float(self.radius), float(self.inner), self.shape)

    @property
    def base_point(self) -> Point:
        return Point.from_real(*(self.p0 if self.p0 is not None else self.center))

    @property
    def K_grid(self) -> list[float]:
        return _as_grid(self.K)

    @property
    def L_grid(self) -> Optional[list[float]]:
        return None if self.L is None else [abs(v) for v in _as_grid(self.L)]

    def tol(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))

    def with_(self, **changes) -> "DomainConfig":
        return replace(self, **changes)


def _as_grid(v) -> list[float]:
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in v]


BUILTIN = {
    "halfspace": DomainConfig("halfspace", "Im(w)", X="0", center=(0.0, 0.0, 0.0, 0.0), radius=0.5),
    "ball": DomainConfig("ball", "abs2(z)+abs2(w)-1", X="0", center=(1.0, 0.0, 0.0, 0.0), radius=0.3),
    "example6": DomainConfig("example6", EXAMPLE6_R, X="abs2(z)", center=(0.0, 0.0, 0.0, 0.0),
                             radius=0.3, grid_n=13),
}

_FIELDS = {"name", "r", "X", "K", "L", "center", "radius", "grid_n", "inner", "shape", "p0",
           "n_samples", "tolerances"}


def builtin(name: str) -> DomainConfig:
    try:
        return BUILTIN[name]
    except KeyError:
        raise ConfigError(f"unknown built-in domain {name!r}; choose from {sorted(BUILTIN)}") from None


def load_config(source: str) -> DomainConfig:
    """A built-in name or a YAML file with DomainConfig field names."""
    if source in BUILTIN:
        return BUILTIN[source]
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"no such config file or built-in domain: {source}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot read {source}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "r" not in data:
        raise ConfigError("config needs a defining function 'r'")
    data.setdefault("name", path.stem)
    for key in ("center", "p0"):
        if data.get(key) is not None:
            data[key] = tuple(float(x) for x in data[key])
    for key in ("r", "X"):
        if data.get(key) is not None:
            data[key] = str(data[key])
    try:
        cfg = DomainConfig(**data)
        cfg.r_node
        cfg.X_node
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------------------
# random polynomial fields

# real-valued building blocks with their degrees
_ATOMS = (
    ("Re(z)", 1), ("Im(z)", 1), ("Re(w)", 1), ("Im(w)", 1),
    ("abs2(z)", 2), ("abs2(w)", 2), ("Re(z*conj(w))", 2), ("Im(z*conj(w))", 2),
    ("Re(z*w)", 2), ("Im(z*w)", 2), ("Re(z^2)", 2), ("Im(w^2)", 2),
)


def _coef_text(c: float) -> str:
    return f"({c!r})" if c < 0 else repr(c)


def random_field(rng: np.random.Generator, max_degree: int = 4, n_terms: Optional[int] = None,
                 constant: bool = True, scale: float = 1.0) -> str:
    """Text of a random real polynomial of degree <= max_degree."""
    if n_terms is None:
        n_terms = int(rng.integers(3, 7))
    terms = []
    if constant:
        terms.append(_coef_text(float(scale * rng.uniform(-1, 1))))
    for _ in range(n_terms):
        budget = int(rng.integers(1, max_degree + 1))
        factors = []
        while budget > 0:
            choices = [a for a in _ATOMS if a[1] <= budget]
            text, deg = choices[int(rng.integers(len(choices)))]
            factors.append(text)
            budget -= deg
        terms.append("*".join([_coef_text(float(scale * rng.uniform(-1, 1)))] + factors))
    return "+".join(terms)


def random_defining(rng: np.random.Generator, max_degree: int = 4, scale: float = 0.3) -> str:
    """Re(w) plus a small degree-2..max_degree perturbation vanishing at the origin."""
    pert = random_field(rng, max_degree, constant=False, scale=scale)
    return f"Re(w)+{pert}"


def random_point(rng: np.random.Generator, radius: float = 1.0) -> Point:
    x = rng.uniform(-radius, radius, size=4)
    return Point.from_real(*x)
