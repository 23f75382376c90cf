"""Run configuration with lossless JSON round-trip."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .target import TargetChart, make_target
from .worldsheet import SCHEMES, ConformalFactor, TorusGrid, Worldsheet

TARGET_KINDS = ("flat_torus", "sphere", "perturbed_r4")


class ConfigError(ValueError):
    pass


@dataclass
class GridSpec:
    n_s: int = 64
    n_t: int = 64
    P_s: float = 1.0
    P_t: float = 1.0
    scheme: str = "spectral"


@dataclass
class TargetSpec:
    kind: str = "flat_torus"
    dim: int = 2
    eps_j: float = 0.1


@dataclass
class LambdaSpec:
    const: float = 1.0
    amplitude: float = 0.0
    freq: int = 1


@dataclass
class ConstructionSpec:
    # phi(z) = a z in complex coordinates; one Gaussian integer [re, im] per complex dimension
    winding: List[List[float]] = field(default_factory=lambda: [[1.0, 0.0]])
    zetas: List[List[float]] = field(default_factory=lambda: [[1.0, 0.0], [0.5, -0.25]])
    xi: List[List[float]] = field(default_factory=lambda: [[0.3, 0.1], [-0.2, 0.4]])
    psi_scale: float = 1.0


@dataclass
class RunConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    target: TargetSpec = field(default_factory=TargetSpec)
    lam: LambdaSpec = field(default_factory=LambdaSpec)
    seed: int = 7
    n_random: int = 3
    tolerances: Dict[str, float] = field(default_factory=dict)
    output_dir: str = "supercurve_out"
    construction: ConstructionSpec = field(default_factory=ConstructionSpec)

    def __post_init__(self):
        self.validate()

    def validate(self):
        g = self.grid
        if g.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {g.scheme!r}")
        for name in ("n_s", "n_t", "P_s", "P_t"):
            if not getattr(g, name) > 0:
                raise ConfigError(f"grid.{name} must be positive")
        if self.target.kind not in TARGET_KINDS:
            raise ConfigError(f"target.kind must be one of {TARGET_KINDS}")
        if self.target.dim <= 0 or self.target.eps_j < 0:
            raise ConfigError("target.dim must be positive and eps_j non-negative")
        if self.lam.const <= 0 or not 0 <= abs(self.lam.amplitude) < 1 or self.lam.freq <= 0:
            raise ConfigError("lambda must stay positive (const > 0, |amplitude| < 1, freq > 0)")
        if self.n_random <= 0:
            raise ConfigError("n_random must be positive")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance for {k} must be positive")

    # construction helpers ------------------------------------------------
    def make_sheet(self, n: Optional[int] = None, scheme: Optional[str] = None) -> Worldsheet:
        g = self.grid
        grid = TorusGrid(n or g.n_s, n or g.n_t, g.P_s, g.P_t, scheme or g.scheme)
        return Worldsheet(grid, ConformalFactor(self.lam.const, self.lam.amplitude, self.lam.freq))

    def make_target(self) -> TargetChart:
        return make_target(asdict(self.target))

    @property
    def curved(self) -> bool:
        return self.target.kind != "flat_torus"

    def tolerance(self, check: str) -> float:
        if check in self.tolerances:
            return float(self.tolerances[check])
        if self.grid.scheme == "spectral" and not self.curved:
            return 1e-9
        return 1e-6

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"grid", "target", "lam", "lambda", "seed", "n_random", "tolerances",
                 "output_dir", "construction"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(
                grid=GridSpec(**data.get("grid", {})),
                target=TargetSpec(**data.get("target", {})),
                lam=LambdaSpec(**data.get("lam", data.get("lambda", {}))),
                seed=int(data.get("seed", 7)),
                n_random=int(data.get("n_random", 3)),
                tolerances={k: float(v) for k, v in data.get("tolerances", {}).items()},
                output_dir=str(data.get("output_dir", "supercurve_out")),
                construction=ConstructionSpec(**data.get("construction", {})),
            )
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        try:
            return cls.from_json(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
