"""Run configuration: defaults, JSON round-trip, and validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

MATCHERS = ("ot", "tta", "pointwise")
# accepted on input, canonicalized to "pointwise"
_MATCHER_ALIASES = {"pointwise-baseline": "pointwise"}
WEIGHT_SCHEMES = ("entropy", "uniform")
AMBIGUITY_METRICS = ("similarity", "distance")


@dataclass
class MatchConfig:
    matcher: str = "ot"
    tau: float = 0.01
    epsilon: float = 0.1
    sinkhorn_iters: int = 100
    sinkhorn_tol: float = 1e-6
    tau_w: float = 0.5
    weights: str = "entropy"
    tta_lr: float = 5e-4
    tta_fraction: float = 0.1
    renormalize_shifted: bool = False
    n_views: int = 100
    crop_scale: tuple[float, float] = (0.2, 1.0)
    synonyms_max: int = 5
    ambiguity_metric: str = "similarity"
    seed: int = 0
    select_views: bool = True

    def __post_init__(self):
        self.matcher = _MATCHER_ALIASES.get(self.matcher, self.matcher)
        self.crop_scale = tuple(float(x) for x in self.crop_scale)
        self.validate()

    def validate(self) -> None:
        if self.matcher not in MATCHERS:
            raise ConfigError(
                f"unknown matcher {self.matcher!r}, expected one of {MATCHERS}"
            )
        if self.weights not in WEIGHT_SCHEMES:
            raise ConfigError(
                f"unknown weights scheme {self.weights!r}, expected one of {WEIGHT_SCHEMES}"
            )
        if self.ambiguity_metric not in AMBIGUITY_METRICS:
            raise ConfigError(
                f"unknown ambiguity metric {self.ambiguity_metric!r}"
            )
        for name in ("tau", "epsilon", "sinkhorn_tol", "tau_w", "tta_lr"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value <= 0.0:
                raise ConfigError(f"{name} must be > 0, got {value!r}")
        if not isinstance(self.sinkhorn_iters, int) or self.sinkhorn_iters < 1:
            raise ConfigError(f"sinkhorn_iters must be a positive integer")
        if not isinstance(self.n_views, int) or self.n_views < 1:
            raise ConfigError(f"n_views must be a positive integer")
        if not isinstance(self.synonyms_max, int) or self.synonyms_max < 0:
            raise ConfigError(f"synonyms_max must be an integer >= 0")
        if not 0.0 < self.tta_fraction <= 1.0:
            raise ConfigError(
                f"tta_fraction must be in (0, 1], got {self.tta_fraction}"
            )
        lo, hi = self.crop_scale
        if not 0.0 < lo <= hi <= 1.0:
            raise ConfigError(f"crop_scale must satisfy 0 < lo <= hi <= 1, got {self.crop_scale}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.renormalize_shifted, bool):
            raise ConfigError("renormalize_shifted must be a boolean")
        if not isinstance(self.select_views, bool):
            raise ConfigError("select_views must be a boolean")

    def replace(self, **changes) -> "MatchConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["crop_scale"] = list(self.crop_scale)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "MatchConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        clean = dict(data)
        if "crop_scale" in clean:
            cs = clean["crop_scale"]
            if not (isinstance(cs, (list, tuple)) and len(cs) == 2):
                raise ConfigError(f"crop_scale must be a [lo, hi] pair, got {cs!r}")
            clean["crop_scale"] = tuple(cs)
        try:
            return cls(**clean)
        except TypeError as exc:
            raise ConfigError(f"bad config value: {exc}") from exc

    @classmethod
    def from_json_file(cls, path: str | Path) -> "MatchConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(data)
