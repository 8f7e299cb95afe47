"""Run configuration: every free parameter of the scores and diagnostics.

JSON schema (all keys optional; unknown keys are rejected)::

    {
      "disca_weights": {"x": 0.3333, "y": 0.3333, "z": 0.3333},
      "composition": {"p": 0.5, "q": 0.5, "u": 0.5, "v": 0.5},
      "thresholds": [0.95, 0.90, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55],
      "score_threshold": 0.9,
      "plateau": {"band_width": 0.05, "min_span": 0.5, "low_maxprob_ceiling": 0.5},
      "tail_coverage_limit": 0.3,
      "resample_bins": null,
      "rank_key": "disca",
      "computation": {
        "<model_id>": {"param_ratio": {"optimal_params": 1000000, "model_params": 2000000}},
        "<model_id>": {"energy_profile": {"pue": 1.58, "processes": [{"p_cpu": 1.0, "e_cpu": 2.0}]}}
      }
    }

``score_threshold`` is the worst admissible accuracy whose DiSCA feeds DiDMA,
NiDMA and the default ranking. ``rank_key`` is one of ``auc``, ``disca``
(at ``score_threshold``), ``disca@<t>``, ``didma``, ``nidma``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from selective_eval.diagnostics import (
    DEFAULT_BAND_WIDTH,
    DEFAULT_LOW_MAXPROB_CEILING,
    DEFAULT_MIN_SPAN,
    DEFAULT_TAIL_COVERAGE,
)
from selective_eval.scores import (
    TABLE2_THRESHOLDS,
    CompositionWeights,
    DiscaWeights,
    ScoreError,
    check_thresholds,
    computation_input_from_dict,
    computation_input_to_dict,
)

RANK_KEYS = ("auc", "disca", "didma", "nidma")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PlateauParams:
    band_width: float = DEFAULT_BAND_WIDTH
    min_span: float = DEFAULT_MIN_SPAN
    low_maxprob_ceiling: float = DEFAULT_LOW_MAXPROB_CEILING

    def __post_init__(self):
        if not self.band_width > 0:
            raise ConfigError("plateau.band_width must be > 0")
        if not 0 < self.min_span <= 1:
            raise ConfigError("plateau.min_span must be in (0, 1]")
        if not 0 < self.low_maxprob_ceiling < 1:
            raise ConfigError("plateau.low_maxprob_ceiling must be in (0, 1)")


@dataclass(frozen=True)
class RunConfig:
    disca_weights: DiscaWeights = field(default_factory=DiscaWeights)
    composition: CompositionWeights = field(default_factory=CompositionWeights)
    thresholds: tuple = TABLE2_THRESHOLDS
    score_threshold: float = 0.9
    plateau: PlateauParams = field(default_factory=PlateauParams)
    tail_coverage_limit: float = DEFAULT_TAIL_COVERAGE
    resample_bins: Optional[int] = None
    rank_key: str = "disca"
    computation: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            object.__setattr__(self, "thresholds", check_thresholds(self.thresholds))
        except ScoreError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.5 <= self.score_threshold <= 1.0:
            raise ConfigError("score_threshold must be in [0.5, 1.0]")
        if not 0 < self.tail_coverage_limit <= 1:
            raise ConfigError("tail_coverage_limit must be in (0, 1]")
        if self.resample_bins is not None and (
            isinstance(self.resample_bins, bool) or not isinstance(self.resample_bins, int)
            or self.resample_bins < 1
        ):
            raise ConfigError("resample_bins must be a positive integer or null")
        parse_rank_key(self.rank_key)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        kw = {}
        try:
            if "disca_weights" in obj:
                kw["disca_weights"] = DiscaWeights(**_floats(obj["disca_weights"], "xyz"))
            if "composition" in obj:
                kw["composition"] = CompositionWeights(**_floats(obj["composition"], "pquv"))
            if "plateau" in obj:
                kw["plateau"] = PlateauParams(**_floats(
                    obj["plateau"], ("band_width", "min_span", "low_maxprob_ceiling")))
            if "thresholds" in obj:
                kw["thresholds"] = tuple(_num(t, "thresholds") for t in obj["thresholds"])
            for key in ("score_threshold", "tail_coverage_limit"):
                if key in obj:
                    kw[key] = _num(obj[key], key)
            if "resample_bins" in obj:
                kw["resample_bins"] = obj["resample_bins"]
            if "rank_key" in obj:
                kw["rank_key"] = obj["rank_key"]
            if "computation" in obj:
                comp = obj["computation"]
                if not isinstance(comp, dict):
                    raise ConfigError("computation must map model ids to inputs")
                kw["computation"] = {m: computation_input_from_dict(v) for m, v in comp.items()}
        except ScoreError as exc:
            raise ConfigError(str(exc)) from None
        except TypeError as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        return cls(**kw)

    def to_dict(self) -> dict:
        w, c, pl = self.disca_weights, self.composition, self.plateau
        return {
            "disca_weights": {"x": w.x, "y": w.y, "z": w.z},
            "composition": {"p": c.p, "q": c.q, "u": c.u, "v": c.v},
            "thresholds": list(self.thresholds),
            "score_threshold": self.score_threshold,
            "plateau": {"band_width": pl.band_width, "min_span": pl.min_span,
                        "low_maxprob_ceiling": pl.low_maxprob_ceiling},
            "tail_coverage_limit": self.tail_coverage_limit,
            "resample_bins": self.resample_bins,
            "rank_key": self.rank_key,
            "computation": {m: computation_input_to_dict(v) for m, v in sorted(self.computation.items())},
        }

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply flat CLI overrides (x, y, z, p, q, u, v, band_width, ...); None means unset."""
        ov = {k: v for k, v in overrides.items() if v is not None}
        changes = {}
        try:
            if ov.keys() & set("xyz"):
                base = self.disca_weights
                changes["disca_weights"] = DiscaWeights(
                    ov.get("x", base.x), ov.get("y", base.y), ov.get("z", base.z))
            if ov.keys() & set("pquv"):
                base = self.composition
                changes["composition"] = CompositionWeights(
                    *(ov.get(k, getattr(base, k)) for k in "pquv"))
        except ScoreError as exc:
            raise ConfigError(str(exc)) from None
        plateau_keys = ("band_width", "min_span", "low_maxprob_ceiling")
        if ov.keys() & set(plateau_keys):
            changes["plateau"] = replace(self.plateau, **{k: ov[k] for k in plateau_keys if k in ov})
        for key in ("thresholds", "score_threshold", "tail_coverage_limit", "resample_bins", "rank_key"):
            if key in ov:
                changes[key] = ov[key]
        return replace(self, **changes) if changes else self

    def disca_key_threshold(self) -> Optional[float]:
        kind, t = parse_rank_key(self.rank_key)
        if kind != "disca":
            return None
        return self.score_threshold if t is None else t


def parse_rank_key(key: str):
    """'disca@0.85' -> ('disca', 0.85); 'auc' -> ('auc', None)."""
    if not isinstance(key, str):
        raise ConfigError(f"rank_key must be a string, got {key!r}")
    name, _, arg = key.partition("@")
    if name not in RANK_KEYS:
        raise ConfigError(f"unknown rank key {key!r}; expected one of {RANK_KEYS}")
    if not arg:
        return name, None
    if name != "disca":
        raise ConfigError(f"rank key {name!r} takes no threshold")
    try:
        return name, float(arg)
    except ValueError:
        raise ConfigError(f"bad threshold in rank key {key!r}") from None


def _num(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    return float(v)


def _floats(obj, keys):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object with keys {list(keys)}")
    unknown = sorted(set(obj) - set(keys))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    return {k: _num(v, k) for k, v in obj.items()}


def load_config(path) -> RunConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(obj)
