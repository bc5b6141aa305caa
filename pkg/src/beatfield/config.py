"""Dataclass configuration for every pipeline stage.

All time-based constants are expressed in seconds and converted through the
recording's sample rate; no sampling rate is ever assumed.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

DATASET_STYLES = ("alarm2015", "afib2017")
SCENARIO_KINDS = ("offline", "incremental", "fixed", "event")

#: Padding pieces prepended before the first piece in the incremental scenario.
INCREMENTAL_PADDING = 3

#: Recordings with fewer pieces than this are rejected.
MIN_PIECES = 4


@dataclass(frozen=True)
class Scenario:
    """Receptive-field policy: which pieces feed the level-2 functions.

    kind        one of offline / incremental / fixed / event
    rf_length   window length e (fixed scenario only, >= 2)
    threshold   event-trigger distance; None selects the per-recording
                automatic threshold (median + 2*MAD over the warmup)
    warmup      pieces used to fit the automatic threshold
    """

    kind: str
    rf_length: int | None = None
    threshold: float | None = None
    warmup: int = 8

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "fixed":
            if self.rf_length is None or self.rf_length < 2:
                raise ConfigError("fixed scenario needs rf_length >= 2")
        if self.kind == "event":
            if self.threshold is not None and not self.threshold > 0:
                raise ConfigError("event threshold must be > 0")
            if self.warmup < 2:
                raise ConfigError("event warmup must be >= 2")

    @classmethod
    def offline(cls) -> "Scenario":
        return cls("offline")

    @classmethod
    def incremental(cls) -> "Scenario":
        return cls("incremental")

    @classmethod
    def fixed(cls, rf_length: int) -> "Scenario":
        return cls("fixed", rf_length=rf_length)

    @classmethod
    def event(cls, threshold: float | None = None, warmup: int = 8) -> "Scenario":
        return cls("event", threshold=threshold, warmup=warmup)

    @property
    def causal(self) -> bool:
        """True when row h depends only on pieces <= h (streamable)."""
        return self.kind != "offline"

    def descriptor(self, resolved_threshold: float | None = None) -> dict:
        """Provenance dict embedded in matrix headers."""
        return {
            "kind": self.kind,
            "rf_length": self.rf_length,
            "threshold": resolved_threshold if resolved_threshold is not None else self.threshold,
            "warmup": self.warmup if self.kind == "event" else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(
            kind=d["kind"],
            rf_length=d.get("rf_length"),
            threshold=d.get("threshold"),
            warmup=d.get("warmup", 8) or 8,
        )


@dataclass(frozen=True)
class PreprocessConfig:
    hf_ratio_threshold: float = 2.0
    flat_bin_fraction: float = 0.6
    invalid_record_fraction: float = 0.8
    window_seconds: float = 2.0
    min_tail_seconds: float = 1.0
    histogram_bins: int = 32


@dataclass(frozen=True)
class SegmentationConfig:
    refractory_seconds: float = 0.2
    min_rr_seconds: float = 0.25
    snap_seconds: float = 0.05
    peak_threshold_ratio: float = 0.5
    rolling_seconds: float = 2.0
    rolling_percentile: float = 98.0
    q_window_seconds: float = 0.08
    s_window_seconds: float = 0.08
    p_lo_seconds: float = 0.240
    p_hi_seconds: float = 0.060
    t_lo_seconds: float = 0.080
    t_hi_seconds: float = 0.400


@dataclass(frozen=True)
class Level2Config:
    bins: int = 10
    log_energy_eps: float = 1e-12
    kl_eps: float = 1e-12
    dtw_points: int = 64


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the featurize/stream drivers need."""

    dataset_style: str = "afib2017"
    scenario: Scenario = field(default_factory=Scenario.offline)
    seed: int = 0
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    level2: Level2Config = field(default_factory=Level2Config)

    def __post_init__(self):
        if self.dataset_style not in DATASET_STYLES:
            raise ConfigError(f"unknown dataset style {self.dataset_style!r}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        kw = dict(d)
        if "scenario" in kw and isinstance(kw["scenario"], dict):
            kw["scenario"] = Scenario.from_dict(kw["scenario"])
        for key, sub in (
            ("preprocess", PreprocessConfig),
            ("segmentation", SegmentationConfig),
            ("level2", Level2Config),
        ):
            if key in kw and isinstance(kw[key], dict):
                kw[key] = sub(**kw[key])
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
