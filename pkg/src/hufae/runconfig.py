"""Run configuration shared by the command-line tools."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .data import (SegmentBatch, SyntheticConfig, generate_synthetic, ingest_csv,
                   ingest_uci_har, resample, segment_all)
from .data.types import Recording
from .errors import ConfigError, DataError
from .model.config import (ClassifierConfig, HufConfig, SensorLayout, desk_classifier_config,
                           desk_config)

PRESETS = ("desk", "full")
SOURCES = ("synthetic", "csv", "uci")


@dataclass
class RunConfig:
    """Everything a run depends on. Unknown keys are rejected on load.

    ``model`` and ``classifier`` hold partial overrides applied on top of the
    ``preset`` defaults. ``mask_units`` lists units that are treated as
    missing for the whole run (zeroed in training and evaluation).
    """

    source: str = "synthetic"
    path: Optional[str] = None
    synthetic: dict = field(default_factory=dict)
    layout: Optional[dict] = None
    sample_rate_hz: float = 50.0
    resample_to_hz: Optional[float] = None
    window_size: int = 512
    overlap: float = 0.5
    split_fraction: float = 0.7
    split_seed: int = 0
    preset: str = "desk"
    model: dict = field(default_factory=dict)
    classifier: dict = field(default_factory=dict)
    mask_units: list = field(default_factory=list)
    seed: int = 0
    jobs: int = 1
    verify_frozen: bool = False

    def validate(self):
        if self.source not in SOURCES:
            raise ConfigError(f"source must be one of {SOURCES}")
        if self.source != "synthetic" and not self.path:
            raise ConfigError(f"source {self.source!r} needs a path")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset must be one of {PRESETS}")
        if self.window_size < 1 or not 0 <= self.overlap < 1:
            raise ConfigError("invalid window size or overlap")
        if not 0 < self.split_fraction < 1:
            raise ConfigError("split_fraction must lie in (0, 1)")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        self.synthetic_config()
        self.huf_config()
        self.classifier_config()
        layout = self.sensor_layout()
        if layout is not None:
            self._check_mask(layout.n_units)
        return self

    def _check_mask(self, n_units):
        for j in self.mask_units:
            if not isinstance(j, int) or not 0 <= j < n_units:
                raise ConfigError(f"mask unit {j!r} out of range for {n_units} units")

    def synthetic_config(self):
        return SyntheticConfig.from_dict(self.synthetic)

    def huf_config(self):
        base = desk_config() if self.preset == "desk" else HufConfig()
        merged = base.to_dict()
        for key, val in self.model.items():
            if isinstance(val, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **val}
            else:
                merged[key] = val
        return HufConfig.from_dict(merged)

    def classifier_config(self):
        base = desk_classifier_config() if self.preset == "desk" else ClassifierConfig()
        return ClassifierConfig.from_dict({**base.to_dict(), **self.classifier})

    def sensor_layout(self):
        """Declared layout (with run masking applied), or None when implied by the data."""
        if self.layout is not None:
            layout = SensorLayout.from_dict(self.layout)
        elif self.source == "synthetic":
            layout = SensorLayout(self.synthetic_config().n_units)
        elif self.source == "uci":
            layout = SensorLayout(1)
        else:
            return None
        return self.apply_mask(layout)

    def apply_mask(self, layout):
        if not self.mask_units:
            return layout
        self._check_mask(layout.n_units)
        mask = [a and j not in self.mask_units for j, a in enumerate(layout.active_mask)]
        return layout.with_mask(mask)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("run config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def _prepare_recordings(recordings, rc):
    if rc.resample_to_hz and rc.resample_to_hz != rc.sample_rate_hz:
        recordings = [Recording(r.subject_id,
                                resample(r.signals, r.sample_rate_hz, rc.resample_to_hz),
                                rc.resample_to_hz, _resample_labels(r, rc), r.layout)
                      for r in recordings]
    if not recordings:
        raise DataError("no recordings found")
    return recordings


def _resample_labels(rec, rc):
    factor = int(round(rc.resample_to_hz / rec.sample_rate_hz))
    labels = rec.sample_labels()
    # every new sample takes the label of the original sample at or before it
    idx = (len(labels) - 1) * factor + 1
    return labels[np.arange(idx) // factor]


def load_dataset(rc):
    """Windowed batch for a run config, with run masking applied to the layout."""
    if rc.source == "synthetic":
        batch, _ = generate_synthetic(rc.synthetic_config())
    else:
        if rc.source == "uci":
            recordings = ingest_uci_har(rc.path)
        else:
            layout = SensorLayout.from_dict(rc.layout) if rc.layout else None
            recordings = ingest_csv(rc.path, layout, rc.sample_rate_hz)
        batch = segment_all(_prepare_recordings(recordings, rc), rc.window_size, rc.overlap)
    if len(batch) == 0:
        raise DataError("dataset produced no windows")
    layout = rc.apply_mask(batch.layout)
    return SegmentBatch(batch.windows, batch.labels, batch.subject_ids, batch.window_size,
                        batch.overlap, layout, batch.sample_rate_hz)
