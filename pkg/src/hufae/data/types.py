"""Containers for recordings, windowed batches and subject splits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError, DimensionError
from ..model.config import SensorLayout


@dataclass
class Recording:
    """One subject's continuous multi-axis signal.

    ``labels`` is either per-sample ``(L,)`` or a scalar label for the whole
    recording.
    """

    subject_id: int
    signals: np.ndarray
    sample_rate_hz: float
    labels: np.ndarray
    layout: SensorLayout = field(default_factory=SensorLayout)

    def __post_init__(self):
        self.signals = np.asarray(self.signals, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.signals.ndim != 2 or self.signals.shape[0] != self.layout.n_channels:
            raise DimensionError(
                f"signals must be ({self.layout.n_channels}, L), got {self.signals.shape}")
        if not self.sample_rate_hz > 0:
            raise DataError("sample rate must be positive")
        if self.labels.ndim == 1 and len(self.labels) != self.length:
            raise DimensionError("per-sample labels must match the signal length")
        if self.labels.ndim > 1:
            raise DimensionError("labels must be scalar or per-sample")

    @property
    def length(self):
        return self.signals.shape[1]

    def sample_labels(self):
        if self.labels.ndim == 0:
            return np.full(self.length, self.labels.item())
        return self.labels


@dataclass
class SegmentBatch:
    windows: np.ndarray
    labels: np.ndarray
    subject_ids: np.ndarray
    window_size: int
    overlap: float = 0.5
    layout: SensorLayout = field(default_factory=SensorLayout)
    sample_rate_hz: Optional[float] = None

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.subject_ids = np.asarray(self.subject_ids, dtype=np.int64)
        n = len(self.windows)
        if self.windows.shape[1:] != (self.layout.n_channels, self.window_size):
            raise DimensionError(
                f"windows must be (N, {self.layout.n_channels}, {self.window_size}), "
                f"got {self.windows.shape}")
        if self.labels.shape != (n,) or self.subject_ids.shape != (n,):
            raise DimensionError("labels and subject_ids need one entry per window")

    def __len__(self):
        return len(self.windows)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return SegmentBatch(self.windows[idx], self.labels[idx], self.subject_ids[idx],
                            self.window_size, self.overlap, self.layout, self.sample_rate_hz)

    @classmethod
    def empty(cls, layout, window_size, overlap=0.5, sample_rate_hz=None):
        return cls(np.zeros((0, layout.n_channels, window_size)), np.zeros(0, np.int64),
                   np.zeros(0, np.int64), window_size, overlap, layout, sample_rate_hz)

    @classmethod
    def concat(cls, batches):
        batches = list(batches)
        if not batches:
            raise DataError("nothing to concatenate")
        first = batches[0]
        return cls(np.concatenate([b.windows for b in batches]),
                   np.concatenate([b.labels for b in batches]),
                   np.concatenate([b.subject_ids for b in batches]),
                   first.window_size, first.overlap, first.layout, first.sample_rate_hz)


@dataclass(frozen=True)
class SplitPlan:
    train_subjects: frozenset
    test_subjects: frozenset
    fraction: float
    seed: int

    def to_dict(self):
        return {"train_subjects": sorted(int(s) for s in self.train_subjects),
                "test_subjects": sorted(int(s) for s in self.test_subjects),
                "fraction": self.fraction, "seed": self.seed}
