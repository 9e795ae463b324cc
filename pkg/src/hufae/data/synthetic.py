"""Seeded synthetic multi-unit IMU corpus with known class structure.

Every class owns a fundamental frequency (``base_bin + bin_step * c`` DFT
bins at the window size) plus a weaker second harmonic, and a per-unit,
per-axis amplitude profile. One unit is non-discriminative: it carries the
same signal for every class.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..model.config import SensorLayout
from .types import SegmentBatch


@dataclass
class SyntheticConfig:
    n_units: int = 4
    classes: int = 6
    windows_per_class: int = 200
    window_size: int = 512
    noise_std: float = 0.1
    seed: int = 0
    n_subjects: int = 10
    sample_rate_hz: float = 50.0
    base_bin: int = 8
    bin_step: int = 4
    harmonic_gain: float = 0.3
    random_phase: bool = True
    non_discriminative_unit: Optional[int] = None

    def validate(self):
        if self.n_units < 1 or self.classes < 1 or self.windows_per_class < 1:
            raise ConfigError("n_units, classes and windows_per_class must be positive")
        if self.window_size < 4:
            raise ConfigError("window size too small")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be nonnegative")
        if self.n_subjects < 1:
            raise ConfigError("need at least one subject")
        if self.bin_step < 2 or self.base_bin < 1:
            raise ConfigError("class fundamentals must be at least 2 bins apart")
        top = 2 * (self.base_bin + self.bin_step * (self.classes - 1))
        if top >= self.window_size // 2:
            raise ConfigError("class harmonics exceed the Nyquist bin")
        nd = self.nd_unit
        if nd is not None and not 0 <= nd < self.n_units:
            raise ConfigError("non_discriminative_unit out of range")
        return self

    @property
    def nd_unit(self):
        """Index of the non-discriminative unit (last unit by default, none when n=1)."""
        if self.non_discriminative_unit is not None:
            return self.non_discriminative_unit
        return self.n_units - 1 if self.n_units > 1 else None

    @classmethod
    def from_dict(cls, data):
        from ..model.config import _from_dict
        return _from_dict(cls, data)

    def to_dict(self):
        return asdict(self)


def class_bins(config):
    return [config.base_bin + config.bin_step * c for c in range(config.classes)]


def generate_synthetic(config=None, **overrides):
    """Build the corpus. Returns ``(SegmentBatch, ground_truth dict)``.

    Windows are ordered class by class; window ``i`` of each class belongs to
    subject ``i % n_subjects + 1``.
    """
    if config is None:
        config = SyntheticConfig(**overrides)
    elif overrides:
        config = SyntheticConfig(**{**config.to_dict(), **overrides})
    config.validate()
    rng = np.random.default_rng(config.seed)
    n, W = config.n_units, config.window_size
    bins = class_bins(config)
    nd = config.nd_unit
    amps = rng.uniform(0.5, 1.5, size=(config.classes, n, 6))
    nd_bin = max(1, config.base_bin // 2)
    if nd is not None:
        amps[:, nd] = rng.uniform(0.5, 1.5, size=6)
    axis_offsets = np.arange(6) * (np.pi / 6)
    t = np.arange(W)
    total = config.classes * config.windows_per_class
    windows = np.empty((total, 6 * n, W))
    labels = np.repeat(np.arange(config.classes), config.windows_per_class)
    subjects = np.tile(np.arange(config.windows_per_class) % config.n_subjects + 1,
                       config.classes)
    for i, c in enumerate(labels):
        if config.random_phase:
            phases = rng.uniform(0, 2 * np.pi, size=n)
        else:
            phases = np.zeros(n)
        for j in range(n):
            k = nd_bin if j == nd else bins[c]
            arg = 2 * np.pi * k * t[None, :] / W + phases[j] + axis_offsets[:, None]
            sig = np.sin(arg) + config.harmonic_gain * np.sin(2 * arg)
            windows[i, 6 * j:6 * j + 6] = amps[c, j][:, None] * sig
    if config.noise_std > 0:
        windows += rng.normal(0.0, config.noise_std, size=windows.shape)
    layout = SensorLayout(n)
    batch = SegmentBatch(windows, labels, subjects, W, 0.0, layout, config.sample_rate_hz)
    truth = {
        "config": config.to_dict(),
        "class_bins": bins,
        "non_discriminative_unit": nd,
        "non_discriminative_bin": nd_bin if nd is not None else None,
        "amplitudes": amps.round(12).tolist(),
        "unit_names": list(layout.unit_names),
    }
    return batch, truth


def write_corpus_csv(batch, path):
    """One row per sample in the ``subject,label,<unit>_<axis>`` schema."""
    path = Path(path)
    header = ["subject", "label"] + batch.layout.channel_names()
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for w, y, s in zip(batch.windows, batch.labels, batch.subject_ids):
            for col in w.T:
                writer.writerow([int(s), int(y)] + [repr(float(v)) for v in col])
    return path


def write_ground_truth(truth, path):
    path = Path(path)
    path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
