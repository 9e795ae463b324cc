"""Readers for the UCI-HAR raw inertial signals and a generic per-sample CSV."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..model.config import AXES, SensorLayout
from .types import Recording

UCI_RATE_HZ = 50.0
UCI_WINDOW = 128
UCI_TRAIN_WINDOWS = 7352
UCI_TEST_WINDOWS = 2947
_UCI_FILES = [f"body_acc_{c}" for c in "xyz"] + [f"body_gyro_{c}" for c in "xyz"]


def _load_matrix(path):
    if not path.exists():
        raise DataError(f"missing file: {path}")
    try:
        arr = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    return arr


def _load_ints(path):
    if not path.exists():
        raise DataError(f"missing file: {path}")
    try:
        return np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc


def read_uci_partition(root, partition="train"):
    """Raw windows of one partition: ``(windows (N, 6, 128), labels, subjects)``."""
    base = Path(root) / partition
    sig = [_load_matrix(base / "Inertial Signals" / f"{name}_{partition}.txt")
           for name in _UCI_FILES]
    labels = _load_ints(base / f"y_{partition}.txt")
    subjects = _load_ints(base / f"subject_{partition}.txt")
    n = len(labels)
    if len(subjects) != n or any(s.shape[0] != n for s in sig):
        raise DataError(f"row counts differ between signal, label and subject files "
                        f"in {base}")
    if len({s.shape[1] for s in sig}) != 1:
        raise DataError("signal files have different window lengths")
    if n and (labels.min() < 1 or labels.max() > 6):
        raise DataError("UCI-HAR labels must lie in 1..6")
    if n and (subjects.min() < 1 or subjects.max() > 30):
        raise DataError("UCI-HAR subject ids must lie in 1..30")
    return np.stack(sig, axis=1), labels, subjects


def _stitch(windows, labels, subjects, rate, layout):
    """Rebuild continuous runs from half-overlapping windows."""
    recordings = []
    width = windows.shape[2]
    hop = width // 2
    run_sig, run_lab, run_subj, prev = None, None, None, None

    def close():
        if run_sig is not None:
            recordings.append(Recording(run_subj, np.concatenate(run_sig, axis=1), rate,
                                        np.concatenate(run_lab), layout))

    for w, y, s in zip(windows, labels, subjects):
        if prev is not None and s == run_subj and np.array_equal(prev[:, hop:],
                                                                 w[:, :width - hop]):
            run_sig.append(w[:, width - hop:])
            run_lab.append(np.full(hop, y))
        else:
            close()
            run_sig, run_lab, run_subj = [w], [np.full(width, y)], int(s)
        prev = w
    close()
    return recordings


def ingest_uci_har(root, partitions=("train", "test"), check_counts=False):
    """Load UCI-HAR body acceleration and gyroscope signals as recordings.

    Consecutive windows of one subject whose halves coincide are stitched
    back into a continuous recording with per-sample labels (1..6), 50 Hz.
    With ``check_counts`` the published window totals are enforced.
    """
    layout = SensorLayout(1)
    expected = {"train": UCI_TRAIN_WINDOWS, "test": UCI_TEST_WINDOWS}
    recordings = []
    for part in partitions:
        windows, labels, subjects = read_uci_partition(root, part)
        if check_counts and len(windows) != expected[part]:
            raise DataError(f"{part} partition has {len(windows)} windows, "
                            f"expected {expected[part]}")
        recordings += _stitch(windows, labels, subjects, UCI_RATE_HZ, layout)
    return recordings


def _layout_from_header(columns):
    units = []
    for col in columns:
        unit, _, axis = col.rpartition("_")
        if axis not in AXES or not unit:
            raise DataError(f"unknown column {col!r}")
        if unit not in units:
            units.append(unit)
    return SensorLayout(len(units), units)


def ingest_csv(path, layout=None, sample_rate_hz=50.0):
    """Read ``subject,label,<unit>_<axis>...`` rows into one recording per subject run.

    A new recording starts whenever the subject id changes. Columns of units
    marked inactive in ``layout`` may be absent and are zero-filled; columns
    of active units must be present.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["subject", "label"]:
        raise DataError("CSV header must start with subject,label")
    sensor_cols = header[2:]
    if len(set(sensor_cols)) != len(sensor_cols):
        raise DataError("duplicate column names")
    layout = layout or _layout_from_header(sensor_cols)
    names = layout.channel_names()
    unknown = [c for c in sensor_cols if c not in names]
    if unknown:
        raise DataError(f"unknown columns: {unknown}")
    for j, unit in enumerate(layout.unit_names):
        if layout.active_mask[j]:
            missing = [f"{unit}_{a}" for a in AXES if f"{unit}_{a}" not in sensor_cols]
            if missing:
                raise DataError(f"active unit {unit!r} lacks columns {missing}")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise DataError("ragged CSV rows")
    try:
        table = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    except ValueError as exc:
        raise DataError(f"non-numeric CSV value: {exc}") from exc
    subjects = table[:, 0].astype(np.int64)
    labels = table[:, 1].astype(np.int64)
    signals = np.zeros((layout.n_channels, len(body)))
    for c, col in enumerate(sensor_cols):
        signals[names.index(col)] = table[:, 2 + c]
    recordings = []
    if len(body) == 0:
        return recordings
    cuts = np.flatnonzero(np.diff(subjects)) + 1
    for s, e in zip(np.r_[0, cuts], np.r_[cuts, len(body)]):
        recordings.append(Recording(int(subjects[s]), signals[:, s:e], sample_rate_hz,
                                    labels[s:e], layout))
    return recordings
