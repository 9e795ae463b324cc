"""Resampling, sliding-window segmentation and subject-wise splitting."""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..errors import ConfigError, DataError
from .types import SegmentBatch, SplitPlan


def resample(signal, from_hz, to_hz):
    """Upsample by an integer factor with linear interpolation along the last axis.

    Original samples land exactly at multiples of the factor.
    """
    ratio = to_hz / from_hz
    factor = int(round(ratio))
    if factor < 1 or not math.isclose(ratio, factor, rel_tol=0, abs_tol=1e-12):
        raise ConfigError(f"resampling needs an integer upsampling factor, got {ratio}")
    x = np.asarray(signal, dtype=np.float64)
    if factor == 1 or x.shape[-1] == 0:
        return x.copy()
    n = x.shape[-1]
    out = np.empty(x.shape[:-1] + ((n - 1) * factor + 1,))
    out[..., ::factor] = x
    for r in range(1, factor):
        t = r / factor
        out[..., r::factor] = (1 - t) * x[..., :-1] + t * x[..., 1:]
    return out


def hop_length(window_size, overlap):
    if not 0 <= overlap < 1:
        raise ConfigError("overlap must lie in [0, 1)")
    if window_size < 1:
        raise ConfigError("window size must be positive")
    return max(1, int(math.floor(window_size * (1 - overlap) + 1e-9)))


def window_count(length, window_size, overlap):
    if length < window_size:
        return 0
    return (length - window_size) // hop_length(window_size, overlap) + 1


def majority_label(labels):
    """Most frequent label; ties go to the label that appears first."""
    values, first, counts = np.unique(labels, return_index=True, return_counts=True)
    best = counts.max()
    cands = np.flatnonzero(counts == best)
    return values[cands[np.argmin(first[cands])]]


def segment(recording, window_size, overlap=0.5):
    """Cut a recording into windows with the given fractional overlap.

    Too-short recordings yield an empty batch and a warning.
    """
    hop = hop_length(window_size, overlap)
    n = window_count(recording.length, window_size, overlap)
    layout = recording.layout
    if n == 0:
        warnings.warn(f"recording of subject {recording.subject_id} is shorter than "
                      f"{window_size} samples; no windows produced", stacklevel=2)
        return SegmentBatch.empty(layout, window_size, overlap, recording.sample_rate_hz)
    starts = np.arange(n) * hop
    windows = np.stack([recording.signals[:, s:s + window_size] for s in starts])
    per_sample = recording.sample_labels()
    labels = np.array([majority_label(per_sample[s:s + window_size]) for s in starts])
    return SegmentBatch(windows, labels, np.full(n, recording.subject_id), window_size,
                        overlap, layout, recording.sample_rate_hz)


def segment_all(recordings, window_size, overlap=0.5):
    batches = [segment(r, window_size, overlap) for r in recordings]
    if not batches:
        raise DataError("no recordings to segment")
    return SegmentBatch.concat(batches)


def split_subjects(subjects, fraction=0.7, seed=0):
    """Subject-disjoint hold-out plan with ``round(fraction * n)`` training subjects."""
    if not 0 < fraction < 1:
        raise ConfigError("split fraction must lie in (0, 1)")
    subjects = np.unique(np.asarray(list(subjects), dtype=np.int64))
    if len(subjects) < 2:
        raise DataError("need at least two subjects to split")
    n_train = min(max(int(round(fraction * len(subjects))), 1), len(subjects) - 1)
    perm = np.random.default_rng(seed).permutation(subjects)
    return SplitPlan(frozenset(int(s) for s in perm[:n_train]),
                     frozenset(int(s) for s in perm[n_train:]), fraction, int(seed))


def apply_split(batch, plan):
    """``(train, test)``: train windows shuffled with the plan seed, test order kept."""
    in_train = np.isin(batch.subject_ids, list(plan.train_subjects))
    in_test = np.isin(batch.subject_ids, list(plan.test_subjects))
    train_idx = np.flatnonzero(in_train)
    train_idx = train_idx[np.random.default_rng(plan.seed).permutation(len(train_idx))]
    return batch.subset(train_idx), batch.subset(np.flatnonzero(in_test))
