"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError


def check_windows(X, n_channels=None, min_length=1, allow_single=False):
    """Validate a window batch ``(N, C, W)`` of finite float64 values.

    With ``allow_single`` a lone ``(C, W)`` window is promoted to a batch
    of one; the second return value says whether that happened.
    """
    X = np.asarray(X, dtype=np.float64)
    single = False
    if allow_single and X.ndim == 2:
        X, single = X[None], True
    if X.ndim != 3:
        raise DimensionError(f"expected windows of shape (N, C, W), got {X.shape}")
    if n_channels is not None and X.shape[1] != n_channels:
        raise DimensionError(f"expected {n_channels} channels, got {X.shape[1]}")
    if X.shape[2] < min_length:
        raise DimensionError(f"windows must have at least {min_length} samples")
    if not np.all(np.isfinite(X)):
        raise NumericError("windows contain NaN or Inf")
    return (X, single) if allow_single else X


def check_features(X, n_features=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionError(f"expected {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise NumericError("features contain NaN or Inf")
    return X


def check_labels(y, n_samples):
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_samples:
        raise DimensionError(f"expected {n_samples} labels, got shape {y.shape}")
    return y
