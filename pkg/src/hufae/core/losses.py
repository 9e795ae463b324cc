from __future__ import annotations

import numpy as np

from ..errors import DimensionError, NumericError
from .functional import softmax


def mse_loss(pred, target):
    """Mean squared error and its gradient with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"pred {pred.shape} and target {target.shape} differ")
    if pred.size == 0:
        raise DimensionError("mse of empty tensors")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    if not np.isfinite(loss):
        raise NumericError("non-finite reconstruction loss")
    return loss, (2.0 / diff.size) * diff


def cross_entropy_loss(logits, labels):
    """Softmax cross-entropy averaged over the batch.

    ``logits`` is ``(N, C)`` (or ``(C,)`` with a scalar label).
    """
    logits = np.asarray(logits, dtype=np.float64)
    single = logits.ndim == 1
    if single:
        logits = logits[None]
    labels = np.atleast_1d(np.asarray(labels))
    if logits.size == 0:
        raise DimensionError("cross-entropy of empty logits")
    n, c = logits.shape
    if labels.shape != (n,):
        raise DimensionError("one label per logit row required")
    if labels.min() < 0 or labels.max() >= c:
        raise DimensionError(f"labels must lie in [0, {c})")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(n), labels]))
    if not np.isfinite(loss):
        raise NumericError("non-finite cross-entropy")
    grad = softmax(logits, axis=1)
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, (grad[0] if single else grad)
