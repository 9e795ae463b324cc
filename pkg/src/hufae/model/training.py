"""Mini-batch epoch loop shared by every block."""

from __future__ import annotations

import logging
import zlib

import numpy as np

from ..core.optim import OptimizerConfig
from ..errors import NumericError

log = logging.getLogger("hufae.train")


def child_rng(seed, name):
    """Independent generator for a named job, stable across job orderings."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


def child_seed(seed, name):
    return int(child_rng(seed, name).integers(0, 2**63 - 1))


def optimizer_config(train_cfg):
    return OptimizerConfig(algorithm=train_cfg.algorithm, lr=train_cfg.lr).validate()


def run_epochs(n_examples, step, train_cfg, rng, label="", threshold=None, epochs=None):
    """Drive ``step(batch_indices) -> loss`` over shuffled mini-batches.

    Stops when the example-weighted mean epoch loss drops below
    ``threshold`` after at least ``min_epochs`` epochs, or after
    ``max_epochs`` (``epochs`` forces an exact count instead).

    Returns the list of per-epoch mean losses.
    """
    if threshold is None:
        threshold = train_cfg.loss_threshold
    max_epochs = train_cfg.max_epochs if epochs is None else epochs
    curve = []
    for epoch in range(1, max_epochs + 1):
        order = rng.permutation(n_examples)
        total = 0.0
        for start in range(0, n_examples, train_cfg.batch_size):
            idx = order[start:start + train_cfg.batch_size]
            loss = step(idx)
            if not np.isfinite(loss):
                raise NumericError(f"{label}: non-finite loss at epoch {epoch}")
            total += loss * len(idx)
        mean = total / n_examples
        curve.append(mean)
        log.info("stage=%s epoch=%d loss=%.6g", label, epoch, mean)
        if epochs is None and epoch >= train_cfg.min_epochs and mean < threshold:
            break
    return curve
