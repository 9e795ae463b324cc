"""Encoders as banks of composed FIR filters.

With activations and biases removed, a stack of single-input-channel
convolutions collapses, per code channel, into a sum over channel paths
``(k1, ..., kd)`` of one composed kernel each. Kernels stored in layers are
cross-correlation taps; :class:`FirPath` holds the composed filter in
convolution orientation (impulse response), so ``np.convolve(x, h)`` is the
ordinary filtering operation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..core.functional import conv1d_forward, resolve_padding
from ..errors import ConfigError, DimensionError


@dataclass(frozen=True)
class FirPath:
    indices: tuple
    kernel: np.ndarray

    @property
    def length(self):
        return len(self.kernel)


def composed_length(kernel_sizes):
    return sum(int(k) - 1 for k in kernel_sizes) + 1


def compose_kernels(kernels):
    """Cascade of FIR filters (convolution orientation) as one filter."""
    out = np.ones(1)
    for k in kernels:
        out = np.convolve(out, np.asarray(k, dtype=np.float64))
    return out


def encoder_weights(encoder):
    """Conv weight list from a DR-SAE-like object or a list of arrays."""
    if hasattr(encoder, "encoder_kernels"):
        weights = encoder.encoder_kernels()
    else:
        weights = [np.asarray(w, dtype=np.float64) for w in encoder]
    if not weights:
        raise DimensionError("encoder has no layers")
    prev = 1
    for i, w in enumerate(weights):
        if w.ndim != 3 or w.shape[1] != prev:
            raise DimensionError(f"layer {i} weight {w.shape} does not chain "
                                 f"from {prev} channels")
        prev = w.shape[0]
    return weights


def path_kernels(weights, path):
    """Correlation-orientation taps selected by ``path`` (one per layer)."""
    if len(path) != len(weights):
        raise DimensionError(f"path has {len(path)} indices for {len(weights)} layers")
    prev = 0
    taps = []
    for layer, (w, k) in enumerate(zip(weights, path)):
        if not 0 <= k < w.shape[0]:
            raise IndexError(f"path index {k} out of range for layer {layer} "
                             f"({w.shape[0]} channels)")
        taps.append(w[k, prev])
        prev = k
    return taps


def compose_fir(encoder, path):
    """Composed impulse response of one channel path through the encoder."""
    weights = encoder_weights(encoder)
    taps = path_kernels(weights, tuple(int(p) for p in path))
    return FirPath(tuple(int(p) for p in path), compose_kernels([t[::-1] for t in taps]))


def _margins(weights):
    pads = [resolve_padding("same", w.shape[2]) for w in weights]
    return sum(p[0] for p in pads), sum(p[1] for p in pads)


def apply_path(x, fir, left):
    """Filter ``x`` by a path so that the result aligns with a same-padded stack.

    ``left`` is the total left padding of the stack; samples whose taps fall
    outside the signal see zeros.
    """
    taps = fir.kernel[::-1]
    n = len(x)
    xp = np.concatenate([np.zeros(left), x, np.zeros(len(taps))])
    out = np.zeros(n)
    for m, c in enumerate(taps):
        out += c * xp[m:m + n]
    return out


def layered_linear(weights, x):
    """Bias-free, activation-free forward pass ``(C_code, L)`` of a 1-D signal."""
    h = np.asarray(x, dtype=np.float64)[None]
    for w in weights:
        h = conv1d_forward(h, w, None, 1, "same")
    return h


def path_sum(weights, x, channel):
    """Sum over every path ending at ``channel`` of the path-filtered signal."""
    left, _ = _margins(weights)
    total = np.zeros(len(x))
    ranges = [range(w.shape[0]) for w in weights[:-1]]
    for head in itertools.product(*ranges):
        total += apply_path(x, compose_fir(weights, head + (channel,)), left)
    return total


def fir_equivalence_check(encoder, x):
    """Max |layered linear output - sum of path FIR outputs| over all code channels.

    Only interior samples are compared: near the edges the stack pads each
    intermediate signal with zeros, which no single FIR reproduces.
    """
    weights = encoder_weights(encoder)
    x = np.asarray(x, dtype=np.float64).ravel()
    left, right = _margins(weights)
    if len(x) <= left + right:
        raise DimensionError("signal too short to have interior samples")
    layered = layered_linear(weights, x)
    worst = 0.0
    interior = slice(left, len(x) - right)
    for c in range(weights[-1].shape[0]):
        diff = layered[c, interior] - path_sum(weights, x, c)[interior]
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def sample_paths(encoder, n_paths, seed=0, mode="composed"):
    """Seeded paths that share the earlier-layer indices and differ in the code channel.

    ``mode="composed"`` returns the full composed filters; ``"code_kernel"``
    returns only the code-layer kernel of each path.
    """
    if mode not in ("composed", "code_kernel"):
        raise ConfigError(f"unknown path mode {mode!r}")
    weights = encoder_weights(encoder)
    n_code = weights[-1].shape[0]
    if not 1 <= n_paths <= n_code:
        raise ConfigError(f"n_paths must be between 1 and {n_code}")
    rng = np.random.default_rng(seed)
    head = tuple(int(rng.integers(w.shape[0])) for w in weights[:-1])
    codes = np.sort(rng.choice(n_code, size=n_paths, replace=False))
    out = []
    for c in codes:
        path = head + (int(c),)
        if mode == "composed":
            out.append(compose_fir(weights, path))
        else:
            prev = head[-1] if head else 0
            out.append(FirPath(path, weights[-1][c, prev][::-1].copy()))
    return out
