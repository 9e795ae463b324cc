"""Stateless forward/backward kernels for 1-D layers.

All tensors are float64 numpy arrays laid out as ``(N, C, L)`` (batch,
channels, length). Single examples of shape ``(C, L)`` are accepted by the
forward functions and returned without the batch axis.

Convolutions are cross-correlations, as in every mainstream deep learning
framework. Kernel layouts follow the same convention:

* conv1d weight: ``(C_out, C_in, K)``
* conv1d_transpose weight: ``(C_in, C_out, K)``
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError, DimensionError, NumericError, UsageError

# Self-normalizing constants (Klambauer et al.), full double precision.
SELU_LAMBDA = 1.0507009873554804934193349852946
SELU_ALPHA = 1.6732632423543772848170429916717


def check_finite(arr, what="tensor"):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {what}")
    return arr


def _batched(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x[None], True
    if x.ndim != 3:
        raise DimensionError(f"expected (C, L) or (N, C, L), got shape {x.shape}")
    return x, False


def resolve_padding(padding, kernel_size):
    """Return ``(pad_left, pad_right)`` for a padding mode or explicit int.

    ``"same"`` pads ``K - 1`` zeros in total, left-biased when odd:
    ``pad_left = (K - 1) // 2``.
    """
    if isinstance(padding, str):
        if padding == "valid":
            return 0, 0
        if padding == "same":
            left = (kernel_size - 1) // 2
            return left, kernel_size - 1 - left
        raise ConfigError(f"unknown padding mode {padding!r}")
    if isinstance(padding, tuple):
        return int(padding[0]), int(padding[1])
    p = int(padding)
    if p < 0:
        raise ConfigError("padding must be non-negative")
    return p, p


def conv1d_output_length(length, kernel_size, stride=1, padding="valid"):
    pl, pr = resolve_padding(padding, kernel_size)
    span = length + pl + pr - kernel_size
    if span < 0:
        raise DimensionError(
            f"kernel of size {kernel_size} does not fit input of length {length}"
        )
    return span // stride + 1


def conv1d_transpose_output_length(length, kernel_size, stride=1, padding="valid",
                                   output_padding=0):
    pl, pr = resolve_padding(padding, kernel_size)
    return (length - 1) * stride + kernel_size - pl - pr + output_padding


def pool1d_output_length(length, pool_size, stride):
    if pool_size > length:
        raise DimensionError(f"pool size {pool_size} exceeds input length {length}")
    return (length - pool_size) // stride + 1


def _taps(weight, transpose=False):
    # contiguous per-tap matrices; strided views make matmul fall off the BLAS path
    w = weight.transpose(2, 1, 0) if transpose else weight.transpose(2, 0, 1)
    return np.ascontiguousarray(w)


def _tap_slice(k, stride, n_out):
    return slice(k, k + stride * (n_out - 1) + 1, stride)


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------

def conv1d_forward(x, weight, bias=None, stride=1, padding="valid"):
    """Cross-correlate ``x`` with ``weight``.

    ``out[n, o, i] = sum_c sum_k weight[o, c, k] * xpad[n, c, i*stride + k] + bias[o]``
    """
    xb, single = _batched(x)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.ndim != 3:
        raise DimensionError(f"conv1d weight must be (C_out, C_in, K), got {weight.shape}")
    c_out, c_in, k = weight.shape
    if xb.shape[1] != c_in:
        raise DimensionError(f"input has {xb.shape[1]} channels, kernel expects {c_in}")
    if stride < 1:
        raise ConfigError("stride must be positive")
    pl, pr = resolve_padding(padding, k)
    n_out = conv1d_output_length(xb.shape[2], k, stride, (pl, pr))
    xp = np.pad(xb, ((0, 0), (0, 0), (pl, pr))) if (pl or pr) else xb
    taps = _taps(weight)
    out = np.zeros((xb.shape[0], c_out, n_out))
    for tap in range(k):
        out += np.matmul(taps[tap], np.ascontiguousarray(xp[:, :, _tap_slice(tap, stride, n_out)]))
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[None, :, None]
    check_finite(out, "conv1d output")
    return out[0] if single else out


def conv1d_backward(grad_out, x, weight, stride=1, padding="valid"):
    """Gradients of :func:`conv1d_forward`.

    Returns ``(grad_input, grad_weight, grad_bias)``; ``x`` is the cached
    forward input.
    """
    if x is None:
        raise UsageError("conv1d_backward called without a cached forward input")
    xb, single = _batched(x)
    gb, _ = _batched(grad_out)
    weight = np.asarray(weight, dtype=np.float64)
    c_out, c_in, k = weight.shape
    pl, pr = resolve_padding(padding, k)
    n_out = gb.shape[2]
    xp = np.pad(xb, ((0, 0), (0, 0), (pl, pr))) if (pl or pr) else xb
    gxp = np.zeros_like(xp)
    gw = np.empty_like(weight)
    taps_t = _taps(weight, transpose=True)
    for tap in range(k):
        sl = _tap_slice(tap, stride, n_out)
        gw[:, :, tap] = np.tensordot(gb, xp[:, :, sl], axes=([0, 2], [0, 2]))
        gxp[:, :, sl] += np.matmul(taps_t[tap], gb)
    gx = gxp[:, :, pl: pl + xb.shape[2]]
    gbias = gb.sum(axis=(0, 2))
    return (gx[0] if single else gx), gw, gbias


def conv1d_transpose_forward(x, weight, bias=None, stride=1, padding="valid",
                             output_padding=0):
    """Transposed convolution, the adjoint of :func:`conv1d_forward`.

    Output length is ``(L_in - 1) * stride + K - pad_left - pad_right +
    output_padding``; ``output_padding`` appends positions that receive no
    kernel taps (they hold the bias only).
    """
    xb, single = _batched(x)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.ndim != 3:
        raise DimensionError(
            f"conv1d_transpose weight must be (C_in, C_out, K), got {weight.shape}")
    c_in, c_out, k = weight.shape
    if xb.shape[1] != c_in:
        raise DimensionError(f"input has {xb.shape[1]} channels, kernel expects {c_in}")
    if stride < 1:
        raise ConfigError("stride must be positive")
    pl, pr = resolve_padding(padding, k)
    n_in = xb.shape[2]
    full = (n_in - 1) * stride + k
    n_out = full - pl - pr + output_padding
    if n_out < 1:
        raise DimensionError("transposed convolution produces an empty output")
    buf = np.zeros((xb.shape[0], c_out, max(full, pl + n_out)))
    taps_t = _taps(weight, transpose=True)
    for tap in range(k):
        buf[:, :, _tap_slice(tap, stride, n_in)] += np.matmul(taps_t[tap], xb)
    out = buf[:, :, pl: pl + n_out]
    if bias is not None:
        out = out + np.asarray(bias, dtype=np.float64)[None, :, None]
    check_finite(out, "conv1d_transpose output")
    return out[0] if single else out


def conv1d_transpose_backward(grad_out, x, weight, stride=1, padding="valid"):
    """Gradients of :func:`conv1d_transpose_forward`.

    Returns ``(grad_input, grad_weight, grad_bias)``.
    """
    xb, single = _batched(x)
    gb, _ = _batched(grad_out)
    weight = np.asarray(weight, dtype=np.float64)
    c_in, c_out, k = weight.shape
    pl, _ = resolve_padding(padding, k)
    n_in = xb.shape[2]
    full = (n_in - 1) * stride + k
    gfull = np.zeros((gb.shape[0], c_out, max(full, pl + gb.shape[2])))
    gfull[:, :, pl: pl + gb.shape[2]] = gb
    gx = np.zeros_like(xb)
    gw = np.empty_like(weight)
    taps = _taps(weight)
    for tap in range(k):
        g_tap = np.ascontiguousarray(gfull[:, :, _tap_slice(tap, stride, n_in)])
        gx += np.matmul(taps[tap], g_tap)
        gw[:, :, tap] = np.tensordot(xb, g_tap, axes=([0, 2], [0, 2]))
    gbias = gb.sum(axis=(0, 2))
    return (gx[0] if single else gx), gw, gbias


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------

def maxpool1d_forward(x, pool_size, stride):
    """Max pooling; returns ``(out, argmax)`` with ties broken to the lowest index."""
    xb, single = _batched(x)
    if pool_size < 1 or stride < 1:
        raise ConfigError("pool_size and stride must be positive")
    n_out = pool1d_output_length(xb.shape[2], pool_size, stride)
    windows = sliding_window_view(xb, pool_size, axis=2)[:, :, ::stride][:, :, :n_out]
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    if single:
        return out[0], idx[0]
    return out, idx


def maxpool1d_backward(grad_out, argmax, input_length, pool_size, stride):
    gb, single = _batched(grad_out)
    idx = argmax[None] if single else argmax
    n_out = gb.shape[2]
    gx = np.zeros(gb.shape[:2] + (input_length,))
    for p in range(pool_size):
        gx[:, :, _tap_slice(p, stride, n_out)] += np.where(idx == p, gb, 0.0)
    return gx[0] if single else gx


# ---------------------------------------------------------------------------
# Batch normalization
# ---------------------------------------------------------------------------

def batchnorm1d_forward(x, gamma, beta, running_mean, running_var, training,
                        momentum=0.9, eps=1e-5):
    """Per-channel normalization over the (batch, length) axes.

    In training mode the running statistics are updated in place as
    ``running = momentum * running + (1 - momentum) * batch_stat`` and the
    returned cache is used by :func:`batchnorm1d_backward`.
    """
    if eps <= 0:
        raise ConfigError("batchnorm eps must be positive")
    xb, single = _batched(x)
    if training:
        mean = xb.mean(axis=(0, 2))
        var = xb.var(axis=(0, 2))
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mean
        running_var *= momentum
        running_var += (1.0 - momentum) * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (xb - mean[None, :, None]) * inv_std[None, :, None]
    out = gamma[None, :, None] * xhat + beta[None, :, None]
    check_finite(out, "batchnorm output")
    cache = (xhat, inv_std, gamma, training)
    return (out[0] if single else out), cache


def batchnorm1d_backward(grad_out, cache):
    xhat, inv_std, gamma, training = cache
    gb, single = _batched(grad_out)
    ggamma = (gb * xhat).sum(axis=(0, 2))
    gbeta = gb.sum(axis=(0, 2))
    gxhat = gb * gamma[None, :, None]
    if training:
        m = gb.shape[0] * gb.shape[2]
        gx = (inv_std[None, :, None] / m) * (
            m * gxhat
            - gxhat.sum(axis=(0, 2))[None, :, None]
            - xhat * (gxhat * xhat).sum(axis=(0, 2))[None, :, None]
        )
    else:
        gx = gxhat * inv_std[None, :, None]
    return (gx[0] if single else gx), ggamma, gbeta


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

def selu(x):
    x = np.asarray(x, dtype=np.float64)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def relu(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_grad(x):
    return (np.asarray(x) > 0).astype(np.float64)


def softmax(logits, axis=-1):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


ACTIVATIONS = ("selu", "linear", "relu", "softmax")


def activation_forward(name, x):
    if name == "selu":
        return selu(x)
    if name == "relu":
        return relu(x)
    if name == "linear":
        return np.asarray(x, dtype=np.float64)
    if name == "softmax":
        return softmax(x, axis=1)
    raise ConfigError(f"unknown activation {name!r}")


def activation_backward(name, grad_out, pre, out):
    """Gradient through an activation given its input ``pre`` and output ``out``."""
    if name == "selu":
        return grad_out * selu_grad(pre)
    if name == "relu":
        return grad_out * relu_grad(pre)
    if name == "linear":
        return grad_out
    if name == "softmax":
        dot = (grad_out * out).sum(axis=1, keepdims=True)
        return out * (grad_out - dot)
    raise ConfigError(f"unknown activation {name!r}")


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------

def dense_forward(x, weight, bias=None):
    """Affine map ``x @ weight.T + bias`` with ``weight`` of shape (out, in)."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if x.shape[-1] != weight.shape[1]:
        raise DimensionError(
            f"dense input has {x.shape[-1]} features, weight expects {weight.shape[1]}")
    out = x @ weight.T
    if bias is not None:
        out = out + bias
    check_finite(out, "dense output")
    return out


def dense_backward(grad_out, x, weight):
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    gx = grad_out @ weight
    if x.ndim == 1:
        return gx, np.outer(grad_out, x), grad_out.copy()
    return gx, grad_out.T @ x, grad_out.sum(axis=0)
