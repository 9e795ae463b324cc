"""Slow, obviously-correct reference implementations used only by tests.

Nothing here imports the package's numeric kernels.
"""

import itertools
import math

import numpy as np


def conv1d_loops(x, w, b=None, stride=1, pad_left=0, pad_right=0):
    """Direct sliding dot product, x: (C_in, L), w: (C_out, C_in, K)."""
    c_in, length = len(x), len(x[0])
    c_out, _, k = np.shape(w)
    padded = [[0.0] * pad_left + list(map(float, row)) + [0.0] * pad_right for row in x]
    n_out = (length + pad_left + pad_right - k) // stride + 1
    out = []
    for o in range(c_out):
        row = []
        for i in range(n_out):
            acc = 0.0 if b is None else float(b[o])
            for c in range(c_in):
                for t in range(k):
                    acc += w[o][c][t] * padded[c][i * stride + t]
            row.append(acc)
        out.append(row)
    return np.array(out)


def enumerate_conv_length(length, k, stride, pad_left, pad_right):
    """Count window start positions by walking them."""
    count, start = 0, 0
    while start + k <= length + pad_left + pad_right:
        count += 1
        start += stride
    return count


def enumerate_pool_windows(length, pool, stride):
    return [list(range(s, s + pool)) for s in range(0, length - pool + 1, stride)]


def enumerate_segments(length, window, hop):
    starts, s = [], 0
    while s + window <= length:
        starts.append(s)
        s += hop
    return starts


def polymul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def selu_def(x):
    lam = 1.0507009873554804934193349852946
    alpha = 1.6732632423543772848170429916717
    return lam * x if x > 0 else lam * alpha * (math.exp(x) - 1.0)


def central_difference(f, x, step=1e-5):
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in itertools.product(*[range(s) for s in x.shape]):
        orig = x[idx]
        x[idx] = orig + step
        fp = f(x)
        x[idx] = orig - step
        fm = f(x)
        x[idx] = orig
        g[idx] = (fp - fm) / (2 * step)
    return g


def pooled_length(length, pool, stride=2):
    return (length - pool) // stride + 1


def huf_shapes(window, n_units, dr_code=256, lff_code=256, gff_code=64):
    """Walk the block structure by hand: DR-SAE keeps the length, each fusion
    encoder applies pool(4, 2) then pool(3, 2)."""
    l = window
    l6 = pooled_length(pooled_length(l, 4), 3)
    shapes = {"per_axis": (6 * n_units, dr_code, l), "per_unit": (n_units, lff_code, l6)}
    if n_units > 1:
        l12 = pooled_length(pooled_length(l6, 4), 3)
        shapes["global"] = (gff_code, l12)
    return shapes
