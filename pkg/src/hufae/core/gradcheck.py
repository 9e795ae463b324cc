"""Central finite-difference verification of hand-written backward passes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError


@dataclass
class GradCheckReport:
    max_relative_error: float
    worst_param: str
    per_param_errors: dict = field(default_factory=dict)

    def passed(self, tol=1e-4):
        return self.max_relative_error < tol


def relative_error(analytic, numeric):
    """Elementwise ``|a - n| / max(|a|, |n|, 1e-8)``."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)


def _loss_value(net, x, loss_fn, training):
    out = net.forward(x, training=training)
    value, grad = loss_fn(out)
    if not np.isfinite(value):
        raise NumericError("non-finite loss during gradient check")
    return value, grad


def gradient_check(net, x, loss_fn, step=1e-5, training=True, check_input=True,
                   params=None, max_entries=None, rng=None, grad_hook=None):
    """Compare analytic gradients of ``loss_fn(net(x))`` with central differences.

    Parameters
    ----------
    net : object with ``forward(x, training)``, ``backward(grad)`` and ``store``
    x : ndarray
        Network input; its gradient is checked too when ``check_input``.
    loss_fn : callable
        Maps the network output to ``(scalar, grad_wrt_output)``.
    params : iterable of str, optional
        Restrict the check to these parameter names (default: all non-frozen).
    max_entries : int, optional
        Sample at most this many coordinates per tensor.
    grad_hook : callable, optional
        ``grad_hook(name, grad) -> grad`` applied to analytic gradients before
        comparison; used to test that corrupted gradients are caught.

    Returns
    -------
    GradCheckReport
    """
    rng = np.random.default_rng(0) if rng is None else rng
    store = net.store
    x = np.array(x, dtype=np.float64)

    store.zero_grad()
    _, gout = _loss_value(net, x, loss_fn, training)
    gx = net.backward(gout)

    targets = []
    names = store.trainable_names() if params is None else list(params)
    for name in names:
        targets.append((name, store[name].value, store[name].grad.copy()))
    if check_input:
        targets.append(("<input>", x, np.array(gx)))

    per_param = {}
    for name, arr, analytic in targets:
        if grad_hook is not None:
            analytic = grad_hook(name, analytic)
        flat_idx = np.arange(arr.size)
        if max_entries is not None and arr.size > max_entries:
            flat_idx = np.sort(rng.choice(arr.size, size=max_entries, replace=False))
        worst = 0.0
        for i in flat_idx:
            idx = np.unravel_index(i, arr.shape)
            orig = arr[idx]
            arr[idx] = orig + step
            lp, _ = _loss_value(net, x, loss_fn, training)
            arr[idx] = orig - step
            lm, _ = _loss_value(net, x, loss_fn, training)
            arr[idx] = orig
            numeric = (lp - lm) / (2.0 * step)
            worst = max(worst, float(relative_error(analytic[idx], numeric)))
        per_param[name] = worst

    worst_name = max(per_param, key=per_param.get) if per_param else ""
    return GradCheckReport(per_param.get(worst_name, 0.0), worst_name, per_param)
