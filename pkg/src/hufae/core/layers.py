"""Layer objects built from declarative :class:`LayerSpec` records.

Each layer owns names in a shared :class:`~hufae.core.params.ParamStore` and
caches whatever its backward pass needs during ``forward``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, UsageError
from . import functional as F

LAYER_KINDS = ("conv1d", "conv1d_transpose", "maxpool1d", "batchnorm1d", "dense",
               "activation")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_channels: int = 1
    out_channels: int = 1
    kernel_size: int = 1
    pool_size: int = 1
    stride: int = 1
    padding: str = "same"
    activation: str = "linear"
    bias: bool = True  # off for a layer feeding batchnorm, which cancels it

    def validate(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        for name in ("in_channels", "out_channels", "kernel_size", "pool_size", "stride"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive in {self}")
        if self.padding not in ("same", "valid"):
            raise ConfigError(f"unknown padding {self.padding!r}")
        if self.activation not in F.ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        return self

    def to_dict(self):
        return asdict(self)


def init_weight(rng, shape, fan_in):
    """Fan-in scaled normal init, std = sqrt(1 / fan_in)."""
    return rng.standard_normal(shape) * np.sqrt(1.0 / fan_in)


class Layer:
    spec: LayerSpec
    param_names: tuple = ()

    def __init__(self, spec, store, prefix):
        self.spec = spec.validate()
        self.store = store
        self.prefix = prefix
        self._cache = None

    def _p(self, suffix):
        return self.store.value(self.prefix + suffix)

    def all_frozen(self):
        return all(self.store[n].frozen for n in self.param_names)

    def forward(self, x, training=False, linearize=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def _need_cache(self):
        if self._cache is None:
            raise UsageError(f"{type(self).__name__}.backward called before forward")
        return self._cache

    def clear_cache(self):
        self._cache = None


class _ActivationMixin:
    def _activate(self, pre, linearize):
        act = "linear" if linearize else self.spec.activation
        out = F.activation_forward(act, pre)
        return act, out

    def _activation_grad(self, grad, act, pre, out):
        return F.activation_backward(act, grad, pre, out)


class Conv1d(_ActivationMixin, Layer):
    def __init__(self, spec, store, prefix, rng):
        super().__init__(spec, store, prefix)
        k = spec.kernel_size
        store.add(prefix + "weight",
                  init_weight(rng, (spec.out_channels, spec.in_channels, k),
                              spec.in_channels * k))
        self.param_names = (prefix + "weight",)
        if spec.bias:
            store.add(prefix + "bias", np.zeros(spec.out_channels))
            self.param_names += (prefix + "bias",)

    def forward(self, x, training=False, linearize=False):
        bias = None if linearize or not self.spec.bias else self._p("bias")
        pre = F.conv1d_forward(x, self._p("weight"), bias, self.spec.stride, self.spec.padding)
        act, out = self._activate(pre, linearize)
        self._cache = (x, pre, out, act)
        return out

    def backward(self, grad):
        x, pre, out, act = self._need_cache()
        grad = self._activation_grad(grad, act, pre, out)
        gx, gw, gb = F.conv1d_backward(grad, x, self._p("weight"), self.spec.stride,
                                       self.spec.padding)
        if not self.all_frozen():
            self.store.set_grad(self.prefix + "weight", gw)
            if self.spec.bias:
                self.store.set_grad(self.prefix + "bias", gb)
        return gx


class ConvTranspose1d(_ActivationMixin, Layer):
    """Transposed convolution; ``output_length`` pads or checks the target length."""

    def __init__(self, spec, store, prefix, rng):
        super().__init__(spec, store, prefix)
        k = spec.kernel_size
        store.add(prefix + "weight",
                  init_weight(rng, (spec.in_channels, spec.out_channels, k),
                              spec.in_channels * k))
        self.param_names = (prefix + "weight",)
        if spec.bias:
            store.add(prefix + "bias", np.zeros(spec.out_channels))
            self.param_names += (prefix + "bias",)

    def output_length(self, length, output_padding=0):
        return F.conv1d_transpose_output_length(length, self.spec.kernel_size,
                                                self.spec.stride, self.spec.padding,
                                                output_padding)

    def forward(self, x, training=False, linearize=False, output_length=None):
        op = 0
        if output_length is not None:
            op = output_length - self.output_length(np.shape(x)[-1])
            if op < 0:
                raise ConfigError(
                    f"transposed conv cannot shrink to length {output_length}")
        bias = None if linearize or not self.spec.bias else self._p("bias")
        pre = F.conv1d_transpose_forward(x, self._p("weight"), bias, self.spec.stride,
                                         self.spec.padding, op)
        act, out = self._activate(pre, linearize)
        self._cache = (x, pre, out, act)
        return out

    def backward(self, grad):
        x, pre, out, act = self._need_cache()
        grad = self._activation_grad(grad, act, pre, out)
        gx, gw, gb = F.conv1d_transpose_backward(grad, x, self._p("weight"),
                                                 self.spec.stride, self.spec.padding)
        if not self.all_frozen():
            self.store.set_grad(self.prefix + "weight", gw)
            if self.spec.bias:
                self.store.set_grad(self.prefix + "bias", gb)
        return gx


class MaxPool1d(Layer):
    def __init__(self, spec, store, prefix, rng=None):
        super().__init__(spec, store, prefix)

    def forward(self, x, training=False, linearize=False):
        out, idx = F.maxpool1d_forward(x, self.spec.pool_size, self.spec.stride)
        self._cache = (idx, np.shape(x)[-1])
        return out

    def backward(self, grad):
        idx, length = self._need_cache()
        return F.maxpool1d_backward(grad, idx, length, self.spec.pool_size, self.spec.stride)


class BatchNorm1d(Layer):
    momentum = 0.9
    eps = 1e-5

    def __init__(self, spec, store, prefix, rng=None):
        super().__init__(spec, store, prefix)
        c = spec.in_channels
        store.add(prefix + "gamma", np.ones(c))
        store.add(prefix + "beta", np.zeros(c))
        store.add_buffer(prefix + "running_mean", np.zeros(c))
        store.add_buffer(prefix + "running_var", np.ones(c))
        self.param_names = (prefix + "gamma", prefix + "beta")

    def forward(self, x, training=False, linearize=False):
        # Frozen batchnorm behaves as in inference: statistics are part of the
        # frozen state and must not drift.
        train_stats = training and not self.all_frozen()
        out, cache = F.batchnorm1d_forward(
            x, self._p("gamma"), self._p("beta"),
            self.store.buffers[self.prefix + "running_mean"],
            self.store.buffers[self.prefix + "running_var"],
            train_stats, self.momentum, self.eps)
        self._cache = cache
        return out

    def backward(self, grad):
        gx, gg, gb = F.batchnorm1d_backward(grad, self._need_cache())
        if not self.all_frozen():
            self.store.set_grad(self.prefix + "gamma", gg)
            self.store.set_grad(self.prefix + "beta", gb)
        return gx


class Dense(_ActivationMixin, Layer):
    def __init__(self, spec, store, prefix, rng):
        super().__init__(spec, store, prefix)
        store.add(prefix + "weight",
                  init_weight(rng, (spec.out_channels, spec.in_channels), spec.in_channels))
        self.param_names = (prefix + "weight",)
        if spec.bias:
            store.add(prefix + "bias", np.zeros(spec.out_channels))
            self.param_names += (prefix + "bias",)

    def forward(self, x, training=False, linearize=False):
        bias = None if linearize or not self.spec.bias else self._p("bias")
        pre = F.dense_forward(x, self._p("weight"), bias)
        act, out = self._activate(pre, linearize)
        self._cache = (x, pre, out, act)
        return out

    def backward(self, grad):
        x, pre, out, act = self._need_cache()
        grad = self._activation_grad(grad, act, pre, out)
        gx, gw, gb = F.dense_backward(grad, x, self._p("weight"))
        if not self.all_frozen():
            self.store.set_grad(self.prefix + "weight", gw)
            if self.spec.bias:
                self.store.set_grad(self.prefix + "bias", gb)
        return gx


class Activation(_ActivationMixin, Layer):
    def __init__(self, spec, store, prefix, rng=None):
        super().__init__(spec, store, prefix)

    def forward(self, x, training=False, linearize=False):
        act, out = self._activate(x, linearize)
        self._cache = (x, out, act)
        return out

    def backward(self, grad):
        x, out, act = self._need_cache()
        return self._activation_grad(grad, act, x, out)


_KIND_TO_CLASS = {
    "conv1d": Conv1d,
    "conv1d_transpose": ConvTranspose1d,
    "maxpool1d": MaxPool1d,
    "batchnorm1d": BatchNorm1d,
    "dense": Dense,
    "activation": Activation,
}


def build_layer(spec, store, prefix, rng):
    return _KIND_TO_CLASS[spec.validate().kind](spec, store, prefix, rng)


class Sequential:
    """A plain layer stack sharing one parameter store."""

    def __init__(self, layers, store):
        self.layers = list(layers)
        self.store = store

    @classmethod
    def from_specs(cls, specs, store=None, prefix="", rng=None, seed: Optional[int] = 0):
        from .params import ParamStore

        store = ParamStore() if store is None else store
        rng = np.random.default_rng(seed) if rng is None else rng
        layers = [build_layer(s, store, f"{prefix}{i}.", rng) for i, s in enumerate(specs)]
        return cls(layers, store)

    def forward(self, x, training=False, linearize=False):
        for layer in self.layers:
            x = layer.forward(x, training=training, linearize=linearize)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    __call__ = forward
