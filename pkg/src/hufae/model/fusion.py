"""Convolutional fusion autoencoder used for both local and global fusion.

Encoder::

    conv1 -> maxpool(P1, s) -> conv2 -> maxpool(P2, s) -> conv3 -> BN -> SELU -> conv4

Decoder (no batchnorm)::

    convT4 -> convT3 -> convT2 (kernel P2, stride s) -> convT1 (kernel P1, stride s)

The two strided transposed convolutions undo the pools; their output
lengths are padded up to the recorded encoder lengths so that odd input
lengths reconstruct to the right size.
"""

from __future__ import annotations

import numpy as np

from ..core.functional import pool1d_output_length
from ..core.layers import (Activation, BatchNorm1d, Conv1d, ConvTranspose1d, LayerSpec,
                           MaxPool1d)
from ..core.losses import mse_loss
from ..core.optim import optimizer_step
from ..core.params import ParamStore
from ..errors import DimensionError
from .config import FusionAeConfig, TrainConfig
from .training import child_rng, optimizer_config, run_epochs


def fusion_code_length(length, config=None):
    """Length of the code for an input of ``length`` samples."""
    config = config or FusionAeConfig()
    p1, p2 = config.pool_sizes
    l1 = pool1d_output_length(length, p1, config.pool_stride)
    return pool1d_output_length(l1, p2, config.pool_stride)


class FusionAe:
    def __init__(self, config=None, in_channels=1536, seed=0):
        self.config = (config or FusionAeConfig()).validate()
        self.in_channels = int(in_channels)
        if self.in_channels < 1:
            raise DimensionError("fusion autoencoder needs at least one input channel")
        cfg = self.config
        c1, c2, c3, c4 = cfg.channels
        p1, p2 = cfg.pool_sizes
        k, s, act = cfg.kernel_size, cfg.pool_stride, cfg.activation
        self.store = ParamStore()
        rng = np.random.default_rng(seed)
        st = self.store
        self.conv1 = Conv1d(LayerSpec("conv1d", self.in_channels, c1, k, activation=act),
                            st, "enc.conv1.", rng)
        self.pool1 = MaxPool1d(LayerSpec("maxpool1d", c1, c1, pool_size=p1, stride=s), st,
                               "enc.pool1.")
        self.conv2 = Conv1d(LayerSpec("conv1d", c1, c2, k, activation=act), st, "enc.conv2.", rng)
        self.pool2 = MaxPool1d(LayerSpec("maxpool1d", c2, c2, pool_size=p2, stride=s), st,
                               "enc.pool2.")
        self.conv3 = Conv1d(LayerSpec("conv1d", c2, c3, k, bias=False), st, "enc.conv3.", rng)
        self.bn = BatchNorm1d(LayerSpec("batchnorm1d", c3, c3), st, "enc.bn.")
        self.act3 = Activation(LayerSpec("activation", c3, c3, activation=act), st, "enc.act3.")
        self.conv4 = Conv1d(LayerSpec("conv1d", c3, c4, k, activation=act), st, "enc.conv4.", rng)
        self.dec4 = ConvTranspose1d(LayerSpec("conv1d_transpose", c4, c3, k, activation=act),
                                    st, "dec.conv4.", rng)
        self.dec3 = ConvTranspose1d(LayerSpec("conv1d_transpose", c3, c2, k, activation=act),
                                    st, "dec.conv3.", rng)
        self.dec2 = ConvTranspose1d(
            LayerSpec("conv1d_transpose", c2, c1, p2, stride=s, padding="valid",
                      activation=act), st, "dec.up2.", rng)
        self.dec1 = ConvTranspose1d(
            LayerSpec("conv1d_transpose", c1, self.in_channels, p1, stride=s,
                      padding="valid"), st, "dec.up1.", rng)
        self.encoder = [self.conv1, self.pool1, self.conv2, self.pool2, self.conv3, self.bn,
                        self.act3, self.conv4]
        self.decoder = [self.dec4, self.dec3, self.dec2, self.dec1]

    @property
    def code_channels(self):
        return self.config.code_channels

    def code_length(self, length):
        return fusion_code_length(length, self.config)

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.ndim != 3 or x.shape[1] != self.in_channels:
            raise DimensionError(
                f"fusion AE expects (N, {self.in_channels}, L) input, got {np.shape(x)}")
        self.code_length(x.shape[2])  # raises when too short for both pools
        return x, single

    def encode(self, x, training=False, batch_size=64):
        x, single = self._check(x)
        if training:
            h = x
            for layer in self.encoder:
                h = layer.forward(h, training=True)
            return h
        outs = []
        for start in range(0, len(x), batch_size):
            h = x[start:start + batch_size]
            for layer in self.encoder:
                h = layer.forward(h)
            outs.append(h)
        for layer in self.encoder:
            layer.clear_cache()
        out = np.concatenate(outs)
        return out[0] if single else out

    def decode(self, code, lengths):
        length, l1 = lengths
        h = self.dec4.forward(code)
        h = self.dec3.forward(h)
        h = self.dec2.forward(h, output_length=l1)
        return self.dec1.forward(h, output_length=length)

    def reconstruct(self, x, training=False):
        x, _ = self._check(x)
        code = self.encode(x, training=True) if training else self.encode(x)
        l1 = pool1d_output_length(x.shape[2], self.config.pool_sizes[0], self.config.pool_stride)
        return self.decode(code, (x.shape[2], l1))

    def backward(self, grad):
        for layer in reversed(self.encoder + self.decoder):
            grad = layer.backward(grad)
        return grad

    def clear_cache(self):
        for layer in self.encoder + self.decoder:
            layer.clear_cache()


def build_fusion_ae(config=None, in_channels=1536, seed=0):
    return FusionAe(config, in_channels, seed)


def train_fusion_ae(net, features, config=None, seed=0, label="fusion", epochs=None):
    """End-to-end MSE training of a :class:`FusionAe` on fixed features.

    ``features`` is ``(N, C, L)`` produced by frozen upstream blocks. The same
    stopping rule as stacked training applies unless ``epochs`` forces an
    exact count. All parameters are frozen afterwards.

    Returns ``(net, curve)``.
    """
    config = (config or TrainConfig()).validate()
    x, _ = net._check(features)
    if len(x) == 0:
        raise DimensionError("no feature batches to train on")
    opt = optimizer_config(config)
    store = net.store

    def step(idx):
        batch = x[np.sort(idx)]
        store.zero_grad()
        out = net.reconstruct(batch, training=True)
        loss, grad = mse_loss(out, batch)
        net.backward(grad)
        optimizer_step(store, opt)
        return loss

    curve = run_epochs(len(x), step, config, child_rng(seed, label), label=label, epochs=epochs)
    net.clear_cache()
    store.freeze()
    store.reset_optimizer_state()
    return net, curve
