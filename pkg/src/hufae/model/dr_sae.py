"""Per-axis overcomplete convolutional autoencoder, trained stack-wise.

The encoder is a chain of stride-1, same-padded conv+SELU layers that lifts
a single-channel signal to ``code_channels`` feature channels of unchanged
length. Each encoder layer ``k`` has a mirror transposed convolution that
maps its output back to its input, so stage ``k`` of training is a shallow
autoencoder on the frozen outputs of layers ``0..k-1``.
"""

from __future__ import annotations

import numpy as np

from ..core.layers import Conv1d, ConvTranspose1d, LayerSpec
from ..core.losses import mse_loss
from ..core.optim import optimizer_step
from ..core.params import ParamStore
from ..errors import ConfigError, DimensionError
from .config import DrSaeConfig, TrainConfig
from .training import child_rng, optimizer_config, run_epochs


def _as_signals(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, None]
    elif x.ndim == 2:
        x = x[:, None, :]
    if x.ndim != 3 or x.shape[1] != 1:
        raise DimensionError(f"expected single-channel signals, got shape {x.shape}")
    return x


class DrSae:
    """Network container: encoder/decoder layers over one :class:`ParamStore`."""

    def __init__(self, config=None, seed=0):
        self.config = (config or DrSaeConfig()).validate()
        self.store = ParamStore()
        rng = np.random.default_rng(seed)
        k = self.config.kernel_size
        chans = (1,) + tuple(self.config.channels)
        self.encoder = []
        self.decoder = []
        for i in range(len(chans) - 1):
            self.encoder.append(Conv1d(
                LayerSpec("conv1d", chans[i], chans[i + 1], k, padding="same",
                          activation=self.config.activation),
                self.store, f"enc{i}.", rng))
        # decoder layers are created after the encoder so that the encoder's
        # initial weights do not depend on decoder shapes
        for i in range(len(chans) - 1):
            self.decoder.append(ConvTranspose1d(
                LayerSpec("conv1d_transpose", chans[i + 1], chans[i], k, padding="same",
                          activation="linear"),
                self.store, f"dec{i}.", rng))

    @property
    def depth(self):
        return len(self.encoder)

    def stage_names(self, k):
        return list(self.encoder[k].param_names) + list(self.decoder[k].param_names)

    def encode(self, x, upto=None, linearize=False, batch_size=64):
        """Code-layer output ``(N, code_channels, L)`` (or layer ``upto`` output)."""
        x = _as_signals(x)
        upto = self.depth if upto is None else upto
        outs = []
        for start in range(0, len(x), batch_size):
            h = x[start:start + batch_size]
            for layer in self.encoder[:upto]:
                h = layer.forward(h, linearize=linearize)
            outs.append(h)
        for layer in self.encoder:
            layer.clear_cache()
        return np.concatenate(outs) if outs else np.zeros((0, 1, x.shape[2]))

    def decode(self, code):
        h = np.asarray(code, dtype=np.float64)
        for layer in reversed(self.decoder):
            h = layer.forward(h)
        return h

    def reconstruct(self, x):
        return self.decode(self.encode(x))

    def encoder_kernels(self):
        return [layer._p("weight") for layer in self.encoder]


def build_dr_sae(config=None, seed=0):
    return DrSae(config, seed)


def train_stacked(net, segments, config=None, seed=0, verify_frozen=False):
    """Greedy layer-wise training of a :class:`DrSae`.

    For each stage ``k`` the pair (encoder ``k``, decoder ``k``) learns to
    reconstruct the output of the frozen encoder prefix under MSE. At the end
    of the stage both layers are frozen and the optimizer state is zeroed.

    With ``verify_frozen`` every optimizer step is followed by a bitwise
    comparison of all frozen parameters against their values at freeze time.

    Returns ``(net, history)`` where ``history["stages"]`` holds one record
    per stage with its loss curve.
    """
    config = (config or TrainConfig()).validate()
    x = _as_signals(segments)
    if len(x) == 0:
        raise DimensionError("no segments to train on")
    opt = optimizer_config(config)
    store = net.store
    history = {"stages": []}
    stage_input = x
    for k in range(net.depth):
        names = net.stage_names(k)
        if any(store[n].frozen for n in names):
            raise ConfigError(f"stage {k} is already frozen")
        frozen_snapshot = store.snapshot(store.frozen_names())
        enc, dec = net.encoder[k], net.decoder[k]
        checks = [0]

        def step(idx, enc=enc, dec=dec, names=names, target=stage_input):
            batch = target[idx]
            store.zero_grad()
            out = dec.forward(enc.forward(batch, training=True), training=True)
            loss, grad = mse_loss(out, batch)
            enc.backward(dec.backward(grad))
            optimizer_step(store, opt, names)
            if verify_frozen:
                store.assert_unchanged(frozen_snapshot)
                checks[0] += 1
            return loss

        curve = run_epochs(len(stage_input), step, config, child_rng(seed, f"stage{k}"),
                           label=f"dr_sae.stage{k}")
        store.freeze(names)
        store.reset_optimizer_state()
        enc.clear_cache()
        dec.clear_cache()
        history["stages"].append({
            "stage": k,
            "curve": curve,
            "epochs": len(curve),
            "final_loss": curve[-1],
            "converged": curve[-1] < config.loss_threshold and len(curve) >= config.min_epochs,
            "frozen_checks": checks[0],
            "frozen_params": len(store.frozen_names()),
        })
        stage_input = _advance(enc, stage_input)
    return net, history


def _advance(layer, h, batch_size=64):
    out = [layer.forward(h[s:s + batch_size]) for s in range(0, len(h), batch_size)]
    layer.clear_cache()
    return np.concatenate(out)


def stage_reconstruction_mse(net, segments):
    """Per-stage MSE of each (encoder k, decoder k) pair on its own stage input.

    This is the quantity the stacked stopping rule looks at, evaluated at
    inference time; the last entry is the full encode-decode chain.
    """
    h = _as_signals(segments)
    errors = []
    for enc, dec in zip(net.encoder, net.decoder):
        rec = np.concatenate([dec.forward(enc.forward(h[s:s + 64]))
                              for s in range(0, len(h), 64)])
        errors.append(float(np.mean((rec - h) ** 2)))
        h = _advance(enc, h)
        dec.clear_cache()
    x = _as_signals(segments)
    errors.append(float(np.mean((net.reconstruct(x) - x) ** 2)))
    return errors
