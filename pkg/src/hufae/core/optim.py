"""SGD and Adam over a :class:`ParamStore`, honoring frozen entries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass
class OptimizerConfig:
    algorithm: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    momentum: float = 0.0

    def validate(self):
        if self.algorithm not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.algorithm!r}")
        if not self.lr > 0:
            raise ConfigError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("adam betas must lie in [0, 1)")
        if self.eps <= 0:
            raise ConfigError("adam eps must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("sgd momentum must lie in [0, 1)")
        return self


def _state(store, name, keys):
    aux = store.optimizer_state.get(name)
    if aux is None:
        shape = store[name].value.shape
        aux = {k: (np.zeros(()) if k == "t" else np.zeros(shape)) for k in keys}
        store.optimizer_state[name] = aux
    return aux


def optimizer_step(store, config, names=None):
    """Apply one update to every non-frozen entry of ``store`` in place.

    ``names`` restricts the update to a subset of entries.

    Adam follows Kingma & Ba with bias correction; its step counter is kept
    per entry so that :meth:`ParamStore.reset_optimizer_state` restarts it.
    """
    if isinstance(config, dict):
        config = OptimizerConfig(**config)
    config.validate()
    for name in (store.entries if names is None else names):
        p = store[name]
        if p.frozen:
            continue
        if config.algorithm == "sgd":
            if config.momentum:
                aux = _state(store, name, ("velocity",))
                aux["velocity"] *= config.momentum
                aux["velocity"] += p.grad
                p.value -= config.lr * aux["velocity"]
            else:
                p.value -= config.lr * p.grad
        else:
            aux = _state(store, name, ("m", "v", "t"))
            aux["t"] += 1.0
            t = aux["t"].item()
            aux["m"] *= config.beta1
            aux["m"] += (1.0 - config.beta1) * p.grad
            aux["v"] *= config.beta2
            aux["v"] += (1.0 - config.beta2) * p.grad * p.grad
            m_hat = aux["m"] / (1.0 - config.beta1 ** t)
            v_hat = aux["v"] / (1.0 - config.beta2 ** t)
            p.value -= config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return store
