"""Named parameter storage with freezing and optimizer state."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, FreezeViolation


@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray
    frozen: bool = False


@dataclass
class ParamStore:
    """Ordered ``name -> Param`` map plus per-entry optimizer state.

    Buffers (e.g. batchnorm running statistics) live next to the parameters
    so that they are serialized with them, but they never receive gradients
    and the optimizer never touches them.
    """

    entries: "OrderedDict[str, Param]" = field(default_factory=OrderedDict)
    buffers: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    optimizer_state: dict = field(default_factory=dict)

    def add(self, name, value, frozen=False):
        if name in self.entries or name in self.buffers:
            raise KeyError(f"duplicate parameter name {name!r}")
        value = np.array(value, dtype=np.float64)
        self.entries[name] = Param(value, np.zeros_like(value), frozen)
        return self.entries[name]

    def add_buffer(self, name, value):
        if name in self.entries or name in self.buffers:
            raise KeyError(f"duplicate parameter name {name!r}")
        self.buffers[name] = np.array(value, dtype=np.float64)
        return self.buffers[name]

    def __getitem__(self, name):
        return self.entries[name]

    def __contains__(self, name):
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def value(self, name):
        return self.entries[name].value

    def set_grad(self, name, grad):
        p = self.entries[name]
        if grad.shape != p.value.shape:
            raise DimensionError(
                f"gradient for {name!r} has shape {grad.shape}, expected {p.value.shape}")
        p.grad[...] = grad

    def zero_grad(self):
        for p in self.entries.values():
            p.grad.fill(0.0)

    def freeze(self, names=None):
        for name in (self.entries if names is None else names):
            self.entries[name].frozen = True

    def unfreeze(self, names=None):
        for name in (self.entries if names is None else names):
            self.entries[name].frozen = False

    def frozen_names(self):
        return [n for n, p in self.entries.items() if p.frozen]

    def trainable_names(self):
        return [n for n, p in self.entries.items() if not p.frozen]

    def reset_optimizer_state(self):
        """Zero every auxiliary optimizer tensor (moments, step counters)."""
        for aux in self.optimizer_state.values():
            for arr in aux.values():
                arr.fill(0.0)

    def num_parameters(self):
        return int(sum(p.value.size for p in self.entries.values()))

    def snapshot(self, names=None):
        """Copies of the selected parameter values, for bitwise comparisons."""
        names = self.entries if names is None else names
        return {n: self.entries[n].value.copy() for n in names}

    def assert_unchanged(self, snapshot):
        for name, ref in snapshot.items():
            if not np.array_equal(self.entries[name].value, ref):
                raise FreezeViolation(f"frozen parameter {name!r} changed")

    def state_arrays(self, prefix=""):
        """Flat ``name -> array`` view of values and buffers in storage order."""
        out = OrderedDict()
        for n, p in self.entries.items():
            out[prefix + n] = p.value
        for n, b in self.buffers.items():
            out[prefix + n] = b
        return out

    def load_arrays(self, arrays, prefix=""):
        for n, p in self.entries.items():
            src = np.asarray(arrays[prefix + n])
            if src.shape != p.value.shape:
                raise DimensionError(f"shape mismatch loading {n!r}")
            p.value[...] = src
        for n, b in self.buffers.items():
            b[...] = np.asarray(arrays[prefix + n])

    def __eq__(self, other):
        if not isinstance(other, ParamStore):
            return NotImplemented
        a, b = self.state_arrays(), other.state_arrays()
        return list(a) == list(b) and all(
            a[k].shape == b[k].shape and np.array_equal(a[k], b[k]) for k in a)
