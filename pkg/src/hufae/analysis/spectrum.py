"""One-sided magnitude responses of FIR filters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .fir import FirPath


@dataclass(frozen=True)
class FrequencyResponse:
    n_fft: int
    magnitudes: np.ndarray
    frequencies_hz: np.ndarray


def frequency_response(fir, n_fft=512, sample_rate_hz=1.0):
    """Zero-padded DFT magnitude of a filter, bins ``0..n_fft//2``."""
    kernel = fir.kernel if isinstance(fir, FirPath) else np.asarray(fir, dtype=np.float64)
    if n_fft < len(kernel):
        raise ConfigError(f"n_fft={n_fft} is shorter than the filter ({len(kernel)} taps)")
    if not sample_rate_hz > 0:
        raise ConfigError("sample rate must be positive")
    mags = np.abs(np.fft.rfft(kernel, n_fft))
    return FrequencyResponse(int(n_fft), mags, np.fft.rfftfreq(n_fft, d=1.0 / sample_rate_hz))


def spectral_energy(resp):
    """Energy of the full two-sided spectrum rebuilt from the one-sided magnitudes."""
    m2 = resp.magnitudes ** 2
    inner = m2[1:-1] if resp.n_fft % 2 == 0 else m2[1:]
    return float(m2[0] + 2 * inner.sum() + (m2[-1] if resp.n_fft % 2 == 0 else 0.0))
