"""Link-budget primitives: received SNR and Shannon-limit rate."""

import math
from dataclasses import dataclass

import numpy as np

from dataeff.errors import DomainError


def _check_nonneg(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class LinkParams:
    """Point-to-point link with bandwidth ``B`` (Hz) and noise density ``N0`` (W/Hz)."""

    bandwidth_hz: float
    noise_density_w_per_hz: float

    def __post_init__(self):
        for name in ("bandwidth_hz", "noise_density_w_per_hz"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def noise_power(self):
        """Noise power ``N0 * B`` in watts."""
        return self.noise_density_w_per_hz * self.bandwidth_hz

    def snr(self, p_t, g):
        """Received SNR ``p_t * g / (N0 * B)``."""
        _check_nonneg("transmit power", p_t)
        _check_nonneg("channel gain", g)
        return p_t * g / self.noise_power

    def shannon_rate(self, p_t, g):
        """Instantaneous Shannon-limit rate ``B * log2(1 + snr)`` in bits/s."""
        rate = self.bandwidth_hz * np.log2(1.0 + self.snr(p_t, g))
        return float(rate) if np.ndim(rate) == 0 else rate
