"""Power-gain distributions for slow, flat, block fading.

Rayleigh fading gives an exponential power gain with mean ``avg_gain``;
Nakagami-m gives a gamma power gain with shape ``m`` and scale ``avg_gain / m``.
All gains are linear (dB conversion happens in :mod:`dataeff.units`).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from dataeff.errors import ConvergenceError, DomainError
from dataeff.special import gamma_pdf, reg_lower_gamma, reg_upper_gamma

__all__ = ["FadingModel", "reg_lower_gamma"]

M_MIN = 0.5
M_MAX = 50.0
KINDS = ("rayleigh", "nakagami")

_TABLE_SIZE = 16385
_MAX_ITER = 200
_HALLEY_STOP = 1e-6


@lru_cache(maxsize=64)
def _unit_gamma_table(m):
    """Interpolation nodes of the unit-scale gamma CDF, used to seed Newton."""
    hi = m + 20.0 * math.sqrt(m)
    y = hi * np.linspace(0.0, 1.0, _TABLE_SIZE) ** 2
    p = reg_lower_gamma(m, y)
    y.flags.writeable = False
    p.flags.writeable = False
    return y, p


def _unit_gamma_quantile(m, p):
    """Solve ``P(m, y) = p`` for y with bracketed Halley steps.

    ``p`` is a 1-d array with entries in [0, 1). Steps leaving the bracket
    fall back to bisection.
    """
    y_nodes, p_nodes = _unit_gamma_table(m)
    y = np.interp(p, p_nodes, y_nodes)
    # lower tail: P(m, y) ~ y^m / Gamma(m + 1)
    small = (p > 0.0) & (p < p_nodes[1])
    if small.any():
        y[small] = np.exp((np.log(p[small]) + math.lgamma(m + 1.0)) / m)

    lo = np.zeros_like(p)
    hi = np.full_like(p, y_nodes[-1])
    # grow the bracket geometrically where the table does not reach p
    grow = p > p_nodes[-1]
    while grow.any():
        lo[grow] = hi[grow]
        hi[grow] *= 2.0
        y[grow] = hi[grow]
        grow[grow] = reg_lower_gamma(m, hi[grow]) < p[grow]

    y[p == 0.0] = 0.0
    active = np.flatnonzero((p > 0.0) & (y > 0.0))
    for _ in range(_MAX_ITER):
        if active.size == 0:
            return y
        ya = y[active]
        f = reg_lower_gamma(m, ya) - p[active]
        below = f < 0.0
        lo[active[below]] = ya[below]
        hi[active[~below]] = ya[~below]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            newton = f / gamma_pdf(m, ya)
            # f''/f' of the gamma CDF is (m - 1)/y - 1
            curvature = (m - 1.0) / ya - 1.0
            y_new = ya - newton / (1.0 - 0.5 * newton * curvature)
        hit = f == 0.0
        y_new[hit] = ya[hit]
        bad = ~hit & (~np.isfinite(y_new) | (y_new <= lo[active]) | (y_new >= hi[active]))
        y_new[bad] = 0.5 * (lo[active[bad]] + hi[active[bad]])
        step = np.abs(y_new - ya)
        y[active] = y_new
        # a Halley step of relative size s leaves an error of order s**3
        done = hit | (~bad & (step <= _HALLEY_STOP * y_new)) | (
            hi[active] - lo[active] <= 4.0 * np.finfo(float).eps * hi[active] + np.finfo(float).tiny
        )
        active = active[~done]
    raise ConvergenceError(f"gamma quantile did not converge (m={m})")


@dataclass(frozen=True)
class FadingModel:
    """Distribution of the instantaneous channel power gain.

    Parameters
    ----------
    kind : {"rayleigh", "nakagami"}
    avg_gain : float
        Mean linear power gain, > 0.
    m : float
        Nakagami shape in [0.5, 50]. Must be 1 for Rayleigh.
    """

    kind: str
    avg_gain: float
    m: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown fading kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.avg_gain) and self.avg_gain > 0.0):
            raise DomainError(f"avg_gain must be finite and > 0, got {self.avg_gain!r}")
        if self.kind == "rayleigh" and self.m != 1.0:
            raise DomainError("Rayleigh fading has m = 1")
        if not (M_MIN <= self.m <= M_MAX):
            raise DomainError(f"Nakagami m must lie in [{M_MIN}, {M_MAX}], got {self.m!r}")
        object.__setattr__(self, "avg_gain", float(self.avg_gain))
        object.__setattr__(self, "m", float(self.m))

    @classmethod
    def rayleigh(cls, avg_gain):
        return cls("rayleigh", avg_gain)

    @classmethod
    def nakagami(cls, m, avg_gain):
        return cls("nakagami", avg_gain, m)

    @property
    def mean(self):
        return self.avg_gain

    @property
    def scale(self):
        """Scale of the gamma power-gain distribution, ``avg_gain / m``."""
        return self.avg_gain / self.m

    def _gain_array(self, g):
        g = np.asarray(g, dtype=float)
        if np.any(np.isnan(g)) or np.any(g < 0.0):
            raise DomainError("channel gain must be >= 0")
        return g

    def cdf(self, g):
        """``Pr[gain <= g]``; accepts scalars or arrays, ``g = inf`` maps to 1."""
        scalar = np.ndim(g) == 0
        g = self._gain_array(g)
        if self.kind == "rayleigh":
            out = -np.expm1(-g / self.avg_gain)
        else:
            x = self.m * g / self.avg_gain
            out = np.ones(g.shape)
            fin = np.isfinite(x)
            out[fin] = reg_lower_gamma(self.m, x[fin])
        return float(out) if scalar else out

    def sf(self, g):
        """Survival function ``1 - cdf(g)``, computed without cancellation."""
        scalar = np.ndim(g) == 0
        g = self._gain_array(g)
        if self.kind == "rayleigh":
            out = np.exp(-g / self.avg_gain)
        else:
            x = self.m * g / self.avg_gain
            out = np.zeros(g.shape)
            fin = np.isfinite(x)
            out[fin] = reg_upper_gamma(self.m, x[fin])
        return float(out) if scalar else out

    def pdf(self, g):
        scalar = np.ndim(g) == 0
        g = self._gain_array(g)
        out = gamma_pdf(self.m, self.m * g / self.avg_gain) * (self.m / self.avg_gain)
        return float(out) if scalar else out

    def quantile(self, p):
        """Inverse CDF on [0, 1).

        Closed form for Rayleigh; Newton iteration on the gamma CDF for Nakagami.
        """
        scalar = np.ndim(p) == 0
        p = np.asarray(p, dtype=float)
        if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p >= 1.0):
            raise DomainError("quantile probability must lie in [0, 1)")
        if self.kind == "rayleigh":
            out = -self.avg_gain * np.log1p(-p)
        else:
            flat = p.ravel()
            out = (self.scale * _unit_gamma_quantile(self.m, flat)).reshape(p.shape)
        return float(out) if scalar else out

    def sample(self, u):
        """Inverse-transform sample: a deterministic function of the uniform variate(s) ``u``."""
        return self.quantile(u)
