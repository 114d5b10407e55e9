"""Closed-form data-oriented energy-efficiency metrics.

Two strategies are covered:

* CRA: continuous rate adaptation at constant transmit power ``p_t``.
* CPA: continuous power adaptation (truncated channel inversion) holding the
  received SNR at ``gamma_c`` under a peak power ``p_max``. Below the cutoff
  gain the transmitter holds, which is reported as :data:`HELD`.

For each strategy there is a minimum energy consumption (MEC) to deliver
``H`` bits, a maximum information delivery (MID) for an energy budget ``E``,
and the corresponding outage rates over the fading distribution: the energy
outage rate (EOR, ``Pr[MEC > E_th]``) and the information outage rate
(IOR, ``Pr[MID < H_th]``).

Data amounts are bits, energies joules, powers watts, gains linear.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from dataeff.errors import DegenerateCutoffError, DomainError, RegimeError

# exp() overflows past this argument; the outage limit there is exactly 1
_MAX_EXP_ARG = math.log(np.finfo(float).max)


class Outcome(enum.Enum):
    HELD = "HELD"

    def __repr__(self):
        return self.value

    __str__ = __repr__


#: CPA below cutoff: transmission waits for a better channel.
HELD = Outcome.HELD


def _positive(name, value):
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _gain(g):
    g = float(g)
    if not (g >= 0.0 and math.isfinite(g)):
        raise DomainError(f"channel gain must be finite and >= 0, got {g!r}")
    return g


@dataclass(frozen=True)
class CraConfig:
    """Constant transmit power ``p_t`` (W)."""

    p_t: float

    def __post_init__(self):
        object.__setattr__(self, "p_t", _positive("p_t", self.p_t))


@dataclass(frozen=True)
class CpaConfig:
    """Target received SNR ``gamma_c`` (linear) and peak transmit power ``p_max`` (W)."""

    gamma_c: float
    p_max: float

    def __post_init__(self):
        object.__setattr__(self, "gamma_c", _positive("gamma_c", self.gamma_c))
        object.__setattr__(self, "p_max", _positive("p_max", self.p_max))

    @property
    def spectral_efficiency(self):
        """Fixed rate per hertz ``log2(1 + gamma_c)``."""
        return math.log2(1.0 + self.gamma_c)

    def cutoff_gain(self, link):
        """Gain ``gamma_c * N0 * B / p_max`` below which transmission is held."""
        return self.gamma_c * link.noise_power / self.p_max

    def transmit_power(self, link, g):
        """Channel-inverting power ``gamma_c * N0 * B / g``, or 0 below cutoff."""
        g = _gain(g)
        if g < self.cutoff_gain(link):
            return 0.0
        return self.gamma_c * link.noise_power / g


# -- array kernels shared with the Monte Carlo estimators -------------------


def _mec_cra(link, p_t, bits, g):
    with np.errstate(divide="ignore"):
        return p_t * bits / link.shannon_rate(p_t, g)


def _mid_cra(link, p_t, energy, g):
    return (energy / p_t) * link.shannon_rate(p_t, g)


def _mec_cpa(link, cpa, bits, g):
    with np.errstate(divide="ignore"):
        return (cpa.gamma_c * link.noise_density_w_per_hz / g) * bits / cpa.spectral_efficiency


def _mid_cpa(link, cpa, energy, g):
    return (energy * g / (cpa.gamma_c * link.noise_density_w_per_hz)) * cpa.spectral_efficiency


# -- CRA ---------------------------------------------------------------------


def mec_cra(link, cra, H, g):
    """Energy to send ``H`` bits at constant power within one coherence time.

    Returns ``math.inf`` when ``g == 0`` (the channel can never carry the data).
    """
    H = _positive("H", H)
    g = _gain(g)
    if g == 0.0:
        return math.inf
    return float(_mec_cra(link, cra.p_t, H, g))


def mid_cra_single(link, cra, E, g, T_c=None):
    """Bits deliverable with energy ``E`` when ``E / p_t`` fits in one coherence time.

    If ``T_c`` is given, the single-block regime is enforced.
    """
    E = _positive("E", E)
    g = _gain(g)
    if T_c is not None and E / cra.p_t > _positive("T_c", T_c):
        raise RegimeError(
            f"E/p_t = {E / cra.p_t:g} s exceeds T_c = {T_c:g} s; use mid_cra_multi"
        )
    return float(_mid_cra(link, cra.p_t, E, g))


def block_schedule(E, p_t, T_c):
    """Split the airtime ``E / p_t`` into full coherence blocks plus a remainder.

    Returns ``(n_full, remainder_s, n_gains)`` where ``n_gains`` is the number of
    per-block gains consumed.
    """
    duration = E / p_t
    n_full = math.floor(duration / T_c)
    remainder = duration - n_full * T_c
    if remainder < 0.0:
        n_full -= 1
        remainder = duration - n_full * T_c
    n_gains = n_full + (1 if remainder > 0.0 else 0)
    return n_full, remainder, n_gains


def _mid_cra_blocks(link, p_t, E, gains, T_c):
    """Multi-block MID over the last axis of ``gains`` (shape ``(..., n_gains)``)."""
    n_full, remainder, _ = block_schedule(E, p_t, T_c)
    rates = link.shannon_rate(p_t, gains)
    if n_full == 0:
        return remainder * rates[..., 0]
    total = T_c * np.sum(rates[..., :n_full], axis=-1)
    if remainder > 0.0:
        total = total + remainder * rates[..., n_full]
    return total


def mid_cra_multi(link, cra, E, gains, T_c):
    """Bits deliverable with energy ``E`` over independent block-fading gains.

    ``gains[i]`` holds during the i-th coherence block of length ``T_c``; the
    last block may be partial. Reduces to :func:`mid_cra_single` when
    ``E / p_t <= T_c``.
    """
    E = _positive("E", E)
    T_c = _positive("T_c", T_c)
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1:
        raise DomainError("gains must be a 1-d sequence")
    _, _, needed = block_schedule(E, cra.p_t, T_c)
    if gains.size < needed:
        raise DomainError(f"need {needed} per-block gains, got {gains.size}")
    if np.any(~np.isfinite(gains)) or np.any(gains < 0.0):
        raise DomainError("gains must be finite and >= 0")
    return float(_mid_cra_blocks(link, cra.p_t, E, gains[:needed], T_c))


def _cra_outage(link, p_t, fading, bits, energy):
    exponent = math.log(2.0) * bits * p_t / (link.bandwidth_hz * energy)
    if exponent > _MAX_EXP_ARG:
        return 1.0
    g_threshold = (link.noise_power / p_t) * math.expm1(exponent)
    if not math.isfinite(g_threshold):
        return 1.0
    return fading.cdf(g_threshold)


def eor_cra(link, cra, fading, H, E_th):
    """Probability that the CRA energy for ``H`` bits exceeds ``E_th``."""
    return _cra_outage(link, cra.p_t, fading, _positive("H", H), _positive("E_th", E_th))


def ior_cra(link, cra, fading, E, H_th):
    """Probability that CRA delivers fewer than ``H_th`` bits with energy ``E``.

    Single coherence block only; see :func:`dataeff.montecarlo.estimate_ior_multiblock`
    for longer budgets.
    """
    return _cra_outage(link, cra.p_t, fading, _positive("H_th", H_th), _positive("E", E))


# -- CPA ---------------------------------------------------------------------


def mec_cpa(link, cpa, H, g):
    """CPA energy to send ``H`` bits, inversely proportional to ``g``; :data:`HELD` below cutoff."""
    H = _positive("H", H)
    g = _gain(g)
    if g < cpa.cutoff_gain(link):
        return HELD
    return float(_mec_cpa(link, cpa, H, g))


def mid_cpa(link, cpa, E, g, T_c=None):
    """CPA bits deliverable with energy ``E``, linear in ``g``; :data:`HELD` below cutoff.

    If ``T_c`` is given, the airtime ``E g / (gamma_c N0 B)`` must stay below it.
    """
    E = _positive("E", E)
    g = _gain(g)
    if g < cpa.cutoff_gain(link):
        return HELD
    if T_c is not None:
        airtime = E * g / (cpa.gamma_c * link.noise_power)
        if airtime >= _positive("T_c", T_c):
            raise RegimeError(f"CPA airtime {airtime:g} s is not below T_c = {T_c:g} s")
    return float(_mid_cpa(link, cpa, E, g))


def _cpa_outage(link, cpa, fading, bits, energy):
    g_cut = cpa.cutoff_gain(link)
    f_cut = fading.cdf(g_cut)
    if f_cut >= 1.0:
        raise DegenerateCutoffError(
            f"cutoff gain {g_cut:g} has CDF 1: p_max is too small for gamma_c under this fading"
        )
    g_threshold = cpa.gamma_c * link.noise_density_w_per_hz * bits / (energy * cpa.spectral_efficiency)
    outage = (fading.cdf(g_threshold) - f_cut) / (1.0 - f_cut)
    return min(max(outage, 0.0), 1.0)


def eor_cpa(link, cpa, fading, H, E_th):
    """Probability that the CPA energy for ``H`` bits exceeds ``E_th``, given transmission occurs."""
    return _cpa_outage(link, cpa, fading, _positive("H", H), _positive("E_th", E_th))


def ior_cpa(link, cpa, fading, E, H_th):
    """Probability that CPA delivers fewer than ``H_th`` bits with ``E``, given transmission occurs."""
    return _cpa_outage(link, cpa, fading, _positive("H_th", H_th), _positive("E", E))


def bits_per_joule(link, strategy, g):
    """Energy efficiency ``MID(E) / E``, independent of ``E`` for both strategies.

    Returns :data:`HELD` for CPA below cutoff.
    """
    g = _gain(g)
    if isinstance(strategy, CraConfig):
        return link.shannon_rate(strategy.p_t, g) / strategy.p_t
    if g < strategy.cutoff_gain(link):
        return HELD
    return g * strategy.spectral_efficiency / (strategy.gamma_c * link.noise_density_w_per_hz)
