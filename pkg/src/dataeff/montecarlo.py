"""Seeded Monte Carlo estimators for the outage rates.

Gains are drawn by inverse transform only. The sample index space is cut into
fixed blocks of ``BLOCK_SIZE`` trials; block ``b`` draws its uniforms from a
Philox4x64 stream keyed by ``seed`` with counter ``(0, 0, b, 0)``. A worker
handles a contiguous run of blocks and returns an event count, so the result
depends only on ``(n_samples, seed)`` and never on ``workers``.

For CPA the draw is conditioned on transmission happening: with
``F_T = F(g_T)`` the uniform is mapped to ``F_T + u * (1 - F_T)`` before the
inverse CDF.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from dataeff.errors import DegenerateCutoffError, DomainError, ResourceError
from dataeff.metrics import (
    CpaConfig,
    CraConfig,
    _mec_cpa,
    _mec_cra,
    _mid_cpa,
    _mid_cra,
    _mid_cra_blocks,
    _positive,
    block_schedule,
)

BLOCK_SIZE = 1 << 16
MAX_BLOCKS_PER_TRIAL = 10**6
# uniforms materialised at once inside one block (rows * gains per trial)
_CHUNK_UNIFORMS = 1 << 20

GENERATOR_ID = f"numpy-Philox4x64-10/key=seed/counter=(0,0,block,0)/block={BLOCK_SIZE}"

_ONE_MINUS = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SimConfig:
    """Sample count, 64-bit seed and worker count (the last never affects results)."""

    n_samples: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise DomainError(f"n_samples must be >= 1, got {self.n_samples!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if int(self.workers) < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers!r}")


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    n: int
    std_error: float
    seed: int
    generator: str = GENERATOR_ID

    @classmethod
    def from_count(cls, count, n, seed):
        p_hat = count / n
        return cls(p_hat, n, math.sqrt(p_hat * (1.0 - p_hat) / n), seed)


def block_uniforms(seed, block, size):
    """The first ``size`` uniforms of block ``block``'s stream."""
    bitgen = np.random.Philox(key=seed, counter=[0, 0, block, 0])
    return np.random.Generator(bitgen).random(size)


def _block_ranges(n_samples, workers):
    n_blocks = -(-n_samples // BLOCK_SIZE)
    workers = min(workers, n_blocks)
    edges = np.linspace(0, n_blocks, workers + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _count_events(sim, width, event):
    """Sum ``event(u)`` over all trials; ``u`` has shape ``(rows, width)``."""
    n = int(sim.n_samples)
    seed = int(sim.seed)
    rows_per_chunk = max(1, _CHUNK_UNIFORMS // width)

    def run(block_range):
        count = 0
        for block in range(*block_range):
            rows = min(BLOCK_SIZE, n - block * BLOCK_SIZE)
            bitgen = np.random.Philox(key=seed, counter=[0, 0, block, 0])
            rng = np.random.Generator(bitgen)
            done = 0
            while done < rows:
                take = min(rows_per_chunk, rows - done)
                u = rng.random(take * width).reshape(take, width)
                count += int(np.count_nonzero(event(u)))
                done += take
        return count

    ranges = _block_ranges(n, int(sim.workers))
    if len(ranges) == 1:
        total = run(ranges[0])
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            total = sum(pool.map(run, ranges))
    return OutageEstimate.from_count(total, n, seed)


def _truncated_sampler(strategy, link, fading):
    """Gain sampler for the strategy; CPA samples are conditioned on ``g >= g_T``."""
    if isinstance(strategy, CraConfig):
        return lambda u: fading.sample(u)
    if isinstance(strategy, CpaConfig):
        f_cut = fading.cdf(strategy.cutoff_gain(link))
        if f_cut >= 1.0:
            raise DegenerateCutoffError(
                "cutoff gain has CDF 1: no transmission can occur under this fading"
            )
        return lambda u: fading.sample(np.minimum(f_cut + u * (1.0 - f_cut), _ONE_MINUS))
    raise TypeError(f"unknown strategy {strategy!r}")


def draw_gains(strategy, link, fading, sim):
    """All ``sim.n_samples`` gains the single-block estimators would see, in sample order."""
    draw = _truncated_sampler(strategy, link, fading)
    n = int(sim.n_samples)
    parts = []
    for block in range(-(-n // BLOCK_SIZE)):
        rows = min(BLOCK_SIZE, n - block * BLOCK_SIZE)
        parts.append(draw(block_uniforms(int(sim.seed), block, rows)))
    return np.concatenate(parts)


def estimate_eor(strategy, link, fading, H, E_th, sim):
    """Empirical ``Pr[MEC(H) > E_th]`` for a CRA or CPA strategy."""
    H = _positive("H", H)
    E_th = _positive("E_th", E_th)
    draw = _truncated_sampler(strategy, link, fading)
    if isinstance(strategy, CraConfig):
        p_t = strategy.p_t

        def event(u):
            return _mec_cra(link, p_t, H, draw(u[:, 0])) > E_th

    else:

        def event(u):
            return _mec_cpa(link, strategy, H, draw(u[:, 0])) > E_th

    return _count_events(sim, 1, event)


def estimate_ior(strategy, link, fading, E, H_th, sim):
    """Empirical ``Pr[MID(E) < H_th]`` within one coherence block."""
    E = _positive("E", E)
    H_th = _positive("H_th", H_th)
    draw = _truncated_sampler(strategy, link, fading)
    if isinstance(strategy, CraConfig):
        p_t = strategy.p_t

        def event(u):
            return _mid_cra(link, p_t, E, draw(u[:, 0])) < H_th

    else:

        def event(u):
            return _mid_cpa(link, strategy, E, draw(u[:, 0])) < H_th

    return _count_events(sim, 1, event)


def estimate_ior_multiblock(link, cra, fading, E, T_c, H_th, sim):
    """Empirical CRA ``Pr[MID(E) < H_th]`` when the airtime spans several coherence blocks.

    Each trial draws one independent gain per (possibly partial) block.
    """
    E = _positive("E", E)
    T_c = _positive("T_c", T_c)
    H_th = float(H_th)
    if not H_th >= 0.0:
        raise DomainError(f"H_th must be >= 0, got {H_th!r}")
    _, _, n_gains = block_schedule(E, cra.p_t, T_c)
    if n_gains > MAX_BLOCKS_PER_TRIAL:
        raise ResourceError(
            f"{n_gains} coherence blocks per trial exceeds the bound of {MAX_BLOCKS_PER_TRIAL}"
        )
    p_t = cra.p_t

    def event(u):
        return _mid_cra_blocks(link, p_t, E, fading.sample(u), T_c) < H_th

    return _count_events(sim, n_gains, event)
