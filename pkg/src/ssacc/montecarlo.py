"""Seeded Monte Carlo estimators for the detection and capacity metrics.

Sample ``i`` of a quantity always comes from the same counter block, and the
mean and standard error are computed once over the concatenated sample
array.  Results are therefore bit-identical for any worker count or batch
size.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ssacc.capacity import secrecy_from_sinr, sinr_bob, sinr_willie
from ssacc.channel import SystemParams, cascaded_stats, sample_draws
from ssacc.detection import coefficients, min_dep
from ssacc.rng import CounterStream

# purpose tags of the counter streams; distinct tags give disjoint sample sets
STREAM_TAGS = {"amdep": 1, "bob": 2, "willie": 3, "secrecy": 4}


@dataclass(frozen=True)
class McConfig:
    samples: int
    seed: int = 0
    batch: int = 100_000
    workers: int = 1
    mode: str = "distribution"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.batch > self.samples:
            object.__setattr__(self, "batch", self.samples)


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    count: int

    def z_score(self, value: float) -> float:
        """(value - mean) / std_error; infinite if the error is zero and value differs."""
        if self.std_error == 0:
            return 0.0 if value == self.mean else math.inf
        return (value - self.mean) / self.std_error

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "Estimate":
        n = values.size
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n)


def _per_sample(params: SystemParams, which: str, draw, stats):
    if which == "amdep":
        return np.asarray(min_dep(coefficients(params, draw))[0], dtype=float)
    if which == "bob":
        return np.log2(1.0 + sinr_bob(params, draw, stats))
    if which == "willie":
        return np.log2(1.0 + sinr_willie(params, draw))
    if which == "secrecy":
        return np.asarray(secrecy_from_sinr(sinr_bob(params, draw, stats), sinr_willie(params, draw)))
    raise ValueError(f"unknown quantity {which!r}")


def sample_values(params: SystemParams, mc: McConfig, which: str) -> np.ndarray:
    """Per-realization values of ``which`` for samples 0 .. mc.samples-1."""
    if which not in STREAM_TAGS:
        raise ValueError(f"which must be one of {sorted(STREAM_TAGS)}")
    stats = cascaded_stats(params)
    stream = CounterStream(mc.seed, STREAM_TAGS[which])
    starts = list(range(0, mc.samples, mc.batch))

    def job(start):
        count = min(mc.batch, mc.samples - start)
        draw = sample_draws(params, stats, stream, start, count, mc.mode)
        return _per_sample(params, which, draw, stats)

    if mc.workers == 1 or len(starts) == 1:
        chunks = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            chunks = list(pool.map(job, starts))
    return np.concatenate(chunks)


def estimate_amdep(params: SystemParams, mc: McConfig) -> Estimate:
    """Mean of the minimum DEP over channel realizations."""
    return Estimate.from_samples(sample_values(params, mc, "amdep"))


def estimate_avg_capacity(params: SystemParams, mc: McConfig, which: str) -> Estimate:
    """Mean capacity; ``which`` is ``bob``, ``willie`` or ``secrecy`` (positive part)."""
    if which not in ("bob", "willie", "secrecy"):
        raise ValueError("which must be 'bob', 'willie' or 'secrecy'")
    return Estimate.from_samples(sample_values(params, mc, which))


def estimate_qoe(params: SystemParams, weights, mc: McConfig) -> Estimate:
    """alpha * E(R_S) + varsigma * E(R_W) * AMDEP from three disjoint sample sets.

    The standard error comes from the delta method with independent factors.
    """
    s = estimate_avg_capacity(params, mc, "secrecy")
    w = estimate_avg_capacity(params, mc, "willie")
    d = estimate_amdep(params, mc)
    a, v = weights.alpha, weights.varsigma
    mean = a * s.mean + v * w.mean * d.mean
    var = (a * s.std_error) ** 2 + v ** 2 * ((d.mean * w.std_error) ** 2 + (w.mean * d.std_error) ** 2)
    return Estimate(mean, math.sqrt(var), mc.samples)
