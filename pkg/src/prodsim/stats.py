"""Statistical utilities: empirical CDFs, the two-sample KS test, seeded RNG streams.

Every stochastic component of the simulation pipeline draws its randomness
from a stream derived here, so that results are reproducible bit-for-bit
from a single master seed regardless of scheduling or worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix(x: int) -> int:
    """One splitmix64 step: increment by the golden ratio, then finalize."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, replica_index: int = 0, role_tag: str = "") -> int:
    """Deterministic 64-bit seed for one (master, replica, role) triple.

    The triple is folded through a splitmix64 hash chain, so distinct
    replicas and roles get effectively independent streams while identical
    triples always map to the same seed.
    """
    s = _splitmix(master_seed & _MASK64)
    s = _splitmix(s ^ (replica_index & _MASK64))
    for b in role_tag.encode("utf-8"):
        s = _splitmix(s ^ b)
    return s


def rng_stream(master_seed: int, replica_index: int = 0, role_tag: str = "") -> np.random.Generator:
    """Independent, reproducible generator for one (replica, role) slot."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, replica_index, role_tag)))


def ecdf_transform(sorted_sample, x):
    """Empirical CDF of `sorted_sample` evaluated at `x` (scalar or array).

    Returns the fraction of sample values <= x, i.e. 0 below the sample
    minimum and 1 at or above the maximum.  The sample must be sorted
    ascending and nonempty.
    """
    sample = np.asarray(sorted_sample)
    if sample.size == 0:
        raise ValueError("ecdf_transform requires a nonempty sample")
    counts = np.searchsorted(sample, x, side="right")
    return counts / sample.size


@dataclass(frozen=True)
class KsResult:
    """Two-sample KS statistic with its asymptotic p-value."""

    statistic: float
    p_value: float
    n1: int
    n2: int


def _kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, 2*sum (-1)^(j-1) exp(-2 j^2 lam^2).

    The alternating series is truncated once terms drop below 1e-10.
    """
    if lam <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 1000):
        term = math.exp(-2.0 * j * j * lam * lam)
        if term < 1e-10:
            break
        total += sign * term
        sign = -sign
    return 2.0 * total


def ks_two_sample(a, b) -> KsResult:
    """Two-sided two-sample Kolmogorov-Smirnov test.

    D is the supremum over the pooled sample points of the gap between the
    two empirical CDFs.  The p-value uses the asymptotic Kolmogorov
    distribution with the standard small-sample correction
    lam = (sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)) * D  where  n_e = n1*n2/(n1+n2).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n1, n2 = a.size, b.size
    if n1 < 5 or n2 < 5:
        raise ValueError(f"ks_two_sample needs at least 5 points per sample, got {n1} and {n2}")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n1
    cdf_b = np.searchsorted(b, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_e = n1 * n2 / (n1 + n2)
    lam = (math.sqrt(n_e) + 0.12 + 0.11 / math.sqrt(n_e)) * d
    p = min(max(_kolmogorov_sf(lam), 0.0), 1.0)
    return KsResult(statistic=d, p_value=p, n1=n1, n2=n2)


def significance_label(p_value: float) -> str:
    """Asterisk ladder used in reports: * p<0.05, ** p<0.01, *** p<0.001."""
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""
