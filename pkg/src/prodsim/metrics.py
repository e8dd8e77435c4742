"""Echo-chamber and polarization metrics.

The neighbor correlation index captures local opinion alignment: the
Pearson correlation between each node's opinion and the mean opinion of
the accounts it follows.  The random-walk controversy score captures
global separation: how unlikely a random walker is to cross between the
two opinion camps before hitting a high-degree node.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from . import stats


class UndefinedMetricError(ValueError):
    """The metric has no value on this input (e.g. an empty opinion camp)."""


class DegenerateMetricWarning(UserWarning):
    """A zero-variance input forced the correlation to the 0 convention."""


@dataclass(frozen=True)
class RwcConfig:
    walks_per_side: int = 10_000
    degree_percentile: float = 0.95
    max_walk_length: int = 1000
    opinion_threshold: float = 0.5
    max_restarts: int = 1000

    def __post_init__(self):
        if self.walks_per_side < 1 or self.max_walk_length < 1 or self.max_restarts < 1:
            raise ValueError("rwc walk counts and lengths must be positive")
        if not 0.0 < self.degree_percentile < 1.0:
            raise ValueError(f"degree_percentile must be in (0, 1), got {self.degree_percentile}")


def pearson(x, y) -> float:
    """Pearson correlation; returns 0 (with a DegenerateMetricWarning) on zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two equal-length 1-d inputs")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 points")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = np.sqrt((xd * xd).sum() * (yd * yd).sum())
    if denom == 0.0:
        warnings.warn("zero-variance input, correlation undefined; returning 0",
                      DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return float(np.clip((xd * yd).sum() / denom, -1.0, 1.0))


def _nci_arrays(off, tgt, opinions) -> float:
    deg = np.diff(off)
    included = deg > 0
    if included.sum() < 2:
        warnings.warn("fewer than 2 nodes with followees, correlation undefined; returning 0",
                      DegenerateMetricWarning, stacklevel=2)
        return 0.0
    sums = np.add.reduceat(opinions[tgt], off[:-1][included])
    means = sums / deg[included]
    return pearson(opinions[included], means)


def nci(g, opinions=None, direction: str = "out") -> float:
    """Correlation between node opinions and their neighborhood mean opinions.

    Neighborhoods follow outgoing arcs by default (what the node is
    exposed to); nodes without any followee are excluded.  Pass
    direction="in" to average over followers instead.
    """
    opinions = g.opinions if opinions is None else np.asarray(opinions, dtype=float)
    if direction == "out":
        off, tgt = g.to_csr()
    elif direction == "in":
        off, tgt = _reverse_csr(*g.to_csr())
    else:
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
    return _nci_arrays(off, tgt, opinions)


def _reverse_csr(off, tgt):
    n = off.shape[0] - 1
    in_deg = np.bincount(tgt, minlength=n)
    roff = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(in_deg, out=roff[1:])
    rtgt = np.empty(tgt.shape[0], dtype=np.int64)
    cursor = roff[:-1].copy()
    for u in range(n):
        for e in range(off[u], off[u + 1]):
            v = tgt[e]
            rtgt[cursor[v]] = u
            cursor[v] += 1
    return roff, rtgt


def _rwc_arrays(off, tgt, in_degree, opinions, cfg: RwcConfig, rng) -> float:
    n = opinions.size
    thr = cfg.opinion_threshold
    side_of = np.full(n, -1, dtype=np.int8)
    side_of[opinions < thr] = 0
    side_of[opinions > thr] = 1
    x_starts = np.nonzero(side_of == 0)[0]
    y_starts = np.nonzero(side_of == 1)[0]
    if x_starts.size == 0 or y_starts.size == 0:
        raise UndefinedMetricError(
            "both opinion camps must be nonempty "
            f"(sizes {x_starts.size} and {y_starts.size})")

    total_degree = np.diff(off) + in_degree
    high = np.zeros(n, dtype=bool)
    for side_nodes in (x_starts, y_starts):
        cutoff = np.quantile(total_degree[side_nodes], cfg.degree_percentile)
        side_high = side_nodes[total_degree[side_nodes] > cutoff]
        if side_high.size == 0:
            # uniform side degrees leave nothing above the quantile; fall
            # back to inclusive so each camp keeps walk endpoints
            side_high = side_nodes[total_degree[side_nodes] >= cutoff]
        high[side_high] = True

    state = kernels.new_state(int(rng.integers(0, 2 ** 63)))
    counts, failed = kernels.rwc_walk_counts(
        off, tgt, high, side_of, x_starts, y_starts,
        cfg.walks_per_side, cfg.max_walk_length, cfg.max_restarts, state)
    ended = counts.sum(axis=0)
    if ended[0] == 0 or ended[1] == 0:
        raise UndefinedMetricError(
            f"no walk ended in one of the camps (endings {ended[0]} and {ended[1]})")
    p_xx = counts[0, 0] / ended[0]
    p_yx = counts[1, 0] / ended[0]
    p_yy = counts[1, 1] / ended[1]
    p_xy = counts[0, 1] / ended[1]
    return float(p_xx * p_yy - p_xy * p_yx)


def rwc(g, opinions=None, cfg: RwcConfig | None = None, rng=None) -> float:
    """Monte Carlo random-walk controversy score in [-1, 1].

    Walks start uniformly inside each camp, follow outgoing arcs and end
    on the first authoritative node reached after at least one move.
    The authoritative set holds each camp's nodes above the configured
    total-degree percentile, so both camps always provide endpoints.
    Dangling dead ends and over-long walks restart from a fresh start
    node on the same side.
    """
    opinions = g.opinions if opinions is None else np.asarray(opinions, dtype=float)
    cfg = cfg or RwcConfig()
    if rng is None:
        rng = stats.rng_stream(0, 0, "rwc-default")
    off, tgt = g.to_csr()
    in_degree = g.degree_summary().in_degrees
    return _rwc_arrays(off, tgt, in_degree, opinions, cfg, rng)
