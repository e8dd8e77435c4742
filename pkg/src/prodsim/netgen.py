"""Random network model with tunable community mixing and opinion homophily.

Structure generation follows the benchmark-graph recipe: node degrees and
community sizes are drawn from truncated power laws, each node's stubs are
wired inside its own community with probability `mu` and across
communities otherwise, and every undirected edge is emitted as both arcs.
Opinions are then seeded per community and copied to each member with
probability `eta`.

Convention: `mu` here is the fraction of intra-community links, so larger
values mean a more segregated network.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import stats
from .graph import OpinionGraph


class GenerationError(RuntimeError):
    """Structure generation failed after the configured number of retries."""


@dataclass(frozen=True)
class NetgenConfig:
    n: int
    mu: float
    eta: float
    degree_exponent: float = 2.5
    community_exponent: float = 1.5
    avg_degree: float = 13.75
    max_degree: int = 0          # 0 means n // 10
    min_community: int = 10
    max_community: int = 0       # 0 means n // 4
    seed: int = 0
    max_retries: int = 20

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if self.degree_exponent <= 1.0 or self.community_exponent <= 1.0:
            raise ValueError("power-law exponents must exceed 1")
        if self.avg_degree <= 0:
            raise ValueError("avg_degree must be positive")
        mc = self.resolved_max_community
        if not 1 <= self.min_community <= mc <= self.n:
            raise ValueError(
                f"need 1 <= min_community <= max_community <= n, "
                f"got {self.min_community}, {mc}, {self.n}")

    @property
    def resolved_max_degree(self) -> int:
        if self.max_degree > 0:
            return self.max_degree
        # n // 10 at production sizes; never below twice the target mean so
        # the truncated power law stays feasible on small graphs
        return max(2, self.n // 10, int(np.ceil(2 * self.avg_degree)))

    @property
    def resolved_max_community(self) -> int:
        return self.max_community if self.max_community > 0 else max(self.min_community, self.n // 4)


def _powerlaw_mean(exponent, lo, hi):
    """Mean of round(X) where X has the continuous density x^-exponent on [lo, hi].

    Computed bin-wise so the lower-cutoff solve accounts for the rounding
    applied to sampled degrees.
    """
    a = 1.0 - exponent

    def cdf(x):
        x = min(max(x, lo), hi)
        return (x ** a - lo ** a) / (hi ** a - lo ** a)

    total = 0.0
    for k in range(max(1, int(np.floor(lo))), int(np.ceil(hi)) + 1):
        total += k * (cdf(k + 0.5) - cdf(k - 0.5))
    return total


def _solve_lower_cutoff(exponent, target_mean, hi):
    """Lower cutoff that gives the rounded truncated power law the requested mean."""
    lo, up = 1.0, float(hi)
    if target_mean >= hi or _powerlaw_mean(exponent, lo, hi) > target_mean:
        raise GenerationError(
            f"avg_degree {target_mean} unreachable with max_degree {hi}")
    for _ in range(100):
        mid = 0.5 * (lo + up)
        if _powerlaw_mean(exponent, mid, hi) < target_mean:
            lo = mid
        else:
            up = mid
    return 0.5 * (lo + up)


def _truncated_powerlaw(rng, exponent, lo, hi, size):
    """Inverse-CDF samples of the continuous power law on [lo, hi]."""
    a = 1.0 - exponent
    u = rng.random(size)
    return (lo ** a + u * (hi ** a - lo ** a)) ** (1.0 / a)


def _sample_degrees(rng, cfg: NetgenConfig):
    hi = cfg.resolved_max_degree
    lo = _solve_lower_cutoff(cfg.degree_exponent, cfg.avg_degree, hi)
    deg = np.rint(_truncated_powerlaw(rng, cfg.degree_exponent, lo, hi, cfg.n)).astype(np.int64)
    np.clip(deg, 1, hi, out=deg)
    if deg.sum() % 2 == 1:
        i = int(rng.integers(cfg.n))
        deg[i] += 1 if deg[i] < hi else -1
    return deg


def _sample_community_sizes(rng, cfg: NetgenConfig):
    lo, hi, n = cfg.min_community, cfg.resolved_max_community, cfg.n
    sizes = []
    total = 0
    while total < n:
        s = int(np.clip(round(float(_truncated_powerlaw(rng, cfg.community_exponent, lo, hi, 1)[0])), lo, hi))
        sizes.append(s)
        total += s
    overshoot = total - n
    if overshoot > 0:
        if sizes[-1] - overshoot >= lo:
            sizes[-1] -= overshoot
        else:
            sizes.pop()
            deficit = n - sum(sizes)
            if not sizes:
                if lo <= n <= hi:
                    sizes = [n]
                    deficit = 0
                else:
                    return None
            while deficit > 0:
                order = rng.permutation(len(sizes))
                grew = False
                for i in order:
                    if sizes[i] < hi:
                        sizes[i] += 1
                        deficit -= 1
                        grew = True
                        if deficit == 0:
                            break
                if not grew:
                    return None
    return np.array(sizes, dtype=np.int64)


def _assign_nodes(rng, intra, sizes):
    """Place nodes into communities so every node's intra stubs can fit.

    Nodes are processed by decreasing intra-stub count; each goes to a
    random community with a free slot, enough members to host its intra
    stubs, and (first pass) headroom in total intra load.  Returns labels
    or None when no placement exists.
    """
    n_comm = len(sizes)
    capacity = sizes * (sizes - 1)  # max total intra stubs of a simple graph
    for load_cap in (0.8, 1.0):
        slots = sizes.copy()
        load = np.zeros(n_comm, dtype=np.int64)
        labels = np.full(len(intra), -1, dtype=np.int64)
        order = np.argsort(-intra, kind="stable")
        ok = True
        for node in order:
            need = intra[node]
            eligible = np.nonzero(
                (slots > 0) & (sizes - 1 >= need) & (load + need <= load_cap * capacity))[0]
            if eligible.size == 0:
                ok = False
                break
            c = int(eligible[rng.integers(eligible.size)])
            labels[node] = c
            slots[c] -= 1
            load[c] += need
        if ok:
            return labels
    return None


def _match_stubs(rng, stubs, edge_set, labels=None, repair_tries=200):
    """Pair a stub multiset into new simple undirected edges.

    Shuffles and pairs consecutively, then repairs conflicting pairs
    (self-loops, duplicates, and same-community pairs when `labels` is
    given, i.e. in the inter-community phase) by endpoint swaps with
    random good pairs.  Unrepairable pairs are dropped.  Returns the list
    of accepted edges, which are also added to `edge_set`.
    """
    stubs = np.array(stubs, dtype=np.int64)
    if stubs.size % 2 == 1:
        raise ValueError("stub count must be even")
    rng.shuffle(stubs)

    def conflict(a, b):
        if a == b:
            return True
        if labels is not None and labels[a] == labels[b]:
            return True
        return (a, b) in edge_set or (b, a) in edge_set

    good = []
    bad = []
    for i in range(0, stubs.size, 2):
        a, b = int(stubs[i]), int(stubs[i + 1])
        if conflict(a, b):
            bad.append((a, b))
        else:
            edge_set.add((min(a, b), max(a, b)))
            good.append((a, b))

    for a, b in bad:
        repaired = False
        for _ in range(repair_tries):
            if not good:
                break
            j = int(rng.integers(len(good)))
            c, d = good[j]
            edge_set.discard((min(c, d), max(c, d)))
            if not conflict(a, d) and not conflict(c, b):
                edge_set.add((min(a, d), max(a, d)))
                edge_set.add((min(c, b), max(c, b)))
                good[j] = (c, b)
                good.append((a, d))
                repaired = True
                break
            edge_set.add((min(c, d), max(c, d)))
        # unrepaired pairs are dropped: both stubs vanish
        if repaired:
            continue
    return good


def _weakly_connected(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(n, dtype=bool)
    queue = deque([0])
    seen[0] = True
    count = 1
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                count += 1
                queue.append(y)
    return count == n


def generate_structure(cfg: NetgenConfig, rng):
    """Draw one network structure: returns (arc set, community labels).

    Each undirected edge appears as both directed arcs.  The graph is
    regenerated until weakly connected (except at mu = 1.0 exactly, where
    disconnected community blocks are a legitimate outcome).
    """
    last_reason = "unknown"
    for _attempt in range(cfg.max_retries):
        degrees = _sample_degrees(rng, cfg)
        sizes = _sample_community_sizes(rng, cfg)
        if sizes is None:
            last_reason = "no feasible community size partition"
            continue
        intra = rng.binomial(degrees, cfg.mu).astype(np.int64)
        labels = _assign_nodes(rng, intra, sizes)
        if labels is None:
            last_reason = "no feasible node-to-community assignment"
            continue

        edge_set = set()
        edges = []
        inter_pool = []
        # intra phase, one community at a time
        for c in range(len(sizes)):
            members = np.nonzero(labels == c)[0]
            stubs = np.repeat(members, intra[members])
            if stubs.size % 2 == 1:
                drop = int(rng.integers(stubs.size))
                spare = int(stubs[drop])
                stubs = np.delete(stubs, drop)
                if cfg.mu < 1.0:
                    inter_pool.append(spare)
            edges.extend(_match_stubs(rng, stubs, edge_set))
        # inter phase, global
        inter_counts = degrees - intra
        inter_pool.extend(np.repeat(np.arange(cfg.n), inter_counts).tolist())
        if len(inter_pool) % 2 == 1:
            inter_pool.pop(int(rng.integers(len(inter_pool))))
        if inter_pool:
            edges.extend(_match_stubs(rng, inter_pool, edge_set, labels=labels))

        if cfg.mu < 1.0 and not _weakly_connected(cfg.n, edges):
            last_reason = "graph not weakly connected"
            continue

        arcs = set()
        for a, b in edges:
            arcs.add((a, b))
            arcs.add((b, a))
        return arcs, labels
    raise GenerationError(
        f"generation failed after {cfg.max_retries} attempts: {last_reason}")


def assign_opinions(communities, eta, rng):
    """Opinions from community seeds: adopt the community value w.p. eta.

    Every community k gets o_k ~ U(0,1); each node copies its community's
    value with probability eta and otherwise draws its own uniform.
    """
    communities = np.asarray(communities, dtype=np.int64)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    n_comm = int(communities.max()) + 1
    community_opinions = rng.random(n_comm)
    adopt = rng.random(communities.size) < eta
    individual = rng.random(communities.size)
    return np.where(adopt, community_opinions[communities], individual)


def generate(cfg: NetgenConfig) -> OpinionGraph:
    """Full model: structure plus opinions, deterministic given cfg.seed."""
    rng_structure = stats.rng_stream(cfg.seed, 0, "netgen-structure")
    rng_opinions = stats.rng_stream(cfg.seed, 0, "netgen-opinions")
    arcs, labels = generate_structure(cfg, rng_structure)
    opinions = assign_opinions(labels, cfg.eta, rng_opinions)
    g = OpinionGraph(cfg.n, opinions, labels)
    for u, v in sorted(arcs):
        g.add_arc(u, v)
    return g
