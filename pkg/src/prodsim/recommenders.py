"""People recommenders: four candidate scorers behind one interface.

Each scorer proposes, for a source node u, the best candidate v that u
does not already follow, together with a raw score.  A quantile
normalizer fitted once per simulation maps raw scores onto a uniform
[0, 1] acceptance-probability scale so different scorers are comparable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from . import stats

KINDS = ("dji", "ppr", "salsa", "oba")

_PPR_MAX_ITER = 10_000


class NoCandidateError(RuntimeError):
    """The scorer has nobody left to recommend to this node."""


class PprConvergenceError(ArithmeticError):
    """Power iteration failed to reach the requested tolerance."""


@dataclass(frozen=True)
class RecommenderSpec:
    kind: str
    ppr_damping: float = 0.85
    ppr_tolerance: float = 1e-8
    salsa_hubs: int = 50
    salsa_damping: float = 0.85
    oba_gamma: float = 2.0
    oba_floor: float = 1e-4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 <= self.ppr_damping < 1.0:
            raise ValueError(f"ppr_damping must be in [0, 1), got {self.ppr_damping}")
        if self.ppr_tolerance <= 0:
            raise ValueError("ppr_tolerance must be positive")
        if self.salsa_hubs < 1:
            raise ValueError("salsa_hubs must be positive")
        if not 0.0 < self.salsa_damping <= 1.0:
            raise ValueError(f"salsa_damping must be in (0, 1], got {self.salsa_damping}")
        if self.oba_gamma < 0:
            raise ValueError("oba_gamma must be non-negative")
        if self.oba_floor <= 0:
            raise ValueError("oba_floor must be positive")


class ScoreNormalizer:
    """Probability integral transform over a frozen sample of raw scores."""

    def __init__(self, sample):
        sample = np.sort(np.asarray(sample, dtype=float))
        if sample.size == 0:
            raise ValueError("normalizer needs a nonempty sample")
        self.sorted_sample = sample

    def transform(self, raw_score) -> float:
        """Empirical CDF value of the raw score: 0 below the sample, 1 above."""
        return float(stats.ecdf_transform(self.sorted_sample, raw_score))


# ---------------------------------------------------------------------------
# scorers on a graph given as arrays (offsets/targets out-CSR + in-degrees)

def _ppr_vector(off, tgt, u, spec):
    scores, iterations = kernels.ppr_power_iteration(
        off, tgt, u, spec.ppr_damping, spec.ppr_tolerance, _PPR_MAX_ITER)
    if iterations < 0:
        raise PprConvergenceError(
            f"personalized pagerank at node {u} did not converge in {_PPR_MAX_ITER} iterations")
    return scores

def _candidate_mask(off, tgt, u, n):
    mask = np.ones(n, dtype=bool)
    mask[u] = False
    mask[tgt[off[u]:off[u + 1]]] = False
    return mask


def _salsa_authority_scores(off, tgt, u, spec, ppr_vec=None):
    """Authority relevance over the hub-induced bipartite graph.

    Hubs are the top-k nodes by personalized pagerank at u (ties to the
    smaller id); authorities are everyone a hub follows.  Scores come from
    alternating the two propagation equations to convergence and are
    normalized to sum to one.  Returns (authority ids, scores).
    """
    n = off.shape[0] - 1
    if ppr_vec is None:
        ppr_vec = _ppr_vector(off, tgt, u, spec)
    k = min(spec.salsa_hubs, n)
    order = np.lexsort((np.arange(n), -ppr_vec))
    hubs = order[:k]
    if u not in hubs:
        # the propagation is seeded at u, so u must sit in the hub set;
        # at realistic hub counts its restart mass puts it there anyway
        hubs = np.concatenate([hubs[:-1], [u]])

    authorities = np.unique(np.concatenate([tgt[off[h]:off[h + 1]] for h in hubs]))
    if authorities.size == 0:
        raise NoCandidateError(f"hubs of node {u} follow nobody")
    auth_pos = {int(a): i for i, a in enumerate(authorities)}

    m = np.zeros((authorities.size, k))
    for j, h in enumerate(hubs):
        for e in range(off[h], off[h + 1]):
            m[auth_pos[int(tgt[e])], j] = 1.0
    col_sums = m.sum(axis=0)
    col_sums[col_sums == 0.0] = 1.0
    m_col = m / col_sums
    mt = m.T.copy()
    row_sums = mt.sum(axis=1)
    row_sums[row_sums == 0.0] = 1.0
    mt_row = mt / row_sums[:, None]

    s = np.zeros(k)
    damping_vec = np.zeros(k)
    hub_index = {int(h): j for j, h in enumerate(hubs)}
    if u in hub_index:
        s[hub_index[u]] = 1.0
        damping_vec[hub_index[u]] = spec.salsa_damping
    r = m_col @ s
    for _ in range(100_000):
        r_new = m_col @ s
        s_new = damping_vec + (1.0 - spec.salsa_damping) * (mt_row @ r_new)
        delta = np.abs(r_new - r).sum() + np.abs(s_new - s).sum()
        r, s = r_new, s_new
        if delta < 1e-8:
            break
    total = r.sum()
    if total > 0.0:
        r = r / total
    return authorities, r


def _oba_probabilities(off, tgt, opinions, u, spec):
    mask = _candidate_mask(off, tgt, u, opinions.size)
    candidates = np.nonzero(mask)[0]
    if candidates.size == 0:
        raise NoCandidateError(f"node {u} already follows everyone")
    distances = np.maximum(np.abs(opinions[u] - opinions[candidates]), spec.oba_floor)
    weights = distances ** (-spec.oba_gamma)
    return candidates, weights / weights.sum()


def _best_candidate(off, tgt, in_deg, opinions, u, spec):
    """Top-scoring eligible candidate and its raw score, or None if nobody is left."""
    n = off.shape[0] - 1
    if spec.kind == "dji":
        v, raw = kernels.dji_best_candidate(off, tgt, in_deg, u)
        if v < 0:
            return None
        return int(v), float(raw)
    if spec.kind == "ppr":
        mask = _candidate_mask(off, tgt, u, n)
        if not mask.any():
            return None
        scores = np.where(mask, _ppr_vector(off, tgt, u, spec), -1.0)
        v = int(np.argmax(scores))
        return v, float(scores[v])
    if spec.kind == "salsa":
        try:
            authorities, scores = _salsa_authority_scores(off, tgt, u, spec)
        except NoCandidateError:
            return None
        mask = _candidate_mask(off, tgt, u, n)
        eligible = mask[authorities]
        if not eligible.any():
            return None
        cand = authorities[eligible]
        cand_scores = scores[eligible]
        best = int(np.argmax(cand_scores))  # first max = smallest id (authorities ascending)
        return int(cand[best]), float(cand_scores[best])
    if spec.kind == "oba":
        try:
            candidates, probs = _oba_probabilities(off, tgt, opinions, u, spec)
        except NoCandidateError:
            return None
        best = int(np.argmax(probs))
        return int(candidates[best]), float(probs[best])
    raise ValueError(f"unknown recommender kind {spec.kind!r}")


def _recommend_arrays(off, tgt, in_deg, opinions, u, spec, normalizer, rng):
    """Array-level recommendation: (candidate, acceptance probability) or None.

    Score-based kinds return their argmax candidate; the opinion-biased
    kind samples a candidate from its probability map.  Either way the
    acceptance probability is the normalized raw score.
    """
    if spec.kind == "oba":
        try:
            candidates, probs = _oba_probabilities(off, tgt, opinions, u, spec)
        except NoCandidateError:
            return None
        idx = int(rng.choice(candidates.size, p=probs))
        return int(candidates[idx]), normalizer.transform(probs[idx])
    best = _best_candidate(off, tgt, in_deg, opinions, u, spec)
    if best is None:
        return None
    v, raw = best
    return v, normalizer.transform(raw)


# ---------------------------------------------------------------------------
# public graph-level API

def _graph_arrays(g):
    off, tgt = g.to_csr()
    summary = g.degree_summary()
    return off, tgt, summary.in_degrees, g.opinions


def dji_score(g, u, v) -> float:
    """Directed Jaccard overlap between u's followees and v's followers."""
    if u == v:
        raise ValueError("dji_score is undefined for u == v")
    followees = set(g.out_neighbors(u))
    followers = set(g.in_neighbors(v))
    inter = len(followees & followers)
    denom = len(followees) + len(followers) - inter
    return inter / denom if denom > 0 else 0.0


def ppr_scores(g, u, spec: RecommenderSpec) -> np.ndarray:
    """Personalized pagerank vector at u; sums to one."""
    off, tgt = g.to_csr()
    return _ppr_vector(off, tgt, u, spec)


def salsa_scores(g, u, spec: RecommenderSpec):
    """Authorities with their relevance scores, best first (ties to smaller id)."""
    off, tgt = g.to_csr()
    authorities, scores = _salsa_authority_scores(off, tgt, u, spec)
    order = np.lexsort((authorities, -scores))
    return [(int(authorities[i]), float(scores[i])) for i in order]


def oba_scores(g, opinions, u, spec: RecommenderSpec) -> dict:
    """Per-candidate recommendation probabilities for the opinion-biased scorer."""
    off, tgt = g.to_csr()
    opinions = g.opinions if opinions is None else np.asarray(opinions, dtype=float)
    candidates, probs = _oba_probabilities(off, tgt, opinions, u, spec)
    return {int(c): float(p) for c, p in zip(candidates, probs)}


def _best_raw_score(off, tgt, in_deg, opinions, u, spec):
    best = _best_candidate(off, tgt, in_deg, opinions, u, spec)
    return None if best is None else best[1]


def fit_normalizer(g, spec: RecommenderSpec, rng, sample_size: int = 5000) -> ScoreNormalizer:
    """Empirical CDF of best-candidate raw scores from random source nodes.

    Scores are cached per distinct source, so the cost is bounded by the
    node count.  Sources with nobody left to recommend are skipped, which
    shrinks the effective sample on small or dense graphs.
    """
    off, tgt, in_deg, opinions = _graph_arrays(g)
    sources = rng.integers(0, g.node_count, size=sample_size)
    cache = {}
    raws = []
    for u in sources:
        u = int(u)
        if u not in cache:
            cache[u] = _best_raw_score(off, tgt, in_deg, opinions, u, spec)
        if cache[u] is not None:
            raws.append(cache[u])
    if not raws:
        raws = [0.0]
    return ScoreNormalizer(raws)


def recommend(g, opinions, u, spec: RecommenderSpec, normalizer: ScoreNormalizer, rng):
    """Propose a new followee for u: (candidate, acceptance probability) or None.

    The candidate is guaranteed to differ from u and from every current
    followee; None signals that no eligible candidate exists.
    """
    off, tgt = g.to_csr()
    in_deg = g.degree_summary().in_degrees
    opinions = g.opinions if opinions is None else np.asarray(opinions, dtype=float)
    return _recommend_arrays(off, tgt, in_deg, opinions, u, spec, normalizer, rng)
