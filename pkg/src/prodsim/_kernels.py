"""Numba kernels for the simulation hot loops.

All randomness inside kernels comes from an explicit splitmix64 state word
(a one-element uint64 array advanced in place), so every kernel is a pure
function of its inputs and fully deterministic.  Floating point stays in
strict IEEE mode (no fastmath) to keep runs bit-reproducible.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_U = np.uint64
_GOLDEN = _U(0x9E3779B97F4A7C15)
_MIX1 = _U(0xBF58476D1CE4E5B9)
_MIX2 = _U(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def _next_u64(st):
    st[0] = st[0] + _GOLDEN
    z = st[0]
    z = (z ^ (z >> _U(30))) * _MIX1
    z = (z ^ (z >> _U(27))) * _MIX2
    return z ^ (z >> _U(31))


@njit(cache=True, inline="always")
def _next_double(st):
    """Uniform double in [0, 1) from the top 53 bits."""
    return float(_next_u64(st) >> _U(11)) * _INV53


def new_state(seed: int) -> np.ndarray:
    """Mutable splitmix64 state initialized from a 64-bit seed."""
    return np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)


@njit(cache=True)
def uniform_doubles(st, out):
    for i in range(out.shape[0]):
        out[i] = _next_double(st)


@njit(cache=True)
def shuffle_identity(perm, st):
    """Fill `perm` with 0..n-1 and Fisher-Yates shuffle it in place."""
    n = perm.shape[0]
    for i in range(n):
        perm[i] = i
    for i in range(n - 1, 0, -1):
        j = int(_next_double(st) * (i + 1))
        if j > i:
            j = i
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


@njit(cache=True, inline="always")
def _pick_index(st, bound):
    j = int(_next_double(st) * bound)
    if j >= bound:
        j = bound - 1
    return j


@njit(cache=True)
def bcm_step_segment(off, tgt, opinions, alpha, confidence, convergence,
                     s_per_node, perm, start_idx, start_s, st, counters):
    """Run bounded-confidence interaction slots until a recommendation event.

    Walks the node permutation from (start_idx, start_s).  Each slot first
    flips the per-node susceptibility gate; on success control returns to
    the caller, which owns the recommendation path, with the pending
    (perm index, slot) pair.  Otherwise the node interacts with a uniform
    existing followee.  Returns (-1, -1) once the step is complete.

    counters[0] tallies counted interactions, counters[1] no-op slots.
    """
    n = perm.shape[0]
    idx = start_idx
    s = start_s
    while idx < n:
        u = perm[idx]
        while s < s_per_node:
            if _next_double(st) < alpha[u]:
                return idx, s
            deg = off[u + 1] - off[u]
            if deg > 0:
                v = tgt[off[u] + _pick_index(st, deg)]
                ou = opinions[u]
                ov = opinions[v]
                if abs(ou - ov) < confidence:
                    opinions[u] = ou + convergence * (ov - ou)
                    opinions[v] = ov + convergence * (ou - ov)
            else:
                counters[1] += 1
            counters[0] += 1
            s += 1
        idx += 1
        s = 0
    return -1, -1


@njit(cache=True, inline="always")
def _posterior(o, successes, trials_f, ratio):
    """Bayesian belief update from an observed experiment outcome.

    ratio = (0.5 - gain) / (0.5 + gain); exact 0 and 1 are absorbing.
    """
    if o <= 0.0:
        return 0.0
    if o >= 1.0:
        return 1.0
    oc = o
    if oc < 1e-12:
        oc = 1e-12
    elif oc > 1.0 - 1e-12:
        oc = 1.0 - 1e-12
    return 1.0 / (1.0 + ((1.0 - oc) / oc) * ratio ** (2.0 * successes - trials_f))


@njit(cache=True)
def draw_experiment_outcomes(opinions, trials, p_success, successes, st):
    """Refresh the per-step experiment cache.

    Agents at or below belief 0.5 take the known action (fixed payoff of
    trials/2); the rest try the novel action, a Binomial(trials, p_success)
    draw realized as individual Bernoulli trials.
    """
    half = trials * 0.5
    for v in range(opinions.shape[0]):
        if opinions[v] <= 0.5:
            successes[v] = half
        else:
            k = 0.0
            for _ in range(trials):
                if _next_double(st) < p_success:
                    k += 1.0
            successes[v] = k


@njit(cache=True)
def epi_step_segment(off, tgt, opinions, alpha, successes, trials_f, ratio,
                     s_per_node, perm, start_idx, start_s, fresh_entry,
                     self_update, st, counters):
    """Epistemic-model analogue of bcm_step_segment.

    Interactions update the follower's belief from the followee's cached
    experiment outcome.  With self_update enabled, a node also learns from
    its own outcome at the start of its turn (skipped on re-entry so a
    resumed turn is not double counted).
    """
    n = perm.shape[0]
    idx = start_idx
    s = start_s
    fresh = fresh_entry
    while idx < n:
        u = perm[idx]
        if self_update and fresh:
            opinions[u] = _posterior(opinions[u], successes[u], trials_f, ratio)
        fresh = True
        while s < s_per_node:
            if _next_double(st) < alpha[u]:
                return idx, s
            deg = off[u + 1] - off[u]
            if deg > 0:
                v = tgt[off[u] + _pick_index(st, deg)]
                opinions[u] = _posterior(opinions[u], successes[v], trials_f, ratio)
            else:
                counters[1] += 1
            counters[0] += 1
            s += 1
        idx += 1
        s = 0
    return -1, -1


@njit(cache=True)
def ppr_power_iteration(off, tgt, u, damping, tol, max_iter):
    """Personalized PageRank by power iteration on the column-stochastic walk matrix.

    Dangling mass is redistributed to the restart vector (the indicator of
    u), which keeps the vector summing to one.  Returns (scores, iterations)
    with iterations = -1 if the L1 residual never dropped below tol.
    """
    n = off.shape[0] - 1
    p = np.zeros(n)
    p[u] = 1.0
    pn = np.zeros(n)
    for it in range(max_iter):
        for j in range(n):
            pn[j] = 0.0
        dangling = 0.0
        for i in range(n):
            deg = off[i + 1] - off[i]
            if deg == 0:
                dangling += p[i]
            else:
                w = damping * p[i] / deg
                for e in range(off[i], off[i + 1]):
                    pn[tgt[e]] += w
        pn[u] += (1.0 - damping) + damping * dangling
        resid = 0.0
        for j in range(n):
            resid += abs(pn[j] - p[j])
            p[j] = pn[j]
        if resid < tol:
            return p, it + 1
    return p, -1


@njit(cache=True)
def dji_best_candidate(off, tgt, in_deg, u):
    """Best non-followee by directed Jaccard overlap, ties to the smallest id.

    Returns (-1, 0.0) when u already follows every other node.
    """
    n = off.shape[0] - 1
    overlap = np.zeros(n, np.int64)
    followed = np.zeros(n, np.bool_)
    for e in range(off[u], off[u + 1]):
        followed[tgt[e]] = True
    for e in range(off[u], off[u + 1]):
        x = tgt[e]
        for e2 in range(off[x], off[x + 1]):
            overlap[tgt[e2]] += 1
    deg_u = off[u + 1] - off[u]
    best_v = -1
    best_score = -1.0
    for v in range(n):
        if v == u or followed[v]:
            continue
        den = deg_u + in_deg[v] - overlap[v]
        score = overlap[v] / den if den > 0 else 0.0
        if score > best_score:
            best_score = score
            best_v = v
    if best_v < 0:
        return -1, 0.0
    return best_v, best_score


@njit(cache=True)
def rwc_walk_counts(off, tgt, high, side_of, x_starts, y_starts,
                    walks_per_side, max_len, max_restarts, st):
    """Random-walk endpoint tallies for the controversy score.

    counts[i, j] = walks started on side i that ended on side j.  A walk
    ends on the first high-degree node it reaches after at least one move
    (so a high-degree start does not end its own walk); dangling nodes,
    over-long walks and endings on unpartitioned nodes restart the walk
    from a fresh start node on the same side.  Walks that fail
    max_restarts times are tallied separately.
    """
    counts = np.zeros((2, 2), np.int64)
    failed = 0
    for side in range(2):
        if side == 0:
            starts = x_starts
        else:
            starts = y_starts
        m = starts.shape[0]
        for _w in range(walks_per_side):
            ended = False
            for _r in range(max_restarts):
                node = starts[_pick_index(st, m)]
                steps = 0
                while True:
                    deg = off[node + 1] - off[node]
                    if deg == 0 or steps >= max_len:
                        break
                    node = tgt[off[node] + _pick_index(st, deg)]
                    steps += 1
                    if high[node]:
                        j = side_of[node]
                        if j >= 0:
                            counts[side, j] += 1
                            ended = True
                        break
                if ended:
                    break
            if not ended:
                failed += 1
    return counts, failed
