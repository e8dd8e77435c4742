"""Core simulation loop.

Each time step visits every node in a fresh random permutation; a node
spends its interaction slots either consulting the recommender (gated by
its susceptibility) or interacting with a follower it already has.  Every
accepted recommendation is paired with the removal of one existing
followee, so the arc count is invariant over a whole run.  Once the
recommendation budget is spent, all susceptibilities drop to zero and the
opinion dynamics run alone.

The slot loop runs inside numba kernels; control returns to Python only
for the rare recommendation events.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from . import stats
from .graph import OpinionGraph
from .metrics import RwcConfig, UndefinedMetricError, _nci_arrays, _rwc_arrays
from .odm import BcmParams, EpistemicParams
from .recommenders import RecommenderSpec, fit_normalizer, _recommend_arrays

REWIRING_POLICIES = ("uniform", "opinion_distance", "inverse_degree")
SUSCEPTIBILITY_MODES = ("constant", "uniform", "power_law")
INTERVENTION_STRATEGIES = ("uniform", "opinion_diversity", "degree_sigmoid")


@dataclass(frozen=True)
class InterventionSpec:
    """Replace an accepted recommendation with probability `probability`."""

    probability: float
    strategy: str = "uniform"
    max_passes: int = 100

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"intervention probability must be in [0, 1], got {self.probability}")
        if self.strategy not in INTERVENTION_STRATEGIES:
            raise ValueError(f"strategy must be one of {INTERVENTION_STRATEGIES}, got {self.strategy!r}")


@dataclass(frozen=True)
class SimulationConfig:
    interactions_per_step: int = 2
    max_recommendations: int = 0
    max_steps: int = 5000
    odm: object = field(default_factory=BcmParams)
    recommender: RecommenderSpec | None = None
    rewiring: str = "uniform"
    susceptibility: str = "constant"
    intervention: InterventionSpec | None = None
    seed: int = 0
    trace_interval: int = 0
    normalizer_sample_size: int = 5000
    rejection_streak_limit: int = 1000
    self_update: bool = False

    def __post_init__(self):
        if self.interactions_per_step < 1:
            raise ValueError("interactions_per_step must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_recommendations < 0:
            raise ValueError("max_recommendations must be >= 0")
        if not isinstance(self.odm, (BcmParams, EpistemicParams)):
            raise ValueError("odm must be BcmParams or EpistemicParams")
        if self.rewiring not in REWIRING_POLICIES:
            raise ValueError(f"rewiring must be one of {REWIRING_POLICIES}, got {self.rewiring!r}")
        if self.susceptibility not in SUSCEPTIBILITY_MODES:
            raise ValueError(f"susceptibility must be one of {SUSCEPTIBILITY_MODES}")
        if self.max_recommendations > 0 and self.recommender is None:
            raise ValueError("a positive recommendation budget needs a recommender")


@dataclass
class RunTrace:
    """Sampled metric trajectory plus budget bookkeeping for one run."""

    times: list = field(default_factory=list)
    nci_values: list = field(default_factory=list)
    rwc_values: list = field(default_factory=list)
    recs_used: list = field(default_factory=list)
    budget_exhausted_step: int = -1
    recommendations_accepted: int = 0
    interactions: int = 0
    noops: int = 0

    def rows(self):
        return list(zip(self.times, self.nci_values, self.rwc_values, self.recs_used))


@dataclass
class SimulationState:
    """Live state of one run; owned by exactly one worker."""

    out_offsets: np.ndarray
    out_targets: np.ndarray
    in_degree: np.ndarray
    opinions: np.ndarray
    communities: np.ndarray
    alpha: float
    alpha_per_node: np.ndarray
    loop_state: np.ndarray
    events_rng: np.random.Generator
    normalizer: object = None
    experiment_successes: np.ndarray | None = None
    t: int = 0
    recommendations_accepted: int = 0
    budget_exhausted_step: int = -1
    perm: np.ndarray | None = None
    counters: np.ndarray | None = None
    _scratch: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return self.opinions.size

    @property
    def arc_count(self) -> int:
        return self.out_targets.size


def calibrate_alpha(cfg: SimulationConfig, node_count: int) -> float:
    """Recommendation rate that spends the budget in roughly half the run.

    budget / ((max_steps / 2) * interactions_per_step * node_count),
    clamped into [0, 1].
    """
    if cfg.max_recommendations <= 0:
        return 0.0
    alpha = cfg.max_recommendations / (
        (cfg.max_steps / 2.0) * cfg.interactions_per_step * node_count)
    if alpha > 1.0:
        warnings.warn(f"calibrated recommendation rate {alpha:.3g} clamped to 1.0")
        return 1.0
    return alpha


def sample_susceptibility(kind: str, alpha: float, node_count: int, rng) -> np.ndarray:
    """Per-node recommendation-acceptance rates with mean alpha.

    constant: every node at alpha.  uniform: U(0, 2*alpha).  power_law:
    density m*x^(m-1) on [0, 1] with m = alpha/(1-alpha), sampled by
    inversion (U^(1/m)); its mean m/(m+1) equals alpha.
    """
    if kind == "constant":
        return np.full(node_count, alpha)
    if kind == "uniform":
        return np.clip(rng.uniform(0.0, 2.0 * alpha, node_count), 0.0, 1.0)
    if kind == "power_law":
        if alpha >= 1.0:
            raise ValueError(f"power_law susceptibility needs alpha < 1, got {alpha}")
        if alpha <= 0.0:
            return np.zeros(node_count)
        m = alpha / (1.0 - alpha)
        return np.clip(rng.random(node_count) ** (1.0 / m), 0.0, 1.0)
    raise ValueError(f"unknown susceptibility kind {kind!r}")


def rewire(state: SimulationState, u: int, new_target: int, policy: str, rng) -> int:
    """Swap one of u's current followees for `new_target`; returns the removed node.

    Net effect: arc (u, removed) deleted, arc (u, new_target) added, so
    u's out-degree is unchanged and the new followee can never be the one
    removed.  Selection follows the rewiring policy; a zero-weight
    opinion-distance profile falls back to uniform.
    """
    lo, hi = state.out_offsets[u], state.out_offsets[u + 1]
    if hi <= lo:
        raise ValueError(f"node {u} has no followee to rewire away")
    segment = state.out_targets[lo:hi]
    k = hi - lo
    if policy == "uniform":
        slot = int(rng.integers(k))
    elif policy == "opinion_distance":
        weights = np.abs(state.opinions[u] - state.opinions[segment])
        total = weights.sum()
        if total <= 0.0:
            slot = int(rng.integers(k))
        else:
            slot = int(rng.choice(k, p=weights / total))
    elif policy == "inverse_degree":
        # each followee's in-degree counts the arc from u itself, so this
        # is 1/(1 + in-degree from everyone else), always well defined
        weights = 1.0 / state.in_degree[segment]
        slot = int(rng.choice(k, p=weights / weights.sum()))
    else:
        raise ValueError(f"unknown rewiring policy {policy!r}")
    removed = int(segment[slot])
    segment[slot] = new_target
    state.in_degree[removed] -= 1
    state.in_degree[new_target] += 1
    return removed


def intervention_acceptance(state: SimulationState, u: int, candidates, strategy: str):
    """Per-candidate acceptance probabilities for an intervention sweep."""
    if strategy == "opinion_diversity":
        return np.abs(state.opinions[u] - state.opinions[candidates])
    if strategy == "degree_sigmoid":
        mean_in = state.in_degree.mean()
        return 1.0 / (1.0 + np.exp(-(state.in_degree[candidates] - mean_in)))
    raise ValueError(f"no acceptance profile for strategy {strategy!r}")


def apply_intervention(state: SimulationState, u: int, v: int,
                       spec: InterventionSpec | None, rng) -> int:
    """Possibly replace the recommended node v under the intervention policy.

    With probability 1 - probability, v is kept.  Otherwise candidates
    (non-followees of u, excluding u) are scanned in random order with a
    per-candidate Bernoulli acceptance until one passes; after max_passes
    fruitless sweeps the original v is kept.
    """
    if spec is None or spec.probability <= 0.0:
        return v
    if rng.random() >= spec.probability:
        return v
    n = state.node_count
    mask = np.ones(n, dtype=bool)
    mask[u] = False
    mask[state.out_targets[state.out_offsets[u]:state.out_offsets[u + 1]]] = False
    candidates = np.nonzero(mask)[0]
    if candidates.size == 0:
        return v
    if spec.strategy == "uniform":
        return int(candidates[rng.integers(candidates.size)])
    probs = intervention_acceptance(state, u, candidates, spec.strategy)
    for _ in range(spec.max_passes):
        for i in rng.permutation(candidates.size):
            if rng.random() < probs[i]:
                return int(candidates[i])
    return v


def _init_state(initial: OpinionGraph, cfg: SimulationConfig) -> SimulationState:
    off, tgt = initial.to_csr()
    summary = initial.degree_summary()
    n = initial.node_count
    alpha = calibrate_alpha(cfg, n)
    alpha_per_node = sample_susceptibility(
        cfg.susceptibility, alpha, n, stats.rng_stream(cfg.seed, 0, "susceptibility"))
    normalizer = None
    if cfg.recommender is not None and cfg.max_recommendations > 0:
        normalizer = fit_normalizer(
            initial, cfg.recommender, stats.rng_stream(cfg.seed, 0, "normalizer"),
            sample_size=cfg.normalizer_sample_size)
    state = SimulationState(
        out_offsets=off,
        out_targets=tgt,
        in_degree=summary.in_degrees.copy(),
        opinions=initial.opinions.copy(),
        communities=initial.communities.copy(),
        alpha=alpha,
        alpha_per_node=alpha_per_node,
        loop_state=kernels.new_state(stats.derive_seed(cfg.seed, 0, "loop")),
        events_rng=stats.rng_stream(cfg.seed, 0, "events"),
        normalizer=normalizer,
        perm=np.empty(n, dtype=np.int64),
        counters=np.zeros(2, dtype=np.int64),
        _scratch=np.empty(1, dtype=np.float64),
    )
    if isinstance(cfg.odm, EpistemicParams):
        state.experiment_successes = np.empty(n, dtype=np.float64)
    return state


def _loop_uniform(state: SimulationState) -> float:
    """One uniform draw from the kernel RNG stream (for Python-side slots)."""
    kernels.uniform_doubles(state.loop_state, state._scratch)
    return float(state._scratch[0])


def _apply_update(state: SimulationState, cfg: SimulationConfig, u: int, v: int):
    """The configured opinion update for an interaction along (u, v).

    Mirrors the kernel arithmetic exactly so Python-handled interactions
    stay bit-identical with kernel-handled ones.
    """
    if isinstance(cfg.odm, BcmParams):
        ou = state.opinions[u]
        ov = state.opinions[v]
        if abs(ou - ov) < cfg.odm.confidence:
            state.opinions[u] = ou + cfg.odm.convergence * (ov - ou)
            state.opinions[v] = ov + cfg.odm.convergence * (ou - ov)
    else:
        state.opinions[u] = kernels._posterior(
            state.opinions[u], state.experiment_successes[v],
            float(cfg.odm.trials), cfg.odm.odds_ratio)


def _existing_link_slot(state: SimulationState, cfg: SimulationConfig, u: int):
    """Python-side fallback slot: interact with an existing followee (or no-op)."""
    lo, hi = state.out_offsets[u], state.out_offsets[u + 1]
    deg = hi - lo
    if deg > 0:
        pick = int(_loop_uniform(state) * deg)
        if pick >= deg:
            pick = deg - 1
        v = int(state.out_targets[lo + pick])
        _apply_update(state, cfg, u, v)
    else:
        state.counters[1] += 1
    state.counters[0] += 1


_ACCEPTED, _REJECTED, _UNAVAILABLE = range(3)


def _try_recommendation(state: SimulationState, cfg: SimulationConfig, u: int) -> int:
    """One recommendation attempt for u (the susceptibility gate already passed).

    Returns _ACCEPTED after mutating the graph and applying the update,
    _REJECTED when the acceptance coin failed (the slot is retried), and
    _UNAVAILABLE when no recommendation path exists for u.
    """
    lo, hi = state.out_offsets[u], state.out_offsets[u + 1]
    if hi <= lo:
        # nobody to rewire away: accepting would break arc conservation
        return _UNAVAILABLE
    result = _recommend_arrays(
        state.out_offsets, state.out_targets, state.in_degree, state.opinions,
        u, cfg.recommender, state.normalizer, state.events_rng)
    if result is None:
        return _UNAVAILABLE
    v, p_v = result
    if state.events_rng.random() >= p_v:
        return _REJECTED
    v_final = apply_intervention(state, u, v, cfg.intervention, state.events_rng)
    rewire(state, u, v_final, cfg.rewiring, state.events_rng)
    _apply_update(state, cfg, u, v_final)
    state.counters[0] += 1
    state.recommendations_accepted += 1
    if state.recommendations_accepted >= cfg.max_recommendations:
        state.alpha_per_node[:] = 0.0
        if state.budget_exhausted_step < 0:
            state.budget_exhausted_step = state.t + 1  # 1-based, like trace times
    return _ACCEPTED


def step(state: SimulationState, cfg: SimulationConfig):
    """Advance the simulation by one time step.

    Visits all nodes in a fresh random permutation; each node performs
    exactly interactions_per_step counted interactions.  A rejected
    recommendation does not consume the slot; the slot is retried from
    the susceptibility gate.  A node whose recommendation path is
    unavailable falls through to an existing-link interaction (a no-op
    when it follows nobody), so every step terminates.
    """
    kernels.shuffle_identity(state.perm, state.loop_state)
    bcm = isinstance(cfg.odm, BcmParams)
    if not bcm:
        kernels.draw_experiment_outcomes(
            state.opinions, cfg.odm.trials, 0.5 + cfg.odm.gain,
            state.experiment_successes, state.loop_state)
    idx, s = 0, 0
    fresh = True
    pending_slot = (-1, -1)
    streak = 0
    while True:
        if bcm:
            idx, s = kernels.bcm_step_segment(
                state.out_offsets, state.out_targets, state.opinions,
                state.alpha_per_node, cfg.odm.confidence, cfg.odm.convergence,
                cfg.interactions_per_step, state.perm, idx, s,
                state.loop_state, state.counters)
        else:
            idx, s = kernels.epi_step_segment(
                state.out_offsets, state.out_targets, state.opinions,
                state.alpha_per_node, state.experiment_successes,
                float(cfg.odm.trials), cfg.odm.odds_ratio,
                cfg.interactions_per_step, state.perm, idx, s, fresh,
                cfg.self_update, state.loop_state, state.counters)
        if idx < 0:
            break
        u = int(state.perm[idx])
        streak = streak + 1 if (idx, s) == pending_slot else 1
        pending_slot = (idx, s)
        outcome = _try_recommendation(state, cfg, u)
        if outcome == _REJECTED and streak < cfg.rejection_streak_limit:
            fresh = False  # same slot retried: re-enter at the gate
            continue
        if outcome != _ACCEPTED:
            # unavailable path, or a rejection streak hit the limit
            _existing_link_slot(state, cfg, u)
        s += 1
        fresh = False
        streak = 0
        pending_slot = (-1, -1)
    state.t += 1


def _state_to_graph(state: SimulationState) -> OpinionGraph:
    g = OpinionGraph(state.node_count, state.opinions, state.communities)
    off, tgt = state.out_offsets, state.out_targets
    for u in range(state.node_count):
        for e in range(off[u], off[u + 1]):
            g.add_arc(u, int(tgt[e]))
    return g


def _trace_metrics(state: SimulationState, rwc_cfg: RwcConfig, rng):
    nci_value = _nci_arrays(state.out_offsets, state.out_targets, state.opinions)
    try:
        rwc_value = _rwc_arrays(state.out_offsets, state.out_targets,
                                state.in_degree, state.opinions, rwc_cfg, rng)
    except UndefinedMetricError:
        rwc_value = float("nan")
    return nci_value, rwc_value


def run(initial: OpinionGraph, cfg: SimulationConfig,
        trace_rwc: RwcConfig | None = None):
    """Execute a full simulation; returns (final graph, trace).

    Deterministic given cfg.seed.  With trace_interval > 0 the trace
    records (t, nci, rwc, recommendations used) at t = 0, every interval,
    and at the final step.
    """
    state = _init_state(initial, cfg)
    trace = RunTrace()
    trace_rng = stats.rng_stream(cfg.seed, 0, "trace")
    rwc_cfg = trace_rwc or RwcConfig()

    def record():
        nci_value, rwc_value = _trace_metrics(state, rwc_cfg, trace_rng)
        trace.times.append(state.t)
        trace.nci_values.append(nci_value)
        trace.rwc_values.append(rwc_value)
        trace.recs_used.append(state.recommendations_accepted)

    if cfg.trace_interval > 0:
        record()
    for _ in range(cfg.max_steps):
        step(state, cfg)
        if cfg.trace_interval > 0 and (
                state.t % cfg.trace_interval == 0 or state.t == cfg.max_steps):
            record()
    trace.budget_exhausted_step = state.budget_exhausted_step
    trace.recommendations_accepted = state.recommendations_accepted
    trace.interactions = int(state.counters[0])
    trace.noops = int(state.counters[1])
    return _state_to_graph(state), trace
