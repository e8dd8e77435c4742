"""Opinion update rules: bounded confidence and the Bayesian epistemic model."""
from __future__ import annotations

import math
from dataclasses import dataclass

# Actions available to an epistemic agent: keep the known option (fixed
# payoff) or try the novel one (uncertain payoff with a positive gain).
ACTION_KNOWN = 0
ACTION_NOVEL = 1

_BELIEF_FLOOR = 1e-12


@dataclass(frozen=True)
class BcmParams:
    """Bounded confidence: interact only within `confidence`, move by `convergence`."""

    confidence: float = 0.2
    convergence: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if not 0.0 <= self.convergence <= 0.5:
            raise ValueError(f"convergence must be in [0, 0.5], got {self.convergence}")


@dataclass(frozen=True)
class EpistemicParams:
    """Two-action learning model: the novel action succeeds with rate 0.5 + gain."""

    gain: float = 0.005
    trials: int = 15

    def __post_init__(self):
        if not 0.0 < self.gain <= 0.5:
            raise ValueError(f"gain must be in (0, 0.5], got {self.gain}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")

    @property
    def odds_ratio(self) -> float:
        """(0.5 - gain) / (0.5 + gain), the per-success evidence factor."""
        return (0.5 - self.gain) / (0.5 + self.gain)


@dataclass(frozen=True)
class ExperimentOutcome:
    """One agent's experiment batch for a time step.

    The known action always yields trials/2 (a real number); the novel
    action yields an integer success count.
    """

    action: int
    successes: float


def bcm_update(o_u, o_v, params: BcmParams) -> float:
    """Move o_u toward o_v when the two opinions are within the confidence gate."""
    if abs(o_u - o_v) < params.confidence:
        return o_u + params.convergence * (o_v - o_u)
    return o_u


def epistemic_experiment(o_u, params: EpistemicParams, rng) -> ExperimentOutcome:
    """Run one step's experiments for an agent with belief o_u.

    Belief at or below 0.5 means the agent does not credit the novel
    action and takes the known one, with its deterministic trials/2
    payoff.  Otherwise it tries the novel action trials times.
    """
    if o_u <= 0.5:
        return ExperimentOutcome(ACTION_KNOWN, params.trials / 2.0)
    k = rng.binomial(params.trials, 0.5 + params.gain)
    return ExperimentOutcome(ACTION_NOVEL, float(k))


def epistemic_update(o_u, outcome: ExperimentOutcome, params: EpistemicParams) -> float:
    """Bayesian belief update from a partner's experiment outcome.

    Exact beliefs 0 and 1 are absorbing; interior beliefs are clamped away
    from the boundary before forming the odds ratio.
    """
    if o_u <= 0.0:
        return 0.0
    if o_u >= 1.0:
        return 1.0
    o = min(max(o_u, _BELIEF_FLOOR), 1.0 - _BELIEF_FLOOR)
    exponent = 2.0 * outcome.successes - params.trials
    ratio = params.odds_ratio
    if ratio == 0.0:
        # gain = 0.5 exactly: overwhelming evidence except at the neutral outcome
        if exponent > 0.0:
            factor = 0.0
        elif exponent == 0.0:
            factor = 1.0
        else:
            factor = math.inf
    else:
        factor = ratio ** exponent
    if math.isinf(factor):
        return 0.0
    return 1.0 / (1.0 + ((1.0 - o) / o) * factor)
