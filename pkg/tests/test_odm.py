import numpy as np
import pytest

from prodsim import stats
from prodsim.odm import (ACTION_KNOWN, ACTION_NOVEL, BcmParams, EpistemicParams,
                         ExperimentOutcome, bcm_update, epistemic_experiment,
                         epistemic_update)


class TestBcm:
    def test_identity_at_equal_opinions(self):
        assert bcm_update(0.5, 0.5, BcmParams(0.2, 0.2)) == 0.5

    def test_arithmetic_fixture(self):
        # 0.2 + 0.2 * (0.3 - 0.2) = 0.22
        assert bcm_update(0.2, 0.3, BcmParams(confidence=0.2, convergence=0.2)) == pytest.approx(0.22, abs=1e-12)

    def test_gate_closed(self):
        assert bcm_update(0.1, 0.9, BcmParams(confidence=0.2, convergence=0.2)) == 0.1

    def test_contraction_when_gate_open(self):
        rng = np.random.default_rng(0)
        params = BcmParams(confidence=1.0, convergence=0.3)
        for _ in range(200):
            o_u, o_v = rng.random(2)
            new = bcm_update(o_u, o_v, params)
            assert abs(new - o_v) == pytest.approx((1 - 0.3) * abs(o_u - o_v))
            assert min(o_u, o_v) <= new <= max(o_u, o_v)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            BcmParams(confidence=1.5)
        with pytest.raises(ValueError):
            BcmParams(convergence=0.6)


class TestExperiment:
    def test_known_action_fixed_outcome(self):
        rng = stats.rng_stream(0, 0, "exp")
        out = epistemic_experiment(0.3, EpistemicParams(gain=0.005, trials=15), rng)
        assert out.action == ACTION_KNOWN
        assert out.successes == 7.5

    def test_tie_takes_known_action(self):
        rng = stats.rng_stream(0, 0, "exp")
        assert epistemic_experiment(0.5, EpistemicParams(), rng).action == ACTION_KNOWN

    def test_certain_success_at_max_gain(self):
        rng = stats.rng_stream(0, 0, "exp")
        out = epistemic_experiment(0.8, EpistemicParams(gain=0.5, trials=10), rng)
        assert out.action == ACTION_NOVEL
        assert out.successes == 10

    def test_monte_carlo_mean(self):
        # E[k] = 15 * 0.505 = 7.575
        rng = stats.rng_stream(1, 0, "exp")
        params = EpistemicParams(gain=0.005, trials=15)
        draws = [epistemic_experiment(0.8, params, rng).successes for _ in range(100_000)]
        assert 7.50 <= np.mean(draws) <= 7.65


class TestBayesUpdate:
    def test_neutral_outcome_is_identity(self):
        params = EpistemicParams(gain=0.005, trials=15)
        outcome = ExperimentOutcome(ACTION_KNOWN, 7.5)
        for o in (0.1, 0.25, 0.5, 0.75, 0.99):
            assert epistemic_update(o, outcome, params) == pytest.approx(o)

    def test_arithmetic_fixture(self):
        # 1 / (1 + 1 * (1/3)^2) = 0.9
        params = EpistemicParams(gain=0.25, trials=2)
        outcome = ExperimentOutcome(ACTION_NOVEL, 2)
        assert epistemic_update(0.5, outcome, params) == pytest.approx(0.9)

    def test_absorbing_boundaries(self):
        params = EpistemicParams(gain=0.25, trials=2)
        outcome = ExperimentOutcome(ACTION_NOVEL, 0)
        assert epistemic_update(1.0, outcome, params) == 1.0
        assert epistemic_update(0.0, outcome, params) == 0.0

    def test_monotone_in_successes(self):
        params = EpistemicParams(gain=0.1, trials=10)
        values = [epistemic_update(0.4, ExperimentOutcome(ACTION_NOVEL, k), params)
                  for k in range(11)]
        assert all(values[i] <= values[i + 1] for i in range(10))

    def test_result_stays_in_unit_interval(self):
        rng = np.random.default_rng(5)
        params = EpistemicParams(gain=0.49, trials=7)
        for _ in range(300):
            o = rng.random()
            k = int(rng.integers(0, 8))
            assert 0.0 <= epistemic_update(o, ExperimentOutcome(ACTION_NOVEL, k), params) <= 1.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            EpistemicParams(gain=0.0)
        with pytest.raises(ValueError):
            EpistemicParams(gain=0.6)
        with pytest.raises(ValueError):
            EpistemicParams(trials=0)
