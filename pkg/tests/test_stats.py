import numpy as np
import pytest
import scipy.special

from prodsim import stats


class TestEcdf:
    def test_below_minimum(self):
        assert stats.ecdf_transform([1.0, 2.0, 3.0], 0.5) == 0.0

    def test_median_of_odd_sample(self):
        sample = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert stats.ecdf_transform(sample, 3.0) == 3 / 5

    def test_direct_count(self):
        assert stats.ecdf_transform([1.0, 2.0, 3.0, 4.0], 2.5) == 0.5

    def test_above_maximum(self):
        assert stats.ecdf_transform([1.0, 2.0], 9.0) == 1.0

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            stats.ecdf_transform([], 1.0)


def _brute_force_d(a, b):
    # independent oracle: scan every pooled point
    a, b = sorted(a), sorted(b)
    best = 0.0
    for x in a + b:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


class TestKsTwoSample:
    def test_identical_samples(self):
        res = stats.ks_two_sample([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_disjoint_supports(self):
        res = stats.ks_two_sample([1, 2, 3, 4, 5], [10, 11, 12, 13, 14])
        assert res.statistic == 1.0
        assert res.p_value < 0.05

    def test_interleaved_fixture(self):
        # pooled-point enumeration gives D = 1/3 for this pair
        a = [1.0, 2.0, 3.0, 1.1, 2.1, 3.1]
        b = [1.5, 2.5, 3.5, 1.6, 2.6, 3.6]
        res = stats.ks_two_sample(a, b)
        assert res.statistic == pytest.approx(_brute_force_d(a, b))
        assert res.statistic == pytest.approx(1 / 3)

    def test_statistic_matches_brute_force_on_random_samples(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=rng.integers(5, 30)).tolist()
            b = rng.normal(0.3, size=rng.integers(5, 30)).tolist()
            assert stats.ks_two_sample(a, b).statistic == pytest.approx(_brute_force_d(a, b))

    def test_p_value_matches_kolmogorov_distribution(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=40)
        b = rng.normal(0.5, size=60)
        res = stats.ks_two_sample(a, b)
        n_e = 40 * 60 / 100
        lam = (np.sqrt(n_e) + 0.12 + 0.11 / np.sqrt(n_e)) * res.statistic
        assert res.p_value == pytest.approx(float(scipy.special.kolmogorov(lam)), abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(9)
        a = rng.random(17)
        b = rng.random(23)
        r1 = stats.ks_two_sample(a, b)
        r2 = stats.ks_two_sample(b, a)
        assert r1.statistic == r2.statistic
        assert r1.p_value == r2.p_value

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(10)
        a = rng.random(30)
        b = rng.random(25) ** 2
        base = stats.ks_two_sample(a, b).statistic
        trans = stats.ks_two_sample(np.exp(a), np.exp(b)).statistic
        assert base == pytest.approx(trans)

    def test_p_decreases_with_d(self):
        # same sizes, increasing separation
        ps = []
        for shift in (0.0, 0.5, 1.0, 2.0):
            a = np.linspace(0, 1, 30)
            b = np.linspace(0, 1, 30) + shift
            ps.append(stats.ks_two_sample(a, b).p_value)
        assert all(ps[i] >= ps[i + 1] for i in range(len(ps) - 1))

    def test_undersized_samples_rejected(self):
        with pytest.raises(ValueError):
            stats.ks_two_sample([1, 2, 3], [1, 2, 3, 4, 5])


class TestRngStreams:
    def test_same_triple_same_draws(self):
        a = stats.rng_stream(42, 3, "gen").random(1000)
        b = stats.rng_stream(42, 3, "gen").random(1000)
        assert np.array_equal(a, b)

    def test_replica_index_changes_stream(self):
        a = stats.rng_stream(42, 3, "gen").random(1000)
        b = stats.rng_stream(42, 4, "gen").random(1000)
        assert not np.array_equal(a, b)

    def test_role_tag_changes_stream(self):
        a = stats.rng_stream(42, 3, "gen").random(1000)
        b = stats.rng_stream(42, 3, "null").random(1000)
        assert not np.array_equal(a, b)

    def test_seed_collision_spot_check(self):
        seeds = {stats.derive_seed(5, k, tag)
                 for k in range(200) for tag in ("gen", "null", "rec")}
        assert len(seeds) == 600


def test_significance_ladder():
    assert stats.significance_label(0.2) == ""
    assert stats.significance_label(0.04) == "*"
    assert stats.significance_label(0.009) == "**"
    assert stats.significance_label(0.0009) == "***"
