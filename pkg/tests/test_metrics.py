import numpy as np
import pytest

from prodsim import stats
from prodsim.graph import OpinionGraph
from prodsim.metrics import (DegenerateMetricWarning, RwcConfig, UndefinedMetricError,
                             nci, pearson, rwc)
from prodsim.netgen import NetgenConfig, generate


def mutual_clique(g, nodes):
    for u in nodes:
        for v in nodes:
            if u != v:
                g.add_arc(u, v)


class TestPearson:
    def test_perfect_correlation(self):
        assert pearson([0.1, 0.5, 0.9], [0.1, 0.5, 0.9]) == pytest.approx(1.0)

    def test_perfect_anticorrelation(self):
        x = [0.1, 0.5, 0.9]
        y = [1 - v for v in x]
        assert pearson(x, y) == pytest.approx(-1.0)

    def test_constant_input_degenerates_to_zero(self):
        with pytest.warns(DegenerateMetricWarning):
            assert pearson([0.1, 0.5, 0.9], [0.3, 0.3, 0.3]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            pearson([1], [2])

    def test_matches_numpy(self):
        rng = np.random.default_rng(1)
        x, y = rng.random(50), rng.random(50)
        assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1])


class TestNci:
    def test_two_pure_cliques(self):
        g = OpinionGraph(8, opinions=[0.0] * 4 + [1.0] * 4)
        mutual_clique(g, range(4))
        mutual_clique(g, range(4, 8))
        assert nci(g) == pytest.approx(1.0)

    def test_complete_bipartite_anticorrelation(self):
        g = OpinionGraph(8, opinions=[0.0] * 4 + [1.0] * 4)
        for u in range(4):
            for v in range(4, 8):
                g.add_arc(u, v)
                g.add_arc(v, u)
        assert nci(g) == pytest.approx(-1.0)

    def test_near_zero_on_unstructured_opinions(self):
        values = []
        for seed in range(50):
            g = generate(NetgenConfig(n=400, mu=0.3, eta=0.0, seed=seed))
            values.append(nci(g))
        assert abs(np.mean(values)) < 0.15

    def test_nodes_without_followees_excluded(self):
        g = OpinionGraph(5, opinions=[0.0, 0.0, 1.0, 1.0, 0.5])
        mutual_clique(g, (0, 1))
        mutual_clique(g, (2, 3))
        # node 4 follows nobody; correlation over the others is perfect
        assert nci(g) == pytest.approx(1.0)

    def test_degenerate_when_too_few_nodes(self):
        g = OpinionGraph(3, opinions=[0.2, 0.8, 0.5])
        g.add_arc(0, 1)
        with pytest.warns(DegenerateMetricWarning):
            assert nci(g) == 0.0

    def test_invariant_under_opinion_flip(self):
        g = generate(NetgenConfig(n=400, mu=0.3, eta=0.6, seed=3))
        flipped = nci(g, opinions=1.0 - g.opinions)
        assert flipped == pytest.approx(nci(g), abs=1e-12)

    def test_direction_switch(self):
        g = OpinionGraph(4, opinions=[0.0, 0.0, 1.0, 1.0])
        g.add_arc(0, 1)
        g.add_arc(2, 3)
        g.add_arc(1, 0)
        g.add_arc(3, 2)
        assert nci(g, direction="in") == pytest.approx(nci(g, direction="out"))


class TestRwc:
    def test_disconnected_pure_components(self):
        g = OpinionGraph(10, opinions=[0.1] * 5 + [0.9] * 5)
        mutual_clique(g, range(5))
        mutual_clique(g, range(5, 10))
        value = rwc(g, rng=stats.rng_stream(0, 0, "rwc"))
        assert value == 1.0

    def test_symmetric_mixing_near_zero(self):
        rng = stats.rng_stream(1, 0, "coin")
        g = OpinionGraph(40, opinions=(rng.random(40) < 0.5) * 0.9 + 0.05)
        mutual_clique(g, range(40))
        value = rwc(g, rng=stats.rng_stream(2, 0, "rwc"))
        assert abs(value) <= 0.1

    def test_single_camp_rejected(self):
        g = OpinionGraph(6, opinions=[0.1] * 6)
        mutual_clique(g, range(6))
        with pytest.raises(UndefinedMetricError):
            rwc(g, rng=stats.rng_stream(0, 0, "rwc"))

    def test_reproducible_for_seed(self):
        g = generate(NetgenConfig(n=200, mu=0.3, eta=0.6, seed=4))
        a = rwc(g, rng=stats.rng_stream(9, 0, "rwc"))
        b = rwc(g, rng=stats.rng_stream(9, 0, "rwc"))
        assert a == b

    def test_threshold_nodes_never_start_walks(self):
        # a node at exactly the threshold belongs to neither camp; the walk
        # tallies must come only from the two camps
        g = OpinionGraph(7, opinions=[0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 0.5])
        mutual_clique(g, range(3))
        mutual_clique(g, range(3, 6))
        g.add_arc(6, 0)
        g.add_arc(0, 6)
        value = rwc(g, rng=stats.rng_stream(5, 0, "rwc"))
        assert -1.0 <= value <= 1.0

    def test_bounded_on_generated_graphs(self):
        for seed in range(3):
            g = generate(NetgenConfig(n=200, mu=0.2, eta=0.5, seed=seed))
            value = rwc(g, cfg=RwcConfig(walks_per_side=2000),
                        rng=stats.rng_stream(seed, 0, "rwc"))
            assert -1.0 <= value <= 1.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RwcConfig(walks_per_side=0)
        with pytest.raises(ValueError):
            RwcConfig(degree_percentile=1.5)
