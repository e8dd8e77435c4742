import numpy as np
import pytest

from prodsim import stats
from prodsim.netgen import NetgenConfig, assign_opinions, generate, generate_structure


def intra_fraction(graph):
    intra = sum(1 for u, v in graph.arcs()
                if graph.communities[u] == graph.communities[v])
    return intra / graph.arc_count


def shared_opinion_fraction(graph):
    """Fraction of nodes whose opinion exactly matches another member's."""
    total = 0
    for c in range(graph.communities.max() + 1):
        members = np.nonzero(graph.communities == c)[0]
        values, counts = np.unique(graph.opinions[members], return_counts=True)
        big = counts.max()
        if big > 1:
            total += big
    return total / graph.node_count


class TestStructure:
    def test_arc_count_near_target(self):
        # 400 nodes at mean degree 13.75 -> about 5500 arcs
        for seed in range(5):
            g = generate(NetgenConfig(n=400, mu=0.3, eta=0.5, seed=seed))
            assert 0.9 * 5500 <= g.arc_count <= 1.1 * 5500

    def test_all_intra_at_mu_one(self):
        g = generate(NetgenConfig(n=400, mu=1.0, eta=0.5, seed=1))
        assert intra_fraction(g) == 1.0

    def test_mixing_tracks_mu_half(self):
        fractions = [intra_fraction(generate(NetgenConfig(n=400, mu=0.5, eta=0.5, seed=s)))
                     for s in range(100)]
        assert 0.45 <= np.mean(fractions) <= 0.55

    def test_mixing_tracks_mu_sweep(self):
        for mu in (0.05, 0.35, 0.65, 0.95):
            fractions = [intra_fraction(generate(NetgenConfig(n=400, mu=mu, eta=0.5, seed=s)))
                         for s in range(50)]
            assert abs(np.mean(fractions) - mu) <= 0.05

    def test_arcs_come_in_both_directions_initially(self):
        g = generate(NetgenConfig(n=200, mu=0.3, eta=0.5, seed=2))
        arcs = set(g.arcs())
        assert all((v, u) in arcs for u, v in arcs)

    def test_weak_connectivity(self):
        from collections import deque
        for seed in range(5):
            g = generate(NetgenConfig(n=400, mu=0.05, eta=0.5, seed=seed))
            seen = {0}
            queue = deque([0])
            while queue:
                x = queue.popleft()
                for y in g.out_neighbors(x) + g.in_neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
            assert len(seen) == g.node_count

    def test_degree_rank_slope(self):
        # log-log rank vs degree slope should sit near -1/(exponent-1)
        slopes = []
        for seed in range(10):
            g = generate(NetgenConfig(n=400, mu=0.3, eta=0.5, seed=seed))
            degrees = np.sort(g.degree_summary().out_degrees)[::-1]
            ranks = np.arange(1, degrees.size + 1)
            slopes.append(np.polyfit(np.log(ranks), np.log(degrees), 1)[0])
        target = -1.0 / (2.5 - 1.0)
        assert abs(np.mean(slopes) - target) <= 0.4

    def test_structure_api(self):
        cfg = NetgenConfig(n=200, mu=0.4, eta=0.5, seed=3)
        arcs, labels = generate_structure(cfg, stats.rng_stream(3, 0, "s"))
        assert labels.shape == (200,)
        assert all(0 <= u < 200 and 0 <= v < 200 and u != v for u, v in arcs)


class TestOpinions:
    def test_eta_one_gives_uniform_communities(self):
        g = generate(NetgenConfig(n=400, mu=0.3, eta=1.0, seed=4))
        for c in range(g.communities.max() + 1):
            members = np.nonzero(g.communities == c)[0]
            assert np.unique(g.opinions[members]).size == 1

    def test_eta_zero_decouples_opinion_from_community(self):
        # correlation ratio (between-community variance share) stays near its
        # null value of (C-1)/(N-1)
        ratios = []
        for seed in range(100):
            labels = np.repeat(np.arange(10), 40)
            ops = assign_opinions(labels, 0.0, stats.rng_stream(seed, 0, "op"))
            grand = ops.mean()
            between = sum((ops[labels == c].mean() - grand) ** 2 * (labels == c).sum()
                          for c in range(10))
            ratios.append(between / ((ops - grand) ** 2).sum())
        assert np.mean(ratios) < 0.08

    def test_sharing_fraction_tracks_eta(self):
        labels = np.zeros(1000, dtype=np.int64)
        ops = assign_opinions(labels, 0.6, stats.rng_stream(5, 0, "op"))
        values, counts = np.unique(ops, return_counts=True)
        assert 0.57 <= counts.max() / 1000 <= 0.63

    def test_sharing_fraction_over_graphs(self):
        for eta in (0.2, 0.8):
            fractions = [shared_opinion_fraction(generate(NetgenConfig(n=400, mu=0.3, eta=eta, seed=s)))
                         for s in range(50)]
            assert abs(np.mean(fractions) - eta) <= 0.05

    def test_opinions_in_unit_interval(self):
        g = generate(NetgenConfig(n=400, mu=0.3, eta=0.5, seed=6))
        assert np.all(g.opinions >= 0.0) and np.all(g.opinions <= 1.0)


class TestGenerate:
    def test_deterministic_for_seed(self):
        cfg = NetgenConfig(n=300, mu=0.2, eta=0.6, seed=7)
        g1 = generate(cfg)
        g2 = generate(cfg)
        assert g1 == g2

    def test_corner_cases(self):
        # the four extremes of the (homophily, mixing) space
        for eta in (0.2, 0.8):
            for mu in (0.05, 0.95):
                g = generate(NetgenConfig(n=400, mu=mu, eta=eta, seed=8))
                if mu == 0.95:
                    assert intra_fraction(g) >= 0.9
                if eta == 0.8:
                    assert shared_opinion_fraction(g) >= 0.75

    def test_zero_nodes_rejected(self):
        with pytest.raises(ValueError):
            NetgenConfig(n=0, mu=0.5, eta=0.5)

    def test_infeasible_community_bounds_rejected(self):
        with pytest.raises(ValueError):
            NetgenConfig(n=5, mu=0.5, eta=0.5, min_community=10, max_community=8)
