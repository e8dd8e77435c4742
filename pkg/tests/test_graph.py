import numpy as np
import pytest

from prodsim.graph import GraphFormatError, OpinionGraph, load, save


def small_graph():
    g = OpinionGraph(3, opinions=[0.1, 0.5, 0.9], communities=[0, 0, 1])
    g.add_arc(0, 1)
    g.add_arc(0, 2)
    g.add_arc(2, 0)
    return g


class TestMutation:
    def test_add_arc(self):
        g = OpinionGraph(2)
        assert g.add_arc(0, 1) is True
        assert sorted(g.arcs()) == [(0, 1)]

    def test_add_twice_is_idempotent(self):
        g = OpinionGraph(2)
        g.add_arc(0, 1)
        assert g.add_arc(0, 1) is False
        assert g.arc_count == 1

    def test_self_loop_rejected(self):
        g = OpinionGraph(2)
        with pytest.raises(ValueError):
            g.add_arc(0, 0)

    def test_out_of_range_rejected(self):
        g = OpinionGraph(2)
        with pytest.raises(ValueError):
            g.add_arc(0, 2)
        with pytest.raises(ValueError):
            g.remove_arc(5, 0)

    def test_remove_arc(self):
        g = OpinionGraph(2)
        g.add_arc(0, 1)
        assert g.remove_arc(0, 1) is True
        assert g.arc_count == 0

    def test_remove_absent_arc(self):
        g = OpinionGraph(2)
        assert g.remove_arc(0, 1) is False

    def test_add_remove_round_trip(self):
        g = small_graph()
        before = sorted(g.arcs())
        g.add_arc(1, 2)
        g.remove_arc(1, 2)
        assert sorted(g.arcs()) == before


class TestNeighbors:
    def test_out_neighbors_sorted(self):
        g = small_graph()
        assert g.out_neighbors(0) == [1, 2]

    def test_in_neighbors(self):
        g = small_graph()
        assert g.in_neighbors(0) == [2]

    def test_isolated_node(self):
        g = OpinionGraph(3)
        assert g.out_neighbors(1) == []
        assert g.in_neighbors(1) == []

    def test_forward_reverse_consistency(self):
        rng = np.random.default_rng(3)
        g = OpinionGraph(20)
        for _ in range(300):
            u, v = rng.integers(20, size=2)
            if u == v:
                continue
            if rng.random() < 0.7:
                g.add_arc(int(u), int(v))
            else:
                g.remove_arc(int(u), int(v))
        for u in range(20):
            for v in g.out_neighbors(u):
                assert u in g.in_neighbors(v)
        summary = g.degree_summary()
        assert summary.in_degrees.sum() == g.arc_count
        assert summary.out_degrees.sum() == g.arc_count


class TestValidation:
    def test_opinion_out_of_range(self):
        with pytest.raises(ValueError):
            OpinionGraph(2, opinions=[0.5, 1.5])

    def test_negative_community(self):
        with pytest.raises(ValueError):
            OpinionGraph(2, communities=[0, -1])

    def test_zero_nodes(self):
        with pytest.raises(ValueError):
            OpinionGraph(0)


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        g = small_graph()
        path = tmp_path / "g.txt"
        save(g, path)
        g2 = load(path)
        assert g2 == g
        assert np.array_equal(g2.opinions, g.opinions)

    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        g = OpinionGraph(10, opinions=rng.random(10), communities=rng.integers(0, 3, 10))
        for _ in range(30):
            u, v = rng.integers(10, size=2)
            if u != v:
                g.add_arc(int(u), int(v))
        path = tmp_path / "g.txt"
        save(g, path)
        g2 = load(path)
        assert np.array_equal(g2.opinions, g.opinions)
        assert sorted(g2.arcs()) == sorted(g.arcs())

    def test_opinion_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("nodes 2\nnode 0 0.5 0\nnode 1 1.5 0\n")
        with pytest.raises(GraphFormatError) as err:
            load(path)
        assert err.value.line_number == 3

    def test_arc_to_unknown_node_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("nodes 2\nnode 0 0.5 0\nnode 1 0.5 0\narc 0 2\n")
        with pytest.raises(GraphFormatError) as err:
            load(path)
        assert err.value.line_number == 4

    def test_duplicate_arc_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("nodes 2\nnode 0 0.5 0\nnode 1 0.5 0\narc 0 1\narc 0 1\n")
        with pytest.raises(GraphFormatError):
            load(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("vertices 2\n")
        with pytest.raises(GraphFormatError) as err:
            load(path)
        assert err.value.line_number == 1

    def test_missing_node_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("nodes 2\nnode 0 0.5 0\n")
        with pytest.raises(GraphFormatError):
            load(path)


def test_degree_percentile():
    g = small_graph()
    summary = g.degree_summary()
    # total degrees: node0 = 2+1, node1 = 0+1, node2 = 1+1
    assert summary.percentile(1.0) == 3.0
    assert summary.percentile(0.0) == 1.0
