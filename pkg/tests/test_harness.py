import json

import numpy as np
import pytest

from prodsim import harness
from prodsim.engine import SimulationConfig
from prodsim.netgen import NetgenConfig
from prodsim.odm import EpistemicParams
from prodsim.recommenders import RecommenderSpec


def tiny_grid_config(workers=1, recommender=RecommenderSpec(kind="dji"), replicas=6):
    # epistemic dynamics keep these configs fast: 10 steps on 80-node graphs
    return harness.GridConfig(
        netgen=NetgenConfig(n=80, mu=0.3, eta=0.6, avg_degree=8.0, min_community=8,
                            max_community=30),
        simulation=SimulationConfig(odm=EpistemicParams(), max_steps=10,
                                    interactions_per_step=2),
        recommender=recommender,
        eta_values=(0.3, 0.7),
        mu_values=(0.2,),
        replicas=replicas,
        metrics=("nci", "rwc"),
        master_seed=11,
        workers=workers,
    )


class TestRunCell:
    def test_null_recommender_gives_exact_zero_delta(self):
        cfg = tiny_grid_config(recommender=None)
        cell = harness.run_cell(cfg, 0.3, 0.2)
        for metric in ("nci", "rwc"):
            assert cell.delta[metric] == 0.0
            assert cell.ks[metric].statistic == 0.0
            assert cell.ks[metric].p_value == 1.0

    def test_delta_equals_mean_paired_difference(self):
        cfg = tiny_grid_config()
        cell = harness.run_cell(cfg, 0.7, 0.2)
        for metric in ("nci", "rwc"):
            diffs = [r.m_rec[metric] - r.m_null[metric] for r in cell.records]
            assert cell.delta[metric] == pytest.approx(np.mean(diffs), abs=1e-12)

    def test_deterministic(self):
        cfg = tiny_grid_config()
        a = harness.run_cell(cfg, 0.3, 0.2)
        b = harness.run_cell(cfg, 0.3, 0.2)
        assert a == b

    def test_base_cache_shared_across_variants(self):
        cache = {}
        cfg_a = tiny_grid_config()
        cell_a = harness.run_cell(cfg_a, 0.3, 0.2, base_cache=cache)
        cfg_b = tiny_grid_config(recommender=RecommenderSpec(kind="oba"))
        cell_b = harness.run_cell(cfg_b, 0.3, 0.2, base_cache=cache)
        for ra, rb in zip(cell_a.records, cell_b.records):
            assert ra.m_null == rb.m_null
            assert ra.m_initial == rb.m_initial


class TestRunGrid:
    def test_single_cell_grid_matches_run_cell(self):
        cfg = tiny_grid_config()
        report = harness.run_grid(cfg)
        direct = harness.run_cell(cfg, 0.3, 0.2)
        assert report.cells[0] == direct

    def test_worker_count_does_not_change_results(self):
        r1 = harness.run_grid(tiny_grid_config(workers=1))
        r2 = harness.run_grid(tiny_grid_config(workers=2))
        assert r1 == r2


class TestExport:
    @pytest.fixture(scope="class")
    def report(self):
        return harness.run_grid(tiny_grid_config())

    def test_replica_csv_round_trip(self, report, tmp_path):
        path = tmp_path / "replicas.csv"
        harness.export_replicas_csv(report, path)
        rows = harness.load_replicas_csv(path)
        assert len(rows) == 2 * 6 * 2  # cells * replicas * metrics
        recomputed = harness.aggregate_from_replicas(rows)
        for cell in report.cells:
            for metric in ("nci", "rwc"):
                agg = recomputed[(cell.eta, cell.mu, metric)]
                assert agg["delta"] == pytest.approx(cell.delta[metric], abs=1e-12)
                assert agg["ks_stat"] == pytest.approx(cell.ks[metric].statistic, abs=1e-12)

    def test_aggregate_csv_round_trip(self, report, tmp_path):
        path = tmp_path / "aggregate.csv"
        harness.export_aggregate_csv(report, path)
        rows = harness.load_aggregate_csv(path)
        assert len(rows) == 2 * 2
        by_key = {(r["eta"], r["mu"], r["metric"]): r for r in rows}
        for cell in report.cells:
            for metric in ("nci", "rwc"):
                row = by_key[(cell.eta, cell.mu, metric)]
                assert row["delta"] == cell.delta[metric]
                assert row["p_value"] == cell.ks[metric].p_value
                assert row["significance"] in ("", "*", "**", "***")

    def test_json_mirrors_aggregates(self, report, tmp_path):
        path = tmp_path / "report.json"
        harness.export_json(report, path)
        doc = json.loads(path.read_text())
        assert doc["odm"] == "epistemic"
        assert len(doc["cells"]) == 2
        cell_doc = doc["cells"][0]
        cell = report.cells[0]
        for metric in ("nci", "rwc"):
            assert cell_doc["metrics"][metric]["delta"] == cell.delta[metric]
            assert len(cell_doc["metrics"][metric]["replicas"]) == 6

    def test_headers_are_stable(self, report, tmp_path):
        harness.export_replicas_csv(report, tmp_path / "r.csv")
        harness.export_aggregate_csv(report, tmp_path / "a.csv")
        assert (tmp_path / "r.csv").read_text().splitlines()[0] == \
            "odm,recommender,eta,mu,metric,replica,seed,m_initial,m_null,m_rec"
        assert (tmp_path / "a.csv").read_text().splitlines()[0] == \
            "odm,recommender,eta,mu,metric,delta,ks_stat,p_value,significance"


def test_replica_failure_names_cell_and_seed():
    cfg = tiny_grid_config(recommender=RecommenderSpec(kind="ppr", ppr_tolerance=1e-30))
    with pytest.raises(harness.CellError, match=r"eta=0.3.*replica.*seed"):
        harness.run_cell(cfg, 0.3, 0.2)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        tiny_grid_config(replicas=3)
