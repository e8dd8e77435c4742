"""Paired-replica evaluation over a grid of network regimes.

For every (homophily, mixing) cell, K networks are generated; each is
evolved twice from the same starting point, once without any recommender
(the null arm) and once with the recommender under test.  The per-cell
effect is the mean paired difference of a metric between the two arms,
with a KS test on the two difference distributions for significance.

Replica work is embarrassingly parallel; every replica derives all its
seeds from (master seed, replica index, role), so results are
bit-identical for any worker count.
"""
from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine, netgen, stats
from .metrics import RwcConfig, nci, rwc
from .odm import BcmParams
from .recommenders import RecommenderSpec

METRIC_NAMES = ("nci", "rwc")

REPLICA_CSV_HEADER = "odm,recommender,eta,mu,metric,replica,seed,m_initial,m_null,m_rec"
AGGREGATE_CSV_HEADER = "odm,recommender,eta,mu,metric,delta,ks_stat,p_value,significance"


class CellError(RuntimeError):
    """A replica failed; the message names the cell and generation seed."""


@dataclass(frozen=True)
class GridConfig:
    netgen: netgen.NetgenConfig
    simulation: engine.SimulationConfig
    recommender: RecommenderSpec | None
    eta_values: tuple = (0.2, 0.4, 0.6, 0.8)
    mu_values: tuple = (0.05, 0.35, 0.65, 0.95)
    replicas: int = 50
    metrics: tuple = METRIC_NAMES
    master_seed: int = 0
    r_max_ratio: float = 0.4
    workers: int = 1
    rwc: RwcConfig = field(default_factory=RwcConfig)

    def __post_init__(self):
        if self.replicas < 5:
            raise ValueError("need at least 5 replicas for the KS test")
        for v in tuple(self.eta_values) + tuple(self.mu_values):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"grid values must be in [0, 1], got {v}")
        bad = [m for m in self.metrics if m not in METRIC_NAMES]
        if bad:
            raise ValueError(f"unknown metrics {bad}; choose from {METRIC_NAMES}")
        if self.r_max_ratio < 0:
            raise ValueError("r_max_ratio must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ReplicaRecord:
    replica: int
    gen_seed: int
    m_initial: dict
    m_null: dict
    m_rec: dict


@dataclass(frozen=True)
class CellResult:
    eta: float
    mu: float
    records: tuple
    delta: dict
    ks: dict

    def null_differences(self, metric):
        return np.array([r.m_null[metric] - r.m_initial[metric] for r in self.records])

    def rec_differences(self, metric):
        return np.array([r.m_rec[metric] - r.m_initial[metric] for r in self.records])


@dataclass(frozen=True)
class GridReport:
    odm_name: str
    recommender_name: str
    replicas: int
    master_seed: int
    cells: tuple


def odm_name(params) -> str:
    return "bcm" if isinstance(params, BcmParams) else "epistemic"


def recommender_name(spec) -> str:
    return "none" if spec is None else spec.kind


def _measure(graph, metric_names, rwc_cfg, rng):
    out = {}
    for name in metric_names:
        if name == "nci":
            out[name] = nci(graph)
        else:
            out[name] = rwc(graph, cfg=rwc_cfg, rng=rng)
    return out


def _base_task(args):
    """Generate one replica's network and run its null arm."""
    cfg, eta, mu, k = args
    gen_seed = stats.derive_seed(cfg.master_seed, k, "gen")
    try:
        net_cfg = replace(cfg.netgen, eta=eta, mu=mu, seed=gen_seed)
        graph = netgen.generate(net_cfg)
        m_initial = _measure(graph, cfg.metrics, cfg.rwc,
                             stats.rng_stream(cfg.master_seed, k, "rwc-init"))
        null_cfg = replace(cfg.simulation,
                           seed=stats.derive_seed(cfg.master_seed, k, "null"),
                           max_recommendations=0, recommender=None, intervention=None)
        null_graph, _ = engine.run(graph, null_cfg)
        m_null = _measure(null_graph, cfg.metrics, cfg.rwc,
                          stats.rng_stream(cfg.master_seed, k, "rwc-null"))
        return ("ok", k, gen_seed, m_initial, m_null)
    except Exception as exc:  # propagated with context by the caller
        return ("error", k, gen_seed, f"{type(exc).__name__}: {exc}", None)


def _rec_task(args):
    """Re-derive one replica's network and run its recommender arm."""
    cfg, eta, mu, k = args
    gen_seed = stats.derive_seed(cfg.master_seed, k, "gen")
    try:
        net_cfg = replace(cfg.netgen, eta=eta, mu=mu, seed=gen_seed)
        graph = netgen.generate(net_cfg)
        r_max = int(round(cfg.r_max_ratio * graph.arc_count))
        rec_cfg = replace(cfg.simulation,
                          seed=stats.derive_seed(cfg.master_seed, k, "rec"),
                          max_recommendations=r_max, recommender=cfg.recommender)
        rec_graph, _ = engine.run(graph, rec_cfg)
        m_rec = _measure(rec_graph, cfg.metrics, cfg.rwc,
                         stats.rng_stream(cfg.master_seed, k, "rwc-rec"))
        return ("ok", k, gen_seed, m_rec, None)
    except Exception as exc:
        return ("error", k, gen_seed, f"{type(exc).__name__}: {exc}", None)


def _run_tasks(task, arg_list, pool):
    if pool is None:
        return [task(a) for a in arg_list]
    return pool.map(task, arg_list)


def _check(results, eta, mu):
    for res in results:
        if res[0] == "error":
            _, k, gen_seed, msg, _ = res
            raise CellError(
                f"cell (eta={eta}, mu={mu}) replica {k} (gen seed {gen_seed}) failed: {msg}")
    return results


def run_cell(cfg: GridConfig, eta: float, mu: float,
             pool=None, base_cache: dict | None = None) -> CellResult:
    """All replicas for one grid cell; returns paired metrics and the KS verdict.

    base_cache maps (eta, mu) to precomputed null-arm results so multiple
    recommender variants under the same master seed can share their null
    arms (the null arm never consults the recommender).
    """
    args = [(cfg, eta, mu, k) for k in range(cfg.replicas)]
    key = (eta, mu)
    if base_cache is not None and key in base_cache:
        bases = base_cache[key]
    else:
        bases = _check(_run_tasks(_base_task, args, pool), eta, mu)
        if base_cache is not None:
            base_cache[key] = bases
    if cfg.recommender is None or cfg.r_max_ratio == 0:
        # without a recommender the second arm is another null run with the
        # same config and seeds, so its metrics are the null metrics
        recs = [("ok", res[1], res[2], dict(res[4]), None) for res in bases]
    else:
        recs = _check(_run_tasks(_rec_task, args, pool), eta, mu)

    records = []
    for base, rec in zip(sorted(bases, key=lambda r: r[1]), sorted(recs, key=lambda r: r[1])):
        _, k, gen_seed, m_initial, m_null = base
        _, k2, _, m_rec, _ = rec
        assert k == k2
        records.append(ReplicaRecord(k, gen_seed, m_initial, m_null, m_rec))

    delta = {}
    ks = {}
    for name in cfg.metrics:
        null_diff = np.array([r.m_null[name] - r.m_initial[name] for r in records])
        rec_diff = np.array([r.m_rec[name] - r.m_initial[name] for r in records])
        delta[name] = float(np.mean(rec_diff - null_diff))
        ks[name] = stats.ks_two_sample(null_diff, rec_diff)
    return CellResult(eta=eta, mu=mu, records=tuple(records), delta=delta, ks=ks)


def run_grid(cfg: GridConfig, base_cache: dict | None = None) -> GridReport:
    """CellResult for every (eta, mu) pair, deterministic for any worker count."""
    pool = None
    try:
        if cfg.workers > 1:
            pool = multiprocessing.get_context("fork").Pool(cfg.workers)
        cells = []
        for mu in cfg.mu_values:
            for eta in cfg.eta_values:
                cells.append(run_cell(cfg, eta, mu, pool=pool, base_cache=base_cache))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return GridReport(
        odm_name=odm_name(cfg.simulation.odm),
        recommender_name=recommender_name(cfg.recommender),
        replicas=cfg.replicas,
        master_seed=cfg.master_seed,
        cells=tuple(cells))


# ---------------------------------------------------------------------------
# export / import

def _fmt(x) -> str:
    return repr(float(x))


def export_replicas_csv(report: GridReport, path) -> None:
    """Long-form per-replica table, one row per (cell, replica, metric)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REPLICA_CSV_HEADER + "\n")
        for cell in report.cells:
            for metric in sorted(cell.delta):
                for r in cell.records:
                    fh.write(",".join([
                        report.odm_name, report.recommender_name,
                        _fmt(cell.eta), _fmt(cell.mu), metric,
                        str(r.replica), str(r.gen_seed),
                        _fmt(r.m_initial[metric]), _fmt(r.m_null[metric]),
                        _fmt(r.m_rec[metric]),
                    ]) + "\n")


def export_aggregate_csv(report: GridReport, path) -> None:
    """Per-cell aggregates: delta, KS statistic, p-value, significance ladder."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(AGGREGATE_CSV_HEADER + "\n")
        for cell in report.cells:
            for metric in sorted(cell.delta):
                ks = cell.ks[metric]
                fh.write(",".join([
                    report.odm_name, report.recommender_name,
                    _fmt(cell.eta), _fmt(cell.mu), metric,
                    _fmt(cell.delta[metric]), _fmt(ks.statistic), _fmt(ks.p_value),
                    stats.significance_label(ks.p_value),
                ]) + "\n")


def export_json(report: GridReport, path) -> None:
    """Nested JSON mirror of the two CSV tables."""
    doc = {
        "odm": report.odm_name,
        "recommender": report.recommender_name,
        "replicas": report.replicas,
        "master_seed": report.master_seed,
        "cells": [],
    }
    for cell in report.cells:
        cell_doc = {"eta": cell.eta, "mu": cell.mu, "metrics": {}}
        for metric in sorted(cell.delta):
            ks = cell.ks[metric]
            cell_doc["metrics"][metric] = {
                "delta": cell.delta[metric],
                "ks_stat": ks.statistic,
                "p_value": ks.p_value,
                "significance": stats.significance_label(ks.p_value),
                "replicas": [
                    {"replica": r.replica, "seed": r.gen_seed,
                     "m_initial": r.m_initial[metric],
                     "m_null": r.m_null[metric],
                     "m_rec": r.m_rec[metric]}
                    for r in cell.records
                ],
            }
        doc["cells"].append(cell_doc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_replicas_csv(path):
    """Rows of the long-form table as dicts with typed fields."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != REPLICA_CSV_HEADER:
            raise ValueError(f"unexpected replica CSV header: {header!r}")
        for line in fh:
            (odm, rec, eta, mu, metric, replica, seed,
             m_initial, m_null, m_rec) = line.rstrip("\n").split(",")
            rows.append({
                "odm": odm, "recommender": rec,
                "eta": float(eta), "mu": float(mu), "metric": metric,
                "replica": int(replica), "seed": int(seed),
                "m_initial": float(m_initial), "m_null": float(m_null),
                "m_rec": float(m_rec),
            })
    return rows


def load_aggregate_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != AGGREGATE_CSV_HEADER:
            raise ValueError(f"unexpected aggregate CSV header: {header!r}")
        for line in fh:
            odm, rec, eta, mu, metric, delta, ks_stat, p_value, sig = line.rstrip("\n").split(",")
            rows.append({
                "odm": odm, "recommender": rec,
                "eta": float(eta), "mu": float(mu), "metric": metric,
                "delta": float(delta), "ks_stat": float(ks_stat),
                "p_value": float(p_value), "significance": sig,
            })
    return rows


def aggregate_from_replicas(rows):
    """Recompute per-cell aggregates from long-form rows (round-trip checks)."""
    cells = {}
    for row in rows:
        cells.setdefault((row["eta"], row["mu"], row["metric"]), []).append(row)
    out = {}
    for key, group in cells.items():
        null_diff = np.array([r["m_null"] - r["m_initial"] for r in group])
        rec_diff = np.array([r["m_rec"] - r["m_initial"] for r in group])
        ks = stats.ks_two_sample(null_diff, rec_diff)
        out[key] = {
            "delta": float(np.mean(rec_diff - null_diff)),
            "ks_stat": ks.statistic,
            "p_value": ks.p_value,
            "significance": stats.significance_label(ks.p_value),
        }
    return out
