"""A miniature recommender fingerprint: paired evaluation on one grid cell.

Every replica evolves the same starting network twice, once with the
opinion dynamics alone and once with a recommender feeding new followees
(each accepted one costs an old one).  The reported delta is the mean
paired difference of the echo-chamber metric, with a KS significance
test across the replica distributions.

Desk-size parameters keep this to about a minute; the full protocol
behind the paper-scale presets uses 400-node graphs and hundreds of
replicas (see README).
"""
from prodsim import (EpistemicParams, GridConfig, NetgenConfig, RecommenderSpec,
                     SimulationConfig, run_cell, significance_label)

BASE = dict(
    netgen=NetgenConfig(n=200, mu=0.2, eta=0.7, avg_degree=10.0),
    simulation=SimulationConfig(odm=EpistemicParams(), max_steps=60,
                                interactions_per_step=2),
    eta_values=(0.7,), mu_values=(0.2,),
    replicas=12, metrics=("nci",), master_seed=5,
)

print(f"{'recommender':>12} {'delta nci':>10} {'ks p':>8}")
shared_nulls = {}
for kind in ("dji", "ppr", "salsa", "oba"):
    cfg = GridConfig(recommender=RecommenderSpec(kind=kind), **BASE)
    cell = run_cell(cfg, 0.7, 0.2, base_cache=shared_nulls)
    ks = cell.ks["nci"]
    print(f"{kind:>12} {cell.delta['nci']:>+10.4f} {ks.p_value:>8.4f} "
          f"{significance_label(ks.p_value)}")
