"""Intervention policies: replacing recommendations to soften echo chambers.

With probability xi, an accepted recommendation is swapped for a
different candidate picked by the active strategy (serendipity, opinion
diversity, or popular accounts).  The sweep shows the recommender's
echo-chamber push shrinking, and reversing under the opinion-diversity
strategy, as xi grows.
"""
from prodsim import cli

config = cli._defaults()
config["master_seed"] = 13
config["netgen"].update(n=200, avg_degree=10.0)
config["simulation"].update(odm="epistemic", max_steps=60)
config["recommender"].update(kind="oba")
config["grid"].update(replicas=10, metrics=["nci"])
config["intervene"].update(eta=0.7, mu=0.2)

rows = cli.intervene_sweep(config, xi_values=(0.0, 0.5, 1.0))

print(f"{'strategy':>20} {'xi':>5} {'delta nci':>10}")
for row in rows:
    print(f"{row['strategy']:>20} {row['xi']:>5} {row['delta']:>+10.4f}")
