"""The two opinion-dynamics rules, side by side, without any recommender.

Bounded confidence pulls connected nodes together whenever they already
agree enough, so opinions condense into a few internal clusters.  The
epistemic rule is a Bayesian tug toward the action that actually pays
off better, so beliefs drift toward 1 as evidence accumulates.
"""
import numpy as np

from prodsim import (BcmParams, EpistemicParams, NetgenConfig, SimulationConfig,
                     generate, run)

graph = generate(NetgenConfig(n=400, mu=0.3, eta=0.6, seed=11))
print(f"initial opinions: mean={graph.opinions.mean():.3f} "
      f"std={graph.opinions.std():.3f}")

for label, odm, steps in (("bounded confidence", BcmParams(), 400),
                          ("epistemic", EpistemicParams(), 100)):
    cfg = SimulationConfig(odm=odm, max_steps=steps, seed=3, trace_interval=steps // 4)
    final, trace = run(graph, cfg)
    print(f"\n{label} ({steps} steps)")
    print(f"  {'t':>5} {'nci':>8}")
    for t, nci_value, _, _ in trace.rows():
        print(f"  {t:>5} {nci_value:>8.3f}")
    hist, _ = np.histogram(final.opinions, bins=10, range=(0.0, 1.0))
    print("  final opinion histogram:", hist.tolist())
