"""Monte Carlo engine for measuring people-recommender effects on opinion dynamics.

A directed social graph with node opinions co-evolves under a
people-recommender (which adds arcs, paired with attention-budget
rewiring) and an opinion-dynamics update rule.  The harness runs paired
null/recommender replicas over a grid of network regimes and tests the
metric differences for significance.
"""

from .graph import DegreeSummary, GraphFormatError, OpinionGraph, load, save
from .netgen import GenerationError, NetgenConfig, assign_opinions, generate, generate_structure
from .odm import (ACTION_KNOWN, ACTION_NOVEL, BcmParams, EpistemicParams,
                  ExperimentOutcome, bcm_update, epistemic_experiment, epistemic_update)
from .recommenders import (NoCandidateError, PprConvergenceError, RecommenderSpec,
                           ScoreNormalizer, dji_score, fit_normalizer, oba_scores,
                           ppr_scores, recommend, salsa_scores)
from .engine import (InterventionSpec, RunTrace, SimulationConfig, SimulationState,
                     apply_intervention, calibrate_alpha, rewire, run,
                     sample_susceptibility, step)
from .metrics import (DegenerateMetricWarning, RwcConfig, UndefinedMetricError,
                      nci, pearson, rwc)
from .stats import KsResult, derive_seed, ecdf_transform, ks_two_sample, rng_stream, significance_label
from .harness import (CellError, CellResult, GridConfig, GridReport, ReplicaRecord,
                      export_aggregate_csv, export_json, export_replicas_csv,
                      load_aggregate_csv, load_replicas_csv, run_cell, run_grid)

__version__ = "0.1.0"
