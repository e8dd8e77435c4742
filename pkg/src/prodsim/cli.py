"""Command-line front end for the simulation pipeline.

Subcommands: generate (network model), simulate (single run with trace),
grid (paired evaluation over the parameter grid), metrics (score a graph
file), intervene (effect of intervention policies vs their probability).

Configuration is TOML; `--set section.key=value` flags override the file,
which overrides built-in defaults.  Every run writes a manifest with the
fully resolved configuration so outputs can be reproduced byte for byte.
"""
from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import engine, harness, netgen, stats
from .graph import GraphFormatError, load, save
from .metrics import RwcConfig, UndefinedMetricError, nci, rwc
from .odm import BcmParams, EpistemicParams
from .recommenders import RecommenderSpec


class UsageError(Exception):
    """Bad invocation or configuration; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# configuration schema: defaults live in plain dicts so --help can list them

NETGEN_DEFAULTS = {
    "n": 400, "mu": 0.05, "eta": 0.8,
    "degree_exponent": 2.5, "community_exponent": 1.5, "avg_degree": 13.75,
    "max_degree": 0, "min_community": 10, "max_community": 0,
    "seed": 0, "max_retries": 20,
}
SIMULATION_DEFAULTS = {
    "odm": "bcm",
    "interactions_per_step": 2,
    "max_steps": 5000,
    "max_recommendations": -1,   # -1: derive from r_max_ratio * |arcs|
    "bcm_confidence": 0.2,
    "bcm_convergence": 0.2,
    "epistemic_gain": 0.005,
    "epistemic_trials": 15,
    "rewiring": "uniform",
    "susceptibility": "constant",
    "self_update": False,
    "trace_interval": 0,
    "r_max_ratio": 0.4,
}
RECOMMENDER_DEFAULTS = {
    "kind": "ppr",
    "ppr_damping": 0.85, "ppr_tolerance": 1e-8,
    "salsa_hubs": 50, "salsa_damping": 0.85,
    "oba_gamma": 2.0, "oba_floor": 1e-4,
}
GRID_DEFAULTS = {
    "eta_values": [0.2, 0.4, 0.6, 0.8],
    "mu_values": [0.05, 0.35, 0.65, 0.95],
    "replicas": 50,
    "metrics": ["nci", "rwc"],
}
INTERVENTION_DEFAULTS = {"xi": 0.0, "strategy": "uniform"}
INTERVENE_DEFAULTS = {
    "xi_values": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    "strategies": ["uniform", "opinion_diversity", "degree_sigmoid"],
    "eta": 0.8, "mu": 0.05,
}
TOP_DEFAULTS = {"master_seed": 0, "workers": 1}

_SCHEMA = {
    "netgen": NETGEN_DEFAULTS,
    "simulation": SIMULATION_DEFAULTS,
    "recommender": RECOMMENDER_DEFAULTS,
    "grid": GRID_DEFAULTS,
    "intervention": INTERVENTION_DEFAULTS,
    "intervene": INTERVENE_DEFAULTS,
}


def _defaults() -> dict:
    cfg = {k: dict(v) for k, v in _SCHEMA.items()}
    cfg.update(TOP_DEFAULTS)
    return cfg


def _load_config_file(path: str) -> dict:
    """Read a TOML config, resolving bare preset names shipped with the package."""
    if not os.path.exists(path):
        candidate = resources.files("prodsim").joinpath("presets", path)
        if candidate.is_file():
            return tomllib.loads(candidate.read_text(encoding="utf-8"))
        raise UsageError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _parse_override_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text  # bare string


def _merge(raw: dict, file_cfg: dict, overrides: list) -> dict:
    """Defaults <- config file <- --set overrides, rejecting unknown keys."""
    for section, content in file_cfg.items():
        if section in _SCHEMA:
            if not isinstance(content, dict):
                raise UsageError(f"config section [{section}] must be a table")
            for key, value in content.items():
                if key not in raw[section]:
                    raise UsageError(f"unknown config key {section}.{key}")
                raw[section][key] = value
        elif section in TOP_DEFAULTS:
            raw[section] = content
        else:
            raise UsageError(f"unknown config section or key {section!r}")
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        value = _parse_override_value(value.strip())
        key = key.strip()
        if "." in key:
            section, _, name = key.partition(".")
            if section not in _SCHEMA or name not in raw[section]:
                raise UsageError(f"unknown config key {key!r}")
            raw[section][name] = value
        elif key in TOP_DEFAULTS:
            raw[key] = value
        elif key in raw["netgen"]:
            raw["netgen"][key] = value  # convenience: bare netgen keys
        else:
            raise UsageError(f"unknown config key {key!r}")
    return raw


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot encode {type(v)} as TOML")


def _write_manifest(cfg: dict, path: str) -> None:
    """Resolved configuration as TOML; loading it reproduces the run."""
    lines = []
    for key in sorted(TOP_DEFAULTS):
        lines.append(f"{key} = {_toml_value(cfg[key])}")
    for section in _SCHEMA:
        lines.append("")
        lines.append(f"[{section}]")
        for key in sorted(cfg[section]):
            lines.append(f"{key} = {_toml_value(cfg[section][key])}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# config -> domain objects

def _netgen_config(cfg: dict) -> netgen.NetgenConfig:
    try:
        return netgen.NetgenConfig(**cfg["netgen"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad netgen config: {exc}") from None


def _odm_params(sim: dict):
    if sim["odm"] == "bcm":
        return BcmParams(confidence=sim["bcm_confidence"], convergence=sim["bcm_convergence"])
    if sim["odm"] == "epistemic":
        return EpistemicParams(gain=sim["epistemic_gain"], trials=int(sim["epistemic_trials"]))
    raise UsageError(f"odm must be 'bcm' or 'epistemic', got {sim['odm']!r}")


def _recommender_spec(cfg: dict) -> RecommenderSpec:
    try:
        return RecommenderSpec(**cfg["recommender"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad recommender config: {exc}") from None


def _simulation_config(cfg: dict, recommender, intervention=None,
                       max_recommendations=0, seed=0) -> engine.SimulationConfig:
    sim = cfg["simulation"]
    try:
        return engine.SimulationConfig(
            interactions_per_step=int(sim["interactions_per_step"]),
            max_recommendations=max_recommendations,
            max_steps=int(sim["max_steps"]),
            odm=_odm_params(sim),
            recommender=recommender,
            rewiring=sim["rewiring"],
            susceptibility=sim["susceptibility"],
            intervention=intervention,
            seed=seed,
            trace_interval=int(sim["trace_interval"]),
            self_update=bool(sim["self_update"]),
        )
    except ValueError as exc:
        raise UsageError(f"bad simulation config: {exc}") from None


def _grid_config(cfg: dict, recommender=None, intervention=None) -> harness.GridConfig:
    grid = cfg["grid"]
    if recommender is None:
        recommender = _recommender_spec(cfg)
    try:
        return harness.GridConfig(
            netgen=_netgen_config(cfg),
            simulation=_simulation_config(cfg, None, intervention=intervention),
            recommender=recommender,
            eta_values=tuple(grid["eta_values"]),
            mu_values=tuple(grid["mu_values"]),
            replicas=int(grid["replicas"]),
            metrics=tuple(grid["metrics"]),
            master_seed=int(cfg["master_seed"]),
            r_max_ratio=float(cfg["simulation"]["r_max_ratio"]),
            workers=int(cfg["workers"]),
        )
    except ValueError as exc:
        raise UsageError(f"bad grid config: {exc}") from None


def _resolve(args) -> dict:
    cfg = _defaults()
    file_cfg = _load_config_file(args.config) if args.config else {}
    cfg = _merge(cfg, file_cfg, args.set or [])
    if args.master_seed is not None:
        cfg["master_seed"] = args.master_seed
    elif "master_seed" not in file_cfg and os.environ.get("PRODSIM_SEED"):
        cfg["master_seed"] = int(os.environ["PRODSIM_SEED"])
    if args.workers is not None:
        cfg["workers"] = args.workers
    if getattr(args, "paper_scale", False):
        cfg["grid"]["replicas"] = 500
    return cfg


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_generate(args) -> int:
    cfg = _resolve(args)
    cfg["netgen"]["seed"] = int(cfg["netgen"].get("seed") or cfg["master_seed"])
    graph = netgen.generate(_netgen_config(cfg))
    save(graph, args.output)
    _write_manifest(cfg, args.output + ".manifest.toml")
    print(f"wrote {args.output}: {graph.node_count} nodes, {graph.arc_count} arcs")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _resolve(args)
    if args.graph:
        graph = load(args.graph)
    else:
        cfg["netgen"]["seed"] = int(cfg["netgen"].get("seed") or cfg["master_seed"])
        graph = netgen.generate(_netgen_config(cfg))
    sim = cfg["simulation"]
    r_max = int(sim["max_recommendations"])
    if r_max < 0:
        r_max = int(round(float(sim["r_max_ratio"]) * graph.arc_count))
    recommender = _recommender_spec(cfg) if r_max > 0 else None
    trace_interval = int(sim["trace_interval"]) or max(1, int(sim["max_steps"]) // 50)
    cfg["simulation"]["trace_interval"] = trace_interval
    run_cfg = _simulation_config(cfg, recommender, max_recommendations=r_max,
                                 seed=int(cfg["master_seed"]))
    final, trace = engine.run(graph, run_cfg)
    outdir = _ensure_outdir(args.output)
    save(final, os.path.join(outdir, "final_graph.txt"))
    with open(os.path.join(outdir, "trace.csv"), "w", encoding="utf-8") as fh:
        fh.write("t,nci,rwc,recs_used\n")
        for t, nci_v, rwc_v, recs in trace.rows():
            fh.write(f"{t},{float(nci_v)!r},{float(rwc_v)!r},{recs}\n")
    _write_manifest(cfg, os.path.join(outdir, "manifest.toml"))
    print(f"simulated {run_cfg.max_steps} steps: "
          f"{trace.recommendations_accepted}/{r_max} recommendations accepted, "
          f"budget exhausted at t={trace.budget_exhausted_step}")
    return 0


def _cmd_grid(args) -> int:
    cfg = _resolve(args)
    grid_cfg = _grid_config(cfg)
    report = harness.run_grid(grid_cfg)
    outdir = _ensure_outdir(args.output)
    harness.export_replicas_csv(report, os.path.join(outdir, "replicas.csv"))
    harness.export_aggregate_csv(report, os.path.join(outdir, "aggregate.csv"))
    harness.export_json(report, os.path.join(outdir, "report.json"))
    _write_manifest(cfg, os.path.join(outdir, "manifest.toml"))
    for cell in report.cells:
        parts = [f"eta={cell.eta} mu={cell.mu}"]
        for metric in sorted(cell.delta):
            ks = cell.ks[metric]
            parts.append(f"d{metric}={cell.delta[metric]:+.4f}"
                         f"{stats.significance_label(ks.p_value)}")
        print("  ".join(parts))
    return 0


def _cmd_metrics(args) -> int:
    cfg = _resolve(args)
    graph = load(args.graph)
    nci_value = nci(graph)
    rng = stats.rng_stream(int(cfg["master_seed"]), 0, "cli-metrics")
    try:
        rwc_value = rwc(graph, cfg=RwcConfig(), rng=rng)
        rwc_text = repr(float(rwc_value))
    except UndefinedMetricError as exc:
        rwc_value = float("nan")
        rwc_text = f"nan ({exc})"
    print(f"nci={float(nci_value)!r} rwc={rwc_text}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("metric,value\n")
            fh.write(f"nci,{float(nci_value)!r}\n")
            fh.write(f"rwc,{float(rwc_value)!r}\n")
    return 0


def intervene_sweep(cfg: dict, xi_values, strategies=None, eta=None, mu=None):
    """Effect of each intervention strategy as a function of its probability.

    Runs the paired-cell evaluation at one fixed (eta, mu) for every
    (strategy, xi) combination; the xi = 0 rows are exactly the
    no-intervention result because the intervention layer is disabled
    there.  Null arms are shared across the whole sweep.  Yields dict rows
    `strategy, xi, metric, delta, p_value`.
    """
    inter = cfg["intervene"]
    strategies = strategies or inter["strategies"]
    eta = inter["eta"] if eta is None else eta
    mu = inter["mu"] if mu is None else mu
    base_cache = {}
    rows = []
    for strategy in strategies:
        for xi in xi_values:
            spec = None
            if xi > 0:
                spec = engine.InterventionSpec(probability=float(xi), strategy=strategy)
            grid_cfg = _grid_config(cfg, intervention=spec)
            cell = harness.run_cell(grid_cfg, eta, mu, base_cache=base_cache)
            for metric in sorted(cell.delta):
                rows.append({
                    "strategy": strategy, "xi": float(xi), "metric": metric,
                    "delta": cell.delta[metric],
                    "p_value": cell.ks[metric].p_value,
                })
    return rows


def _cmd_intervene(args) -> int:
    cfg = _resolve(args)
    xi_values = cfg["intervene"]["xi_values"]
    rows = intervene_sweep(cfg, xi_values)
    outdir = _ensure_outdir(args.output)
    path = os.path.join(outdir, "intervention.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("strategy,xi,metric,delta,p_value\n")
        for row in rows:
            fh.write(f"{row['strategy']},{row['xi']!r},{row['metric']},"
                     f"{row['delta']!r},{row['p_value']!r}\n")
    _write_manifest(cfg, os.path.join(outdir, "manifest.toml"))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------

def _section_help(*sections) -> str:
    out = ["configuration keys (defaults):"]
    for section in sections:
        for key, value in _SCHEMA[section].items():
            out.append(f"  {section}.{key} = {value!r}")
    out.append("  master_seed = 0 (or env PRODSIM_SEED)")
    return "\n".join(out)


def _build_parser() -> _Parser:
    parser = _Parser(prog="prodsim",
                     description="people-recommender opinion-dynamics simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_default=None, output_help="output directory"):
        p.add_argument("-c", "--config", help="TOML config file or preset name")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--master-seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        if output_default is not None:
            p.add_argument("-o", "--output", default=output_default, help=output_help)

    p = sub.add_parser("generate", help="generate a random network with opinions",
                       epilog=_section_help("netgen"),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("-o", "--output", required=True, help="graph file to write")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("simulate", help="run one simulation and trace metrics",
                       epilog=_section_help("netgen", "simulation", "recommender"),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, output_default="simulate-out")
    p.add_argument("--graph", help="existing graph file (otherwise generate)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("grid", help="paired evaluation grid over (eta, mu)",
                       epilog=_section_help("netgen", "simulation", "recommender", "grid"),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, output_default="grid-out")
    p.add_argument("--paper-scale", action="store_true",
                   help="run the full 500-replica protocol instead of 50")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("metrics", help="compute nci and rwc for a graph file")
    common(p)
    p.add_argument("graph", help="graph file")
    p.add_argument("--csv", help="also write metric,value rows to this file")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("intervene", help="sweep intervention strategies over xi",
                       epilog=_section_help("netgen", "simulation", "recommender",
                                            "grid", "intervene"),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p, output_default="intervene-out")
    p.set_defaults(func=_cmd_intervene)
    return parser


def main(argv=None) -> int:
    """Entry point; returns 0 on success, 1 on usage error, 2 on runtime failure."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (GraphFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit code 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
