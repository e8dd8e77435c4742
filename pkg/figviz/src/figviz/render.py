"""Render experiment CSV exports into publication-style figures.

Two figure kinds are supported, both reading the simulation harness's
documented CSV schemas and nothing else:

- heatmap: per-cell metric deltas over the (homophily, mixing) grid,
  homophily rightward and mixing upward, on a diverging palette centered
  at zero.  Cell values are printed only when significant (p < 0.05),
  with ** appended below 0.01 and *** below 0.001.
- intervention_lines: metric delta as a function of the intervention
  probability, one line per strategy, with a zero reference line.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

AGGREGATE_COLUMNS = ("odm", "recommender", "eta", "mu", "metric",
                     "delta", "ks_stat", "p_value", "significance")
INTERVENTION_COLUMNS = ("strategy", "xi", "metric", "delta", "p_value")

KINDS = ("heatmap", "intervention_lines")
METRICS = ("nci", "rwc")


class SchemaError(ValueError):
    """Input CSV does not match the documented harness schema."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str = "heatmap"
    metric: str = "nci"
    color_limit: float = 0.0      # 0 = symmetric bound from the data
    dpi: int = 100
    annotation_digits: int = 2
    figsize: tuple = (5.0, 4.2)
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.color_limit < 0:
            raise ValueError("color_limit must be non-negative")


def _read_csv(path, required):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {', '.join(missing)}; "
                f"expected header with {', '.join(required)}")
        return list(reader)


def annotation_for(delta: float, p_value: float, digits: int = 2) -> str:
    """The printed cell label: empty unless significant, asterisks per ladder."""
    if p_value >= 0.05:
        return ""
    text = f"{delta:.{digits}f}"
    if p_value < 0.001:
        return text + "***"
    if p_value < 0.01:
        return text + "**"
    return text


def _heatmap_data(spec: FigureSpec):
    rows = [r for r in _read_csv(spec.input_csv, AGGREGATE_COLUMNS)
            if r["metric"] == spec.metric]
    if not rows:
        raise SchemaError(f"{spec.input_csv}: no rows for metric {spec.metric!r}")
    etas = sorted({float(r["eta"]) for r in rows})
    mus = sorted({float(r["mu"]) for r in rows})
    grid = np.full((len(mus), len(etas)), np.nan)
    pvals = np.ones((len(mus), len(etas)))
    for r in rows:
        i = mus.index(float(r["mu"]))
        j = etas.index(float(r["eta"]))
        grid[i, j] = float(r["delta"])
        pvals[i, j] = float(r["p_value"])
    return etas, mus, grid, pvals


def _render_heatmap(spec: FigureSpec, out_path: str) -> dict:
    etas, mus, grid, pvals = _heatmap_data(spec)
    limit = spec.color_limit or max(float(np.nanmax(np.abs(grid))), 1e-9)

    fig, ax = plt.subplots(figsize=spec.figsize, dpi=spec.dpi)
    image = ax.imshow(grid, origin="lower", cmap="RdBu_r", vmin=-limit, vmax=limit,
                      aspect="auto")
    ax.set_xticks(range(len(etas)), [f"{e:g}" for e in etas])
    ax.set_yticks(range(len(mus)), [f"{m:g}" for m in mus])
    ax.set_xlabel("initial homophily")
    ax.set_ylabel("initial modularity")
    ax.set_title(spec.title or f"Δ{spec.metric.upper()}")
    annotations = []
    for i in range(len(mus)):
        for j in range(len(etas)):
            label = annotation_for(grid[i, j], pvals[i, j], spec.annotation_digits)
            if label:
                ax.text(j, i, label, ha="center", va="center", fontsize=9)
            annotations.append({"eta": etas[j], "mu": mus[i],
                                "delta": round(float(grid[i, j]), 12),
                                "annotation": label})
    fig.colorbar(image, ax=ax, label=f"Δ{spec.metric.upper()}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=spec.dpi)
    plt.close(fig)
    return {
        "kind": "heatmap",
        "metric": spec.metric,
        "x_axis": [f"{e:g}" for e in etas],
        "y_axis": [f"{m:g}" for m in mus],
        "color_limit": round(float(limit), 12),
        "cells": annotations,
    }


def _render_intervention(spec: FigureSpec, out_path: str) -> dict:
    rows = [r for r in _read_csv(spec.input_csv, INTERVENTION_COLUMNS)
            if r["metric"] == spec.metric]
    if not rows:
        raise SchemaError(f"{spec.input_csv}: no rows for metric {spec.metric!r}")
    strategies = sorted({r["strategy"] for r in rows})

    fig, ax = plt.subplots(figsize=spec.figsize, dpi=spec.dpi)
    ax.axhline(0.0, color="0.4", linewidth=1.0, linestyle="--", zorder=1)
    layout_lines = []
    for strategy in strategies:
        points = sorted((float(r["xi"]), float(r["delta"]))
                        for r in rows if r["strategy"] == strategy)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, marker="o", label=strategy.replace("_", " "), zorder=2)
        layout_lines.append({"strategy": strategy,
                             "xi": xs,
                             "delta": [round(y, 12) for y in ys]})
    ax.set_xlabel("intervention probability")
    ax.set_ylabel(f"Δ{spec.metric.upper()}")
    ax.set_title(spec.title or f"Δ{spec.metric.upper()} under intervention")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=spec.dpi)
    plt.close(fig)
    return {
        "kind": "intervention_lines",
        "metric": spec.metric,
        "zero_reference_line": True,
        "lines": layout_lines,
    }


def render(spec: FigureSpec, out_path: str) -> dict:
    """Render the figure to out_path (png or pdf); returns the layout summary.

    The layout summary is a plain-JSON description of everything drawn
    (axes, cell annotations or line series), used for regression checks
    that are robust to rasterization details.
    """
    if spec.kind == "heatmap":
        layout = _render_heatmap(spec, out_path)
    else:
        layout = _render_intervention(spec, out_path)
    return layout


def write_layout(layout: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(layout, fh, indent=1, sort_keys=True)
        fh.write("\n")
