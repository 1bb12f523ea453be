"""Renderer-agnostic plot-data builders.

Every structure is plain JSON-serializable geometry plus category labels;
colors and marker shapes are the renderer's business. Schemas are versioned
via the top-level schema_version field.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from lkit.core import FeatureObject
from lkit.features.gcm import PROB_EPS, build_barrier_tree, build_transition_model
from lkit.features.ic import compute_curves
from lkit.problems import Problem
from lkit.registry import resolve_control

SCHEMA_VERSION = 1


def cell_mapping_plot_data(fo: FeatureObject, approach: str = "min") -> dict:
    """Cells with their chain class, basin id and attraction arrows (2D only)."""
    if fo.dim != 2:
        raise ValueError("cell mapping plot requires 2 dimensions")
    if fo.grid is None:
        raise ValueError("cell mapping plot requires a cell grid (blocks)")
    model = build_transition_model(fo, approach)

    att_states = set(model.attractors.tolist())
    uncertain = set(model.uncertain.tolist())
    att_cols = {int(a): j for j, a in enumerate(model.attractors)}

    cells = []
    for s in range(model.n_states):
        center = fo.grid.cell_center(model.cell_ids[s])[0]
        if s in att_states:
            klass, basin = "attractor", int(model.cell_ids[s])
        elif s in uncertain:
            klass, basin = "uncertain", None
        else:
            col = int(np.argmax(model.absorption[s]))
            klass, basin = "certain", int(model.cell_ids[model.attractors[col]])
        arrows = []
        if s not in att_states:
            for a, j in att_cols.items():
                prob = float(model.absorption[s, j])
                if prob > PROB_EPS:
                    target = fo.grid.cell_center(model.cell_ids[a])[0]
                    direction = target - center
                    norm = float(np.linalg.norm(direction))
                    unit = (direction / norm).tolist() if norm > 0 else [0.0, 0.0]
                    arrows.append({
                        "target_cell": int(model.cell_ids[a]),
                        "direction": unit,
                        "length": prob,
                    })
        cells.append({
            "cell": int(model.cell_ids[s]),
            "coords": [int(c) for c in model.coords[s]],
            "center": [float(v) for v in center],
            "class": klass,
            "basin": basin,
            "representative": float(model.representatives[s]),
            "arrows": arrows,
        })

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "cellmapping",
        "approach": approach,
        "blocks": [int(b) for b in fo.grid.blocks],
        "lower": [float(v) for v in fo.lower],
        "upper": [float(v) for v in fo.upper],
        "cell_widths": [float(w) for w in fo.grid.cell_widths],
        "cells": cells,
    }


def barrier_tree_plot_data(fo: FeatureObject, approach: str = "min",
                           mode: str = "2d") -> dict:
    """Barrier-tree nodes and edges; 3d mode adds the representative surface."""
    if mode not in ("2d", "3d"):
        raise ValueError("mode must be '2d' or '3d'")
    if fo.dim != 2:
        raise ValueError("barrier tree plot requires 2 dimensions")
    if fo.grid is None:
        raise ValueError("barrier tree plot requires a cell grid (blocks)")
    model = build_transition_model(fo, approach)
    tree = build_barrier_tree(model)

    nodes = []
    edges = []
    for node in tree.nodes:
        center = fo.grid.cell_center(model.cell_ids[node.state])[0]
        nodes.append({
            "id": node.node_id,
            "cell": int(model.cell_ids[node.state]),
            "role": node.kind,
            "height": float(node.height),
            "coords": [float(v) for v in center],
            "level": int(node.level),
        })
        if node.parent is not None:
            edges.append({"parent": int(node.parent), "child": int(node.node_id)})

    root = tree.nodes[tree.root]
    root_center = fo.grid.cell_center(model.cell_ids[root.state])[0]
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": f"barriertree{mode}",
        "approach": approach,
        "mode": mode,
        "nodes": nodes,
        "edges": edges,
        "root_marker": {
            "id": int(root.node_id),
            "cell": int(model.cell_ids[root.state]),
            "height": float(root.height),
            "coords": [float(v) for v in root_center],
        },
    }
    if mode == "3d":
        nx, ny = (int(b) for b in fo.grid.blocks)
        surface = np.full((nx, ny), None, dtype=object)
        for s in range(model.n_states):
            i, j = model.coords[s]
            surface[i, j] = float(model.representatives[s])
        out["surface"] = {
            "x": [float(v) for v in (fo.lower[0] + (np.arange(nx) + 0.5) * fo.grid.cell_widths[0])],
            "y": [float(v) for v in (fo.lower[1] + (np.arange(ny) + 0.5) * fo.grid.cell_widths[1])],
            "z": surface.tolist(),
        }
    return out


def info_content_plot_data(fo: FeatureObject, control: Optional[dict] = None,
                           seed: int = 0) -> dict:
    """H and M curves over the epsilon grid plus the four feature markers."""
    from lkit.core import child_rng

    ctl = resolve_control(control)
    curves = compute_curves(fo, ctl, child_rng(seed, "ic"))

    def h_at(eps_value: float) -> float:
        idx = int(np.argmin(np.abs(curves.eps - eps_value)))
        return float(curves.h[idx])

    def m_at(eps_value: float) -> float:
        idx = int(np.argmin(np.abs(curves.eps - eps_value)))
        return float(curves.m[idx])

    markers = {
        "m0": {"eps": 0.0, "value": curves.m0, "series": "m"},
        "h_max": None if curves.eps_max is None else
                 {"eps": curves.eps_max, "value": curves.h_max, "series": "h"},
        "eps_s": None if curves.eps_s is None else
                 {"eps": 10 ** curves.eps_s, "value": h_at(10 ** curves.eps_s), "series": "h"},
        "eps_ratio": None if curves.eps_ratio is None else
                     {"eps": 10 ** curves.eps_ratio, "value": m_at(10 ** curves.eps_ratio),
                      "series": "m"},
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "infocontent",
        "eps": [float(v) for v in curves.eps],
        "h": [float(v) for v in curves.h],
        "m": [float(v) for v in curves.m],
        "markers": markers,
    }


def feature_importance_plot_data(selections: list, threshold: float = 0.8) -> dict:
    """Fold-by-feature selection matrix with importance flags.

    A feature is important iff it was selected in at least `threshold` of the
    folds; features are ordered by selection frequency, then name.
    """
    if not selections:
        raise ValueError("need at least one fold of selected features")
    folds = [list(fold) for fold in selections]
    names = sorted({name for fold in folds for name in fold})
    freq = {name: sum(name in fold for fold in folds) / len(folds) for name in names}
    ordered = sorted(names, key=lambda n: (-freq[n], n))
    matrix = [[name in fold for name in ordered] for fold in folds]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "featureimportance",
        "threshold": threshold,
        "features": ordered,
        "frequency": [freq[n] for n in ordered],
        "important": [freq[n] >= threshold for n in ordered],
        "matrix": matrix,
        "n_folds": len(folds),
    }


def function_grid(problem: Problem, resolution: int, lower=None, upper=None) -> dict:
    """Evaluation grid of a 1D or 2D problem for line/contour/surface plots."""
    if resolution < 2:
        raise ValueError("resolution >= 2 required")
    if problem.dim > 2:
        raise ValueError("function grid requires 1 or 2 dimensions")
    lo = problem.lower if lower is None else np.broadcast_to(
        np.asarray(lower, dtype=float), (problem.dim,))
    up = problem.upper if upper is None else np.broadcast_to(
        np.asarray(upper, dtype=float), (problem.dim,))

    if problem.dim == 1:
        xs = np.linspace(lo[0], up[0], resolution)
        values = problem.batch(xs.reshape(-1, 1))
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "function1d",
            "x": [float(v) for v in xs],
            "values": [float(v) for v in values],
        }
    xs = np.linspace(lo[0], up[0], resolution)
    ys = np.linspace(lo[1], up[1], resolution)
    grid = np.array([[x, y] for y in ys for x in xs])
    values = problem.batch(grid).reshape(resolution, resolution)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "function2d",
        "x": [float(v) for v in xs],
        "y": [float(v) for v in ys],
        "z": [[float(v) for v in row] for row in values],
    }
