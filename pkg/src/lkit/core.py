"""Feature objects, initial-design sampling and the shared cell grid.

Everything downstream (feature sets, plot data, the service) starts from a
FeatureObject: an immutable bundle of sampled points, objective values,
bounds, an optional evaluable function and an optional block discretization
of the decision space.
"""
from __future__ import annotations

import threading
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import pdist


def child_rng(seed: int, stream: str) -> np.random.Generator:
    """Deterministic per-stream generator from a master seed.

    Uses a counter-based bit generator keyed by (seed, crc32(stream)) so that
    adding a stream never perturbs the draws of another one.
    """
    key = zlib.crc32(stream.encode("utf-8"))
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, key])
    return np.random.Generator(np.random.Philox(seq))


class EvalCounter:
    """Thread-safe monotone counter of extra function evaluations."""

    def __init__(self) -> None:
        self._count = 0
        self._lock = threading.Lock()

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("evaluation count increment must be >= 0")
        with self._lock:
            self._count += int(k)

    @property
    def count(self) -> int:
        return self._count


@dataclass(frozen=True)
class SampleSpec:
    """Specification of an initial design."""

    n_obs: int
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    method: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dim,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dim,)).copy()
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.n_obs < 1:
            raise ValueError("n_obs must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.method not in ("uniform", "lhs"):
            raise ValueError(f"unknown sampling method '{self.method}'")
        if not np.all(lower < upper):
            raise ValueError("lower bounds must be strictly below upper bounds")


def create_initial_sample(spec: SampleSpec) -> np.ndarray:
    """Draw an initial design inside the spec's box.

    "uniform" draws i.i.d. uniform points. "lhs" places one point per
    axis-stratum per dimension and then runs 100 coordinate-swap proposals,
    keeping each one that increases the minimum pairwise distance (maximin).
    """
    if not (np.all(np.isfinite(spec.lower)) and np.all(np.isfinite(spec.upper))):
        raise ValueError("unbounded sample domain")
    rng = child_rng(spec.seed, "sample")
    n, d = spec.n_obs, spec.dim
    if spec.method == "uniform":
        unit = rng.uniform(size=(n, d))
    else:
        unit = np.empty((n, d))
        for j in range(d):
            strata = rng.permutation(n)
            unit[:, j] = (strata + rng.uniform(size=n)) / n
        unit = _maximin_improve(unit, rng, proposals=100)
    return spec.lower + unit * (spec.upper - spec.lower)


def _maximin_improve(unit: np.ndarray, rng: np.random.Generator, proposals: int) -> np.ndarray:
    """Greedy maximin improvement by swapping one coordinate of two rows.

    Swaps keep the per-dimension stratification intact (the set of values in
    each column is unchanged).
    """
    n, d = unit.shape
    if n < 2:
        return unit
    best = float(np.min(pdist(unit)))
    for _ in range(proposals):
        j = int(rng.integers(d))
        a, b = rng.choice(n, size=2, replace=False)
        unit[a, j], unit[b, j] = unit[b, j], unit[a, j]
        cand = float(np.min(pdist(unit)))
        if cand > best:
            best = cand
        else:
            unit[a, j], unit[b, j] = unit[b, j], unit[a, j]
    return unit


@dataclass(frozen=True)
class CellGrid:
    """Block discretization of the decision space.

    Cells are half-open along each axis and closed at the top of the domain;
    a point exactly on an internal boundary belongs to the higher-index cell.
    Linearization is row-major (last dimension varies fastest).
    """

    blocks: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cell_widths: np.ndarray
    cell_of_point: np.ndarray
    n_cells: int

    @staticmethod
    def build(points: np.ndarray, lower: np.ndarray, upper: np.ndarray,
              blocks: np.ndarray) -> "CellGrid":
        blocks = np.asarray(blocks, dtype=int)
        if blocks.ndim == 0:
            blocks = np.full(points.shape[1], int(blocks))
        if blocks.shape != (points.shape[1],):
            raise ValueError("blocks must have one entry per dimension")
        if np.any(blocks < 1):
            raise ValueError("every blocks entry must be >= 1")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("cell grid requires finite bounds")
        widths = (upper - lower) / blocks
        cell_of_point = CellGrid._locate(points, lower, blocks, widths)
        return CellGrid(
            blocks=blocks,
            lower=lower.copy(),
            upper=upper.copy(),
            cell_widths=widths,
            cell_of_point=cell_of_point,
            n_cells=int(np.prod(blocks)),
        )

    @staticmethod
    def _locate(points: np.ndarray, lower: np.ndarray, blocks: np.ndarray,
                widths: np.ndarray) -> np.ndarray:
        safe = np.where(widths > 0, widths, 1.0)
        idx = np.floor((points - lower) / safe).astype(int)
        idx = np.clip(idx, 0, blocks - 1)
        return np.ravel_multi_index(tuple(idx.T), tuple(blocks), order="C")

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Linearized cell IDs for a batch of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return CellGrid._locate(points, self.lower, self.blocks, self.cell_widths)

    def cell_center(self, cell_ids) -> np.ndarray:
        """Cell-center coordinates for linearized IDs."""
        ids = np.atleast_1d(np.asarray(cell_ids, dtype=int))
        multi = np.stack(np.unravel_index(ids, tuple(self.blocks), order="C"), axis=-1)
        return self.lower + (multi + 0.5) * self.cell_widths

    def cell_coords(self, cell_ids) -> np.ndarray:
        """Per-dimension integer indices for linearized IDs."""
        ids = np.atleast_1d(np.asarray(cell_ids, dtype=int))
        return np.stack(np.unravel_index(ids, tuple(self.blocks), order="C"), axis=-1)

    def members(self) -> dict[int, np.ndarray]:
        """Point indices per non-empty cell."""
        order = np.argsort(self.cell_of_point, kind="stable")
        out: dict[int, np.ndarray] = {}
        sorted_cells = self.cell_of_point[order]
        bounds = np.flatnonzero(np.diff(sorted_cells)) + 1
        for chunk in np.split(order, bounds):
            out[int(self.cell_of_point[chunk[0]])] = chunk
        return out

    @property
    def n_filled(self) -> int:
        return int(np.unique(self.cell_of_point).size)


@dataclass(frozen=True)
class FeatureObject:
    """Immutable bundle of an initial design plus optional function and grid.

    Only the evaluation counter mutates after creation; everything else is
    safe to share across concurrent workers.
    """

    points: np.ndarray
    objectives: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    minimize: bool = True
    function: Optional[Callable[[np.ndarray], float]] = None
    grid: Optional[CellGrid] = None
    _evals: EvalCounter = field(default_factory=EvalCounter, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_obs(self) -> int:
        return self.points.shape[0]

    @property
    def blocks(self) -> Optional[np.ndarray]:
        return None if self.grid is None else self.grid.blocks

    @property
    def eval_count(self) -> int:
        return self._evals.count

    def track_evaluations(self, k: int) -> int:
        """Record k extra function evaluations; returns the new total."""
        self._evals.add(k)
        return self._evals.count

    def evaluate(self, x: np.ndarray) -> float:
        """Evaluate the attached function at one point, counting the call."""
        if self.function is None:
            raise ValueError("feature object has no attached function")
        self._evals.add(1)
        return float(self.function(np.asarray(x, dtype=float)))

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        if self.function is None:
            raise ValueError("feature object has no attached function")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self._evals.add(X.shape[0])
        batch = getattr(self.function, "batch", None)
        if batch is not None:
            return np.asarray(batch(X), dtype=float)
        return np.array([float(self.function(row)) for row in X])

    @property
    def y_for_min(self) -> np.ndarray:
        """Objectives in minimization orientation."""
        return self.objectives if self.minimize else -self.objectives


def create_feature_object(points, objectives, lower=None, upper=None, blocks=None,
                          function=None, minimize: bool = True) -> FeatureObject:
    """Validate inputs and assemble a FeatureObject.

    Omitted bounds default to per-dimension minima / maxima of the points.
    A cell grid is constructed iff blocks are given.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    objectives = np.asarray(objectives, dtype=float).ravel()
    if points.shape[0] != objectives.shape[0]:
        raise ValueError(
            f"points ({points.shape[0]}) and objectives ({objectives.shape[0]}) "
            "have mismatched lengths")
    if not np.all(np.isfinite(objectives)):
        raise ValueError("objectives contain non-finite entries")
    if not np.all(np.isfinite(points)):
        raise ValueError("points contain non-finite entries")
    d = points.shape[1]
    if points.shape[0] < d + 2:
        raise ValueError(f"need at least dim + 2 = {d + 2} observations, got {points.shape[0]}")

    explicit_bounds = lower is not None or upper is not None
    if lower is None:
        lower_arr = points.min(axis=0)
    else:
        lower_arr = np.broadcast_to(np.asarray(lower, dtype=float), (d,)).copy()
    if upper is None:
        upper_arr = points.max(axis=0)
    else:
        upper_arr = np.broadcast_to(np.asarray(upper, dtype=float), (d,)).copy()

    if explicit_bounds:
        finite_lo = np.isfinite(lower_arr)
        finite_up = np.isfinite(upper_arr)
        if np.any(points[:, finite_lo] < lower_arr[finite_lo]) or \
                np.any(points[:, finite_up] > upper_arr[finite_up]):
            raise ValueError("points fall outside the given bounds")

    grid = None
    if blocks is not None:
        grid = CellGrid.build(points, lower_arr, upper_arr, blocks)

    return FeatureObject(
        points=points,
        objectives=objectives,
        lower=lower_arr,
        upper=upper_arr,
        minimize=bool(minimize),
        function=function,
        grid=grid,
    )


def summarize(fo: FeatureObject) -> str:
    """Printable summary of a feature object."""
    lines = [
        "Feature object:",
        f"- observations: {fo.n_obs}",
        f"- variables: {fo.dim}",
        f"- lower bounds: {', '.join(_fmt(v) for v in fo.lower)}",
        f"- upper bounds: {', '.join(_fmt(v) for v in fo.upper)}",
        f"- direction: {'minimize' if fo.minimize else 'maximize'} y",
        f"- function attached: {'yes' if fo.function is not None else 'no'}",
    ]
    if fo.grid is not None:
        g = fo.grid
        filled = g.n_filled
        empty = g.n_cells - filled
        lines += [
            f"- blocks per dimension: {', '.join(str(int(b)) for b in g.blocks)}",
            f"- cell widths: {', '.join(_fmt(w) for w in g.cell_widths)}",
            "- cells:",
            f"  - total: {g.n_cells}",
            f"  - non-empty: {filled} ({100.0 * filled / g.n_cells:.2f}%)",
            f"  - empty: {empty} ({100.0 * empty / g.n_cells:.2f}%)",
            f"- average observations per non-empty cell: {fo.n_obs / filled:.2f}",
        ]
    return "\n".join(lines)


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return f"{v:.2f}"
    return f"{v:.4g}"


def summary_dict(fo: FeatureObject) -> dict:
    """Summary as a JSON-friendly mapping (used by the HTTP service)."""
    out = {
        "n_obs": fo.n_obs,
        "dim": fo.dim,
        "lower": [float(v) for v in fo.lower],
        "upper": [float(v) for v in fo.upper],
        "minimize": fo.minimize,
        "has_function": fo.function is not None,
        "blocks": None,
        "cells": None,
    }
    if fo.grid is not None:
        filled = fo.grid.n_filled
        out["blocks"] = [int(b) for b in fo.grid.blocks]
        out["cells"] = {
            "total": fo.grid.n_cells,
            "filled": filled,
            "empty": fo.grid.n_cells - filled,
            "widths": [float(w) for w in fo.grid.cell_widths],
        }
    return out
