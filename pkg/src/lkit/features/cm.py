"""Cell-mapping feature sets computed on the block-discretized decision space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lkit.core import FeatureObject


@dataclass
class CellSummary:
    """Per-cell extremal observations relative to the cell center."""

    cell_id: int
    members: np.ndarray
    best: int        # sample index of the best (lowest oriented) objective
    worst: int
    nearest_center: int


def cell_summaries(fo: FeatureObject) -> list[CellSummary]:
    """Summaries of every non-empty cell; ties resolved by lower sample index."""
    grid = fo.grid
    y = fo.y_for_min
    out = []
    for cell_id, members in sorted(grid.members().items()):
        vals = y[members]
        best = members[int(np.argmin(vals))]
        worst = members[int(np.argmax(vals))]
        center = grid.cell_center(cell_id)[0]
        dists = np.linalg.norm(fo.points[members] - center, axis=1)
        nearest = members[int(np.argmin(dists))]
        out.append(CellSummary(cell_id=cell_id, members=members, best=int(best),
                               worst=int(worst), nearest_center=int(nearest)))
    return out


def _mean_sd(values) -> tuple:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return None, None
    mean = float(arr.mean())
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else None
    return mean, sd


def cm_angle(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Geometry of the best and worst observation of each cell.

    Distances from the cell center to both points, the angle they span at the
    center and the best-worst objective gap normalized by the global span,
    each aggregated with mean and sd over the qualifying cells.
    """
    y = fo.y_for_min
    span = float(y.max() - y.min())
    d2b, d2w, angles, gaps = [], [], [], []
    for cs in cell_summaries(fo):
        if cs.members.size < 2:
            continue
        pb, pw = fo.points[cs.best], fo.points[cs.worst]
        if np.array_equal(pb, pw):
            continue  # degenerate: best and worst share a location
        center = fo.grid.cell_center(cs.cell_id)[0]
        vb, vw = pb - center, pw - center
        nb, nw = float(np.linalg.norm(vb)), float(np.linalg.norm(vw))
        d2b.append(nb)
        d2w.append(nw)
        if nb > 0 and nw > 0:
            cosang = np.clip(float(vb @ vw) / (nb * nw), -1.0, 1.0)
            angles.append(float(np.degrees(np.arccos(cosang))))
        gaps.append((float(y[cs.worst] - y[cs.best]) / span) if span > 0 else None)

    out: dict = {}
    for name, series in (("dist_ctr2best", d2b), ("dist_ctr2worst", d2w),
                         ("angle", angles), ("y_span_ratio", gaps)):
        mean, sd = _mean_sd(series)
        out[f"cm_angle.{name}.mean"] = mean
        out[f"cm_angle.{name}.sd"] = sd
    return out


def cm_conv(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Soft/hard convexity frequencies over triples of successive cells.

    Each cell is represented by the observation closest to its center; for
    every straight run of three non-empty cells the middle representative is
    compared against the outer pair. Strict inequalities; exact equality
    counts toward neither side.
    """
    grid = fo.grid
    if np.any(grid.blocks < 3):
        raise ValueError("cm_conv requires at least three blocks per dimension")
    y = fo.y_for_min

    rep: dict[tuple, float] = {}
    for cs in cell_summaries(fo):
        coords = tuple(grid.cell_coords(cs.cell_id)[0])
        rep[coords] = float(y[cs.nearest_center])

    d = fo.dim
    directions = []
    for v in np.ndindex(*(3,) * d):
        v = np.array(v) - 1
        nz = v[v != 0]
        if nz.size and nz[0] > 0:  # one representative per +/- pair
            directions.append(v)

    counts = {"convex_soft": 0, "convex_hard": 0, "concave_soft": 0, "concave_hard": 0}
    total = 0
    for coords in rep:
        c = np.array(coords)
        for v in directions:
            lo, hi = tuple(c - v), tuple(c + v)
            if lo in rep and hi in rep and np.all(c - v >= 0) and np.all(c + v < grid.blocks) \
                    and np.all(c - v < grid.blocks) and np.all(c + v >= 0):
                mid, a, b = rep[coords], rep[lo], rep[hi]
                total += 1
                if mid < 0.5 * (a + b):
                    counts["convex_soft"] += 1
                if mid < min(a, b):
                    counts["convex_hard"] += 1
                if mid > 0.5 * (a + b):
                    counts["concave_soft"] += 1
                if mid > max(a, b):
                    counts["concave_hard"] += 1

    out = {}
    for key in ("convex_soft", "convex_hard", "concave_soft", "concave_hard"):
        out[f"cm_conv.{key}"] = (counts[key] / total) if total else None
    return out


def cm_grad(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Gradient homogeneity: per cell, unit vectors from each point to its
    nearest in-cell neighbor, oriented toward the better point, summed up.

    The cell value is the sum's norm divided by the cell size; mean and sd
    are taken over all cells with at least two points.
    """
    y = fo.y_for_min
    values = []
    for cs in cell_summaries(fo):
        members = cs.members
        if members.size < 2:
            continue
        pts = fo.points[members]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        total = np.zeros(fo.dim)
        for a in range(members.size):
            b = int(np.argmin(dist[a]))
            if not np.isfinite(dist[a, b]) or dist[a, b] == 0:
                continue  # duplicated location: no direction to add
            ia, ib = members[a], members[b]
            # better = strictly lower objective; ties go to the lower index
            if (y[ib], ib) < (y[ia], ia):
                vec = (pts[b] - pts[a]) / dist[a, b]
            else:
                vec = (pts[a] - pts[b]) / dist[a, b]
            total += vec
        values.append(float(np.linalg.norm(total)) / members.size)

    mean, sd = _mean_sd(values)
    return {"cm_grad.homogeneity.mean": mean, "cm_grad.homogeneity.sd": sd}
