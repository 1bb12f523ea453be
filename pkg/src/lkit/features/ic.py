"""Information content of the ternary slope-sign sequence along a sample tour."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from lkit.core import FeatureObject, child_rng

# the six ordered symbol pairs with differing entries
_OFF_DIAGONAL = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if a != b]


@dataclass
class SymbolSequence:
    """Tour order plus per-step slopes of the objective along the tour."""

    tour: np.ndarray       # sample indices, duplicates skipped
    slopes: np.ndarray     # (y_next - y_cur) / step length

    def symbols(self, eps: float) -> np.ndarray:
        return np.where(self.slopes > eps, 1, np.where(self.slopes < -eps, -1, 0))


def build_symbol_sequence(fo: FeatureObject, rng: np.random.Generator) -> SymbolSequence:
    """Greedy nearest-neighbor tour of the sample from a random start.

    Distance ties go to the lower sample index; a point duplicating the
    current tour end is dropped (its slope would be undefined).
    """
    if fo.n_obs < 3:
        raise ValueError("symbol sequence needs at least 3 observations")
    dist = cdist(fo.points, fo.points)
    n = fo.n_obs
    start = int(rng.integers(n))
    remaining = np.ones(n, dtype=bool)
    remaining[start] = False
    tour = [start]
    current = start
    while remaining.any():
        cand = np.flatnonzero(remaining)
        nxt = cand[int(np.argmin(dist[current, cand]))]
        remaining[nxt] = False
        if dist[current, nxt] == 0.0:
            continue  # duplicate point: skip
        tour.append(int(nxt))
        current = int(nxt)

    tour = np.array(tour, dtype=int)
    y = fo.y_for_min[tour]
    steps = np.linalg.norm(np.diff(fo.points[tour], axis=0), axis=1)
    slopes = np.diff(y) / steps
    return SymbolSequence(tour=tour, slopes=slopes)


@dataclass
class ICCurves:
    eps: np.ndarray
    h: np.ndarray
    m: np.ndarray
    h_max: float
    eps_s: Optional[float]
    eps_max: Optional[float]
    m0: float
    eps_ratio: Optional[float]


def _entropy(symbols: np.ndarray) -> float:
    """H = -sum over differing ordered pairs of p log6 p."""
    if symbols.size < 2:
        return 0.0
    a, b = symbols[:-1], symbols[1:]
    total = a.size
    h = 0.0
    for pa, pb in _OFF_DIAGONAL:
        cnt = int(np.count_nonzero((a == pa) & (b == pb)))
        if cnt:
            p = cnt / total
            h -= p * (np.log(p) / np.log(6.0))
    return float(h)


def _partial_information(symbols: np.ndarray) -> float:
    """|Phi'| / (n - 1): zeros dropped, repeats collapsed."""
    nz = symbols[symbols != 0]
    if nz.size == 0:
        return 0.0
    changes = int(np.count_nonzero(np.diff(nz) != 0))
    return (changes + 1) / symbols.size


def compute_curves(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> ICCurves:
    """H and M over the epsilon grid plus the five derived markers."""
    if ctl.get("ic.seed") is not None:
        rng = child_rng(int(ctl["ic.seed"]), "ic")
    seq = build_symbol_sequence(fo, rng)

    steps = int(ctl["ic.epsilon_steps"])
    grid = np.concatenate([[0.0], np.logspace(np.log10(float(ctl["ic.epsilon_min"])),
                                              np.log10(float(ctl["ic.epsilon_max"])),
                                              steps)])
    h = np.empty(grid.size)
    m = np.empty(grid.size)
    for k, eps in enumerate(grid):
        sym = seq.symbols(eps)
        h[k] = _entropy(sym)
        m[k] = _partial_information(sym)

    s_thr = float(ctl["ic.settling_threshold"])
    r_thr = float(ctl["ic.partial_ratio"])

    h_max = float(h.max())
    if h_max == 0.0:
        eps_max = None
    else:
        eps_max = float(grid[int(np.argmax(h))])

    positive = grid > 0
    below = positive & (h < s_thr)
    eps_s = float(np.log10(grid[below].min())) if (h_max > 0 and np.any(below)) else None

    m0 = float(m[0])
    if m0 > 0:
        above = positive & (m > r_thr * m0)
        eps_ratio = float(np.log10(grid[above].max())) if np.any(above) else None
    else:
        eps_ratio = None

    return ICCurves(eps=grid, h=h, m=m, h_max=h_max, eps_s=eps_s,
                    eps_max=eps_max, m0=m0, eps_ratio=eps_ratio)


def ic_features(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    curves = compute_curves(fo, ctl, rng)
    return {
        "ic.h_max": curves.h_max,
        "ic.eps_s": curves.eps_s,
        "ic.eps_max": curves.eps_max,
        "ic.m0": curves.m0,
        "ic.eps_ratio": curves.eps_ratio,
    }
