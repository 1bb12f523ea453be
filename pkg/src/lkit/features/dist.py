"""Distance-based feature sets: nearest-better clustering and dispersion."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist, pdist

from lkit.core import FeatureObject
from lkit.numkit import quantile


def nearest_better_stats(points: np.ndarray, y: np.ndarray):
    """Per point: nearest-neighbor distance, nearest-better distance, indegree.

    "Better" means strictly smaller objective; exact ties are broken by the
    smaller sample index so the relation stays acyclic. The single best point
    has no better set and gets a missing nb distance.
    """
    n = points.shape[0]
    dist = cdist(points, points)
    np.fill_diagonal(dist, np.inf)
    nn = dist.min(axis=1)

    order = np.lexsort((np.arange(n), y))  # ascending objective, index tiebreak
    rank = np.empty(n, dtype=int)
    rank[order] = np.arange(n)

    nb = np.full(n, np.nan)
    nb_target = np.full(n, -1, dtype=int)
    for i in range(n):
        better = order[:rank[i]]
        if better.size == 0:
            continue
        j = better[int(np.argmin(dist[i, better]))]
        nb[i] = dist[i, j]
        nb_target[i] = j

    indegree = np.bincount(nb_target[nb_target >= 0], minlength=n)
    return nn, nb, indegree


def _pearson(a: np.ndarray, b: np.ndarray):
    if a.size < 2 or np.std(a) == 0 or np.std(b) == 0:
        return None
    return float(np.corrcoef(a, b)[0, 1])


def nbc(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Ratios and correlations of nearest vs nearest-better distances."""
    if fo.n_obs < 5:
        raise ValueError("nbc needs at least 5 observations")
    y = fo.y_for_min
    nn, nb, indegree = nearest_better_stats(fo.points, y)
    has_nb = np.isfinite(nb)
    nb_vals = nb[has_nb]

    sd_nn = float(np.std(nn, ddof=1))
    sd_nb = float(np.std(nb_vals, ddof=1))
    ratios = nn[has_nb] / nb_vals
    cv = (float(np.std(ratios, ddof=1)) / float(np.mean(ratios))
          if np.mean(ratios) != 0 else None)

    return {
        "nbc.nn_nb.sd_ratio": (sd_nn / sd_nb) if sd_nn > 0 and sd_nb > 0 else None,
        "nbc.nn_nb.mean_ratio": float(np.mean(nn) / np.mean(nb_vals)) if np.mean(nb_vals) != 0 else None,
        "nbc.nn_nb.cor": _pearson(nn[has_nb], nb_vals),
        "nbc.dist_ratio.coeff_var": cv,
        "nbc.nb_fitness.cor": _pearson(y.astype(float), indegree.astype(float)),
    }


def disp(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Dispersion of the best-objective subsets against the full design.

    For each quantile threshold the mean and median pairwise distance of the
    below-threshold subset is compared with the full sample by ratio and
    difference.
    """
    if fo.n_obs < 10:
        raise ValueError("disp needs at least 10 observations")
    quantiles = list(ctl["disp.quantiles"])
    metric = ctl["disp.dist_method"]
    if metric not in ("euclidean", "manhattan"):
        raise ValueError(f"unknown disp.dist_method '{metric}'")
    scipy_metric = "cityblock" if metric == "manhattan" else "euclidean"

    y = fo.y_for_min
    full = pdist(fo.points, metric=scipy_metric)
    full_mean = float(np.mean(full))
    full_median = float(np.median(full))

    per_q: dict[float, dict] = {}
    for q in quantiles:
        thr = quantile(y, q)
        subset = fo.points[y <= thr]
        if subset.shape[0] < 2:
            per_q[q] = {"ratio_mean": None, "ratio_median": None,
                        "diff_mean": None, "diff_median": None}
            continue
        sub = pdist(subset, metric=scipy_metric)
        sm, smed = float(np.mean(sub)), float(np.median(sub))
        per_q[q] = {
            "ratio_mean": sm / full_mean if full_mean != 0 else None,
            "ratio_median": smed / full_median if full_median != 0 else None,
            "diff_mean": sm - full_mean,
            "diff_median": smed - full_median,
        }

    out: dict = {}
    for stat in ("ratio_mean", "ratio_median", "diff_mean", "diff_median"):
        for q in quantiles:
            out[f"disp.{stat}_{_pct(q)}"] = per_q[q][stat]
    return out


def _pct(q: float) -> str:
    scaled = q * 100
    if abs(scaled - round(scaled)) < 1e-9:
        return f"{int(round(scaled)):02d}"
    return f"{scaled:g}"
