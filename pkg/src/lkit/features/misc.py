"""Miscellaneous feature sets: basic design facts, per-cell linear models and
principal component summaries."""
from __future__ import annotations

import numpy as np

from lkit.core import FeatureObject
from lkit.numkit import fit_least_squares, sym_eigen


def basic(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Directly observable facts of the initial design."""
    has_grid = fo.grid is not None
    blocks = fo.grid.blocks if has_grid else None
    filled = fo.grid.n_filled if has_grid else None
    total = fo.grid.n_cells if has_grid else None
    return {
        "basic.dim": fo.dim,
        "basic.n_obs": fo.n_obs,
        "basic.lower_min": float(fo.lower.min()),
        "basic.lower_max": float(fo.lower.max()),
        "basic.upper_min": float(fo.upper.min()),
        "basic.upper_max": float(fo.upper.max()),
        "basic.objective_min": float(fo.objectives.min()),
        "basic.objective_max": float(fo.objectives.max()),
        "basic.blocks_min": int(blocks.min()) if has_grid else None,
        "basic.blocks_max": int(blocks.max()) if has_grid else None,
        "basic.cells_filled": filled,
        "basic.cells_total": total,
        "basic.cells_filled_ratio": (filled / total) if has_grid else None,
        "basic.minimize": int(fo.minimize),
    }


def limo(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Aggregates of per-cell linear-model coefficient vectors.

    Cells need at least dim + 2 points and a full-rank fit; otherwise they
    are skipped rather than padded with fabricated coefficients.
    """
    grid = fo.grid
    d = fo.dim
    vectors = []
    for cell_id, members in sorted(grid.members().items()):
        if members.size < d + 2:
            continue
        fit = fit_least_squares(fo.points[members], fo.objectives[members])
        if fit.rank_deficient:
            continue
        vectors.append(fit.coefficients[1:])

    names = [
        "avg_length", "vec_cor", "coef_sd_ratio", "coef_sd_mean",
        "avg_length_norm", "vec_cor_norm", "coef_sd_ratio_norm", "coef_sd_mean_norm",
        "length_mean", "length_sd", "coef_ratio_mean", "coef_ratio_sd",
    ]
    if not vectors:
        return {f"limo.{k}": None for k in names}

    V = np.array(vectors)
    lengths = np.linalg.norm(V, axis=1)
    nonzero = lengths > 0
    U = V[nonzero] / lengths[nonzero][:, None]

    out = {}
    out["limo.avg_length"] = float(np.linalg.norm(V.mean(axis=0)))
    out["limo.vec_cor"] = _mean_pairwise_cor(V)
    out["limo.coef_sd_ratio"], out["limo.coef_sd_mean"] = _sd_summary(V)
    out["limo.avg_length_norm"] = float(np.linalg.norm(U.mean(axis=0))) if U.size else None
    out["limo.vec_cor_norm"] = _mean_pairwise_cor(U)
    out["limo.coef_sd_ratio_norm"], out["limo.coef_sd_mean_norm"] = _sd_summary(U)
    out["limo.length_mean"] = float(lengths.mean())
    out["limo.length_sd"] = float(np.std(lengths, ddof=1)) if lengths.size > 1 else None

    ratios = []
    for v in V:
        av = np.abs(v)
        ratios.append(float(av.max() / av.min()) if av.min() > 0 else None)
    vals = np.array([r for r in ratios if r is not None])
    out["limo.coef_ratio_mean"] = float(vals.mean()) if vals.size else None
    out["limo.coef_ratio_sd"] = float(np.std(vals, ddof=1)) if vals.size > 1 else None
    return {f"limo.{k}": out[f"limo.{k}"] for k in names}


def _mean_pairwise_cor(V: np.ndarray):
    """Mean Pearson correlation over all vector pairs, coordinates as cases."""
    if V.shape[0] < 2 or V.shape[1] < 2:
        return None
    cors = []
    for i in range(V.shape[0]):
        for j in range(i + 1, V.shape[0]):
            a, b = V[i], V[j]
            if np.std(a) == 0 or np.std(b) == 0:
                continue
            cors.append(float(np.corrcoef(a, b)[0, 1]))
    return float(np.mean(cors)) if cors else None


def _sd_summary(V: np.ndarray):
    if V.shape[0] < 2:
        return None, None
    sds = np.std(V, axis=0, ddof=1)
    ratio = float(sds.max() / sds.min()) if sds.min() > 0 else None
    return ratio, float(sds.mean())


def pca(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Principal-component compactness of the design, with and without y.

    Per combination of {covariance, correlation} x {design only, design plus
    objectives}: the proportion of components needed to reach the variance
    threshold and the variance fraction of the first component.
    """
    if fo.n_obs <= fo.dim + 1:
        raise ValueError("pca needs more than dim + 1 observations")
    X = fo.points
    XY = np.column_stack([fo.points, fo.objectives])
    combos = {
        "cov_x": (X, "cov", float(ctl["pca.cov_x"])),
        "cor_x": (X, "cor", float(ctl["pca.cor_x"])),
        "cov_init": (XY, "cov", float(ctl["pca.cov_init"])),
        "cor_init": (XY, "cor", float(ctl["pca.cor_init"])),
    }
    expl, first = {}, {}
    for name, (mat, kind, thr) in combos.items():
        sds = np.std(mat, axis=0, ddof=1)
        if kind == "cor" and np.any(sds == 0):
            expl[name], first[name] = None, None
            continue
        M = np.cov(mat, rowvar=False) if kind == "cov" else np.corrcoef(mat, rowvar=False)
        vals, _ = sym_eigen(np.atleast_2d(M))
        vals = np.clip(vals, 0.0, None)
        total = vals.sum()
        if total <= 0:
            expl[name], first[name] = None, None
            continue
        frac = np.cumsum(vals) / total
        k = int(np.searchsorted(frac, thr - 1e-12) + 1)
        expl[name] = k / vals.size
        first[name] = float(vals[0] / total)

    out = {}
    for name in ("cov_x", "cor_x", "cov_init", "cor_init"):
        out[f"pca.expl_var.{name}"] = expl[name]
    for name in ("cov_x", "cor_x", "cov_init", "cor_init"):
        out[f"pca.pc1.{name}"] = first[name]
    return out
