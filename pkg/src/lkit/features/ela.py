"""Classical landscape feature sets: convexity, curvature, objective
distribution, level sets, local searches and meta models."""
from __future__ import annotations

import numpy as np

from lkit.core import FeatureObject
from lkit.numkit import (
    cross_validated_mmce,
    fd_gradient_hessian,
    fit_least_squares,
    kde_peak_count,
    local_search,
    quantile,
    single_linkage_clusters,
    spread_stats,
    sym_eigen,
)


def ela_conv(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Convexity probabilities from random convex combinations of sample pairs.

    Each of the N pairs costs one extra function evaluation. diff is
    f(w x_a + (1-w) x_b) minus the matching combination of the known values.
    """
    n_pairs = int(ctl["ela_conv.nsample"])
    tau = float(ctl["ela_conv.threshold"])
    n = fo.n_obs

    a = rng.integers(n, size=n_pairs)
    b = rng.integers(n - 1, size=n_pairs)
    b[b >= a] += 1
    w = rng.uniform(size=n_pairs)

    combo = w[:, None] * fo.points[a] + (1.0 - w[:, None]) * fo.points[b]
    f_combo = fo.evaluate_batch(combo)
    diff = f_combo - (w * fo.objectives[a] + (1.0 - w) * fo.objectives[b])

    return {
        "ela_conv.conv_prob": float(np.mean(diff < -tau)),
        "ela_conv.lin_prob": float(np.mean(np.abs(diff) <= tau)),
        "ela_conv.diff_mean": float(np.mean(diff)),
        "ela_conv.diff_abs_mean": float(np.mean(np.abs(diff))),
    }


def ela_curv(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Aggregated gradient and Hessian shape estimates on a subsample.

    Per point: gradient norm, ratio of biggest to smallest absolute gradient
    component and ratio of biggest to smallest absolute Hessian eigenvalue,
    each aggregated with min/lq/mean/med/uq/max/sd plus a missing-value count.
    """
    size = ctl["ela_curv.sample_size"]
    size = min(int(size) if size is not None else 100 * fo.dim, fo.n_obs)
    step = float(ctl["ela_curv.step"])
    idx = rng.choice(fo.n_obs, size=size, replace=False)

    norms, scales, conds = [], [], []
    for i in idx:
        grad, hess = fd_gradient_hessian(fo.evaluate, fo.points[i], fo.lower, fo.upper, step)
        finite_g = np.isfinite(grad)
        norms.append(float(np.linalg.norm(grad[finite_g])) if np.any(finite_g) else None)
        ag = np.abs(grad[finite_g])
        if ag.size and ag.min() > 0:
            scales.append(float(ag.max() / ag.min()))
        else:
            scales.append(None)
        if np.all(np.isfinite(hess)):
            vals, _ = sym_eigen(hess)
            av = np.abs(vals)
            # near-zero spectra are finite-difference noise, not curvature
            if av.min() > 1e-6 * max(1.0, av.max()):
                conds.append(float(av.max() / av.min()))
            else:
                conds.append(None)
        else:
            conds.append(None)

    out: dict = {}
    for name, series in (("grad_norm", norms), ("grad_scale", scales),
                         ("hessian_cond", conds)):
        stats = spread_stats(series)
        for key in ("min", "lq", "mean", "med", "uq", "max", "sd"):
            out[f"ela_curv.{name}.{key}"] = stats[key]
        out[f"ela_curv.{name}.nas"] = sum(1 for v in series if v is None or not np.isfinite(v))
    return out


def ela_distr(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Skewness, excess kurtosis and KDE peak count of the objective values."""
    peaks, skewness, kurtosis = kde_peak_count(fo.objectives)
    return {
        "ela_distr.skewness": skewness,
        "ela_distr.kurtosis": kurtosis,
        "ela_distr.n_peaks": int(peaks),
    }


def ela_level(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Cross-validated misclassification errors of below-quantile classifiers.

    For each threshold quantile, the design is labeled by whether the
    objective is at most the quantile; each classifier's 10-fold mmce and the
    pairwise mmce ratios become features.
    """
    if fo.n_obs < 20:
        raise ValueError("ela_level needs at least 20 observations")
    quantiles = list(ctl["ela_level.quantiles"])
    classifiers = list(ctl["ela_level.classifiers"])
    folds = int(ctl["ela_level.folds"])
    y = fo.y_for_min

    mmce: dict = {}
    for q in quantiles:
        thr = quantile(y, q)
        labels = (y <= thr).astype(int)
        ok = 0 < labels.sum() < labels.size
        for kind in classifiers:
            if not ok:
                mmce[(q, kind)] = None
                continue
            mmce[(q, kind)] = cross_validated_mmce(fo.points, labels, kind,
                                                   folds=folds, rng=rng)

    out: dict = {}
    for q in quantiles:
        for kind in classifiers:
            out[f"ela_level.mmce_{kind}_{_pct(q)}"] = mmce[(q, kind)]
    for q in quantiles:
        for i in range(len(classifiers)):
            for j in range(i + 1, len(classifiers)):
                a, b = mmce[(q, classifiers[i])], mmce[(q, classifiers[j])]
                name = f"ela_level.{classifiers[i]}_{classifiers[j]}_{_pct(q)}"
                out[name] = (a / b) if (a is not None and b not in (None, 0.0)) else None
    return out


def _pct(q: float) -> str:
    return f"{q * 100:g}"


def ela_local(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Basin structure from bounded local searches started at sample points.

    Optima are clustered by single linkage at a cut of 10% of the domain
    diagonal; cluster counts, objective ratios, basin sizes and per-search
    evaluation counts are aggregated.
    """
    n_starts = ctl["ela_local.n_starts"]
    n_starts = min(int(n_starts) if n_starts is not None else 50 * fo.dim, fo.n_obs)
    budget = ctl["ela_local.budget"]
    budget = int(budget) if budget is not None else 1000 * fo.dim
    cut_frac = float(ctl["ela_local.clust_cut"])

    sign = 1.0 if fo.minimize else -1.0

    def oriented(x):
        return sign * fo.evaluate(x)

    starts = rng.choice(fo.n_obs, size=n_starts, replace=False)
    optima = np.empty((n_starts, fo.dim))
    values = np.empty(n_starts)
    evals = np.empty(n_starts)
    for k, i in enumerate(starts):
        x_star, f_star, used = local_search(oriented, fo.points[i], fo.lower, fo.upper, budget)
        optima[k], values[k], evals[k] = x_star, f_star, used

    span = fo.upper - fo.lower
    finite = np.isfinite(span)
    if not np.all(finite):
        span = np.where(finite, span, fo.points.max(axis=0) - fo.points.min(axis=0))
    cut = cut_frac * float(np.linalg.norm(span))
    labels = single_linkage_clusters(optima, max(cut, 1e-12))
    n_clusters = int(labels.max()) + 1

    cluster_obj = np.array([values[labels == c].mean() for c in range(n_clusters)])
    sizes = np.array([int(np.sum(labels == c)) for c in range(n_clusters)])
    best_val, worst_val = cluster_obj.min(), cluster_obj.max()
    atol = 1e-12 + 1e-8 * abs(best_val)
    best_mask = np.isclose(cluster_obj, best_val, rtol=1e-8, atol=atol)
    worst_mask = np.isclose(cluster_obj, worst_val, rtol=1e-8, atol=1e-12 + 1e-8 * abs(worst_val))

    mean_all = float(cluster_obj.mean())
    ev = spread_stats(evals)
    out = {
        "ela_local.n_optima": n_clusters,
        "ela_local.optima_ratio": n_clusters / n_starts,
        "ela_local.best2mean_obj_ratio": (float(best_val) / mean_all) if mean_all != 0 else None,
        "ela_local.basin_best_mean_size": float(sizes[best_mask].mean()),
        "ela_local.basin_nonbest_mean_size":
            float(sizes[~best_mask].mean()) if np.any(~best_mask) else None,
        "ela_local.basin_worst_mean_size": float(sizes[worst_mask].mean()),
    }
    for key in ("min", "lq", "mean", "med", "uq", "max", "sd"):
        out[f"ela_local.fun_evals.{key}"] = ev[key]
    return out


def ela_meta(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Fit quality of linear and quadratic surrogate models.

    Adjusted R^2 of the four model classes plus intercept, coefficient
    extremes of the plain linear model and the coefficient condition of the
    plain quadratic model.
    """
    d = fo.dim
    needed = (d + 1) * (d + 2) // 2 + 1
    if fo.n_obs < needed:
        raise ValueError(f"ela_meta needs at least {needed} observations for dim {d}")
    X, y = fo.points, fo.objectives

    inter_cols = [X[:, i] * X[:, j] for i in range(d) for j in range(i + 1, d)]
    designs = {
        "lin": X,
        "lin_int": np.column_stack([X] + inter_cols) if inter_cols else X,
        "quad": np.column_stack([X, X ** 2]),
        "quad_int": np.column_stack([X, X ** 2] + inter_cols) if inter_cols
                    else np.column_stack([X, X ** 2]),
    }
    fits = {name: fit_least_squares(mat, y) for name, mat in designs.items()}

    lin = fits["lin"]
    lin_coefs = np.abs(lin.coefficients[1:])
    coef_min = float(lin_coefs.min()) if lin_coefs.size else None
    coef_max = float(lin_coefs.max()) if lin_coefs.size else None
    coef_ratio = (coef_max / coef_min) if coef_min not in (None, 0.0) else None

    quad = fits["quad"]
    if quad.rank_deficient:
        quad_r2, quad_cond = None, None
    else:
        quad_r2 = quad.adjusted_r_squared
        sq = np.abs(quad.coefficients[1 + d:1 + 2 * d])
        quad_cond = float(sq.max() / sq.min()) if sq.min() > 0 else None

    quad_int = fits["quad_int"]
    return {
        "ela_meta.lin_simple.r2_adj": lin.adjusted_r_squared if not lin.rank_deficient else None,
        "ela_meta.lin_w_interact.r2_adj":
            fits["lin_int"].adjusted_r_squared if not fits["lin_int"].rank_deficient else None,
        "ela_meta.quad_simple.r2_adj": quad_r2,
        "ela_meta.quad_w_interact.r2_adj":
            quad_int.adjusted_r_squared if not quad_int.rank_deficient else None,
        "ela_meta.lin_simple.intercept": float(lin.coefficients[0]),
        "ela_meta.lin_simple.coef_min": coef_min,
        "ela_meta.lin_simple.coef_max": coef_max,
        "ela_meta.lin_simple.coef_ratio": coef_ratio,
        "ela_meta.quad_simple.cond": quad_cond,
    }
