"""Shared numerical kernel.

Least squares, symmetric eigendecomposition, density-based descriptive
statistics, discriminant classifiers with cross-validation, single-linkage
clustering, a bounded derivative-free local search and bounds-respecting
finite differences. Everything here is pure given its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist


# ---------------------------------------------------------------------------
# least squares

@dataclass
class LinearFit:
    coefficients: np.ndarray      # intercept first
    adjusted_r_squared: float
    residuals: np.ndarray
    rank_deficient: bool


def fit_least_squares(X: np.ndarray, y: np.ndarray) -> LinearFit:
    """Ordinary least squares of y on [1, X] via orthogonal factorization.

    Columns that are linearly dependent on earlier ones get zero
    coefficients and the fit is flagged rank deficient. A zero-variance
    response has adjusted R^2 defined as 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    design = np.column_stack([np.ones(n), X])
    p_total = design.shape[1]
    if n < p_total:
        raise ValueError(f"need at least {p_total} rows for {p_total} columns, got {n}")

    coefs = np.zeros(p_total)
    rank_deficient = False
    _, R, piv = _qr_pivot(design)
    tol = max(design.shape) * np.finfo(float).eps * max(abs(R[0, 0]), 1.0)
    rank = int(np.sum(np.abs(np.diag(R)) > tol))
    keep = piv[:rank]
    if rank < p_total:
        rank_deficient = True
    sub = design[:, keep]
    sol, *_ = np.linalg.lstsq(sub, y, rcond=None)
    coefs[keep] = sol

    fitted = design @ coefs
    resid = y - fitted
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    p = rank - 1 if 0 in keep else rank  # non-intercept predictors
    if ss_tot <= 0:
        adj = 0.0
    elif n - p - 1 <= 0:
        adj = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 - ss_res / ss_tot
        adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
    return LinearFit(coefficients=coefs, adjusted_r_squared=float(adj),
                     residuals=resid, rank_deficient=rank_deficient)


def _qr_pivot(A: np.ndarray):
    from scipy.linalg import qr

    Q, R, piv = qr(A, mode="economic", pivoting=True)
    return Q, R, piv


# ---------------------------------------------------------------------------
# symmetric eigendecomposition

def sym_eigen(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors of a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > 1e-9 * scale:
        raise ValueError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(A)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


# ---------------------------------------------------------------------------
# kernel density summary

def kde_peak_count(values: np.ndarray, bandwidth: Optional[float] = None):
    """Peak count of a Gaussian KDE plus moment skewness and excess kurtosis.

    The density is evaluated on a 512-point grid spanning
    [min - 3h, max + 3h]; peaks are strict interior local maxima reaching at
    least 1% of the maximum density (smaller ripples are sampling artifacts,
    not modes). Bandwidth defaults to Silverman's rule. A zero-variance
    sample reports one peak and missing moments.
    """
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    if n < 4:
        raise ValueError("need at least 4 values")
    sd = float(np.std(values, ddof=1))
    if sd == 0.0:
        return 1, None, None

    if bandwidth is None:
        iqr = float(np.percentile(values, 75) - np.percentile(values, 25))
        spread = min(sd, iqr / 1.34) if iqr > 0 else sd
        bandwidth = 0.9 * spread * n ** (-0.2)
    h = float(bandwidth)

    grid = np.linspace(values.min() - 3 * h, values.max() + 3 * h, 512)
    z = (grid[:, None] - values[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (n * h * np.sqrt(2 * np.pi))
    interior = (dens[1:-1] > dens[:-2]) & (dens[1:-1] > dens[2:])
    relevant = dens[1:-1] >= 0.01 * dens.max()
    peaks = int(np.count_nonzero(interior & relevant))

    centered = values - values.mean()
    m2 = float(np.mean(centered ** 2))
    m3 = float(np.mean(centered ** 3))
    m4 = float(np.mean(centered ** 4))
    skewness = m3 / m2 ** 1.5
    kurtosis = m4 / m2 ** 2 - 3.0
    return max(peaks, 1), skewness, kurtosis


# ---------------------------------------------------------------------------
# discriminant classifiers + cross-validation

def _reg_cov(X: np.ndarray) -> np.ndarray:
    """Covariance with a small trace-scaled ridge so inversion never aborts."""
    d = X.shape[1]
    if X.shape[0] < 2:
        cov = np.eye(d)
    else:
        cov = np.cov(X, rowvar=False)
        cov = np.atleast_2d(cov)
    ridge = 1e-8 * max(np.trace(cov) / d, 1e-12)
    return cov + ridge * np.eye(d)


def _log_gauss(X: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    d = mean.size
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        cov = cov + 1e-6 * np.eye(d)
        sign, logdet = np.linalg.slogdet(cov)
    diff = X - mean
    sol = np.linalg.solve(cov, diff.T).T
    maha = np.sum(diff * sol, axis=1)
    return -0.5 * (maha + logdet + d * np.log(2 * np.pi))


class Classifier:
    """Gaussian discriminant classifier: lda, qda or gmda.

    gmda fits a 2-component Gaussian mixture per class by 50 EM iterations
    with a 1e-6 covariance ridge (a mixture-discriminant stand-in). Classes
    too small for their own covariance fall back to the pooled one.
    """

    def __init__(self, kind: str):
        if kind not in ("lda", "qda", "gmda"):
            raise ValueError(f"unknown classifier kind '{kind}'")
        self.kind = kind
        self.classes_: np.ndarray = np.array([])
        self._stats: list = []

    def fit(self, X: np.ndarray, labels: np.ndarray) -> "Classifier":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        labels = np.asarray(labels).ravel()
        self.classes_ = np.unique(labels)
        d = X.shape[1]

        pooled = np.zeros((d, d))
        means = {}
        for c in self.classes_:
            sub = X[labels == c]
            means[c] = sub.mean(axis=0)
            if sub.shape[0] > 1:
                pooled += (sub - means[c]).T @ (sub - means[c])
        denom = max(X.shape[0] - self.classes_.size, 1)
        pooled = pooled / denom
        pooled += 1e-8 * max(np.trace(pooled) / d, 1e-12) * np.eye(d)

        self._stats = []
        for c in self.classes_:
            sub = X[labels == c]
            prior = sub.shape[0] / X.shape[0]
            if self.kind == "lda":
                self._stats.append(("gauss", prior, means[c], pooled))
            elif self.kind == "qda":
                cov = _reg_cov(sub) if sub.shape[0] >= d + 2 else pooled
                self._stats.append(("gauss", prior, means[c], cov))
            else:
                self._stats.append(self._fit_mixture(sub, prior, pooled))
        return self

    def _fit_mixture(self, sub: np.ndarray, prior: float, pooled: np.ndarray):
        d = sub.shape[1]
        if sub.shape[0] < 2 * (d + 2):
            return ("gauss", prior, sub.mean(axis=0), _reg_cov(sub) if sub.shape[0] >= d + 2 else pooled)
        # deterministic init: split along the first principal axis
        centered = sub - sub.mean(axis=0)
        _, vecs = sym_eigen(_reg_cov(sub))
        proj = centered @ vecs[:, 0]
        spread = np.std(proj) if np.std(proj) > 0 else 1.0
        mus = [sub.mean(axis=0) - vecs[:, 0] * spread, sub.mean(axis=0) + vecs[:, 0] * spread]
        covs = [_reg_cov(sub), _reg_cov(sub)]
        weights = np.array([0.5, 0.5])
        for _ in range(50):
            logp = np.stack([np.log(weights[k] + 1e-300) + _log_gauss(sub, mus[k], covs[k])
                             for k in range(2)], axis=1)
            mx = logp.max(axis=1, keepdims=True)
            resp = np.exp(logp - mx)
            resp /= resp.sum(axis=1, keepdims=True)
            nk = resp.sum(axis=0) + 1e-12
            weights = nk / sub.shape[0]
            for k in range(2):
                mus[k] = (resp[:, k:k + 1] * sub).sum(axis=0) / nk[k]
                diff = sub - mus[k]
                cov = (resp[:, k] * diff.T) @ diff / nk[k]
                covs[k] = cov + 1e-6 * np.eye(d)
        return ("mixture", prior, weights, mus, covs)

    def _log_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cols = []
        for stat in self._stats:
            if stat[0] == "gauss":
                _, prior, mean, cov = stat
                cols.append(np.log(prior + 1e-300) + _log_gauss(X, mean, cov))
            else:
                _, prior, weights, mus, covs = stat
                comp = np.stack([np.log(weights[k] + 1e-300) + _log_gauss(X, mus[k], covs[k])
                                 for k in range(len(mus))], axis=1)
                mx = comp.max(axis=1)
                cols.append(np.log(prior + 1e-300) + mx +
                            np.log(np.exp(comp - mx[:, None]).sum(axis=1)))
        return np.stack(cols, axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.classes_.size == 1:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            return np.full(X.shape[0], self.classes_[0])
        return self.classes_[np.argmax(self._log_scores(X), axis=1)]


def cross_validated_mmce(X: np.ndarray, labels: np.ndarray, classifier_kind: str,
                         folds: int = 10, seed: int = 0,
                         rng: Optional[np.random.Generator] = None) -> float:
    """Mean misclassification error under stratified k-fold cross-validation."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = np.asarray(labels).ravel()
    n = labels.size
    if n < folds:
        raise ValueError(f"need at least {folds} observations for {folds} folds")
    if np.unique(labels).size < 2:
        raise ValueError("both classes must be present")
    if rng is None:
        rng = np.random.default_rng(seed)

    fold_of = np.empty(n, dtype=int)
    cursor = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            fold_of[i] = (pos + cursor) % folds
        cursor += idx.size

    errors = []
    for f in range(folds):
        test = fold_of == f
        if not np.any(test):
            continue
        train = ~test
        clf = Classifier(classifier_kind).fit(X[train], labels[train])
        pred = clf.predict(X[test])
        errors.append(float(np.mean(pred != labels[test])))
    return float(np.mean(errors))


# ---------------------------------------------------------------------------
# single-linkage clustering

def single_linkage_clusters(points: np.ndarray, cut_distance: float) -> np.ndarray:
    """Flat clusters from cutting the single-linkage dendrogram at a height.

    Two points share a cluster iff they are connected by a chain of pairwise
    distances <= cut_distance. Labels are 0-based and renumbered by first
    appearance.
    """
    if cut_distance <= 0:
        raise ValueError("cut_distance must be > 0")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n == 1:
        return np.zeros(1, dtype=int)
    Z = linkage(pdist(points), method="single")
    raw = fcluster(Z, t=cut_distance, criterion="distance")
    labels = np.empty(n, dtype=int)
    seen: dict[int, int] = {}
    for i, r in enumerate(raw):
        labels[i] = seen.setdefault(int(r), len(seen))
    return labels


# ---------------------------------------------------------------------------
# bounded local search (Nelder-Mead with box clamping)

def local_search(function: Callable[[np.ndarray], float], x0: np.ndarray,
                 lower: np.ndarray, upper: np.ndarray, budget: int):
    """Box-constrained Nelder-Mead; returns (x_best, f_best, evals_used).

    Every candidate is clamped into [lower, upper] before evaluation, so the
    function is never called outside the box. Terminates when the simplex
    diameter drops below 1e-8 or the evaluation budget is exhausted.
    """
    x0 = np.asarray(x0, dtype=float).copy()
    lower = np.broadcast_to(np.asarray(lower, dtype=float), x0.shape).copy()
    upper = np.broadcast_to(np.asarray(upper, dtype=float), x0.shape).copy()
    d = x0.size
    if budget < d + 1:
        raise ValueError(f"budget must be at least dim + 1 = {d + 1}")
    if np.any(x0 < lower) or np.any(x0 > upper):
        raise ValueError("x0 outside bounds")

    evals = 0

    def clamp(x):
        return np.minimum(np.maximum(x, lower), upper)

    def f(x):
        nonlocal evals
        evals += 1
        return float(function(x))

    span = np.where(np.isfinite(upper - lower), upper - lower, 2.0)
    simplex = [x0]
    for i in range(d):
        step = 0.05 * span[i]
        v = x0.copy()
        v[i] = v[i] + step if v[i] + step <= upper[i] else v[i] - step
        simplex.append(clamp(v))
    simplex = np.array(simplex)
    values = np.array([f(v) for v in simplex])

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    while evals < budget:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) < 1e-8:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = clamp(centroid + alpha * (centroid - simplex[-1]))
        fr = f(xr)
        if fr < values[0] and evals < budget:
            xe = clamp(centroid + gamma * (xr - centroid))
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            xc = clamp(centroid + rho * (simplex[-1] - centroid))
            if evals >= budget:
                break
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, d + 1):
                    if evals >= budget:
                        break
                    simplex[i] = clamp(simplex[0] + sigma * (simplex[i] - simplex[0]))
                    values[i] = f(simplex[i])

    best = int(np.argmin(values))
    return simplex[best].copy(), float(values[best]), evals


# ---------------------------------------------------------------------------
# bounds-respecting finite differences

def fd_gradient_hessian(function: Callable[[np.ndarray], float], x: np.ndarray,
                        lower: np.ndarray, upper: np.ndarray, step: float = 1e-4):
    """Finite-difference gradient and symmetric Hessian estimate.

    Per-coordinate steps are step * (upper - lower) (or step * max(1, |x|)
    for infinite ranges). Stencil points never leave finite bounds: where a
    central stencil would, the difference switches to one-sided. Returns
    (gradient, hessian); degenerate coordinates give NaN entries.
    """
    x = np.asarray(x, dtype=float).copy()
    d = x.size
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (d,)).copy()
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (d,)).copy()
    if np.any(x < lower) or np.any(x > upper):
        raise ValueError("x outside bounds")

    span = upper - lower
    h = np.where(np.isfinite(span), step * span, step * np.maximum(1.0, np.abs(x)))

    # per-coordinate evaluation abscissae, kept inside the box
    plus = np.minimum(x + h, upper)
    minus = np.maximum(x - h, lower)

    cache: dict[tuple, float] = {}

    def f_at(point):
        key = tuple(point)
        if key not in cache:
            cache[key] = float(function(np.asarray(point)))
        return cache[key]

    grad = np.full(d, np.nan)
    hess = np.full((d, d), np.nan)
    f0 = f_at(x)

    for i in range(d):
        if plus[i] <= minus[i]:
            continue  # degenerate coordinate
        xp, xm = x.copy(), x.copy()
        xp[i], xm[i] = plus[i], minus[i]
        grad[i] = (f_at(xp) - f_at(xm)) / (plus[i] - minus[i])

        # three distinct abscissae for the diagonal second difference
        pts_i = sorted({minus[i], x[i], plus[i]})
        if len(pts_i) < 3:
            if plus[i] == x[i]:       # at the upper face: shift down
                pts_i = [max(x[i] - 2 * h[i], lower[i]), minus[i], x[i]]
            else:                     # at the lower face: shift up
                pts_i = [x[i], plus[i], min(x[i] + 2 * h[i], upper[i])]
            pts_i = sorted(set(pts_i))
        if len(pts_i) == 3:
            a, b, c = pts_i
            fa = f_at(_with(x, i, a))
            fb = f_at(_with(x, i, b))
            fc = f_at(_with(x, i, c))
            hess[i, i] = 2.0 * (fa / ((a - b) * (a - c)) +
                                fb / ((b - a) * (b - c)) +
                                fc / ((c - a) * (c - b)))

    for i in range(d):
        for j in range(i + 1, d):
            if plus[i] <= minus[i] or plus[j] <= minus[j]:
                continue
            pp = f_at(_with(_with(x, i, plus[i]), j, plus[j]))
            pm = f_at(_with(_with(x, i, plus[i]), j, minus[j]))
            mp = f_at(_with(_with(x, i, minus[i]), j, plus[j]))
            mm = f_at(_with(_with(x, i, minus[i]), j, minus[j]))
            hess[i, j] = (pp - pm - mp + mm) / ((plus[i] - minus[i]) * (plus[j] - minus[j]))
            hess[j, i] = hess[i, j]

    hess = 0.5 * (hess + hess.T)
    return grad, hess


def _with(x: np.ndarray, i: int, v: float) -> np.ndarray:
    out = x.copy()
    out[i] = v
    return out


# ---------------------------------------------------------------------------
# shared descriptive helpers

def quantile(values: np.ndarray, q: float) -> float:
    """Type-7 (linear interpolation) quantile, the single convention used."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def spread_stats(values) -> dict[str, Optional[float]]:
    """min / lq / mean / med / uq / max / sd over the non-missing entries."""
    arr = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=float)
    if arr.size == 0:
        return {k: None for k in ("min", "lq", "mean", "med", "uq", "max", "sd")}
    return {
        "min": float(arr.min()),
        "lq": quantile(arr, 0.25),
        "mean": float(arr.mean()),
        "med": quantile(arr, 0.5),
        "uq": quantile(arr, 0.75),
        "max": float(arr.max()),
        "sd": float(np.std(arr, ddof=1)) if arr.size > 1 else None,
    }


def basic_stats(values) -> dict[str, Optional[float]]:
    """min / mean / median / max / sd over the non-missing entries."""
    arr = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=float)
    if arr.size == 0:
        return {k: None for k in ("min", "mean", "median", "max", "sd")}
    return {
        "min": float(arr.min()),
        "mean": float(arr.mean()),
        "median": quantile(arr, 0.5),
        "max": float(arr.max()),
        "sd": float(np.std(arr, ddof=1)) if arr.size > 1 else None,
    }
