"""Nearest-better clustering and dispersion feature sets."""
import numpy as np
import pytest

from lkit.core import create_feature_object
from lkit.features.dist import nearest_better_stats
from lkit.registry import calculate_feature_set


def _nbc_oracle(points, y):
    """Quadratic-scan recomputation of the five nbc features."""
    n = len(points)
    dist = np.linalg.norm(points[:, None] - points[None, :], axis=2)
    nn, nb, nb_target = [], [], []
    for i in range(n):
        nn.append(min(dist[i, j] for j in range(n) if j != i))
        better = [j for j in range(n)
                  if y[j] < y[i] or (y[j] == y[i] and j < i)]
        if better:
            dists = [(dist[i, j], j) for j in better]
            d, j = min(dists)
            nb.append(d)
            nb_target.append(j)
        else:
            nb.append(None)
            nb_target.append(None)
    indegree = [sum(1 for t in nb_target if t == i) for i in range(n)]
    nn = np.array(nn)
    nb_vals = np.array([v for v in nb if v is not None])
    nn_sub = np.array([nn[i] for i in range(n) if nb[i] is not None])
    ratios = nn_sub / nb_vals

    def cor(a, b):
        return float(np.corrcoef(a, b)[0, 1])

    return {
        "nbc.nn_nb.sd_ratio": np.std(nn, ddof=1) / np.std(nb_vals, ddof=1),
        "nbc.nn_nb.mean_ratio": nn.mean() / nb_vals.mean(),
        "nbc.nn_nb.cor": cor(nn_sub, nb_vals),
        "nbc.dist_ratio.coeff_var": np.std(ratios, ddof=1) / ratios.mean(),
        "nbc.nb_fitness.cor": cor(np.asarray(y, dtype=float), np.array(indegree, dtype=float)),
    }


def test_nbc_matches_bruteforce_oracle(rng):
    for _ in range(10):
        X = rng.uniform(-5, 5, size=(20, 2))
        y = rng.normal(size=20)
        fo = create_feature_object(X, y, lower=-5, upper=5)
        feats = calculate_feature_set(fo, "nbc")
        oracle = _nbc_oracle(X, y)
        for key, want in oracle.items():
            assert feats[key] == pytest.approx(want, abs=1e-10)


def test_nbc_equally_spaced_monotone_mean_ratio_one():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    y = np.arange(10, dtype=float)
    fo = create_feature_object(X, y)
    feats = calculate_feature_set(fo, "nbc")
    # nn = nb = 1 for every non-best point
    assert feats["nbc.nn_nb.mean_ratio"] == pytest.approx(1.0)
    assert feats["nbc.dist_ratio.coeff_var"] == pytest.approx(0.0, abs=1e-12)


def test_nbc_indegree_sums_to_n_minus_one(rng):
    X = rng.uniform(size=(50, 3))
    y = rng.normal(size=50)  # continuous, no ties
    nn, nb, indegree = nearest_better_stats(X, y)
    assert indegree.sum() == 49
    assert np.isnan(nb).sum() == 1  # only the global best lacks one


def test_nbc_rigid_motion_invariance(rng):
    X = rng.uniform(-1, 1, size=(40, 2))
    y = rng.normal(size=40)
    theta = 0.7
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    X2 = X @ R.T + np.array([3.0, -1.0])
    a = calculate_feature_set(create_feature_object(X, y), "nbc")
    b = calculate_feature_set(create_feature_object(X2, y), "nbc")
    for key in a:
        if key.endswith("costs_runtime"):
            continue
        assert a[key] == pytest.approx(b[key], abs=1e-9)


def test_nbc_minimum_observations():
    fo = create_feature_object([[0.0], [1.0], [2.0]], [1, 2, 3])
    with pytest.raises(ValueError, match="at least 5"):
        calculate_feature_set(fo, "nbc")


def test_nbc_paper_values_on_gallagher():
    from lkit.core import SampleSpec, create_initial_sample
    from lkit.problems import make_problem

    prob = make_problem("gallagher101", 2, seed=2)
    X = create_initial_sample(SampleSpec(800, 2, -5, 5, "uniform", 1))
    fo = create_feature_object(X, prob.batch(X), lower=-5, upper=5)
    feats = calculate_feature_set(fo, "nbc")
    targets = {
        "nbc.nn_nb.sd_ratio": 0.303,
        "nbc.nn_nb.mean_ratio": 0.605,
        "nbc.nn_nb.cor": 0.271,
        "nbc.dist_ratio.coeff_var": 0.383,
        "nbc.nb_fitness.cor": -0.364,
    }
    for key, target in targets.items():
        assert abs(feats[key] - target) <= 0.2


# ---------------------------------------------------------------------------
# dispersion

def _disp_oracle(points, y, q, metric="euclidean"):
    def dist(a, b):
        d = a - b
        return float(np.abs(d).sum()) if metric == "manhattan" else float(np.linalg.norm(d))

    def pair_stats(pts):
        vals = [dist(pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts))]
        return np.mean(vals), np.median(vals)

    thr = np.quantile(y, q, method="linear")
    subset = points[y <= thr]
    full_mean, full_median = pair_stats(points)
    sub_mean, sub_median = pair_stats(subset)
    return {
        "ratio_mean": sub_mean / full_mean,
        "ratio_median": sub_median / full_median,
        "diff_mean": sub_mean - full_mean,
        "diff_median": sub_median - full_median,
    }


def test_disp_full_subset_is_identity(rng):
    X = rng.uniform(size=(30, 2))
    y = rng.normal(size=30)
    fo = create_feature_object(X, y)
    feats = calculate_feature_set(fo, "disp", control={"disp.quantiles": (1.0,)})
    assert feats["disp.ratio_mean_100"] == pytest.approx(1.0)
    assert feats["disp.ratio_median_100"] == pytest.approx(1.0)
    assert feats["disp.diff_mean_100"] == pytest.approx(0.0, abs=1e-12)
    assert feats["disp.diff_median_100"] == pytest.approx(0.0, abs=1e-12)


def test_disp_sphere_concentration(rng):
    X = rng.uniform(-5, 5, size=(400, 2))
    y = np.sum(X ** 2, axis=1)
    fo = create_feature_object(X, y, lower=-5, upper=5)
    feats = calculate_feature_set(fo, "disp")
    for q in ("02", "05", "10", "25"):
        assert feats[f"disp.ratio_mean_{q}"] < 1.0
        assert feats[f"disp.diff_mean_{q}"] < 0.0


def test_disp_manhattan_equals_euclidean_in_1d(rng):
    X = rng.uniform(size=(40, 1))
    y = rng.normal(size=40)
    fo = create_feature_object(X, y)
    a = calculate_feature_set(fo, "disp")
    b = calculate_feature_set(fo, "disp", control={"disp.dist_method": "manhattan"})
    for key in a:
        if key.endswith("costs_runtime"):
            continue
        assert a[key] == pytest.approx(b[key], abs=1e-12)


def test_disp_matches_bruteforce_oracle(rng):
    for _ in range(5):
        X = rng.uniform(-2, 2, size=(40, 2))
        y = rng.normal(size=40)
        fo = create_feature_object(X, y)
        for metric in ("euclidean", "manhattan"):
            feats = calculate_feature_set(fo, "disp",
                                          control={"disp.dist_method": metric})
            for q, tag in ((0.10, "10"), (0.25, "25")):
                oracle = _disp_oracle(X, y, q, metric)
                for stat in ("ratio_mean", "ratio_median", "diff_mean", "diff_median"):
                    assert feats[f"disp.{stat}_{tag}"] == pytest.approx(
                        oracle[stat], abs=1e-10)


def test_disp_rigid_motion_invariance_euclidean(rng):
    X = rng.uniform(-1, 1, size=(40, 2))
    y = rng.normal(size=40)
    theta = 1.1
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    a = calculate_feature_set(create_feature_object(X, y), "disp")
    b = calculate_feature_set(create_feature_object(X @ R.T + 2.0, y), "disp")
    for key in a:
        if key.endswith("costs_runtime"):
            continue
        assert a[key] == pytest.approx(b[key], abs=1e-9)


def test_disp_tiny_subset_missing(rng):
    X = rng.uniform(size=(12, 2))
    y = rng.normal(size=12)
    fo = create_feature_object(X, y)
    # 2% of 12 points leaves a single point below the threshold
    feats = calculate_feature_set(fo, "disp")
    assert feats["disp.ratio_mean_02"] is None
    assert feats["disp.costs_fun_evals"] == 0
