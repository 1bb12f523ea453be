"""Classical feature sets: convexity, curvature, distribution, level sets,
local search and meta models."""
import numpy as np
import pytest

from lkit.core import SampleSpec, create_feature_object, create_initial_sample
from lkit.registry import MissingFunctionError, calculate_feature_set


def _fo(function, n=200, dim=2, lo=-5.0, up=5.0, seed=1, blocks=None):
    X = create_initial_sample(SampleSpec(n, dim, lo, up, "uniform", seed))
    y = np.array([function(row) for row in X])
    return create_feature_object(X, y, lower=lo, upper=up, blocks=blocks,
                                 function=function)


def sphere(x):
    return float(np.sum(x ** 2))


# ---------------------------------------------------------------------------
# ela_conv

def test_conv_sphere_convex():
    feats = calculate_feature_set(_fo(sphere), "ela_conv", seed=0)
    assert feats["ela_conv.conv_prob"] == 1.0
    assert feats["ela_conv.lin_prob"] == 0.0
    assert feats["ela_conv.diff_mean"] < 0
    assert feats["ela_conv.costs_fun_evals"] == 1000


def test_conv_linear_function():
    f = lambda x: float(2 * x[0] + 1)
    feats = calculate_feature_set(_fo(f), "ela_conv", seed=0)
    assert feats["ela_conv.lin_prob"] == 1.0
    assert abs(feats["ela_conv.diff_mean"]) < 1e-12


def test_conv_concave_mirror():
    f = lambda x: -float(np.sum(x ** 2))
    feats = calculate_feature_set(_fo(f), "ela_conv", seed=0)
    assert feats["ela_conv.conv_prob"] == 0.0
    assert feats["ela_conv.diff_mean"] > 0


def test_conv_requires_function():
    X = create_initial_sample(SampleSpec(50, 2, -5, 5, "uniform", 1))
    fo = create_feature_object(X, np.sum(X ** 2, axis=1), lower=-5, upper=5)
    with pytest.raises(MissingFunctionError, match="requires function"):
        calculate_feature_set(fo, "ela_conv")


def test_conv_pair_count_override():
    feats = calculate_feature_set(_fo(sphere), "ela_conv",
                                  control={"ela_conv.nsample": 123}, seed=0)
    assert feats["ela_conv.costs_fun_evals"] == 123


# ---------------------------------------------------------------------------
# ela_curv

def test_curv_elliptic_hessian_ratio():
    f = lambda x: float(x[0] ** 2 + 10 * x[1] ** 2)
    feats = calculate_feature_set(_fo(f), "ela_curv", seed=0)
    assert abs(feats["ela_curv.hessian_cond.min"] - 10) < 1e-3
    assert abs(feats["ela_curv.hessian_cond.max"] - 10) < 1e-3
    assert abs(feats["ela_curv.hessian_cond.mean"] - 10) < 1e-3
    assert feats["ela_curv.hessian_cond.nas"] == 0
    assert feats["ela_curv.costs_fun_evals"] > 0


def test_curv_linear_function_missing_ratios():
    f = lambda x: float(3 * x[0] + 4 * x[1])
    fo = _fo(f, n=60)
    feats = calculate_feature_set(fo, "ela_curv", seed=0)
    assert feats["ela_curv.grad_norm.sd"] < 1e-6
    assert abs(feats["ela_curv.grad_norm.mean"] - 5.0) < 1e-6
    assert feats["ela_curv.hessian_cond.mean"] is None
    assert feats["ela_curv.hessian_cond.nas"] == 60


def test_curv_aggregations_match_recomputation():
    # Rosenbrock on a small sample: recompute the per-point quantities
    # directly and aggregate them independently
    from lkit.numkit import fd_gradient_hessian, quantile

    f = lambda x: float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)
    fo = _fo(f, n=30)
    feats = calculate_feature_set(fo, "ela_curv",
                                  control={"ela_curv.sample_size": 30}, seed=7)
    norms = []
    for row in fo.points:
        grad, _ = fd_gradient_hessian(f, row, fo.lower, fo.upper, 1e-4)
        norms.append(np.linalg.norm(grad))
    norms = np.array(norms)
    assert abs(feats["ela_curv.grad_norm.mean"] - norms.mean()) < 1e-9
    assert abs(feats["ela_curv.grad_norm.min"] - norms.min()) < 1e-9
    assert abs(feats["ela_curv.grad_norm.med"] - quantile(norms, 0.5)) < 1e-9
    assert abs(feats["ela_curv.grad_norm.sd"] - np.std(norms, ddof=1)) < 1e-9


# ---------------------------------------------------------------------------
# ela_distr

def test_distr_delegates_to_kde(rng):
    X = rng.uniform(-5, 5, size=(10_000, 2))
    y = rng.normal(size=10_000)
    fo = create_feature_object(X, y, lower=-5, upper=5)
    feats = calculate_feature_set(fo, "ela_distr")
    assert abs(feats["ela_distr.skewness"]) < 0.1
    assert abs(feats["ela_distr.kurtosis"]) < 0.2
    assert feats["ela_distr.n_peaks"] == 1
    assert feats["ela_distr.costs_fun_evals"] == 0


def test_distr_bimodal_objectives(rng):
    X = rng.uniform(size=(1000, 2))
    y = np.concatenate([rng.normal(-10, 1, 500), rng.normal(10, 1, 500)])
    fo = create_feature_object(X, y)
    feats = calculate_feature_set(fo, "ela_distr")
    assert feats["ela_distr.n_peaks"] == 2


def test_distr_shuffle_invariance(rng):
    X = rng.uniform(size=(100, 2))
    y = rng.normal(size=100)
    fo = create_feature_object(X, y)
    perm = rng.permutation(100)
    fo2 = create_feature_object(X[perm], y[perm])
    a = calculate_feature_set(fo, "ela_distr")
    b = calculate_feature_set(fo2, "ela_distr")
    for key in ("ela_distr.skewness", "ela_distr.kurtosis", "ela_distr.n_peaks"):
        assert abs(a[key] - b[key]) < 1e-10


# ---------------------------------------------------------------------------
# ela_level

def test_level_linear_boundary_easy_for_lda():
    f = lambda x: float(x[0])
    feats = calculate_feature_set(_fo(f, n=300), "ela_level", seed=0)
    assert feats["ela_level.mmce_lda_50"] <= 0.05


def test_level_ratios_are_elementwise_division():
    feats = calculate_feature_set(_fo(sphere, n=200), "ela_level", seed=3)
    for q in ("10", "25", "50"):
        for a, b in (("lda", "qda"), ("lda", "gmda"), ("qda", "gmda")):
            ratio = feats[f"ela_level.{a}_{b}_{q}"]
            ma, mb = feats[f"ela_level.mmce_{a}_{q}"], feats[f"ela_level.mmce_{b}_{q}"]
            if ratio is not None:
                assert abs(ratio - ma / mb) < 1e-12
            else:
                assert mb == 0 or ma is None or mb is None


def test_level_noise_ratios_near_one(rng):
    X = rng.uniform(size=(400, 2))
    y = rng.normal(size=400)  # labels carry no signal
    fo = create_feature_object(X, y)
    feats = calculate_feature_set(fo, "ela_level", seed=1)
    for q in ("10", "25", "50"):
        for pair in ("lda_qda", "lda_gmda", "qda_gmda"):
            assert abs(feats[f"ela_level.{pair}_{q}"] - 1.0) < 0.3


def test_level_feature_count_and_min_obs():
    feats = calculate_feature_set(_fo(sphere, n=100), "ela_level", seed=0)
    assert len(feats) == 20
    X = create_initial_sample(SampleSpec(15, 2, -5, 5, "uniform", 0))
    fo = create_feature_object(X, np.sum(X ** 2, axis=1))
    with pytest.raises(ValueError, match="at least 20"):
        calculate_feature_set(fo, "ela_level")


# ---------------------------------------------------------------------------
# ela_local

def test_local_sphere_single_cluster():
    feats = calculate_feature_set(_fo(sphere, n=150), "ela_local", seed=0)
    assert feats["ela_local.n_optima"] == 1
    assert abs(feats["ela_local.optima_ratio"] - 1.0 / 100) < 1e-12
    assert abs(feats["ela_local.best2mean_obj_ratio"] - 1.0) < 1e-6
    assert feats["ela_local.basin_best_mean_size"] == 100
    assert feats["ela_local.basin_nonbest_mean_size"] is None
    assert feats["ela_local.costs_fun_evals"] > 0


def test_local_two_basins_1d_with_grid_oracle():
    # minima near -2 (value 0) and +2 (value 0.5); the dense 1D grid oracle
    # locates the basin boundary and the expected start-point split
    f = lambda x: float(min((x[0] + 2) ** 2, (x[0] - 2) ** 2 + 0.5))
    fo = _fo(f, n=100, dim=1)
    feats = calculate_feature_set(
        fo, "ela_local", control={"ela_local.clust_cut": 0.15}, seed=2)
    assert feats["ela_local.n_optima"] == 2

    grid = np.linspace(-5, 5, 20001)
    vals = np.minimum((grid + 2) ** 2, (grid - 2) ** 2 + 0.5)
    split = grid[1:-1][(vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])]
    boundary = float(split[0])

    n_starts = 50
    # one best cluster (at -2) and one non-best (at +2): sizes sum to N0
    assert (feats["ela_local.basin_best_mean_size"] +
            feats["ela_local.basin_nonbest_mean_size"]) == pytest.approx(n_starts)
    assert feats["ela_local.basin_worst_mean_size"] == \
        feats["ela_local.basin_nonbest_mean_size"]
    # basin-membership oracle: the best basin should attract roughly the
    # fraction of starts lying left of the boundary
    frac_left = float(np.mean(fo.points[:, 0] < boundary))
    assert abs(feats["ela_local.basin_best_mean_size"] / n_starts - frac_left) < 0.2


def test_local_eval_aggregations_consistent():
    feats = calculate_feature_set(_fo(sphere, n=150), "ela_local", seed=5)
    # mean of per-search evals times number of searches equals the total cost
    total = feats["ela_local.fun_evals.mean"] * 100
    assert abs(total - feats["ela_local.costs_fun_evals"]) < 1e-6
    assert feats["ela_local.fun_evals.min"] <= feats["ela_local.fun_evals.med"]
    assert feats["ela_local.fun_evals.med"] <= feats["ela_local.fun_evals.max"]


# ---------------------------------------------------------------------------
# ela_meta

def test_meta_exact_linear():
    f = lambda x: float(2 + 3 * x[0] + 4 * x[1])
    feats = calculate_feature_set(_fo(f, n=100), "ela_meta")
    assert abs(feats["ela_meta.lin_simple.r2_adj"] - 1) < 1e-10
    assert abs(feats["ela_meta.lin_simple.intercept"] - 2) < 1e-8
    assert abs(feats["ela_meta.lin_simple.coef_min"] - 3) < 1e-8
    assert abs(feats["ela_meta.lin_simple.coef_max"] - 4) < 1e-8
    assert abs(feats["ela_meta.lin_simple.coef_ratio"] - 4 / 3) < 1e-8
    assert feats["ela_meta.costs_fun_evals"] == 0


def test_meta_elliptic_quadratic():
    f = lambda x: float(x[0] ** 2 + 10 * x[1] ** 2)
    feats = calculate_feature_set(_fo(f, n=100), "ela_meta")
    assert abs(feats["ela_meta.quad_simple.r2_adj"] - 1) < 1e-10
    assert abs(feats["ela_meta.quad_simple.cond"] - 10) < 1e-6


def test_meta_interaction_model_nesting():
    f = lambda x: float(x[0] * x[1])
    feats = calculate_feature_set(_fo(f, n=100), "ela_meta")
    assert abs(feats["ela_meta.lin_w_interact.r2_adj"] - 1) < 1e-10
    assert feats["ela_meta.lin_w_interact.r2_adj"] > feats["ela_meta.lin_simple.r2_adj"]


def test_meta_affine_rescaling_invariance():
    f = lambda x: float(x[0] ** 2 + x[0] * x[1] + 0.3 * x[1])
    fo = _fo(f, n=120, seed=4)
    feats = calculate_feature_set(fo, "ela_meta")
    scaled = create_feature_object(fo.points * np.array([2.0, 0.5]) + np.array([1.0, -3.0]),
                                   fo.objectives)
    feats2 = calculate_feature_set(scaled, "ela_meta")
    for key in ("ela_meta.lin_simple.r2_adj", "ela_meta.lin_w_interact.r2_adj",
                "ela_meta.quad_simple.r2_adj", "ela_meta.quad_w_interact.r2_adj"):
        assert abs(feats[key] - feats2[key]) < 1e-8


def test_meta_shuffle_invariance(rng):
    fo = _fo(sphere, n=80, seed=2)
    perm = rng.permutation(80)
    fo2 = create_feature_object(fo.points[perm], fo.objectives[perm],
                                lower=fo.lower, upper=fo.upper)
    a = calculate_feature_set(fo, "ela_meta")
    b = calculate_feature_set(fo2, "ela_meta")
    for key, val in a.items():
        if key.endswith("costs_runtime"):
            continue
        assert abs(val - b[key]) < 1e-10
