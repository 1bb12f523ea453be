"""Numerical kernel: least squares, eigen, KDE, classifiers, clustering,
local search and finite differences."""
import numpy as np
import pytest

from lkit.numkit import (
    Classifier,
    cross_validated_mmce,
    fd_gradient_hessian,
    fit_least_squares,
    kde_peak_count,
    local_search,
    single_linkage_clusters,
    sym_eigen,
)


# ---------------------------------------------------------------------------
# least squares

def test_lstsq_exact_linear_data():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 3.0]])
    y = 2 + 3 * X[:, 0] + 4 * X[:, 1]
    fit = fit_least_squares(X, y)
    assert np.allclose(fit.coefficients, [2, 3, 4], atol=1e-10)
    assert abs(fit.adjusted_r_squared - 1.0) < 1e-10


def test_lstsq_constant_response():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    fit = fit_least_squares(X, np.full(10, 7.0))
    assert abs(fit.coefficients[1]) < 1e-12
    assert fit.adjusted_r_squared == 0.0


def test_lstsq_residual_orthogonal_to_columns(rng):
    # normal-equations oracle: X^T r = 0 at the optimum
    X = rng.normal(size=(50, 3))
    y = rng.normal(size=50)
    fit = fit_least_squares(X, y)
    design = np.column_stack([np.ones(50), X])
    assert np.linalg.norm(design.T @ fit.residuals) < 1e-8


def test_lstsq_underdetermined_errors():
    with pytest.raises(ValueError):
        fit_least_squares(np.ones((2, 3)), [1.0, 2.0])


def test_lstsq_rank_deficiency_flagged():
    X = np.column_stack([np.arange(8.0), 2 * np.arange(8.0)])
    fit = fit_least_squares(X, np.arange(8.0))
    assert fit.rank_deficient


# ---------------------------------------------------------------------------
# symmetric eigen

def test_sym_eigen_diagonal():
    vals, _ = sym_eigen(np.diag([10.0, 1.0]))
    assert np.allclose(vals, [10, 1])


def test_sym_eigen_analytic_2x2():
    vals, _ = sym_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(vals, [3, 1])


def test_sym_eigen_reconstruction(rng):
    A = rng.normal(size=(5, 5))
    A = 0.5 * (A + A.T)
    vals, vecs = sym_eigen(A)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.T - A) < 1e-8
    assert abs(np.trace(A) - vals.sum()) < 1e-8
    assert np.linalg.norm(vecs.T @ vecs - np.eye(5)) < 1e-8
    assert np.all(np.diff(vals) <= 1e-12)


def test_sym_eigen_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# KDE summary

def test_kde_standard_normal_sample(rng):
    x = rng.normal(size=10_000)
    peaks, skew, kurt = kde_peak_count(x)
    # moment oracle on the drawn sample itself
    c = x - x.mean()
    m2, m3, m4 = (np.mean(c ** k) for k in (2, 3, 4))
    assert abs(skew - m3 / m2 ** 1.5) < 1e-12
    assert abs(kurt - (m4 / m2 ** 2 - 3)) < 1e-12
    assert abs(skew) < 0.1
    assert abs(kurt) < 0.2
    assert peaks == 1


def test_kde_two_separated_modes(rng):
    x = np.concatenate([rng.normal(-10, 1, 500), rng.normal(10, 1, 500)])
    peaks, _, _ = kde_peak_count(x)
    assert peaks == 2


def test_kde_constant_vector():
    peaks, skew, kurt = kde_peak_count(np.full(10, 3.0))
    assert peaks == 1
    assert skew is None and kurt is None


# ---------------------------------------------------------------------------
# classifiers + cross-validation

def _blobs(rng, n=100, gap=8.0):
    a = rng.normal(size=(n, 2))
    b = rng.normal(size=(n, 2)) + gap
    X = np.vstack([a, b])
    labels = np.array([0] * n + [1] * n)
    return X, labels


def test_mmce_separated_blobs_lda(rng):
    X, labels = _blobs(rng)
    assert cross_validated_mmce(X, labels, "lda", rng=rng) <= 0.02


def test_mmce_random_labels_near_half(rng):
    X = rng.uniform(size=(200, 2))
    labels = rng.integers(2, size=200)
    for kind in ("lda", "qda", "gmda"):
        mmce = cross_validated_mmce(X, labels, kind, rng=np.random.default_rng(5))
        assert abs(mmce - 0.5) < 0.12


def test_mmce_xor_qda_beats_lda(rng):
    n = 400
    X = rng.uniform(-1, 1, size=(n, 2))
    labels = ((X[:, 0] * X[:, 1]) > 0).astype(int)
    lda = cross_validated_mmce(X, labels, "lda", rng=np.random.default_rng(1))
    qda = cross_validated_mmce(X, labels, "qda", rng=np.random.default_rng(1))
    assert lda > qda


def test_mmce_invariant_under_row_permutation(rng):
    X, labels = _blobs(rng, n=50, gap=3.0)
    perm = rng.permutation(X.shape[0])
    a = cross_validated_mmce(X, labels, "qda", rng=np.random.default_rng(3))
    b = cross_validated_mmce(X[perm], labels[perm], "qda", rng=np.random.default_rng(3))
    assert abs(a - b) < 0.1  # same distribution of folds, same data


def test_mmce_requires_both_classes():
    with pytest.raises(ValueError, match="class"):
        cross_validated_mmce(np.zeros((20, 2)), np.zeros(20), "lda")


def test_gmda_fits_bimodal_class(rng):
    # one class is itself a two-blob mixture: gmda should separate it
    a = np.vstack([rng.normal(-6, 0.5, size=(60, 2)), rng.normal(6, 0.5, size=(60, 2))])
    b = rng.normal(0, 0.5, size=(120, 2))
    X = np.vstack([a, b])
    labels = np.array([0] * 120 + [1] * 120)
    mmce = cross_validated_mmce(X, labels, "gmda", rng=np.random.default_rng(4))
    assert mmce <= 0.05


def test_classifier_unknown_kind():
    with pytest.raises(ValueError, match="unknown classifier"):
        Classifier("tree")


# ---------------------------------------------------------------------------
# single-linkage clustering

def test_single_linkage_fixture():
    labels = single_linkage_clusters(np.array([[0.0], [0.01], [5.0]]), 0.1)
    assert labels[0] == labels[1]
    assert labels[0] != labels[2]


def test_single_linkage_all_identical():
    labels = single_linkage_clusters(np.zeros((5, 2)), 0.5)
    assert np.all(labels == labels[0])


def _components_oracle(points, cut):
    """Connected components of the <=cut threshold graph, by BFS."""
    n = points.shape[0]
    dist = np.linalg.norm(points[:, None] - points[None, :], axis=2)
    labels = -np.ones(n, dtype=int)
    comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            i = stack.pop()
            for j in range(n):
                if labels[j] < 0 and dist[i, j] <= cut:
                    labels[j] = comp
                    stack.append(j)
        comp += 1
    return labels


def test_single_linkage_matches_components_oracle(rng):
    for _ in range(10):
        points = rng.uniform(size=(50, 2))
        cut = float(rng.uniform(0.05, 0.3))
        got = single_linkage_clusters(points, cut)
        want = _components_oracle(points, cut)
        # same partition up to relabeling
        mapping = {}
        for g, w in zip(got, want):
            mapping.setdefault(g, w)
            assert mapping[g] == w
        assert len(set(got)) == len(set(want))


def test_single_linkage_cut_must_be_positive():
    with pytest.raises(ValueError):
        single_linkage_clusters(np.zeros((3, 1)), 0.0)


# ---------------------------------------------------------------------------
# local search

def test_local_search_sphere():
    f = lambda x: float(np.sum(x ** 2))
    x, fx, evals = local_search(f, np.array([3.0, 3.0]), [-5, -5], [5, 5], 5000)
    assert np.linalg.norm(x) < 1e-4
    assert 0 < evals <= 5000


def test_local_search_exact_eval_count():
    count = [0]

    def f(x):
        count[0] += 1
        return float(np.sum(x ** 2))

    _, _, evals = local_search(f, np.array([2.0, -1.0]), [-5, -5], [5, 5], 800)
    assert evals == count[0]


def test_local_search_from_optimum():
    f = lambda x: float(np.sum(x ** 2))
    x, fx, _ = local_search(f, np.zeros(2), [-5, -5], [5, 5], 500)
    assert np.linalg.norm(x) < 1e-6
    assert fx < 1e-10


def test_local_search_converges_to_nearer_basin():
    f = lambda x: float(min((x[0] + 2) ** 2, (x[0] - 2) ** 2 + 0.5))
    # dense 1D grid oracle: from x0=1 steepest descent stays in the right basin
    grid = np.linspace(-5, 5, 10001)
    vals = np.minimum((grid + 2) ** 2, (grid - 2) ** 2 + 0.5)
    # basin boundary is the interior local maximum of the piecewise function
    boundary = grid[1:-1][(vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])]
    assert boundary.size == 1 and 1.0 > float(boundary[0]) > -2.0
    x, fx, _ = local_search(f, np.array([1.0]), [-5], [5], 2000)
    assert abs(x[0] - 2.0) < 1e-3
    assert abs(fx - 0.5) < 1e-6


def test_local_search_respects_bounds():
    seen = []

    def f(x):
        seen.append(x.copy())
        return float(-np.sum(x))  # optimum at the upper corner

    x, _, _ = local_search(f, np.array([4.0, 4.0]), [-5, -5], [5, 5], 400)
    seen_arr = np.array(seen)
    assert np.all(seen_arr >= -5) and np.all(seen_arr <= 5)
    assert np.allclose(x, [5, 5], atol=1e-6)


def test_local_search_budget_too_small():
    with pytest.raises(ValueError, match="budget"):
        local_search(lambda x: 0.0, np.zeros(3), [-1] * 3, [1] * 3, 3)


# ---------------------------------------------------------------------------
# finite differences

def test_fd_quadratic_fixture():
    f = lambda x: float(x[0] ** 2 + 10 * x[1] ** 2)
    grad, hess = fd_gradient_hessian(f, np.array([1.0, 1.0]), [-5, -5], [5, 5], 1e-4)
    assert np.allclose(grad, [2, 20], atol=1e-4)
    vals = np.sort(np.abs(np.linalg.eigvalsh(hess)))
    assert abs(vals[1] / vals[0] - 10) < 1e-4


def test_fd_linear_function_zero_hessian():
    f = lambda x: float(3 * x[0] - 2 * x[1])
    grad, hess = fd_gradient_hessian(f, np.array([0.5, -0.5]), [-5, -5], [5, 5], 1e-4)
    assert np.allclose(grad, [3, -2], atol=1e-6)
    assert np.max(np.abs(hess)) < 1e-6


def test_fd_polynomial_gradient_relative_accuracy(rng):
    f = lambda x: float(x[0] ** 3 + 2 * x[1] ** 2 * x[0] + x[1])
    for _ in range(5):
        x = rng.uniform(-2, 2, size=2)
        grad, _ = fd_gradient_hessian(f, x, [-5, -5], [5, 5], 1e-5)
        exact = np.array([3 * x[0] ** 2 + 2 * x[1] ** 2, 4 * x[0] * x[1] + 1])
        assert np.linalg.norm(grad - exact) <= 1e-4 * max(1.0, np.linalg.norm(exact))


def test_fd_boundary_corner_stays_in_box():
    seen = []

    def f(x):
        seen.append(x.copy())
        return float(np.sum(x ** 2))

    x = np.array([5.0, 5.0])  # exactly the upper corner
    grad, hess = fd_gradient_hessian(f, x, [-5, -5], [5, 5], 1e-4)
    arr = np.array(seen)
    assert np.all(arr >= -5 - 1e-15) and np.all(arr <= 5 + 1e-15)
    assert np.allclose(grad, [10, 10], atol=1e-2)
    assert np.all(np.isfinite(hess))
