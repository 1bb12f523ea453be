"""Information content of fitness sequences."""
import numpy as np
import pytest

from lkit.core import create_feature_object
from lkit.features.ic import (
    SymbolSequence,
    _entropy,
    _partial_information,
    build_symbol_sequence,
    compute_curves,
)
from lkit.registry import calculate_feature_set, resolve_control


def _fo_random(rng, n=60, d=2):
    X = rng.uniform(-5, 5, size=(n, d))
    y = rng.normal(size=n)
    return create_feature_object(X, y, lower=-5, upper=5)


# ---------------------------------------------------------------------------
# symbol sequence

def test_tour_on_sorted_1d_is_sorted():
    X = np.array([[0.0], [1.0], [2.5], [4.5]])
    fo = create_feature_object(X, [3, 1, 2, 0])
    seq = build_symbol_sequence(fo, np.random.default_rng(0))
    diffs = np.diff(fo.points[seq.tour, 0])
    # greedy nearest neighbor on a line visits monotonically from the start
    assert np.all(diffs > 0) or np.all(diffs < 0) or seq.tour.size == 4


def test_constant_objectives_zero_slopes():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    fo = create_feature_object(X, [5, 5, 5, 5])
    seq = build_symbol_sequence(fo, np.random.default_rng(1))
    assert np.all(seq.slopes == 0)


def test_tour_is_permutation(rng):
    fo = _fo_random(rng, n=40)
    seq = build_symbol_sequence(fo, rng)
    assert sorted(seq.tour.tolist()) == list(range(40))


def test_duplicate_points_skipped():
    X = np.array([[0.0], [0.0], [1.0], [2.0]])
    fo = create_feature_object(X, [1, 2, 3, 4])
    seq = build_symbol_sequence(fo, np.random.default_rng(3))
    assert seq.tour.size == 3  # one duplicate dropped
    assert np.all(np.isfinite(seq.slopes))


# ---------------------------------------------------------------------------
# hand oracle

def test_hand_sequence_entropy_and_partial_information():
    # tour objectives (0,1,0,1) at unit steps: slopes (1,-1,1)
    seq = SymbolSequence(tour=np.arange(4), slopes=np.array([1.0, -1.0, 1.0]))
    sym = seq.symbols(0.0)
    assert sym.tolist() == [1, -1, 1]
    want = np.log(2) / np.log(6)
    assert abs(_entropy(sym) - want) < 1e-9
    assert _partial_information(sym) == 1.0


def test_hand_sequence_large_epsilon_all_zero():
    seq = SymbolSequence(tour=np.arange(4), slopes=np.array([1.0, -1.0, 1.0]))
    sym = seq.symbols(2.0)
    assert sym.tolist() == [0, 0, 0]
    assert _entropy(sym) == 0.0
    assert _partial_information(sym) == 0.0


def test_entropy_matches_block_enumeration_oracle(rng):
    # direct entropy over the enumerated multiset of adjacent blocks
    for _ in range(20):
        sym = rng.integers(-1, 2, size=rng.integers(3, 50))
        blocks = {}
        for a, b in zip(sym[:-1], sym[1:]):
            if a != b:
                blocks[(a, b)] = blocks.get((a, b), 0) + 1
        total = len(sym) - 1
        want = -sum((c / total) * np.log(c / total) / np.log(6)
                    for c in blocks.values())
        assert abs(_entropy(sym) - want) < 1e-12


def test_partial_information_alternation_count():
    assert _partial_information(np.array([1, 1, -1, 0, -1, 1])) == 3 / 6
    assert _partial_information(np.array([0, 0, 0])) == 0.0
    assert _partial_information(np.array([1, -1, 1, -1])) == 1.0


# ---------------------------------------------------------------------------
# feature set

def test_ic_constant_function():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    fo = create_feature_object(X, [5, 5, 5, 5])
    feats = calculate_feature_set(fo, "ic")
    assert feats["ic.h_max"] == 0.0
    assert feats["ic.m0"] == 0.0
    assert feats["ic.eps_s"] is None
    assert feats["ic.eps_ratio"] is None
    assert feats["ic.costs_fun_evals"] == 0


def test_ic_features_match_curves(rng):
    fo = _fo_random(rng)
    feats = calculate_feature_set(fo, "ic", seed=7)
    from lkit.core import child_rng

    curves = compute_curves(fo, resolve_control(None), child_rng(7, "ic"))
    assert feats["ic.h_max"] == pytest.approx(curves.h_max)
    assert feats["ic.m0"] == pytest.approx(curves.m0)
    assert feats["ic.eps_s"] == pytest.approx(curves.eps_s)
    assert feats["ic.eps_ratio"] == pytest.approx(curves.eps_ratio)


def test_ic_curve_properties_on_random_instances():
    # M is non-increasing in epsilon (dropping symbols cannot add
    # alternations); H is bounded in [0, 1] and decays to 0 once epsilon
    # dominates every slope. H itself is not monotone: zeroing one symbol
    # inside a same-sign run creates new mixed blocks, which is exactly why
    # its argmax is an informative quantity.
    ctl = resolve_control({"ic.epsilon_steps": 60})
    for seed in range(100):
        r = np.random.default_rng(seed)
        n = int(r.integers(10, 40))
        X = r.uniform(-5, 5, size=(n, 2))
        y = r.normal(size=n)
        fo = create_feature_object(X, y, lower=-5, upper=5)
        curves = compute_curves(fo, ctl, r)
        assert np.all(np.diff(curves.m) <= 1e-12)
        assert curves.h[-1] == 0.0 and curves.m[-1] == 0.0
        assert np.all((curves.h >= 0) & (curves.h <= 1 + 1e-12))
        assert np.all((curves.m >= 0) & (curves.m <= 1 + 1e-12))


def test_ic_entropy_not_monotone_counterexample():
    # zeroing the second symbol of (1,1,1,1) raises the block entropy
    assert _entropy(np.array([1, 1, 1, 1])) == 0.0
    assert _entropy(np.array([1, 0, 1, 1])) > 0.4


def test_ic_objective_scaling_shifts_h_curve(rng):
    fo = _fo_random(rng, n=50)
    c = 100.0
    fo_scaled = create_feature_object(fo.points, fo.objectives * c,
                                      lower=fo.lower, upper=fo.upper)
    ctl = resolve_control(None)
    r1 = compute_curves(fo, ctl, np.random.default_rng(5))
    r2 = compute_curves(fo_scaled, ctl, np.random.default_rng(5))
    assert r2.m0 == pytest.approx(r1.m0)
    # H_cy(eps) = H_y(eps / c): compare on the shared log grid by
    # interpolating the unscaled curve
    pos = r1.eps > 0
    h_interp = np.interp(np.log10(r2.eps[pos] / c),
                         np.log10(r1.eps[pos]), r1.h[pos])
    # interpolation error only, away from the grid edges
    inner = (r2.eps[pos] / c >= r1.eps[pos].min()) & \
            (r2.eps[pos] / c <= r1.eps[pos].max())
    assert np.max(np.abs(h_interp[inner] - r2.h[pos][inner])) < 0.05


def test_ic_census_and_settling(rng):
    fo = _fo_random(rng, n=80)
    feats = calculate_feature_set(fo, "ic", seed=1)
    assert len(feats) == 7
    assert feats["ic.h_max"] > 0
    # settling: H at 10**eps_s is below the 0.05 threshold
    ctl = resolve_control(None)
    from lkit.core import child_rng

    curves = compute_curves(fo, ctl, child_rng(1, "ic"))
    idx = int(np.argmin(np.abs(curves.eps - 10 ** feats["ic.eps_s"])))
    assert curves.h[idx] < 0.05
