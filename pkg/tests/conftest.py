import numpy as np
import pytest

from lkit.core import create_feature_object


def make_fo_1d(representatives, function=None):
    """1D feature object with one point at each unit-cell center.

    Grids below three cells get two equal-valued points per cell so the
    n >= dim + 2 contract still holds; every representation approach then
    reproduces the given values exactly.
    """
    reps = np.asarray(representatives, dtype=float)
    n = reps.size
    if n >= 3:
        pts = (np.arange(n) + 0.5).reshape(-1, 1)
        y = reps
    else:
        pts = (np.repeat(np.arange(n), 2) + np.tile([0.3, 0.7], n)).reshape(-1, 1)
        y = np.repeat(reps, 2)
    return create_feature_object(pts, y, lower=0.0, upper=float(n),
                                 blocks=[n], function=function)


def make_fo_grid2d(values, function=None):
    """2D feature object with one point per cell center; values[ix][iy]."""
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    pts, ys = [], []
    for i in range(nx):
        for j in range(ny):
            pts.append([i + 0.5, j + 0.5])
            ys.append(values[i, j])
    return create_feature_object(np.array(pts), np.array(ys),
                                 lower=[0.0, 0.0], upper=[float(nx), float(ny)],
                                 blocks=[nx, ny], function=function)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
