"""Built-in test problems, a seeded Gaussian multi-peak generator and
expression-backed problems for user-defined functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from lkit.core import child_rng
from lkit.expressions import Expression, parse_expression

NAMED_PROBLEMS = ("sphere", "rastrigin", "rosenbrock", "linear_slope", "gallagher101")


@dataclass(frozen=True)
class Problem:
    """Deterministic evaluable objective on a box domain."""

    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Callable[[np.ndarray], float]
    batch_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metadata: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return float(self.evaluator(np.asarray(x, dtype=float)))

    def batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.batch_evaluator is not None:
            return np.asarray(self.batch_evaluator(X), dtype=float)
        return np.array([float(self.evaluator(row)) for row in X])


def _sphere(x: np.ndarray) -> float:
    return float(np.sum(x * x))


def _rastrigin(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def _rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def make_problem(name_or_expression: str, dim: int, seed: Optional[int] = None) -> Problem:
    """Problem from a known name or, failing that, a parsed expression.

    gallagher101 builds 101 seeded Gaussian peaks (one global, 100 local)
    with random centers and conditioning in [-5, 5]^d; the landscape is fully
    determined by the seed.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    name = name_or_expression.strip()
    lower, upper = np.full(dim, -5.0), np.full(dim, 5.0)

    if name == "sphere":
        return Problem("sphere", dim, lower, upper, _sphere,
                       metadata={"optimum": [0.0] * dim})
    if name == "rastrigin":
        return Problem("rastrigin", dim, lower, upper, _rastrigin,
                       metadata={"optimum": [0.0] * dim})
    if name == "rosenbrock":
        return Problem("rosenbrock", dim, lower, upper, _rosenbrock,
                       metadata={"optimum": [1.0] * dim})
    if name == "linear_slope":
        slopes = np.arange(1, dim + 1, dtype=float)

        def linear(x: np.ndarray) -> float:
            return float(slopes @ x)

        return Problem("linear_slope", dim, lower, upper, linear,
                       metadata={"optimum": (-5.0 * np.ones(dim)).tolist()})
    if name == "gallagher101":
        return _gallagher(dim, 0 if seed is None else int(seed))

    if name in NAMED_PROBLEMS:
        raise ValueError(f"problem '{name}' not constructible for dim {dim}")
    if name.isidentifier() and name not in NAMED_PROBLEMS:
        raise ValueError(
            f"unknown problem '{name}' (available: {', '.join(NAMED_PROBLEMS)})")
    expr = parse_expression(name, dim)
    return expression_problem(expr)


def expression_problem(expr: Expression, lower: float = -5.0, upper: float = 5.0) -> Problem:
    return Problem(
        name="expression", dim=expr.dim,
        lower=np.full(expr.dim, lower), upper=np.full(expr.dim, upper),
        evaluator=expr, metadata={"expression": expr.text},
    )


def _gallagher(dim: int, seed: int) -> Problem:
    """Seeded 101-peak Gaussian landscape in [-5, 5]^d.

    Peak value at x: w_k * exp(-q_k(x)) with per-peak anisotropic quadratic
    q_k; the objective is 10 minus the best peak value, so the global optimum
    sits at the dominant peak with value near zero.
    """
    rng = child_rng(seed, "gallagher101")
    n_peaks = 101
    centers = rng.uniform(-4.0, 4.0, size=(n_peaks, dim))
    heights = np.empty(n_peaks)
    heights[0] = 10.0
    heights[1:] = np.linspace(9.1, 1.1, n_peaks - 1)

    conditions = np.empty(n_peaks)
    conditions[0] = 10.0
    conditions[1:] = 10.0 ** rng.uniform(0.0, 3.0, size=n_peaks - 1)
    scales = np.empty((n_peaks, dim))
    for k in range(n_peaks):
        if dim == 1:
            diag = np.array([1.0])
        else:
            exponents = np.linspace(-0.5, 0.5, dim)
            diag = conditions[k] ** exponents
            rng.shuffle(diag)
        # the global peak is wide, local peaks narrower
        width = 1.0 if k == 0 else rng.uniform(1.5, 4.0)
        scales[k] = diag * width / (2.0 * dim)

    def batch(X: np.ndarray) -> np.ndarray:
        diff = X[:, None, :] - centers[None, :, :]          # (n, peaks, dim)
        q = np.einsum("npd,pd->np", diff * diff, scales)
        values = heights[None, :] * np.exp(-q)
        return 10.0 - values.max(axis=1)

    def evaluator(x: np.ndarray) -> float:
        return float(batch(x.reshape(1, -1))[0])

    return Problem(
        name="gallagher101", dim=dim,
        lower=np.full(dim, -5.0), upper=np.full(dim, 5.0),
        evaluator=evaluator, batch_evaluator=batch,
        metadata={"seed": seed, "optimum": centers[0].tolist()},
    )


def problem_catalog() -> list[dict]:
    """Stable identifiers for the service and UI dropdowns."""
    return [
        {"name": "sphere", "any_dim": True, "needs_seed": False},
        {"name": "rastrigin", "any_dim": True, "needs_seed": False},
        {"name": "rosenbrock", "any_dim": True, "needs_seed": False},
        {"name": "linear_slope", "any_dim": True, "needs_seed": False},
        {"name": "gallagher101", "any_dim": True, "needs_seed": True},
    ]
