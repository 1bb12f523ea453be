"""Feature-set registry: control parameters, cost tracking and the
calculate-one / calculate-all entry points."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from lkit.core import FeatureObject, child_rng
from lkit.features import cm, dist, ela, gcm, ic, misc


class UnknownSetError(ValueError):
    pass


class UnknownControlKeyError(ValueError):
    pass


class MissingFunctionError(ValueError):
    pass


class MissingBlocksError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureSetInfo:
    set_id: str
    fn: Callable
    size: int                     # entries incl. cost entries, at defaults
    requires_function: bool = False
    requires_blocks: bool = False
    stochastic: bool = False
    min_blocks: int = 1
    self_costed: bool = False     # emits per-approach cost entries itself


FEATURE_SETS: dict[str, FeatureSetInfo] = {}


def _register(info: FeatureSetInfo) -> None:
    FEATURE_SETS[info.set_id] = info


_register(FeatureSetInfo("ela_conv", ela.ela_conv, 6, requires_function=True, stochastic=True))
_register(FeatureSetInfo("ela_curv", ela.ela_curv, 26, requires_function=True, stochastic=True))
_register(FeatureSetInfo("ela_distr", ela.ela_distr, 5))
_register(FeatureSetInfo("ela_level", ela.ela_level, 20, stochastic=True))
_register(FeatureSetInfo("ela_local", ela.ela_local, 15, requires_function=True, stochastic=True))
_register(FeatureSetInfo("ela_meta", ela.ela_meta, 11))
_register(FeatureSetInfo("cm_angle", cm.cm_angle, 10, requires_blocks=True))
_register(FeatureSetInfo("cm_conv", cm.cm_conv, 6, requires_blocks=True, min_blocks=3))
_register(FeatureSetInfo("cm_grad", cm.cm_grad, 4, requires_blocks=True))
_register(FeatureSetInfo("gcm", gcm.gcm_features, 75, requires_blocks=True, self_costed=True))
_register(FeatureSetInfo("bt", gcm.bt_features, 93, requires_blocks=True, self_costed=True))
_register(FeatureSetInfo("nbc", dist.nbc, 7))
_register(FeatureSetInfo("disp", dist.disp, 18))
_register(FeatureSetInfo("ic", ic.ic_features, 7, stochastic=True))
_register(FeatureSetInfo("basic", misc.basic, 16))
_register(FeatureSetInfo("limo", misc.limo, 14, requires_blocks=True))
_register(FeatureSetInfo("pca", misc.pca, 10))


CONTROL_DEFAULTS: dict[str, object] = {
    "ela_conv.nsample": 1000,
    "ela_conv.threshold": 1e-10,
    "ela_curv.sample_size": None,       # defaults to 100 * dim
    "ela_curv.step": 1e-4,
    "ela_level.quantiles": (0.10, 0.25, 0.50),
    "ela_level.classifiers": ("lda", "qda", "gmda"),
    "ela_level.folds": 10,
    "ela_local.n_starts": None,         # defaults to 50 * dim
    "ela_local.budget": None,           # defaults to 1000 * dim
    "ela_local.clust_cut": 0.1,
    "gcm.approaches": ("min", "mean", "near"),
    "gcm.weighting": "improvement",
    "bt.approaches": ("min", "mean", "near"),
    "nbc.tie_breaking": "index",
    "disp.quantiles": (0.02, 0.05, 0.10, 0.25),
    "disp.dist_method": "euclidean",
    "ic.epsilon_min": 1e-5,
    "ic.epsilon_max": 1e15,
    "ic.epsilon_steps": 1000,
    "ic.settling_threshold": 0.05,
    "ic.partial_ratio": 0.5,
    "ic.seed": None,
    "pca.cov_x": 0.9,
    "pca.cor_x": 0.9,
    "pca.cov_init": 0.9,
    "pca.cor_init": 0.9,
}


def resolve_control(control: Optional[dict]) -> dict:
    """Merge user overrides into the defaults; unknown keys are rejected."""
    merged = dict(CONTROL_DEFAULTS)
    if control:
        for key, value in control.items():
            if key not in CONTROL_DEFAULTS:
                raise UnknownControlKeyError(f"unknown control parameter '{key}'")
            merged[key] = value
    return merged


def feature_set_ids() -> list[str]:
    return list(FEATURE_SETS)


def list_feature_sets(include_eval: bool = True, include_cellmapping: bool = True) -> list[dict]:
    """Metadata listing, optionally filtering evaluation- or grid-requiring sets."""
    out = []
    for info in FEATURE_SETS.values():
        if not include_eval and info.requires_function:
            continue
        if not include_cellmapping and info.requires_blocks:
            continue
        out.append({
            "id": info.set_id,
            "size": info.size,
            "requires_function": info.requires_function,
            "requires_blocks": info.requires_blocks,
            "stochastic": info.stochastic,
        })
    return out


def calculate_feature_set(fo: FeatureObject, set_id: str, control: Optional[dict] = None,
                          seed: int = 0) -> dict:
    """Compute one feature set, appending its evaluation and runtime costs."""
    if set_id not in FEATURE_SETS:
        raise UnknownSetError(
            f"unknown feature set '{set_id}' (available: {', '.join(FEATURE_SETS)})")
    info = FEATURE_SETS[set_id]
    if info.requires_function and fo.function is None:
        raise MissingFunctionError(f"feature set '{set_id}' requires function evaluations")
    if info.requires_blocks and fo.grid is None:
        raise MissingBlocksError(f"feature set '{set_id}' requires a cell grid (blocks)")
    if info.requires_blocks and info.min_blocks > 1 and np.any(fo.grid.blocks < info.min_blocks):
        raise MissingBlocksError(
            f"feature set '{set_id}' requires at least {info.min_blocks} blocks per dimension")

    ctl = resolve_control(control)
    rng = child_rng(seed, set_id)
    before = fo.eval_count
    t0 = time.perf_counter()
    values = info.fn(fo, ctl, rng)
    if not info.self_costed:
        values[f"{set_id}.costs_fun_evals"] = fo.eval_count - before
        values[f"{set_id}.costs_runtime"] = time.perf_counter() - t0
    return _pythonify(values)


def calculate_features(fo: FeatureObject, sets="all", control: Optional[dict] = None,
                       seed: int = 0, collect_errors: bool = False):
    """Compute several feature sets in canonical registry order.

    Returns (features, errors); errors maps set id to the failure message.
    With collect_errors=False the first failure raises instead.
    """
    if sets == "all" or sets is None:
        requested = feature_set_ids()
    elif isinstance(sets, str):
        requested = [s.strip() for s in sets.split(",") if s.strip()]
    else:
        requested = list(sets)
    for set_id in requested:
        if set_id not in FEATURE_SETS:
            raise UnknownSetError(
                f"unknown feature set '{set_id}' (available: {', '.join(FEATURE_SETS)})")

    ordered = [s for s in feature_set_ids() if s in requested]
    features: dict = {}
    errors: dict[str, str] = {}
    for set_id in ordered:
        try:
            features.update(calculate_feature_set(fo, set_id, control=control, seed=seed))
        except Exception as exc:
            if not collect_errors:
                raise
            errors[set_id] = str(exc)
    return features, errors


def _pythonify(values: dict) -> dict:
    out = {}
    for key, val in values.items():
        if val is None:
            out[key] = None
        elif isinstance(val, (np.floating, float)):
            val = float(val)
            out[key] = val if math.isfinite(val) else None
        elif isinstance(val, (np.integer, int)):
            out[key] = int(val)
        else:
            out[key] = val
    return out
