"""Generalized cell mapping: absorbing Markov chains over the cell grid and
the barrier trees built on top of them."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from lkit.core import FeatureObject
from lkit.numkit import basic_stats

APPROACHES = ("min", "mean", "near")
PROB_EPS = 1e-12


# ---------------------------------------------------------------------------
# transition model

@dataclass
class TransitionModel:
    """Absorbing Markov chain over the non-empty cells of the grid.

    States are the non-empty cells; transitions go to Moore neighbors with a
    strictly smaller representative value, weighted by improvement magnitude
    (or uniformly). Cells without an improving neighbor are absorbing
    attractors.
    """

    approach: str
    cell_ids: np.ndarray              # grid cell ID per state
    representatives: np.ndarray       # representative objective per state
    transition: np.ndarray            # row-stochastic (m x m)
    attractors: np.ndarray            # state indices of absorbing cells
    absorption: np.ndarray            # m x len(attractors), rows sum to 1
    uncertain: np.ndarray             # state indices absorbed by >= 2 attractors
    coords: np.ndarray                # per-state integer grid coordinates
    blocks: np.ndarray

    @property
    def n_states(self) -> int:
        return self.cell_ids.size

    def classes(self) -> dict[str, np.ndarray]:
        """State partition: periodic (= attractor), transient, uncertain."""
        mask = np.zeros(self.n_states, dtype=bool)
        mask[self.attractors] = True
        return {
            "periodic": np.flatnonzero(mask),
            "transient": np.flatnonzero(~mask),
            "uncertain": self.uncertain,
        }


def _representatives(fo: FeatureObject, approach: str) -> tuple[np.ndarray, np.ndarray]:
    """Per non-empty cell: (cell IDs, representative objective value)."""
    grid = fo.grid
    y = fo.y_for_min
    ids, reps = [], []
    for cell_id, members in sorted(grid.members().items()):
        ids.append(cell_id)
        if approach == "min":
            reps.append(float(y[members].min()))
        elif approach == "mean":
            reps.append(float(y[members].mean()))
        elif approach == "near":
            center = grid.cell_center(cell_id)[0]
            dists = np.linalg.norm(fo.points[members] - center, axis=1)
            reps.append(float(y[members[int(np.argmin(dists))]]))
        else:
            raise ValueError(f"unknown cell representation approach '{approach}'")
    return np.array(ids, dtype=int), np.array(reps)


def _moore_offsets(d: int) -> np.ndarray:
    offs = np.array(list(np.ndindex(*(3,) * d))) - 1
    return offs[np.any(offs != 0, axis=1)]


def build_transition_model(fo: FeatureObject, approach: str,
                           weighting: str = "improvement") -> TransitionModel:
    """Construct the absorbing chain for one cell-representation approach."""
    if fo.grid is None:
        raise ValueError("transition model requires a cell grid (blocks)")
    if weighting not in ("improvement", "uniform"):
        raise ValueError(f"unknown weighting '{weighting}'")
    grid = fo.grid
    cell_ids, reps = _representatives(fo, approach)
    m = cell_ids.size
    coords = grid.cell_coords(cell_ids)
    state_of = {tuple(c): s for s, c in enumerate(coords)}
    offsets = _moore_offsets(fo.dim)

    P = np.zeros((m, m))
    attractors = []
    for s in range(m):
        c = coords[s]
        weights = {}
        for off in offsets:
            nb = c + off
            if np.any(nb < 0) or np.any(nb >= grid.blocks):
                continue
            t = state_of.get(tuple(nb))
            if t is None:
                continue
            improvement = reps[s] - reps[t]
            if improvement > 0:
                weights[t] = improvement if weighting == "improvement" else 1.0
        if weights:
            total = sum(weights.values())
            for t, w in weights.items():
                P[s, t] = w / total
        else:
            P[s, s] = 1.0
            attractors.append(s)

    attractors = np.array(attractors, dtype=int)
    absorption = _absorption_matrix(P, attractors)
    col_positive = absorption > PROB_EPS
    multi = np.flatnonzero(col_positive.sum(axis=1) >= 2)
    att_set = set(attractors.tolist())
    uncertain = np.array([s for s in multi if s not in att_set], dtype=int)

    return TransitionModel(
        approach=approach,
        cell_ids=cell_ids,
        representatives=reps,
        transition=P,
        attractors=attractors,
        absorption=absorption,
        uncertain=uncertain,
        coords=coords,
        blocks=grid.blocks.copy(),
    )


def _absorption_matrix(P: np.ndarray, attractors: np.ndarray) -> np.ndarray:
    """Absorption probabilities, solved from the absorbing-chain partition."""
    m = P.shape[0]
    k = attractors.size
    B = np.zeros((m, k))
    is_attr = np.zeros(m, dtype=bool)
    is_attr[attractors] = True
    transient = np.flatnonzero(~is_attr)
    for j, a in enumerate(attractors):
        B[a, j] = 1.0
    if transient.size:
        Q = P[np.ix_(transient, transient)]
        R = P[np.ix_(transient, attractors)]
        B[transient] = np.linalg.solve(np.eye(transient.size) - Q, R)
    return B


# ---------------------------------------------------------------------------
# GCM feature set

def gcm_features(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Attractor structure features, one block per representation approach.

    Each approach block carries its own cost entries so the census of
    25 entries per approach (75 for all three) holds.
    """
    out: dict = {}
    for approach in _approaches(ctl["gcm.approaches"]):
        t0 = time.perf_counter()
        before = fo.eval_count
        model = build_transition_model(fo, approach, ctl["gcm.weighting"])
        out.update(_gcm_block(model, f"gcm.{approach}"))
        out[f"gcm.{approach}.costs_fun_evals"] = fo.eval_count - before
        out[f"gcm.{approach}.costs_runtime"] = time.perf_counter() - t0
    return out


def _approaches(value) -> list[str]:
    names = [value] if isinstance(value, str) else list(value)
    for name in names:
        if name not in APPROACHES:
            raise ValueError(
                f"unknown cell representation approach '{name}' "
                f"(expected one of {', '.join(APPROACHES)})")
    return names


def _gcm_block(model: TransitionModel, prefix: str) -> dict:
    m = model.n_states
    cls = model.classes()
    out = {
        f"{prefix}.attractors": int(model.attractors.size),
        f"{prefix}.pcells_ratio": cls["periodic"].size / m,
        f"{prefix}.tcells_ratio": cls["transient"].size / m,
        f"{prefix}.ucells_ratio": cls["uncertain"].size / m,
    }

    col_means = model.absorption.mean(axis=0)
    stats = basic_stats(col_means)
    for key in ("min", "mean", "median", "max", "sd"):
        out[f"{prefix}.attr_prob.{key}"] = stats[key]

    certain_sizes = (model.absorption >= 1.0 - PROB_EPS).sum(axis=0)
    reach_sizes = (model.absorption > PROB_EPS).sum(axis=0)
    for name, sizes in (("basin_certain", certain_sizes), ("basin_uncertain", reach_sizes)):
        stats = basic_stats(sizes)
        for key in ("min", "mean", "median", "max", "sd"):
            out[f"{prefix}.{name}.{key}"] = stats[key]
        out[f"{prefix}.{name}.sum"] = int(sizes.sum())

    best_val = model.representatives[model.attractors].min()
    best_cols = np.flatnonzero(model.representatives[model.attractors] == best_val)
    out[f"{prefix}.best_attr.cells"] = int(certain_sizes[best_cols].sum())
    out[f"{prefix}.best_attr.prob"] = float(col_means[best_cols].sum())
    return out


# ---------------------------------------------------------------------------
# barrier tree

@dataclass
class TreeNode:
    node_id: int
    state: int                 # state index in the transition model
    height: float
    kind: str                  # "leaf" or "saddle"
    children: list = field(default_factory=list)
    parent: Optional[int] = None
    level: int = 0


@dataclass
class BarrierTree:
    model: TransitionModel
    nodes: list[TreeNode]
    root: int
    leaves: list[int]

    @property
    def depth(self) -> float:
        heights = [self.nodes[i].height for i in self.leaves]
        return float(self.nodes[self.root].height - min(heights))

    @property
    def n_levels(self) -> int:
        return max(n.level for n in self.nodes)

    def saddles(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.kind == "saddle"]


def build_barrier_tree(model: TransitionModel) -> BarrierTree:
    """Merge-sweep barrier tree over the representative surface.

    Cells are processed by ascending representative value under a
    wrap-around Moore adjacency: a cell with no processed neighbor seeds a
    basin (a leaf), a cell whose processed neighbors span several basins
    merges them at a saddle, and the final merge is the root.
    """
    m = model.n_states
    if m < 2:
        raise ValueError("barrier tree requires at least two cells")

    coords = model.coords
    blocks = model.blocks
    state_of = {tuple(c): s for s, c in enumerate(coords)}
    offsets = _moore_offsets(blocks.size)

    def neighbors(s: int):
        for off in offsets:
            nb = tuple((coords[s] + off) % blocks)
            t = state_of.get(nb)
            if t is not None and t != s:
                yield t

    order = sorted(range(m), key=lambda s: (model.representatives[s], model.cell_ids[s]))
    parent_uf = list(range(m))

    def find(s: int) -> int:
        while parent_uf[s] != s:
            parent_uf[s] = parent_uf[parent_uf[s]]
            s = parent_uf[s]
        return s

    nodes: list[TreeNode] = []
    top_node: dict[int, int] = {}   # union-find root -> current top tree node
    processed = np.zeros(m, dtype=bool)
    leaves: list[int] = []

    for s in order:
        roots = {find(t) for t in neighbors(s) if processed[t]}
        height = float(model.representatives[s])
        if not roots:
            node = TreeNode(node_id=len(nodes), state=s, height=height, kind="leaf")
            nodes.append(node)
            leaves.append(node.node_id)
            top_node[s] = node.node_id
        elif len(roots) == 1:
            root = roots.pop()
            parent_uf[s] = root
        else:
            saddle = TreeNode(node_id=len(nodes), state=s, height=height, kind="saddle")
            nodes.append(saddle)
            for r in roots:
                child = top_node.pop(r)
                nodes[child].parent = saddle.node_id
                saddle.children.append(child)
            target = min(roots)
            for r in roots:
                parent_uf[r] = target
            parent_uf[s] = target
            top_node[find(target)] = saddle.node_id
        processed[s] = True

    tops = sorted(set(top_node.values()))
    if len(tops) > 1:
        # disconnected non-empty cells: join the components under a
        # synthetic root at the maximum representative height
        height = float(model.representatives.max())
        state = int(order[-1])
        root = TreeNode(node_id=len(nodes), state=state, height=height, kind="saddle")
        nodes.append(root)
        for t in tops:
            nodes[t].parent = root.node_id
            root.children.append(t)
        root_id = root.node_id
    else:
        root_id = tops[0]

    # level = number of saddle ancestors (root included), computed root-down
    stack = [(root_id, 0)]
    while stack:
        nid, level = stack.pop()
        nodes[nid].level = level
        for child in nodes[nid].children:
            stack.append((child, level + 1))

    return BarrierTree(model=model, nodes=nodes, root=root_id, leaves=leaves)


# ---------------------------------------------------------------------------
# barrier tree feature set

def bt_features(fo: FeatureObject, ctl: dict, rng: np.random.Generator) -> dict:
    """Barrier-tree shape and basin features, one block per approach."""
    out: dict = {}
    for approach in _approaches(ctl["bt.approaches"]):
        t0 = time.perf_counter()
        before = fo.eval_count
        model = build_transition_model(fo, approach, ctl["gcm.weighting"])
        tree = build_barrier_tree(model)
        out.update(_bt_block(tree, f"bt.{approach}"))
        out[f"bt.{approach}.costs_fun_evals"] = fo.eval_count - before
        out[f"bt.{approach}.costs_runtime"] = time.perf_counter() - t0
    return out


def tree_basins(tree: BarrierTree) -> dict[str, dict[int, np.ndarray]]:
    """Per-leaf basin state sets under the three basin definitions.

    certain: states absorbed by the leaf attractor with probability one.
    uncertain: states with any positive absorption probability into it.
    argmax: certain states plus uncertain states assigned to the leaf
    attractor with the highest absorption probability.
    """
    model = tree.model
    att_index = {int(a): j for j, a in enumerate(model.attractors)}
    leaf_states = [tree.nodes[l].state for l in tree.leaves]
    leaf_cols = np.array([att_index[s] for s in leaf_states], dtype=int)

    B = model.absorption
    certain: dict[int, np.ndarray] = {}
    uncertain: dict[int, np.ndarray] = {}
    argmax: dict[int, np.ndarray] = {}
    sub = B[:, leaf_cols]
    arg_best = leaf_cols[np.argmax(sub, axis=1)] if leaf_cols.size else None
    for l, col in zip(tree.leaves, leaf_cols):
        certain[l] = np.flatnonzero(B[:, col] >= 1.0 - PROB_EPS)
        uncertain[l] = np.flatnonzero(B[:, col] > PROB_EPS)
        amax = np.flatnonzero((arg_best == col) & (sub.max(axis=1) > PROB_EPS))
        argmax[l] = amax
    return {"certain": certain, "uncertain": uncertain, "argmax": argmax}


def _bt_block(tree: BarrierTree, prefix: str) -> dict:
    nodes = tree.nodes
    n_leaves = len(tree.leaves)
    levels = tree.n_levels
    out = {
        f"{prefix}.leaves": n_leaves,
        f"{prefix}.levels": levels,
        f"{prefix}.depth": tree.depth,
    }
    single = n_leaves < 2

    out[f"{prefix}.depth_levels_ratio"] = (tree.depth / levels) if levels > 0 else None
    non_root = len(nodes) - 1
    out[f"{prefix}.levels_nodes_ratio"] = (levels / non_root) if non_root > 0 else None

    diffs = [nodes[n.parent].height - n.height for n in nodes if n.parent is not None]
    stats = basic_stats(diffs) if diffs else basic_stats([])
    for key in ("min", "mean", "median", "max", "sd"):
        out[f"{prefix}.height_diff.{key}"] = stats[key]

    by_level: dict[int, list] = {}
    for n in nodes:
        if n.parent is not None:
            by_level.setdefault(n.level, []).append(nodes[n.parent].height - n.height)
    level_means = [float(np.mean(v)) for _, v in sorted(by_level.items())]
    stats = basic_stats(level_means) if level_means else basic_stats([])
    for key in ("min", "mean", "median", "max", "sd"):
        out[f"{prefix}.level_diff.{key}"] = stats[key]

    basins = tree_basins(tree)
    for defname in ("certain", "uncertain", "argmax"):
        sizes = np.array([basins[defname][l].size for l in tree.leaves])
        if single or sizes.min() == 0:
            out[f"{prefix}.basin_ratio.{defname}"] = None
        else:
            out[f"{prefix}.basin_ratio.{defname}"] = float(sizes.max() / sizes.min())

    best_leaf = min(tree.leaves, key=lambda l: (nodes[l].height, nodes[l].state))
    for defname in ("certain", "argmax"):
        sizes = {l: basins[defname][l].size for l in tree.leaves}
        best_size = sizes[best_leaf]
        props = [best_size / (best_size + sizes[l]) for l in tree.leaves
                 if l != best_leaf and best_size + sizes[l] > 0]
        stats = basic_stats(props) if props else basic_stats([])
        for key in ("min", "mean", "median", "max", "sd"):
            out[f"{prefix}.best_basin_prop_{defname}.{key}"] = stats[key]

    reps = tree.model.representatives
    ranges = []
    for l in tree.leaves:
        states = basins["argmax"][l]
        if states.size:
            ranges.append(float(reps[states].max() - nodes[l].height))
    out[f"{prefix}.widest_range"] = max(ranges) if ranges else None

    if single:
        keep = {f"{prefix}.leaves", f"{prefix}.levels", f"{prefix}.depth",
                f"{prefix}.widest_range"}
        for key in list(out):
            if key not in keep:
                out[key] = None
    return out
