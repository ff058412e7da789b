"""Measure trees, tree-simple functions, averages, oscillations, BMO norms.

An :class:`AlphaTree` is a finite rooted tree whose nodes carry positive
masses.  The children of every node partition its mass, and each child keeps
at least an ``alpha`` fraction of the parent's mass (``alpha`` in ``(0, 1/2]``).
Single-child nodes are allowed; they model atoms of the underlying measure.
All leaves sit at the same depth, so "generation m" is well defined: the root
is generation 0, its children generation 1, and so on.

A :class:`SimpleFunction` assigns one real value to every node of a fixed
generation ``N``.  Averages of the function and of its square over any node of
depth at most ``N`` are mass-weighted means over that node's generation-``N``
descendants; the pair ``(mean, mean_sq)`` is the node's point in the moment
plane.  BMO norms are suprema of oscillations over all nodes:

    delta2(J) = <f^2>_J - <f>_J^2        norm2 = max_J sqrt(delta2(J))
    delta1(J) = <|f - <f>_J|>_J          norm1 = max_J delta1(J)

Node ids are assigned in depth-first preorder, which makes the generation-N
descendants of any node a contiguous block in generation order; all per-node
aggregation below exploits this through ``np.add.reduceat``.

Trees and simple functions are immutable after construction and safe to read
concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import OmegaPoint

__all__ = [
    "TreeNode",
    "TreeStructureError",
    "AlphaTree",
    "SimpleFunction",
    "OscillationReport",
    "BmoNorms",
    "build_dyadic_tree",
    "validate_alpha",
    "node_point",
    "bmo_norms",
    "truncate",
    "tree_from_json",
    "tree_to_json",
    "load_tree",
    "save_tree",
]

#: relative tolerance for mass bookkeeping; deep homogeneous trees stay exact
#: in binary floating point, irregular ones accumulate rounding at this scale
MASS_RTOL = 1e-12


class TreeStructureError(ValueError):
    """Structural defect in a tree; carries the offending node id when known."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


@dataclass
class TreeNode:
    """Construction-time nested node; mirrors the JSON wire format."""

    measure: float
    children: list["TreeNode"] = field(default_factory=list)
    value: float | None = None


class AlphaTree:
    """Flattened immutable measure tree.

    Nodes are integers ``0 .. n_nodes-1`` in depth-first preorder (the root is
    0).  Use :meth:`from_node` or :func:`build_dyadic_tree` to construct.
    """

    def __init__(self, alpha, measure, parent, children, depth_of, strict=True):
        if not (0.0 < alpha <= 0.5):
            raise TreeStructureError(f"alpha must lie in (0, 1/2], got {alpha}")
        self.alpha = float(alpha)
        self.measure = np.asarray(measure, dtype=float)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.children = [list(c) for c in children]
        self.depth_of = np.asarray(depth_of, dtype=np.int64)
        self.n_nodes = self.measure.size
        self.depth = int(self.depth_of.max()) if self.n_nodes else 0

        # subtree_end[i]: one past the last preorder id in the subtree of i
        end = np.arange(1, self.n_nodes + 1, dtype=np.int64)
        for i in range(self.n_nodes - 1, -1, -1):
            for c in self.children[i]:
                end[i] = max(end[i], end[c])
        self.subtree_end = end

        self._generations = [
            np.flatnonzero(self.depth_of == d) for d in range(self.depth + 1)
        ]
        self._slice_cache: dict[int, tuple[list[np.ndarray], list[np.ndarray]]] = {}
        if strict:
            self._validate()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_node(cls, alpha: float, root: TreeNode, strict: bool = True) -> "AlphaTree":
        """Flatten a nested :class:`TreeNode` description."""
        measure: list[float] = []
        parent: list[int] = []
        children: list[list[int]] = []
        depth_of: list[int] = []
        stack = [(root, -1, 0)]
        while stack:
            node, par, d = stack.pop()
            idx = len(measure)
            measure.append(float(node.measure))
            parent.append(par)
            children.append([])
            depth_of.append(d)
            if par >= 0:
                children[par].append(idx)
            # reversed keeps children in declaration order under a LIFO stack
            for child in reversed(node.children):
                stack.append((child, idx, d + 1))
        return cls(alpha, measure, parent, children, depth_of, strict=strict)

    def _validate(self):
        if self.n_nodes == 0:
            raise TreeStructureError("empty tree")
        root_mass = self.measure[0]
        if not (root_mass > 0.0 and np.isfinite(root_mass)):
            raise TreeStructureError(f"root measure must be positive and finite, got {root_mass}", node=0)
        if np.any(self.measure <= 0.0) or not np.all(np.isfinite(self.measure)):
            bad = int(np.flatnonzero((self.measure <= 0) | ~np.isfinite(self.measure))[0])
            raise TreeStructureError(f"node {bad} has non-positive or non-finite measure", node=bad)
        for i, kids in enumerate(self.children):
            if not kids:
                if self.depth_of[i] != self.depth:
                    raise TreeStructureError(
                        f"leaf {i} sits at depth {self.depth_of[i]} but the tree "
                        f"has depth {self.depth}; generations must be uniform",
                        node=i,
                    )
                continue
            m = self.measure[i]
            total = self.measure[kids].sum()
            if abs(total - m) > MASS_RTOL * max(abs(m), abs(total)):
                raise TreeStructureError(
                    f"children of node {i} carry mass {total!r}, parent has {m!r}",
                    node=i,
                )
            ratios = self.measure[kids] / m
            if np.any(ratios < self.alpha - 1e-12):
                worst = kids[int(np.argmin(ratios))]
                raise TreeStructureError(
                    f"child {worst} of node {i} has mass ratio {ratios.min()!r} "
                    f"below alpha={self.alpha}",
                    node=worst,
                )

    # -- structure queries ---------------------------------------------------

    @property
    def root(self) -> int:
        return 0

    def generation(self, d: int) -> np.ndarray:
        """Node ids of generation ``d`` in preorder (ascending id) order."""
        if not (0 <= d <= self.depth):
            raise KeyError(f"generation {d} out of range 0..{self.depth}")
        return self._generations[d]

    def is_leaf(self, node: int) -> bool:
        return not self.children[node]

    def generation_slices(self, n: int):
        """Per-generation reduceat offsets into the generation-``n`` order.

        Returns ``(starts, wsums)`` where for each ``d <= n``, ``starts[d]``
        holds the offset of every generation-``d`` node's first descendant in
        generation ``n``, and ``wsums[d]`` the total descendant mass per node.
        Cached; trees are reused heavily by the verification suites.
        """
        if n in self._slice_cache:
            return self._slice_cache[n]
        gen_ids = self.generation(n)
        w = self.measure[gen_ids]
        starts: list[np.ndarray] = []
        wsums: list[np.ndarray] = []
        for d in range(n + 1):
            ids = self.generation(d)
            lo = np.searchsorted(gen_ids, ids)
            starts.append(lo.astype(np.int64))
            wsums.append(np.add.reduceat(w, lo) if ids.size else np.empty(0))
        self._slice_cache[n] = (starts, wsums)
        return starts, wsums


class SimpleFunction:
    """A function constant on every node of generation ``depth``.

    ``values`` may be a dict keyed by generation-``depth`` node id, or an
    array aligned with ``tree.generation(depth)``.
    """

    def __init__(self, tree: AlphaTree, depth: int, values):
        if not (0 <= depth <= tree.depth):
            raise ValueError(f"depth {depth} out of range 0..{tree.depth}")
        self.tree = tree
        self.depth = int(depth)
        gen = tree.generation(depth)
        if isinstance(values, dict):
            missing = [int(j) for j in gen if j not in values]
            if missing:
                raise ValueError(f"missing values for generation-{depth} nodes {missing[:5]}")
            arr = np.asarray([values[int(j)] for j in gen], dtype=float)
        else:
            arr = np.asarray(values, dtype=float)
            if arr.shape != (gen.size,):
                raise ValueError(
                    f"expected {gen.size} values for generation {depth}, got shape {arr.shape}"
                )
        self.values = arr
        self._gen = gen
        self._means: np.ndarray | None = None
        self._mean_sqs: np.ndarray | None = None

    def value_at(self, node: int) -> float:
        idx = np.searchsorted(self._gen, node)
        if idx >= self._gen.size or self._gen[idx] != node:
            raise KeyError(f"node {node} is not in generation {self.depth}")
        return float(self.values[idx])

    def node_means_of(self, leaf_values: np.ndarray) -> np.ndarray:
        """Mass-weighted mean of ``leaf_values`` over every node of depth <= N.

        ``leaf_values`` is aligned with ``tree.generation(depth)``.  Returns an
        array indexed by node id (NaN beyond depth ``N``).
        """
        tree = self.tree
        starts, wsums = tree.generation_slices(self.depth)
        w = tree.measure[self._gen]
        wv = w * leaf_values
        out = np.full(tree.n_nodes, np.nan)
        for d in range(self.depth + 1):
            ids = tree.generation(d)
            out[ids] = np.add.reduceat(wv, starts[d]) / wsums[d]
        return out

    def node_moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays of per-node mean and mean square, indexed by node id."""
        if self._means is None:
            self._means = self.node_means_of(self.values)
            self._mean_sqs = self.node_means_of(self.values * self.values)
        return self._means, self._mean_sqs


@dataclass(frozen=True)
class OscillationReport:
    """Per-node moments and oscillations; ``delta2 = mean_sq - mean^2``."""

    node: int
    mean: float
    mean_sq: float
    delta1: float
    delta2: float


@dataclass(frozen=True)
class BmoNorms:
    norm2: float
    norm1: float
    reports: list[OscillationReport]


def build_dyadic_tree(n: int, depth: int, root_measure: float = 1.0) -> AlphaTree:
    """Homogeneous tree where every node has ``2^n`` children of equal mass.

    This is the tree of dyadic subcubes of a cube in dimension ``n``; its
    ratio bound is ``alpha = 2^-n`` and it has ``depth + 1`` generations.
    """
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if root_measure <= 0:
        raise ValueError(f"root measure must be positive, got {root_measure}")
    k = 2**n

    def make(measure: float, d: int) -> TreeNode:
        if d == depth:
            return TreeNode(measure)
        return TreeNode(measure, [make(measure / k, d + 1) for _ in range(k)])

    return AlphaTree.from_node(2.0**-n, make(float(root_measure), 0))


def validate_alpha(tree: AlphaTree) -> float:
    """Maximal admissible ratio bound: min over parent-child mass ratios.

    The tree is an alpha-tree for every ``alpha <= min(result, 1/2)``.  Mass
    sums are re-checked; a mismatch raises :class:`TreeStructureError` naming
    the offending node.  A childless root (depth 0) returns 1.
    """
    best = 1.0
    for i, kids in enumerate(tree.children):
        if not kids:
            continue
        m = tree.measure[i]
        total = tree.measure[kids].sum()
        if abs(total - m) > MASS_RTOL * max(abs(m), abs(total)):
            raise TreeStructureError(
                f"children of node {i} carry mass {total!r}, parent has {m!r}",
                node=i,
            )
        best = min(best, float(tree.measure[kids].min() / m))
    return min(best, 1.0)


def node_point(phi: SimpleFunction, node: int) -> OmegaPoint:
    """The moment-plane point ``(<f>_J, <f^2>_J)`` of a node of depth <= N."""
    if not (0 <= node < phi.tree.n_nodes):
        raise KeyError(f"unknown node id {node}")
    if phi.tree.depth_of[node] > phi.depth:
        raise KeyError(
            f"node {node} has depth {phi.tree.depth_of[node]}, "
            f"function is defined on generation {phi.depth}"
        )
    m1, m2 = phi.node_moments()
    return OmegaPoint(float(m1[node]), float(m2[node]))


def oscillation_arrays(phi: SimpleFunction):
    """Vectorized per-node statistics ``(mean, mean_sq, delta1, delta2)``.

    Arrays are indexed by node id and filled for depth <= N (NaN beyond).
    ``delta2`` is clamped at zero: it is nonnegative exactly, and rounding may
    produce tiny negatives for near-constant functions.
    """
    tree = phi.tree
    m1, m2 = phi.node_moments()
    starts, wsums = tree.generation_slices(phi.depth)
    w = tree.measure[phi._gen]
    v = phi.values
    d1 = np.full(tree.n_nodes, np.nan)
    for d in range(phi.depth + 1):
        ids = tree.generation(d)
        lo = starts[d]
        counts = np.diff(np.append(lo, v.size))
        dev = np.abs(v - np.repeat(m1[ids], counts))
        d1[ids] = np.add.reduceat(w * dev, lo) / wsums[d]
    d2 = m2 - m1 * m1
    d2 = np.where(np.isnan(d2), d2, np.maximum(d2, 0.0))
    return m1, m2, d1, d2


def bmo_norms(phi: SimpleFunction) -> BmoNorms:
    """Both BMO norms plus per-node oscillation reports.

    The supremum runs over every node of depth <= N, including generation-N
    nodes, where both oscillations vanish; the maximum is attained because the
    tree is finite.
    """
    m1, m2, d1, d2 = oscillation_arrays(phi)
    mask = phi.tree.depth_of <= phi.depth
    reports = [
        OscillationReport(
            node=int(j),
            mean=float(m1[j]),
            mean_sq=float(m2[j]),
            delta1=float(d1[j]),
            delta2=float(d2[j]),
        )
        for j in np.flatnonzero(mask)
    ]
    norm2 = float(np.sqrt(np.nanmax(d2[mask]))) if reports else 0.0
    norm1 = float(np.nanmax(d1[mask])) if reports else 0.0
    return BmoNorms(norm2=norm2, norm1=norm1, reports=reports)


def truncate(phi: SimpleFunction, m: int) -> SimpleFunction:
    """Conditional expectation onto generation ``m <= N``.

    Every generation-``m`` node gets its own average as the value.  The global
    mean is preserved; the global mean square can only decrease.
    """
    if not (0 <= m <= phi.depth):
        raise ValueError(f"truncation level {m} out of range 0..{phi.depth}")
    if m == phi.depth:
        return SimpleFunction(phi.tree, m, phi.values.copy())
    m1, _ = phi.node_moments()
    return SimpleFunction(phi.tree, m, m1[phi.tree.generation(m)])


# -- JSON wire format --------------------------------------------------------
#
#   {"alpha": a, "root": {"measure": m, "children": [...], "value": v?}}
#
# "value" appears exactly on generation-N nodes when a simple function rides
# along with the tree.


def tree_from_json(doc: dict) -> tuple[AlphaTree, SimpleFunction | None]:
    """Parse the JSON format; returns the tree and the function, if any."""
    if "alpha" not in doc or "root" not in doc:
        raise TreeStructureError("document must carry 'alpha' and 'root'")

    def parse(obj) -> TreeNode:
        node = TreeNode(measure=float(obj["measure"]))
        if "value" in obj:
            node.value = float(obj["value"])
        for child in obj.get("children", []):
            node.children.append(parse(child))
        return node

    root = parse(doc["root"])
    tree = AlphaTree.from_node(float(doc["alpha"]), root)

    # re-walk in the same preorder to map values onto flat ids
    values: dict[int, float] = {}
    depth_by_id: dict[int, int] = {}
    stack = [(root, 0)]
    idx = -1
    order: list[TreeNode] = []
    while stack:
        node, d = stack.pop()
        idx += 1
        order.append(node)
        depth_by_id[idx] = d
        if node.value is not None:
            values[idx] = node.value
        for child in reversed(node.children):
            stack.append((child, d + 1))
    if not values:
        return tree, None
    depths = {depth_by_id[i] for i in values}
    if len(depths) != 1:
        raise TreeStructureError(f"values appear on several generations: {sorted(depths)}")
    n = depths.pop()
    return tree, SimpleFunction(tree, n, values)


def tree_to_json(tree: AlphaTree, phi: SimpleFunction | None = None) -> dict:
    values: dict[int, float] = {}
    if phi is not None:
        if phi.tree is not tree:
            raise ValueError("function is not defined on this tree")
        gen = tree.generation(phi.depth)
        values = {int(j): float(v) for j, v in zip(gen, phi.values)}

    def emit(i: int) -> dict:
        obj: dict = {"measure": float(tree.measure[i])}
        if i in values:
            obj["value"] = values[i]
        if tree.children[i]:
            obj["children"] = [emit(c) for c in tree.children[i]]
        return obj

    return {"alpha": tree.alpha, "root": emit(0)}


def load_tree(path) -> tuple[AlphaTree, SimpleFunction | None]:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return tree_from_json(json.load(fh))


def save_tree(path, tree: AlphaTree, phi: SimpleFunction | None = None) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(tree_to_json(tree, phi), fh)
        fh.write("\n")
