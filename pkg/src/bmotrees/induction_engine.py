"""Generation-by-generation folding of strip functions over measure trees.

The engine turns the two-point concavity/convexity of a strip function into
integral bounds.  Each node's point is the mass-weighted combination of its
children's points; peeling one child at a time (always one whose removal
leaves the remainder inside the strip, which :func:`geometry.select_removable`
guarantees) rewrites that combination as a cascade of two-point splits with
weights in ``[alpha, 1 - alpha]``.  A function that is concave across such
splits therefore satisfies, at every node,

    F(P_J) >= sum_children mass_I / mass_J * F(P_I)

and summing over a generation makes the sequence

    S_m = (1 / mass_X) * sum_{J in generation m} mass_J F(P_J)

nonincreasing in ``m`` (nondecreasing in the convex case).  Since
generation-N points sit on the lower boundary, ``S_N`` is the integral of
``F(f, f^2)``; the chain is checked here generation by generation, which is
stronger than the end-to-end bound.

``verify_jn`` and ``verify_osc`` apply the machinery to the exponential bound
and to the oscillation comparison, checking every subtree root (subtrees of
alpha-trees are alpha-trees).  Seeded random trees and functions for the
property suites live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import OmegaPoint, select_removable
from .jn_bellman import ThresholdError, eps0_alpha, jn_constant
from .osc_bellman import osc_lower_bound
from .tree_core import (
    AlphaTree,
    SimpleFunction,
    TreeNode,
    build_dyadic_tree,
    oscillation_arrays,
)

__all__ = [
    "Split",
    "InductionTrace",
    "InductionError",
    "decompose_children",
    "bellman_fold",
    "verify_jn",
    "verify_osc",
    "JnVerification",
    "OscVerification",
    "random_alpha_tree",
    "random_simple_function",
    "random_dyadic_instance",
]


@dataclass(frozen=True)
class Split:
    """One two-point step: ``combined = beta * split_point + (1-beta) * remainder``.

    ``beta`` is the peeled child's share of the remaining mass and lies in
    ``[alpha, 1 - alpha]``; when it exceeds 1/2, swapping the two points puts
    the weight back into the ``[alpha, 1/2]`` normal form.
    """

    child: int
    beta: float
    split_point: OmegaPoint
    remainder_point: OmegaPoint


class InductionError(RuntimeError):
    """A fold step failed; names the node where monotonicity broke."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


def decompose_children(
    parent: int, phi: SimpleFunction, eps: float, tol: float = 1e-12
) -> list[Split]:
    """Cascade of two-point splits reconstructing a parent point.

    Peels children one at a time; each step removes a child whose removal
    leaves the average of the rest inside the strip.  Composing the returned
    splits (in order) reproduces the parent point exactly up to rounding.  A
    single child yields the empty list.
    """
    tree = phi.tree
    if not (0 <= parent < tree.n_nodes):
        raise KeyError(f"unknown node id {parent}")
    if tree.depth_of[parent] >= phi.depth:
        raise ValueError(f"node {parent} has no children above generation {phi.depth}")
    kids = tree.children[parent]
    m1, m2 = phi.node_moments()
    if len(kids) == 1:
        return []

    masses = [float(tree.measure[c]) for c in kids]
    points = [OmegaPoint(float(m1[c]), float(m2[c])) for c in kids]
    ids = list(kids)
    splits: list[Split] = []
    while len(ids) > 1:
        total = sum(masses)
        weights = [m / total for m in masses]
        j = select_removable(weights, points, eps, tol)
        xs = np.asarray(points, dtype=float)
        w = np.asarray(weights, dtype=float)
        combo = w @ xs
        rest = (combo - w[j] * xs[j]) / (1.0 - w[j])
        remainder = OmegaPoint(float(rest[0]), float(rest[1]))
        splits.append(
            Split(
                child=ids[j],
                beta=float(weights[j]),
                split_point=points[j],
                remainder_point=remainder,
            )
        )
        del ids[j], masses[j], points[j]
        if len(ids) == 1:
            # the cascade bottoms out on the last child's exact point
            splits[-1] = Split(
                child=splits[-1].child,
                beta=splits[-1].beta,
                split_point=splits[-1].split_point,
                remainder_point=points[0],
            )
    return splits


@dataclass(frozen=True)
class InductionTrace:
    """Per-generation sums of a fold and the resulting integral ``S_N``."""

    sums: list[float]
    mode: str
    final_integral: float


def _points_in_strip(phi: SimpleFunction, eps: float, tol: float = 1e-9) -> None:
    m1, m2 = phi.node_moments()
    mask = phi.tree.depth_of <= phi.depth
    gap = m2[mask] - m1[mask] ** 2
    if np.any(gap > eps * eps + tol):
        raise ValueError(
            f"some node points leave the strip: max oscillation "
            f"{float(np.sqrt(gap.max()))!r} exceeds eps={eps}"
        )


def bellman_fold(
    phi: SimpleFunction, F, mode: str, eps: float, slack: float = 1e-9
) -> InductionTrace:
    """Fold ``F`` over the generations and assert the monotone chain.

    ``F`` receives an :class:`OmegaPoint` whose components are arrays and must
    return values elementwise.  ``mode`` is ``"concave"`` (nonincreasing
    sums) or ``"convex"`` (nondecreasing).  The chain is enforced node by
    node: a violation beyond ``slack`` raises :class:`InductionError` naming
    the offending node, which is the diagnostic for an ``F`` lacking the
    claimed shape at this tree's ratio bound.
    """
    if mode not in ("concave", "convex"):
        raise ValueError(f"mode must be 'concave' or 'convex', got {mode!r}")
    _points_in_strip(phi, eps)
    tree = phi.tree
    m1, m2 = phi.node_moments()
    mask = tree.depth_of <= phi.depth
    fvals = np.full(tree.n_nodes, np.nan)
    ids = np.flatnonzero(mask)
    fvals[ids] = F(OmegaPoint(m1[ids], m2[ids]))

    sign = 1.0 if mode == "concave" else -1.0
    root_mass = tree.measure[0]
    sums: list[float] = []
    for d in range(phi.depth + 1):
        gen = tree.generation(d)
        sums.append(float(np.dot(tree.measure[gen], fvals[gen]) / root_mass))
    # node-level check is stronger than the generation chain and is what the
    # peeling argument actually yields
    for d in range(phi.depth):
        for j in tree.generation(d):
            kids = tree.children[j]
            agg = float(np.dot(tree.measure[kids], fvals[kids]) / tree.measure[j])
            if sign * (fvals[j] - agg) < -slack:
                raise InductionError(
                    f"fold step violated at node {j}: F(parent)={fvals[j]!r} vs "
                    f"children aggregate {agg!r} in {mode} mode",
                    node=int(j),
                )
    return InductionTrace(sums=sums, mode=mode, final_integral=sums[-1])


@dataclass(frozen=True)
class JnVerification:
    lhs: float
    rhs: float
    holds: bool
    worst_margin: float
    worst_node: int
    nodes_checked: int


def verify_jn(
    phi: SimpleFunction, alpha: float, eps: float, slack: float = 1e-9
) -> JnVerification:
    """Exponential integral bound ``<e^f>_J <= K(alpha, eps) e^{<f>_J}``.

    Checked at the root and at every subtree root of depth <= N.  Requires
    ``eps`` below the threshold and the function's norm at most ``eps``.
    """
    if not (0.0 < eps < eps0_alpha(alpha)):
        raise ThresholdError(
            f"eps must lie in (0, eps0({alpha})={eps0_alpha(alpha)!r}), got {eps}"
        )
    _points_in_strip(phi, eps)
    K = jn_constant(alpha, eps)
    m1, _ = phi.node_moments()
    exp_means = phi.node_means_of(np.exp(phi.values))
    ids = np.flatnonzero(phi.tree.depth_of <= phi.depth)
    margins = K * np.exp(m1[ids]) - exp_means[ids]
    worst = int(np.argmin(margins))
    return JnVerification(
        lhs=float(exp_means[0]),
        rhs=float(K * math.exp(m1[0])),
        holds=bool(margins[worst] >= -slack),
        worst_margin=float(margins[worst]),
        worst_node=int(ids[worst]),
        nodes_checked=ids.size,
    )


@dataclass(frozen=True)
class OscVerification:
    holds: bool
    worst_margin: float
    worst_ratio: float
    worst_node: int
    nodes_checked: int


def verify_osc(
    phi: SimpleFunction, alpha: float, eps: float, slack: float = 1e-9
) -> OscVerification:
    """Oscillation bound ``sqrt(alpha)/((1+alpha) eps) delta2 <= delta1`` per node.

    ``eps = 0`` is accepted only for constant functions, where the bound is
    trivially ``0 <= 0``.
    """
    if eps < 0.0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if eps == 0.0:
        if np.ptp(phi.values) != 0.0:
            raise ValueError("eps=0 with a nonconstant function is contradictory")
        ids = np.flatnonzero(phi.tree.depth_of <= phi.depth)
        return OscVerification(
            holds=True,
            worst_margin=0.0,
            worst_ratio=0.0,
            worst_node=0,
            nodes_checked=ids.size,
        )
    _points_in_strip(phi, eps)
    _, _, d1, d2 = oscillation_arrays(phi)
    ids = np.flatnonzero(phi.tree.depth_of <= phi.depth)
    bounds = osc_lower_bound(1.0, alpha, eps) * d2[ids]
    margins = d1[ids] - bounds
    worst = int(np.argmin(margins))
    active = d1[ids] > 0.0
    worst_ratio = float(np.max(bounds[active] / d1[ids][active])) if np.any(active) else 0.0
    return OscVerification(
        holds=bool(margins[worst] >= -slack),
        worst_margin=float(margins[worst]),
        worst_ratio=worst_ratio,
        worst_node=int(ids[worst]),
        nodes_checked=ids.size,
    )


# -- seeded generators for the property suites -------------------------------


def random_alpha_tree(
    rng: np.random.Generator,
    alpha: float,
    depth: int,
    max_children: int = 4,
    root_measure: float = 1.0,
) -> AlphaTree:
    """Irregular tree with ratio bound ``alpha``; child counts vary, atoms allowed.

    Child weights are ``alpha + (1 - k alpha) * Dirichlet``, so every ratio
    strictly exceeds ``alpha`` and sums are exact up to rounding.  The root
    always splits; a pure atom chain has a single leaf and carries no
    oscillation, which would starve the verification suites.
    """
    if not (0.0 < alpha <= 0.5):
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    kmax = min(max_children, int(1.0 / alpha))

    def make(measure: float, d: int) -> TreeNode:
        if d == depth:
            return TreeNode(measure)
        k = int(rng.integers(2 if d == 0 else 1, kmax + 1))
        if k == 1:
            return TreeNode(measure, [make(measure, d + 1)])
        weights = alpha + (1.0 - k * alpha) * rng.dirichlet(np.ones(k))
        return TreeNode(measure, [make(measure * w, d + 1) for w in weights])

    return AlphaTree.from_node(alpha, make(float(root_measure), 0))


def random_simple_function(
    rng: np.random.Generator, tree: AlphaTree, eps: float
) -> SimpleFunction:
    """Leaf values uniform in [-1, 1], rescaled so the norm equals ``eps``.

    Scaling is exact on oscillations (they are homogeneous), so the resulting
    norm matches ``eps`` to rounding.
    """
    n_leaves = tree.generation(tree.depth).size
    for _ in range(100):
        values = rng.uniform(-1.0, 1.0, size=n_leaves)
        phi = SimpleFunction(tree, tree.depth, values)
        _, _, _, d2 = oscillation_arrays(phi)
        norm = math.sqrt(float(np.nanmax(d2)))
        if norm > 1e-6:
            return SimpleFunction(tree, tree.depth, values * (eps / norm))
    raise RuntimeError("could not draw a nonconstant function")


def random_dyadic_instance(
    rng: np.random.Generator,
    n: int,
    depth: int,
    eps: float,
    _cache: dict = {},
) -> SimpleFunction:
    """Random function of norm ``eps`` on the (cached) dyadic tree."""
    key = (n, depth)
    if key not in _cache:
        _cache[key] = build_dyadic_tree(n, depth)
    return random_simple_function(rng, _cache[key], eps)
