"""Binary martingales of strip points and their goodness geometry.

A :class:`BinaryMartingale` is a finite binary tree whose nodes carry a
positive mass and a strip point, with the conditional-average identity

    mass(J) * point(J) = mass(J-) * point(J-) + mass(J+) * point(J+)

at every split and every point inside the strip.  The parent point therefore
sits on the chord between the children points, cutting it at the mass ratio.

Goodness quantifies how far chords stray outside the strip.  For each split
this module reports two numbers:

* ``alpha_max``: the smaller of the goodness values of the two sub-segments
  from the parent point to each child point.  This is the value the splitting
  strategies below are scored by, and it is the conservative one: if both
  halves are alpha-good, so is the whole chord.
* ``chord_alpha_max``: the goodness of the full chord between the children,
  which is the exact adaptedness parameter (the split is usable by the
  Jensen fold for every ``alpha`` up to it).  Splits produced by peeling one
  child off a strip-average always have ``chord_alpha_max >= alpha`` because
  the escape interval cannot cover the parent's position on the chord.

The unit-square example: a function equal to 0 on two diagonal quarters and
``+-sqrt(2)`` on the others (norm 1) gives quarter points ``(0,0), (0,0),
(sqrt(2),2), (-sqrt(2),2)`` and root point ``(0,1)``.  Peeling off quarters
one at a time scores exactly 1/2 (the chord from the root point to a heavy
quarter spends half its length outside); splitting into halves that pair a
zero quarter with a heavy one scores exactly 1 (every chord stays inside,
touching the boundary tangentially).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import OmegaPoint, in_omega, segment_goodness
from .induction_engine import decompose_children
from .jn_bellman import eps0_alpha
from .tree_core import SimpleFunction, oscillation_arrays

__all__ = [
    "MartingaleNode",
    "MartingaleStructureError",
    "BinaryMartingale",
    "NodeGoodness",
    "GoodnessReport",
    "martingale_goodness",
    "SquareExample",
    "square_example",
    "JensenError",
    "jensen_fold",
    "Alpha0Bound",
    "alpha0_bound",
    "binary_martingale_from_function",
    "martingale_to_json",
    "martingale_from_json",
]

POINT_RTOL = 1e-12


class MartingaleStructureError(ValueError):
    """Structural defect; carries the path of the offending node ('' = root)."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


@dataclass
class MartingaleNode:
    """Node with a mass, a strip point, and either two children or none."""

    measure: float
    point: OmegaPoint
    left: "MartingaleNode | None" = None
    right: "MartingaleNode | None" = None

    def __post_init__(self):
        self.point = OmegaPoint(float(self.point[0]), float(self.point[1]))

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


class BinaryMartingale:
    """Validated binary martingale with all points inside the strip."""

    def __init__(self, root: MartingaleNode, eps: float):
        if eps <= 0.0:
            raise ValueError(f"eps must be positive, got {eps}")
        self.root = root
        self.eps = float(eps)
        self._validate(root, "")

    def _validate(self, node: MartingaleNode, path: str):
        if node.measure <= 0.0:
            raise MartingaleStructureError(
                f"node '{path or 'root'}' has non-positive measure {node.measure}", path
            )
        if not in_omega(node.point, self.eps, 1e-9):
            raise MartingaleStructureError(
                f"node '{path or 'root'}' point {tuple(node.point)} lies outside the strip",
                path,
            )
        if (node.left is None) != (node.right is None):
            raise MartingaleStructureError(
                f"node '{path or 'root'}' must have both children or none", path
            )
        if node.left is None:
            return
        lm, rm = node.left.measure, node.right.measure
        if abs(lm + rm - node.measure) > POINT_RTOL * max(node.measure, lm + rm):
            raise MartingaleStructureError(
                f"node '{path or 'root'}' mass {node.measure!r} != children sum {lm + rm!r}",
                path,
            )
        for i in (0, 1):
            combined = lm * node.left.point[i] + rm * node.right.point[i]
            expect = node.measure * node.point[i]
            scale = max(abs(expect), abs(combined), node.measure)
            if abs(combined - expect) > 1e-12 * max(scale, 1.0):
                raise MartingaleStructureError(
                    f"node '{path or 'root'}' violates the conditional-average "
                    f"identity in component {i + 1}",
                    path,
                )
        self._validate(node.left, path + "L")
        self._validate(node.right, path + "R")

    def walk(self):
        """Yield ``(path, depth, node)`` in preorder."""
        stack = [("", 0, self.root)]
        while stack:
            path, depth, node = stack.pop()
            yield path, depth, node
            if node.left is not None:
                stack.append((path + "R", depth + 1, node.right))
                stack.append((path + "L", depth + 1, node.left))


@dataclass(frozen=True)
class NodeGoodness:
    path: str
    alpha_max: float
    chord_alpha_max: float


@dataclass(frozen=True)
class GoodnessReport:
    """Per-split goodness; both overall values are minima over the splits.

    ``overall`` uses the parent-to-child sub-segments (strategy score),
    ``chord_overall`` the full children chords (exact adaptedness).  The
    martingale is adapted for every ``alpha <= overall`` since
    ``overall <= chord_overall``.  Splits with coincident children count 1.
    """

    nodes: list[NodeGoodness]
    overall: float
    chord_overall: float


def _points_coincide(a: OmegaPoint, b: OmegaPoint) -> bool:
    scale = max(abs(a.x1), abs(b.x1), abs(a.x2), abs(b.x2), 1.0)
    return abs(a.x1 - b.x1) <= 1e-14 * scale and abs(a.x2 - b.x2) <= 1e-14 * scale


def martingale_goodness(m: BinaryMartingale) -> GoodnessReport:
    """Score every split of the martingale; see :class:`GoodnessReport`."""
    nodes: list[NodeGoodness] = []
    overall = 1.0
    chord_overall = 1.0
    for path, _, node in m.walk():
        if node.is_leaf:
            continue
        lp, rp = node.left.point, node.right.point
        if _points_coincide(lp, rp):
            nodes.append(NodeGoodness(path, 1.0, 1.0))
            continue
        chord = segment_goodness(lp, rp, m.eps).alpha_max
        halves = []
        for child_point in (lp, rp):
            if _points_coincide(node.point, child_point):
                halves.append(1.0)
            else:
                halves.append(segment_goodness(node.point, child_point, m.eps).alpha_max)
        split = min(halves)
        nodes.append(NodeGoodness(path, split, chord))
        overall = min(overall, split)
        chord_overall = min(chord_overall, chord)
    return GoodnessReport(nodes=nodes, overall=overall, chord_overall=chord_overall)


@dataclass(frozen=True)
class SquareExample:
    strategy: str
    martingale: BinaryMartingale
    overall_alpha: float
    report: GoodnessReport


def square_example(strategy: str) -> SquareExample:
    """The two splitting strategies for the unit-square function.

    ``"quarters"`` peels one heavy quarter, then the other, then splits the
    zero pair; it scores exactly 1/2.  ``"halves"`` pairs each zero quarter
    with a heavy one first; every chord stays inside the strip and it scores
    exactly 1.
    """
    s2 = math.sqrt(2.0)
    A = MartingaleNode(0.25, OmegaPoint(0.0, 0.0))
    B = MartingaleNode(0.25, OmegaPoint(0.0, 0.0))
    C = MartingaleNode(0.25, OmegaPoint(s2, 2.0))
    D = MartingaleNode(0.25, OmegaPoint(-s2, 2.0))
    if strategy == "quarters":
        AB = MartingaleNode(0.5, OmegaPoint(0.0, 0.0), A, B)
        ABD = MartingaleNode(0.75, OmegaPoint(-s2 / 3.0, 2.0 / 3.0), D, AB)
        root = MartingaleNode(1.0, OmegaPoint(0.0, 1.0), C, ABD)
    elif strategy == "halves":
        AC = MartingaleNode(0.5, OmegaPoint(s2 / 2.0, 1.0), A, C)
        BD = MartingaleNode(0.5, OmegaPoint(-s2 / 2.0, 1.0), B, D)
        root = MartingaleNode(1.0, OmegaPoint(0.0, 1.0), AC, BD)
    else:
        raise ValueError(f"strategy must be 'quarters' or 'halves', got {strategy!r}")
    m = BinaryMartingale(root, eps=1.0)
    report = martingale_goodness(m)
    return SquareExample(
        strategy=strategy,
        martingale=m,
        overall_alpha=report.overall,
        report=report,
    )


class JensenError(RuntimeError):
    """Level-sum monotonicity failed; the function lacks the claimed shape."""

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


def jensen_fold(
    m: BinaryMartingale, F, mode: str, alpha: float, slack: float = 1e-9
) -> list[float]:
    """Level sums of ``F`` over the martingale, checked for monotonicity.

    Level ``k`` covers the nodes at depth ``k`` together with shallower
    leaves (which simply persist).  For an ``alpha``-concave ``F`` on a
    martingale of goodness at least ``alpha`` the sums are nonincreasing;
    convex mode reverses the direction.  Goodness is validated up front.
    """
    if mode not in ("concave", "convex"):
        raise ValueError(f"mode must be 'concave' or 'convex', got {mode!r}")
    report = martingale_goodness(m)
    if report.overall < alpha - 1e-12:
        raise ValueError(
            f"martingale goodness {report.overall!r} is below the claimed alpha={alpha}"
        )
    max_depth = max(depth for _, depth, _ in m.walk())
    sums = np.zeros(max_depth + 1)
    root_mass = m.root.measure
    for _, depth, node in m.walk():
        contribution = node.measure * float(F(node.point)) / root_mass
        if node.is_leaf:
            sums[depth:] += contribution
        else:
            sums[depth] += contribution
    sign = 1.0 if mode == "concave" else -1.0
    for k in range(max_depth):
        if sign * (sums[k] - sums[k + 1]) < -slack:
            raise JensenError(
                f"level sums not monotone between levels {k} and {k + 1}: "
                f"{sums[k]!r} -> {sums[k + 1]!r} in {mode} mode",
                level=k,
            )
    return [float(s) for s in sums]


@dataclass(frozen=True)
class Alpha0Bound:
    alpha0_lower: float
    eps0_lower: float


def alpha0_bound(n: int) -> Alpha0Bound:
    """Guaranteed martingale parameter and threshold bounds in dimension ``n``.

    Every function generates a ``2^-n``-martingale through dyadic splitting,
    so ``alpha0(n) >= 2^-n`` and the integrability threshold is at least the
    threshold value at that ratio.  In dimension 1 an interval construction
    achieves every ratio below 1, giving exactly ``(1, 1)``.
    """
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")
    if n == 1:
        return Alpha0Bound(alpha0_lower=1.0, eps0_lower=1.0)
    alpha = 2.0**-n
    return Alpha0Bound(alpha0_lower=alpha, eps0_lower=eps0_alpha(alpha))


def binary_martingale_from_function(
    phi: SimpleFunction, eps: float | None = None
) -> BinaryMartingale:
    """Binary martingale generated by a tree-simple function.

    Each multi-child node of the tree becomes a cascade of binary splits via
    the peeling decomposition; single-child nodes pass through.  ``eps``
    defaults to the function's norm.  The resulting martingale has
    ``chord_overall`` at least the tree's ratio bound.
    """
    tree = phi.tree
    if eps is None:
        _, _, _, d2 = oscillation_arrays(phi)
        eps = math.sqrt(float(np.nanmax(d2)))
    if eps <= 0.0:
        raise ValueError("constant functions generate no usable martingale; give eps")
    m1, m2 = phi.node_moments()

    def point_of(node: int) -> OmegaPoint:
        return OmegaPoint(float(m1[node]), float(m2[node]))

    def build(node: int) -> MartingaleNode:
        kids = tree.children[node]
        depth = int(tree.depth_of[node])
        me = MartingaleNode(float(tree.measure[node]), point_of(node))
        if depth >= phi.depth or not kids:
            return me
        if len(kids) == 1:
            # an atom: the single child carries the same mass and point, and a
            # binary tree has no unary nodes, so collapse the chain
            return build(kids[0])
        splits = decompose_children(node, phi, eps)
        current = me
        remaining = float(tree.measure[node])
        for i, split in enumerate(splits):
            child_tree = build(split.child)
            remaining -= child_tree.measure
            if i < len(splits) - 1:
                rest = MartingaleNode(remaining, split.remainder_point)
            else:
                last = [k for k in kids if k not in {s.child for s in splits}]
                rest = build(last[0])
            current.left = child_tree
            current.right = rest
            current = rest
        return me

    return BinaryMartingale(build(0), eps=float(eps))


# -- JSON wire format: the tree format plus a per-node point -----------------


def martingale_to_json(m: BinaryMartingale) -> dict:
    def emit(node: MartingaleNode) -> dict:
        obj = {
            "measure": node.measure,
            "point": [node.point.x1, node.point.x2],
        }
        if node.left is not None:
            obj["children"] = [emit(node.left), emit(node.right)]
        return obj

    return {"eps": m.eps, "root": emit(m.root)}


def martingale_from_json(doc: dict) -> BinaryMartingale:
    if "eps" not in doc or "root" not in doc:
        raise MartingaleStructureError("document must carry 'eps' and 'root'")

    def parse(obj) -> MartingaleNode:
        point = OmegaPoint(float(obj["point"][0]), float(obj["point"][1]))
        node = MartingaleNode(float(obj["measure"]), point)
        kids = obj.get("children", [])
        if kids:
            if len(kids) != 2:
                raise MartingaleStructureError(
                    f"splits must be binary, found {len(kids)} children"
                )
            node.left = parse(kids[0])
            node.right = parse(kids[1])
        return node

    return BinaryMartingale(parse(doc["root"]), eps=float(doc["eps"]))
