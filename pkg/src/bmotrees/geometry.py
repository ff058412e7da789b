"""Geometry of the parabolic strip and of chords through it.

The strip ``Omega(eps) = {(x1, x2) : x1^2 <= x2 <= x1^2 + eps^2}`` is the
state space for first/second-moment bookkeeping: a function with mean ``m``
and mean square ``s`` over a set yields the point ``(m, s)``, and a BMO-norm
bound ``eps`` pins that point inside the strip.  The strip is not convex, so
averaging arguments need two extra tools, both provided here:

* :func:`select_removable` -- given strip points whose weighted average is
  also in the strip, find one point whose removal (weights renormalized)
  leaves the average in the strip.  Such an index always exists.
* :func:`segment_goodness` -- measure how much of the chord between two strip
  points escapes through the upper boundary, reported as the largest ``alpha``
  for which the chord is alpha-good (outside part no longer than
  ``(1 - alpha)`` times the chord length).

Everything here is pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "OmegaPoint",
    "SegmentGoodness",
    "in_omega",
    "select_removable",
    "segment_goodness",
]


class OmegaPoint(NamedTuple):
    """A point of the moment plane; components may be floats or arrays."""

    x1: float
    x2: float


def in_omega(x, eps: float, tol: float = 0.0):
    """Membership test for the strip, with an absolute tolerance band.

    True iff ``x1^2 - tol <= x2 <= x1^2 + eps^2 + tol``.  Accepts an
    :class:`OmegaPoint` or any ``(x1, x2)`` pair; array components give an
    array of booleans.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    x1, x2 = x
    gap = x2 - x1 * x1
    return (gap >= -tol) & (gap <= eps * eps + tol)


def select_removable(
    weights: Sequence[float],
    points: Sequence[OmegaPoint],
    eps: float,
    tol: float = 1e-12,
) -> int:
    """Pick the smallest index whose removal keeps the average in the strip.

    ``weights`` are positive and sum to 1; ``points`` lie in the strip and so
    does their weighted combination.  Returns the smallest ``j`` such that
    ``R_j = (combo - w_j P_j) / (1 - w_j)`` stays in the strip (within
    ``tol``).  At least one such index always exists: were every ``R_j``
    strictly above the upper boundary, so would be their convex combination,
    which equals the original average.
    """
    w = np.asarray(weights, dtype=float)
    n = w.size
    if n < 2:
        raise ValueError("need at least two points")
    if np.any(w <= 0.0) or np.any(w >= 1.0):
        raise ValueError("weights must lie strictly in (0, 1)")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    if len(points) != n:
        raise ValueError("weights and points must have equal length")

    xs = np.asarray([(p[0], p[1]) for p in points], dtype=float)
    inside = in_omega(OmegaPoint(xs[:, 0], xs[:, 1]), eps, tol)
    if not np.all(inside):
        bad = int(np.flatnonzero(~inside)[0])
        raise ValueError(f"point {bad} lies outside the strip")

    combo = w @ xs
    if not in_omega(OmegaPoint(combo[0], combo[1]), eps, tol):
        raise ValueError("weighted combination lies outside the strip")

    for j in range(n):
        rest = (combo - w[j] * xs[j]) / (1.0 - w[j])
        if in_omega(OmegaPoint(rest[0], rest[1]), eps, tol):
            return j
    raise RuntimeError(
        "no removable index found; this contradicts the convexity argument "
        "and indicates a tolerance failure"
    )


@dataclass(frozen=True)
class SegmentGoodness:
    """How much of a chord exits the strip through its upper boundary.

    ``alpha_max = 1 - outside_length / total_length``; the chord is
    alpha-good for every ``alpha <= alpha_max``.
    """

    total_length: float
    outside_length: float
    alpha_max: float


def segment_goodness(p, r, eps: float, tol: float = 1e-9) -> SegmentGoodness:
    """Goodness of the chord ``[p, r]`` between two strip points.

    Along ``x(t) = (1-t) p + t r`` the height ``q(t) = x2(t) - x1(t)^2`` is a
    concave quadratic, so the escape set ``{t : q(t) > eps^2}`` is a single
    open interval, located by solving ``q(t) = eps^2``.  The part below the
    lower boundary is empty because ``{x2 >= x1^2}`` is convex.  Vertical
    chords make ``q`` affine; with both endpoints inside, such chords never
    escape.
    """
    p = OmegaPoint(float(p[0]), float(p[1]))
    r = OmegaPoint(float(r[0]), float(r[1]))
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if p.x1 == r.x1 and p.x2 == r.x2:
        raise ValueError("segment endpoints coincide")
    for label, point in (("p", p), ("r", r)):
        if not in_omega(point, eps, tol):
            raise ValueError(f"endpoint {label}={point} lies outside the strip")

    d1 = r.x1 - p.x1
    d2 = r.x2 - p.x2
    length = math.hypot(d1, d2)
    frac = 0.0
    if d1 != 0.0:
        # q(t) - eps^2 = -a t^2 + b t + c with a > 0 and c = q(0) - eps^2 <= 0.
        a = d1 * d1
        b = d2 - 2.0 * p.x1 * d1
        c = (p.x2 - p.x1 * p.x1) - eps * eps
        vertex = b / (2.0 * a)
        peak = c + b * vertex / 2.0
        if 0.0 < vertex < 1.0 and peak > 0.0:
            disc = b * b + 4.0 * a * c
            if disc > 0.0:
                sq = math.sqrt(disc)
                # Sign-aware root extraction; the product of the roots of
                # a t^2 - b t - c is -c/a, which avoids cancellation when the
                # chord barely exits.
                if b >= 0.0:
                    t_hi = (b + sq) / (2.0 * a)
                    t_lo = (-c / a) / t_hi if t_hi != 0.0 else 0.0
                else:
                    t_lo = (b - sq) / (2.0 * a)
                    t_hi = (-c / a) / t_lo if t_lo != 0.0 else 0.0
                lo = min(max(t_lo, 0.0), 1.0)
                hi = min(max(t_hi, 0.0), 1.0)
                frac = max(hi - lo, 0.0)
    alpha_max = min(max(1.0 - frac, 0.0), 1.0)
    return SegmentGoodness(
        total_length=length,
        outside_length=frac * length,
        alpha_max=alpha_max,
    )
