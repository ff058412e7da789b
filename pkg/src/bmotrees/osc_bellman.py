"""Piecewise-linear strip function comparing 1- and 2-oscillations.

The strip splits along the ray pair ``x2 = slope |x1|`` with
``slope = (1 + alpha) eps / sqrt(alpha)``.  The rays meet the upper boundary
at ``|x1| = sqrt(alpha) eps`` and again at ``|x1| = eps / sqrt(alpha)``; the
central hump above the rays (``|x1| <= sqrt(alpha) eps``) is the region where
the second moment dominates:

    b(x) = sqrt(alpha)/((1 + alpha) eps) * x2     on the hump,
    b(x) = |x1|                                   elsewhere in the strip.

Both branches agree on the rays, so ``b`` is continuous.  The function is the
largest convex-under-averaging minorant of ``|x1|`` compatible with the ratio
bound, and evaluating it at ``(0, delta2)`` yields the guaranteed lower bound

    delta1 >= sqrt(alpha)/((1 + alpha) eps) * delta2

for any function of norm at most ``eps`` on an alpha-tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "OscRegions",
    "RegionInfo",
    "region_classify",
    "osc_eval",
    "osc_lower_bound",
]


@dataclass(frozen=True)
class OscRegions:
    """Region layout for given ``alpha`` and ``eps > 0``.

    ``slope`` is the ray slope separating the hump from the rest; the layout
    is undefined at ``eps = 0`` (callers handle that degenerate case by
    returning the trivial bound 0).
    """

    alpha: float
    eps: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 0.5):
            raise ValueError(f"alpha must lie in (0, 1/2], got {self.alpha}")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def slope(self) -> float:
        return (1.0 + self.alpha) * self.eps / math.sqrt(self.alpha)


class RegionInfo(NamedTuple):
    region: str  # "Omega0" (hump) or "Omega1"
    in_omega2: bool


def region_classify(x, regions: OscRegions, tol: float = 1e-12) -> RegionInfo:
    """Classify a strip point; ties on the rays go to the hump.

    The hump requires both ``x2 >= slope |x1|`` and ``|x1| <= sqrt(alpha) eps``;
    strip points above the rays with ``|x1| > eps / sqrt(alpha)`` exist (the
    outer wings) and belong to Omega1, where the value is ``|x1|``.  The lower
    region Omega2 consists of the hump plus every point on or below the rays;
    wings are exactly the strip points outside Omega2, and they satisfy
    ``|x1| > eps / sqrt(alpha)`` and ``x2 > (1 + alpha) eps^2 / alpha``.
    """
    x1 = float(x[0])
    x2 = float(x[1])
    gap = x2 - x1 * x1
    if gap < -tol or gap > regions.eps**2 + tol:
        raise ValueError("point lies outside the strip")
    a = abs(x1)
    on_or_above_ray = x2 >= regions.slope * a
    hump = on_or_above_ray and a <= math.sqrt(regions.alpha) * regions.eps
    region = "Omega0" if hump else "Omega1"
    in_omega2 = hump or x2 <= regions.slope * a
    return RegionInfo(region=region, in_omega2=in_omega2)


def osc_eval(x, regions: OscRegions, tol: float = 1e-12):
    """Evaluate the comparison function at a point or componentwise arrays."""
    x1 = np.asarray(x[0], dtype=float)
    x2 = np.asarray(x[1], dtype=float)
    gap = x2 - x1 * x1
    if np.any(gap < -tol) or np.any(gap > regions.eps**2 + tol):
        raise ValueError("point lies outside the strip")
    a = np.abs(x1)
    hump = (x2 >= regions.slope * a) & (a <= math.sqrt(regions.alpha) * regions.eps)
    ray_value = math.sqrt(regions.alpha) / ((1.0 + regions.alpha) * regions.eps) * x2
    out = np.where(hump, ray_value, a)
    return float(out) if np.ndim(x[0]) == 0 else out


def osc_lower_bound(delta2: float, alpha: float, eps: float) -> float:
    """Guaranteed 1-oscillation ``sqrt(alpha)/((1 + alpha) eps) * delta2``."""
    if delta2 < 0.0:
        raise ValueError(f"delta2 must be nonnegative, got {delta2}")
    if not (0.0 < alpha <= 0.5):
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    return math.sqrt(alpha) / ((1.0 + alpha) * eps) * delta2
