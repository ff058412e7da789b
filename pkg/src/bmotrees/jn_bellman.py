"""Closed-form Bellman machinery for the integral John-Nirenberg inequality.

For a ratio bound ``alpha`` and a norm level ``eps`` below the integrability
threshold, the sharp multiplicative constant is

    K(alpha, eps) = (1 - alpha) / (exp(sqrt(alpha) eps) - alpha exp(eps / sqrt(alpha)))

finite exactly when ``eps < eps0(alpha) = sqrt(alpha) log(1/alpha) / (1 - alpha)``.
The strip function certifying the inequality is drawn from the one-parameter
family

    B_delta(x) = exp(-delta)/(1 - delta) * exp(x1 + r)(1 - r),
    r(x) = sqrt(delta^2 - x2 + x1^2),

with ``delta = delta(alpha, eps)`` the unique root of
``(1 - mu)/(1 - delta) * exp(mu - delta) = K(alpha, eps)`` where
``mu = sqrt(delta^2 - eps^2)``; the root sits strictly between ``eps`` and
``min(1, (1 + alpha) eps / (2 sqrt(alpha)))``.  On the lower boundary
``B = exp(x1)`` identically, on the upper boundary ``B = exp(x1) K``, and
``B`` solves the degenerate Monge-Ampere equation in between, so it is the
least concave majorant the induction needs.

Setting ``alpha = 2^-n`` specializes everything to dyadic cubes in dimension
``n``; :func:`bellman_value` also covers the divergent regime past the
threshold, where only points on the lower boundary keep a finite value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import OmegaPoint

__all__ = [
    "ThresholdError",
    "JnParams",
    "DyadicConstants",
    "eps0_alpha",
    "jn_constant",
    "delta_equation",
    "solve_delta",
    "bellman_eval",
    "bellman_raw",
    "bellman_value",
    "dyadic_constants",
]


class ThresholdError(ValueError):
    """Raised when ``eps`` sits at or beyond the John-Nirenberg threshold."""


def eps0_alpha(alpha: float) -> float:
    """Integrability threshold ``sqrt(alpha) log(1/alpha) / (1 - alpha)``.

    Defined for ``alpha`` in ``(0, 1]``; at ``alpha = 1`` the limit is 1.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return 1.0
    return math.sqrt(alpha) * math.log(1.0 / alpha) / (1.0 - alpha)


def jn_constant(alpha: float, eps: float) -> float:
    """Sharp constant ``K(alpha, eps)``; finite and >= 1 below the threshold."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if eps < 0.0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    s = math.sqrt(alpha)
    denom = math.exp(s * eps) - alpha * math.exp(eps / s)
    if denom <= 0.0:
        raise ThresholdError(
            f"eps={eps} is at or beyond the John-Nirenberg threshold "
            f"eps0({alpha})={eps0_alpha(alpha)!r}"
        )
    return (1.0 - alpha) / denom


def delta_equation(alpha: float, delta: float, eps: float) -> float:
    """Root equation for the Bellman parameter.

    ``g(delta) = (1 - mu)/(1 - delta) exp(mu - delta) - K(alpha, eps)`` with
    ``mu = sqrt(delta^2 - eps^2)``.  Strictly increasing in ``delta`` on
    ``(eps, 1)``, negative at ``delta = eps``, positive at the upper end of
    the bracket.
    """
    if delta >= 1.0:
        raise ValueError(f"delta must be < 1, got {delta}")
    if delta < eps:
        raise ValueError(f"delta must be >= eps={eps}, got {delta}")
    mu = math.sqrt(max(delta * delta - eps * eps, 0.0))
    return (1.0 - mu) / (1.0 - delta) * math.exp(mu - delta) - jn_constant(alpha, eps)


@dataclass(frozen=True)
class JnParams:
    """Solved parameter bundle; ``mu = sqrt(delta^2 - eps^2)`` lies in [0, 1)."""

    alpha: float
    eps: float
    delta: float
    mu: float

    @property
    def constant(self) -> float:
        return jn_constant(self.alpha, self.eps)


def solve_delta(alpha: float, eps: float, residual_tol: float = 1e-10) -> JnParams:
    """Bisect the root equation inside its guaranteed bracket.

    Bisection is unconditionally safe here: near ``delta -> 1`` the equation
    blows up and Newton steps would be fragile.  The bracket is
    ``(eps, min(1 - 1e-15, (1 + alpha) eps / (2 sqrt(alpha))))``.
    """
    if not (0.0 < alpha <= 0.5):
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")
    if not (0.0 < eps < eps0_alpha(alpha)):
        raise ThresholdError(
            f"eps must lie in (0, eps0({alpha})={eps0_alpha(alpha)!r}), got {eps}"
        )
    lo = eps
    hi = min(1.0 - 1e-15, (1.0 + alpha) * eps / (2.0 * math.sqrt(alpha)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if delta_equation(alpha, mid, eps) < 0.0:
            lo = mid
        else:
            hi = mid
    delta = 0.5 * (lo + hi)
    residual = delta_equation(alpha, delta, eps)
    if abs(residual) > residual_tol:
        raise RuntimeError(
            f"bisection left residual {residual!r} above {residual_tol} "
            f"at alpha={alpha}, eps={eps}"
        )
    mu = math.sqrt(max(delta * delta - eps * eps, 0.0))
    return JnParams(alpha=alpha, eps=eps, delta=delta, mu=mu)


def bellman_raw(x1, x2, params: JnParams):
    """Evaluate the strip function without membership checks.

    The formula extends smoothly to any point with
    ``x2 - x1^2 <= delta^2`` (tiny negative radicands from rounding are
    clamped); callers use this for finite-difference stencils that may step
    just outside the strip.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    rad = params.delta**2 - x2 + x1 * x1
    if np.any(rad < -1e-12):
        raise ValueError("point lies above the tangency parabola; function undefined")
    r = np.sqrt(np.maximum(rad, 0.0))
    scale = math.exp(-params.delta) / (1.0 - params.delta)
    return scale * np.exp(x1 + r) * (1.0 - r)


def bellman_eval(x, params: JnParams, tol: float = 1e-12):
    """Strip function at a point (or componentwise arrays) of the strip.

    Raises when the point leaves the strip by more than ``tol``: below the
    lower boundary the radicand exceeds ``delta^2``, above the upper boundary
    it drops below ``mu^2``.
    """
    x1 = np.asarray(x[0], dtype=float)
    x2 = np.asarray(x[1], dtype=float)
    gap = x2 - x1 * x1
    if np.any(gap < -tol) or np.any(gap > params.eps**2 + tol):
        raise ValueError("point lies outside the strip")
    out = bellman_raw(x1, x2, params)
    return float(out) if np.isscalar(x[0]) or np.ndim(x[0]) == 0 else out


@dataclass(frozen=True)
class DyadicConstants:
    """Threshold and constant function for dyadic cubes in dimension ``n``."""

    n: int
    alpha: float
    eps0: float
    C: Callable[[float], float]


def dyadic_constants(n: int) -> DyadicConstants:
    """Specialize the constants to ``alpha = 2^-n``.

    ``eps0 = 2^{n/2}/(2^n - 1) n log 2`` and
    ``C(eps) = (2^n - 1)/(2^n exp(2^{-n/2} eps) - exp(2^{n/2} eps))``, which
    coincide with ``eps0_alpha`` and ``jn_constant`` at ``alpha = 2^-n``.
    """
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")
    alpha = 2.0**-n
    return DyadicConstants(
        n=n,
        alpha=alpha,
        eps0=eps0_alpha(alpha),
        C=lambda eps, _a=alpha: jn_constant(_a, eps),
    )


def bellman_value(x, n: int, eps: float, boundary_tol: float = 1e-12) -> float:
    """Exact dyadic Bellman function, divergent regime included.

    Below the threshold this is the solved strip function.  At or beyond it,
    points on the lower boundary (within ``boundary_tol``) keep the value
    ``exp(x1)`` and every other strip point is infinite.
    """
    x1 = float(x[0])
    x2 = float(x[1])
    gap = x2 - x1 * x1
    if gap < -boundary_tol or gap > eps * eps + boundary_tol:
        raise ValueError("point lies outside the strip")
    threshold = eps0_alpha(2.0**-n)
    if eps < threshold:
        return float(bellman_eval(OmegaPoint(x1, x2), solve_delta(2.0**-n, eps)))
    if gap <= boundary_tol:
        return math.exp(x1)
    return math.inf
