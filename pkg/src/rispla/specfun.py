"""Special functions and distribution primitives for the closed-form error expressions.

Scalar implementations; the Monte-Carlo engine does its own vectorized math
and only meets these functions when cross-checking against closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "FoldedNormalParams",
    "q_func",
    "q_inv",
    "folded_normal_cdf",
    "folded_normal_moments",
    "rayleigh_ccdf",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FoldedNormalParams:
    """Parameters of |X| for X ~ N(delta, sigma^2)."""

    delta: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.sigma)):
            raise ValueError("folded normal parameters must be finite")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def q_func(x: float) -> float:
    """Standard normal tail probability P(N(0,1) > x)."""
    if not math.isfinite(x):
        raise ValueError(f"q_func requires finite input, got {x}")
    return 0.5 * math.erfc(x / _SQRT2)


def _normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def q_inv(p: float) -> float:
    """Inverse of q_func on (0, 1).

    Safeguarded Newton iteration: full Newton steps on q_func(x) - p with
    a bisection fallback whenever a step leaves the current bracket.
    The root is bracketed in [-40, 40], which covers tail probabilities
    far beyond double-precision resolution.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"q_inv requires p in (0, 1), got {p}")
    lo, hi = -40.0, 40.0  # q_func(lo) ~ 1, q_func(hi) ~ 0
    x = 0.0
    for _ in range(200):
        err = q_func(x) - p
        if err == 0.0:
            return x
        if err > 0.0:
            lo = max(lo, x)  # root is to the right (q decreasing)
        else:
            hi = min(hi, x)
        step = err / _normal_pdf(x)  # -err / dQ/dx
        x_new = x + step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x_new)):
            return x_new
        x = x_new
    return x


def folded_normal_cdf(x: float, params: FoldedNormalParams) -> float:
    """CDF of the folded normal; 0 below the fold point x = 0."""
    if x < 0.0:
        return 0.0
    a = (x + params.delta) / (params.sigma * _SQRT2)
    b = (x - params.delta) / (params.sigma * _SQRT2)
    val = 0.5 * (math.erf(a) + math.erf(b))
    return min(1.0, max(0.0, val))


def folded_normal_moments(params: FoldedNormalParams) -> tuple[float, float]:
    """Mean and variance of |N(delta, sigma^2)|."""
    d, s = params.delta, params.sigma
    phi_neg = 0.5 * math.erfc((d / s) / _SQRT2)  # standard normal CDF at -d/s
    mean = math.exp(-d * d / (2.0 * s * s)) * s * math.sqrt(2.0 / math.pi) + d * (
        1.0 - 2.0 * phi_neg
    )
    variance = d * d + s * s - mean * mean
    return mean, max(0.0, variance)


def rayleigh_ccdf(x: float, sigma: float) -> float:
    """Tail probability exp(-x^2 / 2 sigma^2) of a Rayleigh(sigma) variable."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if x < 0.0:
        raise ValueError(f"rayleigh_ccdf requires x >= 0, got {x}")
    return math.exp(-x * x / (2.0 * sigma * sigma))
