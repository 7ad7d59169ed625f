"""Closed-form large-N bound for two-mode interferometry with two-body losses.

With the rescaled n=2 model and N-1 ~ N, the bound per unit time reads

    4 * min_xi max_{0<=x<=1} f(xi, x),
    f = (1/2 + xi)^2 x^2 / g11 + (1/2 - xi)^2 (1 - x)^2 / g22 + 4 xi^2 x (1 - x) / g12,

where x is the fraction of atoms in mode 1. A vanishing rate pins xi so that
the matching coefficient is zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.optimize import minimize_scalar


class Regime(enum.Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"  # one same-mode rate vanishes
    UNCOUPLED = "uncoupled"  # no cross-mode loss
    NUMERIC = "numeric"


@dataclass(frozen=True)
class AnalyticBound:
    fq_per_time: float
    regime: Regime
    xi: float


def _coefficients(xi, g11, g22, g12):
    """(A, B, C) of f = A x^2 + B (1-x)^2 + C x (1-x); zero rates contribute nothing."""
    A = (0.5 + xi) ** 2 / g11 if g11 > 0 else 0.0
    B = (0.5 - xi) ** 2 / g22 if g22 > 0 else 0.0
    C = 4 * xi**2 / g12 if g12 > 0 else 0.0
    return A, B, C


def inner_max(A: float, B: float, C: float) -> float:
    """max over x in [0, 1] of A x^2 + B (1-x)^2 + C x (1-x)."""
    best = max(A, B)
    curv = A + B - C
    if curv < 0:
        x = (2 * B - C) / (2 * curv)
        if 0 < x < 1:
            best = max(best, A * x * x + B * (1 - x) ** 2 + C * x * (1 - x))
    return best


def minimax_objective(xi: float, g11: float, g22: float, g12: float) -> float:
    return inner_max(*_coefficients(xi, g11, g22, g12))


def convex_in_x(xi: float, g11: float, g22: float, g12: float) -> bool:
    A, B, C = _coefficients(xi, g11, g22, g12)
    return C >= A + B - 1e-12 * max(A, B, C, 1.0)


def analytic_two_body_bound(g11: float, g22: float, g12: float) -> AnalyticBound:
    """Large-N QFI bound per unit time from two-body losses alone."""
    rates = (g11, g22, g12)
    if any(r < 0 or not math.isfinite(r) for r in rates):
        raise ValueError("rates must be finite and non-negative")
    if sum(r > 0 for r in rates) < 2:
        raise ValueError("need at least two nonzero two-body rates; otherwise the noise is correctable")

    if g22 == 0 or g11 == 0:
        # The vanishing same-mode term forces xi = +-1/2; work with g22 = 0 and mirror.
        a, c = (g11, g12) if g22 == 0 else (g22, g12)
        xi = 0.5 if g22 == 0 else -0.5
        if a <= 2 * c:
            return AnalyticBound(4 / a, Regime.ASYMMETRIC, xi)
        return AnalyticBound(a / (c * (a - c)), Regime.ASYMMETRIC, xi)

    r11, r22 = math.sqrt(g11), math.sqrt(g22)
    if g12 == 0:
        return AnalyticBound(max(1 / g11, 1 / g22), Regime.UNCOUPLED, 0.0)
    if g12 >= (r11 - r22) ** 2 / 2:
        xi = (r11 - r22) / (2 * (r11 + r22))
        # expanded square: exact for equal rates
        return AnalyticBound(4 / (g11 + g22 + 2 * math.sqrt(g11 * g22)), Regime.SYMMETRIC, xi)

    # f is a maximum of convex quadratics in xi, hence convex; the optimum lies in [-1/2, 1/2].
    res = minimize_scalar(
        minimax_objective,
        bounds=(-0.5, 0.5),
        args=(g11, g22, g12),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return AnalyticBound(4 * float(res.fun), Regime.NUMERIC, float(res.x))

