"""Bounds for a slowly varying atom number N(t).

The bound rate is evaluated at the instantaneous N and integrated over the
probing time. Non-integer N enters the rescaling through the gamma-function
binomial, which keeps the integrand smooth.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from ..combinatorics import binom
from ..model import TwoModeLossModel
from ..rpn import assemble_two_mode
from .analytic import analytic_two_body_bound
from .sdp import solve_sdp

SCAN_POINTS = 513


def time_dependent_bound(
    rate: Callable[[float], float],
    N_of_t: Callable[[float], float],
    T: float,
    n: int,
    rtol: float = 1e-8,
) -> float:
    """Integral over [0, T] of ``rate(N(t))``, the bound on QFI per unit time.

    ``rate`` is memoised on its argument, so a constant or piecewise-constant
    N(t) costs a handful of bound evaluations.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return 0.0
    grid = np.linspace(0.0, T, SCAN_POINTS)
    Ns = np.array([float(N_of_t(t)) for t in grid])
    if not np.all(np.isfinite(Ns)) or Ns.min() < n:
        raise ValueError(f"N(t) drops below n={n} on [0, {T}] (min {Ns.min():.6g})")

    cached = lru_cache(maxsize=None)(lambda N: float(rate(N)))

    def integrand(t):
        N = float(N_of_t(t))
        if N < n:
            raise ValueError(f"N({t}) = {N} < n = {n}")
        return cached(N)

    val, err = quad(integrand, 0.0, T, epsrel=rtol, epsabs=0.0, limit=200)
    if err > max(1e-4 * abs(val), 1e-300):
        raise RuntimeError(f"quadrature did not converge (estimate {val}, error {err})")
    return float(val)


def sampled_bound(rate: Callable[[float], float], times, N_values, n: int) -> float:
    """Trapezoid version for N(t) known only at sample times (e.g. a simulation)."""
    times = np.asarray(times, dtype=float)
    Ns = np.asarray(N_values, dtype=float)
    if times.shape != Ns.shape or times.size < 2 or np.any(np.diff(times) <= 0):
        raise ValueError("need at least two increasing sample times with matching N values")
    if Ns.min() < n:
        raise ValueError(f"N(t) drops below n={n} (min {Ns.min():.6g})")
    return float(np.trapezoid([rate(N) for N in Ns], times))

def sdp_rate(spec: TwoModeLossModel, n: int = 2, superselect: bool = True) -> Callable[[float], float]:
    """N -> SDP bound per unit time for the two-mode model with the rates of ``spec``."""

    def rate(N: float) -> float:
        s = TwoModeLossModel(spec.gamma1, spec.gamma2, spec.gamma11, spec.gamma12, spec.gamma22, N)
        res = solve_sdp(assemble_two_mode(s, n, superselect).model, binom(N, n))
        if not math.isfinite(res.fq_per_time):
            raise ValueError(f"bound infeasible at N={N}")
        return res.fq_per_time

    return rate


def analytic_rate(g11: float, g22: float, g12: float) -> Callable[[float], float]:
    """Constant-rate large-N two-body bound (independent of N)."""
    value = analytic_two_body_bound(g11, g22, g12).fq_per_time
    return lambda N: value
