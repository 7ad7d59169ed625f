from __future__ import annotations

import math
from fractions import Fraction


def binom(N: float, n: int) -> float:
    """C(N, n) for integer or real N (real N through the gamma function)."""
    if float(N).is_integer():
        return float(math.comb(int(N), n))
    if N < n - 1:
        raise ValueError(f"C({N}, {n}) undefined for N < n - 1")
    return math.exp(math.lgamma(N + 1) - math.lgamma(n + 1) - math.lgamma(N - n + 1))


def rescale_factor(N: int, n: int, k: int) -> Fraction:
    """chi_k = C(N,n) C(n,k) / C(N,k), exact.

    Python integers do not overflow, so this stays exact for any N.
    """
    if not 1 <= k <= n <= N:
        raise ValueError(f"need 1 <= k <= n <= N, got k={k}, n={n}, N={N}")
    return Fraction(math.comb(N, n) * math.comb(n, k), math.comb(N, k))


def rescale_factor_real(N: float, n: int, k: int) -> float:
    """Floating chi_k, accepting non-integer N (time-dependent atom numbers)."""
    if float(N).is_integer():
        return float(rescale_factor(int(N), n, k))
    if not 1 <= k <= n <= N:
        raise ValueError(f"need 1 <= k <= n <= N, got k={k}, n={n}, N={N}")
    return binom(N, n) * math.comb(n, k) / binom(N, k)


def rescale_exponent(n: int, k: int) -> int:
    """Large-N power law of chi_k."""
    return n - k
