"""Asymptotic N-scaling of the QFI bound from body orders alone.

For a k-body Hamiltonian part, l*(k) is the largest noise order l such that
the part lies in the Lindblad span of all noise of order >= l. The bound then
grows as N^(2k - l*(k)), and the overall exponent comes from the k that
maximises it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..algebra import OperatorMatrix
from ..model import LindbladModel, check_hls


@dataclass(frozen=True)
class ScalingResult:
    k_star: int
    l_star: int | None
    exponent: int
    l_per_k: dict[int, int | None] = field(default_factory=dict)
    heisenberg_orders: tuple[int, ...] = ()

    @property
    def heisenberg(self) -> bool:
        """Some Hamiltonian part escapes the noise span: T^2 and N^(2k) remain possible."""
        return bool(self.heisenberg_orders)


def scaling_exponent(
    hamiltonian_orders: Iterable[int],
    noise_orders_spanning: Mapping[int, Iterable[int]],
) -> ScalingResult:
    """Combine per-order span information into the scaling exponent.

    ``noise_orders_spanning[k]`` lists the thresholds l for which the k-body
    Hamiltonian part lies in the span of all noise of order >= l. Ties in
    2k - l* go to the larger k. Parts with no spanning threshold are
    reported in ``heisenberg_orders`` and contribute 2k.
    """
    l_per_k: dict[int, int | None] = {}
    heis = []
    best = None
    for k in sorted(set(hamiltonian_orders)):
        if k < 1:
            raise ValueError("body orders must be >= 1")
        ls = list(noise_orders_spanning.get(k, ()))
        l_star = max(ls) if ls else None
        l_per_k[k] = l_star
        if l_star is None:
            heis.append(k)
        exp = 2 * k - (l_star or 0)
        if best is None or exp >= best[2]:
            best = (k, l_star, exp)
    if best is None:
        raise ValueError("no Hamiltonian orders given")
    return ScalingResult(best[0], best[1], best[2], l_per_k, tuple(heis))


def spanning_thresholds(model: LindbladModel, k: int, tol: float | None = None) -> list[int]:
    """Noise thresholds l for which the k-body Hamiltonian part satisfies HLS."""
    parts = [t.op for t in model.hamiltonian_terms if t.k == k]
    if not parts:
        raise ValueError(f"model has no {k}-body Hamiltonian term")
    Hk: OperatorMatrix = parts[0]
    for op in parts[1:]:
        Hk = Hk + op
    _, noise_orders = model.body_orders
    kw = {} if tol is None else {"tol": tol}
    return [
        l
        for l in noise_orders
        if check_hls(model, Hk, orders=[m for m in noise_orders if m >= l], **kw).satisfied
    ]


def model_scaling(model: LindbladModel) -> ScalingResult:
    """scaling_exponent with span thresholds computed on ``model``."""
    ks, _ = model.body_orders
    return scaling_exponent(ks, {k: spanning_thresholds(model, k) for k in ks})
