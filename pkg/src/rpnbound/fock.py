"""Truncated bosonic occupation-number bases and ladder operators."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import OperatorMatrix


class Sector(enum.Enum):
    AT_MOST = "at_most"
    EXACTLY = "exactly"


@dataclass(frozen=True)
class SymmetricBasis:
    """Occupation tuples of ``modes`` bosonic modes, lexicographically ordered.

    ``Sector.AT_MOST`` keeps every tuple with total occupation up to
    ``max_total``; ``Sector.EXACTLY`` keeps only the shell at ``max_total``.
    """

    modes: int
    max_total: int
    sector: Sector
    states: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def tag(self) -> str:
        return f"fock(m={self.modes},n={self.max_total},{self.sector.value})"

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.states)}

    def totals(self) -> np.ndarray:
        return np.array([sum(s) for s in self.states])

    def ket(self, *occupation: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(occupation)]] = 1.0
        return v


def build_basis(modes: int, max_total: int, sector: Sector | str = Sector.AT_MOST) -> SymmetricBasis:
    if modes < 1:
        raise ValueError("need at least one mode")
    if max_total < 0:
        raise ValueError("max_total must be non-negative")
    sector = Sector(sector)
    lo = max_total if sector is Sector.EXACTLY else 0
    states = sorted(
        s
        for s in itertools.product(range(max_total + 1), repeat=modes)
        if lo <= sum(s) <= max_total
    )
    return SymmetricBasis(modes, max_total, sector, tuple(states))


def _require_at_most(basis: SymmetricBasis):
    if basis.sector is not Sector.AT_MOST:
        raise ValueError("ladder operators leave an exactly-n sector; use an AT_MOST basis")


def annihilation(basis: SymmetricBasis, mode: int) -> OperatorMatrix:
    """a_mode with <n - e_mode| a |n> = sqrt(n_mode)."""
    _require_at_most(basis)
    if not 0 <= mode < basis.modes:
        raise ValueError(f"mode {mode} out of range for {basis.modes} modes")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, s in enumerate(basis.states):
        if s[mode] == 0:
            continue
        lowered = list(s)
        lowered[mode] -= 1
        out[basis.index[tuple(lowered)], j] = np.sqrt(s[mode])
    return OperatorMatrix(out, basis.tag, f"a{mode + 1}")


def creation(basis: SymmetricBasis, mode: int) -> OperatorMatrix:
    # Exact adjoint of the truncated annihilator; the top shell is not raised.
    return annihilation(basis, mode).dag()


def number_op(basis: SymmetricBasis, mode: int) -> OperatorMatrix:
    # Built directly so it also works on EXACTLY bases.
    occ = [s[mode] for s in basis.states]
    return OperatorMatrix(np.diag(np.array(occ, dtype=complex)), basis.tag, f"n{mode + 1}")


def total_number_op(basis: SymmetricBasis) -> OperatorMatrix:
    return OperatorMatrix(np.diag(basis.totals().astype(complex)), basis.tag, "N")


def sector_projector(basis: SymmetricBasis, total: int) -> OperatorMatrix:
    """Projector onto the states of ``basis`` with total occupation ``total``."""
    return OperatorMatrix(np.diag((basis.totals() == total).astype(complex)), basis.tag, f"P{total}")


def identity_on(basis: SymmetricBasis) -> OperatorMatrix:
    return OperatorMatrix(np.eye(basis.dim), basis.tag, "1")


def restrict(op: OperatorMatrix, basis: SymmetricBasis, sub: SymmetricBasis) -> np.ndarray:
    """Matrix block of ``op`` between the states of ``sub`` (as a plain array)."""
    idx = [basis.index[s] for s in sub.states]
    return op.data[np.ix_(idx, idx)]
