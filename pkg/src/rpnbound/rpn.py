"""Reduced-particle-number (RPN) channels.

A permutation-invariant N-particle evolution with at most n-body terms is
modelled as rescaled n-particle sub-channels acting on every n-subset. This
module builds those sub-channel models, either on the bosonic symmetric space
(two-mode interferometry) or by explicit tensor embedding of elementary
operators acting on distinguishable qudits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import OperatorMatrix
from .combinatorics import rescale_exponent, rescale_factor, rescale_factor_real
from .model import (
    HamiltonianTerm,
    LindbladModel,
    NoiseFamily,
    TwoModeLossModel,
    build_two_mode_model,
    check_hls,
)

__all__ = [
    "ElementaryModel",
    "RpnChannel",
    "assemble",
    "assemble_two_mode",
    "embed",
    "hls_n_range",
    "symmetrizer",
    "two_mode_elementary",
    "rescale_exponent",
    "rescale_factor",
]

MAX_EMBED_N = 3


@dataclass(frozen=True)
class RpnChannel:
    n: int
    N: float
    model: LindbladModel
    chi: dict[int, float]

    @property
    def subchannel_count(self) -> float:
        if float(self.N).is_integer():
            return math.comb(int(self.N), self.n)
        return math.exp(math.lgamma(self.N + 1) - math.lgamma(self.n + 1) - math.lgamma(self.N - self.n + 1))

    def hls(self):
        return check_hls(self.model)


@dataclass(frozen=True)
class ElementaryModel:
    """Per-subset operators of a permutation-invariant model of qudits.

    ``hamiltonian[k]`` acts on k particles (shape ``d**k``); ``noise[l]`` is a list
    of operators on l particles. Each operator should be symmetric under
    permutations of the particles it acts on. ``vacuum_level``, when set, is
    the local level that represents a lost particle.
    """

    local_dim: int
    hamiltonian: dict[int, np.ndarray]
    noise: dict[int, list[np.ndarray]] = field(default_factory=dict)
    vacuum_level: int | None = None

    def __post_init__(self):
        d = self.local_dim
        for k, op in self.hamiltonian.items():
            if np.shape(op) != (d**k, d**k):
                raise ValueError(f"{k}-body Hamiltonian must be {d**k}x{d**k}")
        for l, ops in self.noise.items():
            for op in ops:
                if np.shape(op) != (d**l, d**l):
                    raise ValueError(f"{l}-body noise operators must be {d**l}x{d**l}")


def embed(op: np.ndarray, positions, n: int, d: int) -> np.ndarray:
    """Place an operator on particles ``positions`` of an n-qudit register."""
    positions = tuple(positions)
    k = len(positions)
    full = np.kron(np.asarray(op, dtype=complex), np.eye(d ** (n - k)))
    order = list(positions) + [p for p in range(n) if p not in positions]
    perm = list(np.argsort(order))
    T = full.reshape([d] * (2 * n))
    T = T.transpose(perm + [n + q for q in perm])
    return T.reshape(d**n, d**n)


def hls_n_range(k_max: int, l_max: int) -> tuple[int, int]:
    """Sub-channel sizes worth examining for the HLS test."""
    if k_max < 1 or l_max < 1:
        raise ValueError("body orders must be >= 1")
    return max(k_max, l_max), max(k_max, 2 * l_max)


def symmetrizer(n: int, d: int) -> np.ndarray:
    """Projector onto the permutation-symmetric subspace of n qudits."""
    eye = np.eye(d**n).reshape([d] * (2 * n))
    perms = list(itertools.permutations(range(n)))
    out = sum(eye.transpose(list(p) + list(range(n, 2 * n))) for p in perms)
    return out.reshape(d**n, d**n) / len(perms)


def assemble(
    elem: ElementaryModel,
    N: float,
    n: int,
    superselect: bool = False,
    symmetric: bool = False,
) -> RpnChannel:
    """Embed elementary operators on every subset of n distinguishable qudits.

    Hamiltonian terms are divided by chi_k and noise operators by sqrt(chi_l).
    The input space is restricted (noise operators act as ``L P``, the
    Hamiltonian as ``P H P``) to states with no particle in the vacuum level
    when ``superselect`` is set, and to permutation-symmetric states when
    ``symmetric`` is set. The latter reproduces bosonic models: without it,
    antisymmetric inputs that no symmetric noise operator can reach are allowed
    and the HLS condition may fail where the bosonic version holds.
    """
    d = elem.local_dim
    orders = list(elem.hamiltonian) + list(elem.noise)
    if n < max(orders):
        raise ValueError(f"n={n} is below the largest body order {max(orders)}")
    if n > MAX_EMBED_N:
        raise ValueError(f"explicit tensor embedding supports n <= {MAX_EMBED_N}")
    if n > N:
        raise ValueError("n cannot exceed N")
    tag = f"qudit(d={d},n={n})"
    chi = {k: rescale_factor_real(N, n, k) for k in sorted(set(orders))}

    P = None
    if superselect:
        if elem.vacuum_level is None:
            raise ValueError("superselection needs a vacuum level")
        keep = np.ones(d**n)
        for idx, digits in enumerate(itertools.product(range(d), repeat=n)):
            if elem.vacuum_level in digits:
                keep[idx] = 0
        P = OperatorMatrix(np.diag(keep), tag, "P")
    if symmetric:
        S = OperatorMatrix(symmetrizer(n, d), tag, "S")
        P = S if P is None else P @ S

    terms = []
    for k, op in sorted(elem.hamiltonian.items()):
        Hk = sum(embed(op, nu, n, d) for nu in itertools.combinations(range(n), k)) / chi[k]
        Hk = OperatorMatrix(Hk, tag, f"H{k}")
        if P is not None:
            Hk = P @ Hk @ P
        terms.append(HamiltonianTerm(k, Hk))

    families = []
    for l, ops in sorted(elem.noise.items()):
        fam = []
        for nu in itertools.combinations(range(n), l):
            for op in ops:
                L = OperatorMatrix(embed(op, nu, n, d) / np.sqrt(chi[l]), tag)
                fam.append(L @ P if P is not None else L)
        families.append(NoiseFamily(l, tuple(fam), f"{l}-body"))

    model = LindbladModel(tuple(terms), tuple(families), tag, d**n, P, meta={"N": N, "n": n})
    return RpnChannel(n, N, model, chi)


def assemble_two_mode(spec: TwoModeLossModel, n: int = 2, superselect: bool = True) -> RpnChannel:
    """Bosonic shortcut: the rescaled model on the symmetric two-mode space."""
    model = build_two_mode_model(spec, superselect, n)
    chi = {k: rescale_factor_real(spec.N, n, k) for k in range(1, min(n, 2) + 1)}
    return RpnChannel(n, spec.N, model, chi)


def two_mode_elementary(spec: TwoModeLossModel) -> ElementaryModel:
    """Distinguishable-particle form of the two-mode loss model.

    Local levels are ``|v>`` (lost, index 0), ``|1>`` and ``|2>``. The two-body
    operators are normalised so that on symmetric states they reproduce
    ``a_i a_j``. Assembled with ``superselect=True, symmetric=True`` this matches
    the bosonic model exactly; off the full-occupation sector the vacuum level
    is counted like a particle and the two constructions differ.
    """
    d = 3
    ket = np.eye(d)
    H1 = np.diag([0.0, 0.5, -0.5])
    noise: dict[int, list[np.ndarray]] = {}
    singles = [np.sqrt(g) * np.outer(ket[0], ket[i + 1]) for i, g in spec.single_body.items() if g > 0]
    if singles:
        noise[1] = singles
    vv = np.kron(ket[0], ket[0])
    pairs = []
    for (i, j), g in spec.two_body.items():
        if g <= 0:
            continue
        if i == j:
            src = np.kron(ket[i + 1], ket[i + 1])
            pairs.append(np.sqrt(g) * np.sqrt(2) * np.outer(vv, src))
        else:
            src = (np.kron(ket[i + 1], ket[j + 1]) + np.kron(ket[j + 1], ket[i + 1])) / np.sqrt(2)
            pairs.append(np.sqrt(g) * np.outer(vv, src))
    if pairs:
        noise[2] = pairs
    return ElementaryModel(d, {1: H1}, noise, vacuum_level=0)
