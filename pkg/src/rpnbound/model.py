"""Metrological Lindblad models and the Hamiltonian-in-Lindblad-span test."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DimensionMismatch,
    OperatorMatrix,
    SPAN_TOL,
    antihermitian_part,
    hermitian_part,
    span_membership,
)
from .combinatorics import rescale_factor_real
from .fock import annihilation, build_basis, number_op, sector_projector


@dataclass(frozen=True)
class HamiltonianTerm:
    k: int
    op: OperatorMatrix


@dataclass(frozen=True)
class NoiseFamily:
    l: int
    ops: tuple[OperatorMatrix, ...]
    label: str = ""


@dataclass(frozen=True)
class LindbladModel:
    """Generator ``-i w [H, rho] + sum_j D[L_j] rho`` split by body order.

    ``input_projector`` is the identity of the space the channel accepts as
    input. It is the full identity unless the model was restricted to a fixed
    particle-number sector, in which case it plays the role of the identity in
    every bound and span computation.
    """

    hamiltonian_terms: tuple[HamiltonianTerm, ...]
    noise_families: tuple[NoiseFamily, ...]
    basis: str
    dim: int
    input_projector: OperatorMatrix | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for t in self.hamiltonian_terms:
            if t.k < 1:
                raise ValueError("body order must be >= 1")
            self._check(t.op)
            if not t.op.is_hermitian(1e-10):
                raise ValueError("Hamiltonian terms must be Hermitian")
        for fam in self.noise_families:
            if fam.l < 1:
                raise ValueError("body order must be >= 1")
            for op in fam.ops:
                self._check(op)
        if self.input_projector is not None:
            self._check(self.input_projector)

    def _check(self, op: OperatorMatrix):
        if op.dim != self.dim or op.basis != self.basis:
            raise DimensionMismatch(f"{op!r} does not act on {self.basis!r} (dim {self.dim})")

    @property
    def identity(self) -> OperatorMatrix:
        if self.input_projector is not None:
            return self.input_projector
        return OperatorMatrix(np.eye(self.dim), self.basis, "1")

    @property
    def hamiltonian(self) -> OperatorMatrix:
        out = OperatorMatrix(np.zeros((self.dim, self.dim)), self.basis, "H")
        for t in self.hamiltonian_terms:
            out = out + t.op
        return out

    def noise_ops(self, orders=None) -> list[OperatorMatrix]:
        return [
            op
            for fam in self.noise_families
            if orders is None or fam.l in orders
            for op in fam.ops
        ]

    @property
    def body_orders(self) -> tuple[list[int], list[int]]:
        return (
            sorted({t.k for t in self.hamiltonian_terms}),
            sorted({f.l for f in self.noise_families}),
        )

    def replace(self, **changes) -> "LindbladModel":
        kw = dict(
            hamiltonian_terms=self.hamiltonian_terms,
            noise_families=self.noise_families,
            basis=self.basis,
            dim=self.dim,
            input_projector=self.input_projector,
            meta=self.meta,
        )
        kw.update(changes)
        return LindbladModel(**kw)


def lindblad_span_generators(
    noise_ops: list[OperatorMatrix], identity: OperatorMatrix
) -> tuple[list[OperatorMatrix], list[str]]:
    """Hermitian generators of span{1, L^H, iL^AH, (L_j^dag L_j')^H, i(L_j'^dag L_j)^AH}."""
    gens = [identity]
    names = ["1"]
    for j, L in enumerate(noise_ops):
        gens += [hermitian_part(L), 1j * antihermitian_part(L)]
        names += [f"L{j}^H", f"iL{j}^AH"]
    for j, Lj in enumerate(noise_ops):
        for jp in range(j, len(noise_ops)):
            Ljp = noise_ops[jp]
            gens.append(hermitian_part(Lj.dag() @ Ljp))
            names.append(f"(L{j}^dag L{jp})^H")
            if jp != j:
                gens.append(1j * antihermitian_part(Ljp.dag() @ Lj))
                names.append(f"i(L{jp}^dag L{j})^AH")
    return gens, names


@dataclass(frozen=True)
class HlsResult:
    satisfied: bool
    residual: float
    witness: dict[str, float]

    def __bool__(self):
        return self.satisfied


def check_hls(
    model: LindbladModel,
    hamiltonian: OperatorMatrix | None = None,
    orders=None,
    tol: float = SPAN_TOL,
) -> HlsResult:
    """Is the Hamiltonian in the real Lindblad span of the model's noise operators?

    ``satisfied`` means the quantum Fisher information grows at most linearly in
    the total time; otherwise error correction can recover T^2 scaling.
    ``hamiltonian`` and ``orders`` restrict the test to one Hamiltonian part or
    to a subset of noise body orders.
    """
    H = model.hamiltonian if hamiltonian is None else hamiltonian
    # Membership is scale free; normalising makes the tolerance relative.
    scale = float(np.linalg.norm(H.data)) or 1.0
    gens, names = lindblad_span_generators(model.noise_ops(orders), model.identity)
    res = span_membership(H / scale, gens, tol)
    witness = {
        n: float(c) * scale for n, c in zip(names, res.coefficients) if abs(c) > 1e-14
    }
    return HlsResult(res.inside, res.residual, witness)


@dataclass(frozen=True)
class TwoModeLossModel:
    """Rates [1/time] of single- and two-body losses in a two-mode interferometer."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma11: float = 0.0
    gamma12: float = 0.0
    gamma22: float = 0.0
    N: float = 2

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma11", "gamma12", "gamma22"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.N < 2:
            raise ValueError("need at least two atoms")

    @property
    def single_body(self) -> dict[int, float]:
        return {0: self.gamma1, 1: self.gamma2}

    @property
    def two_body(self) -> dict[tuple[int, int], float]:
        return {(0, 0): self.gamma11, (0, 1): self.gamma12, (1, 1): self.gamma22}

    @property
    def max_body_order(self) -> int:
        return 2 if any(self.two_body.values()) else 1


def build_two_mode_model(
    spec: TwoModeLossModel, superselect: bool = False, n: int = 2
) -> LindbladModel:
    """Rescaled n-particle model of linear interferometry with losses.

    Works on the symmetric two-mode space with up to ``n`` particles (lost
    particles end up in an implicit vacuum). With ``superselect`` the noise
    operators only accept the exactly-n sector and the Hamiltonian is projected
    onto it.
    """
    if n < spec.max_body_order:
        raise ValueError(f"n={n} is below the largest body order {spec.max_body_order}")
    if n > spec.N:
        raise ValueError(f"n={n} exceeds the atom number N={spec.N}")
    basis = build_basis(2, n)
    a = [annihilation(basis, 0), annihilation(basis, 1)]
    chi1 = rescale_factor_real(spec.N, n, 1)
    H = (number_op(basis, 0) - number_op(basis, 1)) / (2 * chi1)

    singles = [
        np.sqrt(g / chi1) * a[i] for i, g in spec.single_body.items() if g > 0
    ]
    pairs = []
    if spec.max_body_order >= 2:
        chi2 = rescale_factor_real(spec.N, n, 2)
        pairs = [
            np.sqrt(g / chi2) * (a[i] @ a[j]) for (i, j), g in spec.two_body.items() if g > 0
        ]

    P = None
    if superselect:
        P = sector_projector(basis, n)
        H = P @ H @ P
        singles = [L @ P for L in singles]
        pairs = [L @ P for L in pairs]

    families = []
    if singles:
        families.append(NoiseFamily(1, tuple(singles), "single-body loss"))
    if pairs:
        families.append(NoiseFamily(2, tuple(pairs), "two-body loss"))
    return LindbladModel(
        (HamiltonianTerm(1, H),),
        tuple(families),
        basis.tag,
        basis.dim,
        P,
        meta={"N": spec.N, "n": n, "superselect": superselect, "rates": spec},
    )


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
}
QUBIT_NOISE = {
    "dephasing": ("z",),
    "transversal": ("x",),
    "amplitude_damping": ("minus",),
    "depolarizing": ("x", "y", "z"),
}


def qubit_model(noise: str, rate: float = 1.0) -> LindbladModel:
    """Single qubit with H = sigma_z / 2 and one of the standard noise types."""
    if noise not in QUBIT_NOISE:
        raise ValueError(f"unknown qubit noise {noise!r}; expected one of {sorted(QUBIT_NOISE)}")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    H = OperatorMatrix(_PAULI["z"] / 2, "qubit", "H")
    ops = tuple(OperatorMatrix(np.sqrt(rate / 2) * _PAULI[p] if p != "minus" else np.sqrt(rate) * _PAULI[p], "qubit", p) for p in QUBIT_NOISE[noise])
    fams = (NoiseFamily(1, ops, noise),) if rate > 0 else ()
    return LindbladModel((HamiltonianTerm(1, H),), fams, "qubit", 2)
