"""Error-correction conditions for two-mode codes under two-body losses.

A code {|psi_1>, |psi_2>} protects the phase signal against a set of loss
operators E_j (with E_0 = 1) when

    <psi_k| E_j^dag E_j' |psi_k'> = delta_kk' mu_jj'

and the generator still acts nontrivially on the code. With a fixed total
atom number, any two nonzero two-body rates make the second requirement
impossible; this module checks codes, builds the known single-rate code and
its number-violating generalisation, and certifies the impossibility.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp

from .algebra import OperatorMatrix
from .fock import SymmetricBasis, annihilation, build_basis, number_op

KL_TOL = 1e-9
NONTRIVIAL_TOL = 1e-9
ORTHO_TOL = 1e-12
RATE_NAMES = ("gamma11", "gamma22", "gamma12")


class CodeVariant(enum.Enum):
    GAMMA11_ONLY = "gamma11_only"
    UNRESTRICTED_SUPERPOSITION = "unrestricted_superposition"


@dataclass(frozen=True)
class CodeSpace:
    vectors: np.ndarray  # shape (2, dim)
    basis: SymmetricBasis
    N: int
    fixed_number: bool

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=complex)
        if V.ndim != 2 or V.shape[1] != self.basis.dim:
            raise ValueError("code vectors must have shape (k, basis.dim)")
        gram = V.conj() @ V.T
        if np.max(np.abs(gram - np.eye(len(V)))) > ORTHO_TOL:
            raise ValueError("code vectors must be orthonormal")
        if self.fixed_number:
            off = self.basis.totals() != self.N
            if np.any(np.abs(V[:, off]) > ORTHO_TOL):
                raise ValueError("fixed-number code has support outside the N-atom sector")
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)


@dataclass(frozen=True)
class CodeCheck:
    correctable: bool
    mu: np.ndarray
    h_logical: np.ndarray
    nontrivial: bool
    worst_violation: float


def two_mode_ops(basis: SymmetricBasis) -> dict[str, OperatorMatrix]:
    """Loss operators a1^2, a2^2, a1 a2 and the generator (n1 - n2)/2."""
    a1, a2 = annihilation(basis, 0), annihilation(basis, 1)
    return {
        "a1a1": a1 @ a1,
        "a2a2": a2 @ a2,
        "a1a2": a1 @ a2,
        "H": (number_op(basis, 0) - number_op(basis, 1)) / 2,
    }


def verify_code(code: CodeSpace, loss_ops: list[OperatorMatrix], H: OperatorMatrix) -> CodeCheck:
    """Knill-Laflamme check including the identity, plus the nontriviality test."""
    V = code.vectors
    tag = code.basis.tag
    for op in [*loss_ops, H]:
        if op.basis != tag:
            raise ValueError(f"operator on {op.basis!r} does not act on the code basis {tag!r}")
    E = [np.eye(code.basis.dim)] + [op.data for op in loss_ops]
    EV = [e @ V.T for e in E]  # columns E_j |psi_k>
    m = len(E)
    mu = np.zeros((m, m), dtype=complex)
    worst = 0.0
    for j in range(m):
        for jp in range(m):
            M = EV[j].conj().T @ EV[jp]  # M[k, k'] = <psi_k| E_j^dag E_j' |psi_k'>
            diag = np.diag(M)
            mu[j, jp] = diag.mean()
            off = M - np.diag(diag)
            worst = max(worst, float(np.max(np.abs(off), initial=0.0)), float(np.ptp(diag.real) + np.ptp(diag.imag)))
    h = V.conj() @ H.data @ V.T
    shifted = h - np.trace(h) / len(h) * np.eye(len(h))
    nontrivial = float(np.linalg.norm(shifted, 2)) > NONTRIVIAL_TOL
    return CodeCheck(worst <= KL_TOL, mu, h, nontrivial, worst)


def code_amplitude(N: int) -> float:
    """s = sqrt((N - 2) / (4 (N - 1))), matching a1^dag^2 a1^2 on both code states."""
    return math.sqrt((N - 2) / (4 * (N - 1)))


def build_paper_code(N: int, variant: CodeVariant | str = CodeVariant.GAMMA11_ONLY) -> CodeSpace:
    """Two-dimensional code correcting a1^2 loss at fixed N, or all two-body losses without it."""
    variant = CodeVariant(variant)
    if N <= 4:
        raise ValueError("the code needs N > 4")
    if N % 2:
        raise ValueError("the code needs even N")
    s = code_amplitude(N)
    c = math.sqrt(1 - s * s)
    h = N // 2
    if variant is CodeVariant.GAMMA11_ONLY:
        basis = build_basis(2, N)
        psi1 = s * basis.ket(N, 0) + c * basis.ket(0, N)
        psi2 = basis.ket(h, h)
        return CodeSpace(np.array([psi1, psi2]), basis, N, True)
    basis = build_basis(2, N + h)
    psi1 = s * basis.ket(N, h) + c * basis.ket(0, h)
    psi2 = s * basis.ket(h, N) + c * basis.ket(h, 0)
    return CodeSpace(np.array([psi1, psi2]), basis, N, False)


def code_qfi(N: int, T: float) -> float:
    """QFI of the fixed-number code after total time T: T^2 N^4 / (16 (N-1)^2)."""
    if N <= 4:
        raise ValueError("the code needs N > 4")
    return T**2 * N**4 / (16 * (N - 1) ** 2)


# --- impossibility under the superselection rule ---------------------------

_n, _N = sp.symbols("n1 N", positive=True)
_DIAGONAL = {
    # a_i^dag a_j^dag a_i a_j restricted to n1 + n2 = N, as polynomials in n1
    "gamma11": _n * (_n - 1),
    "gamma22": (_N - _n) * (_N - _n - 1),
    "gamma12": _n * (_N - _n),
}


@dataclass(frozen=True)
class Certificate:
    forced_trivial: bool
    coefficients: dict[str, sp.Expr]
    evidence: dict = field(default_factory=dict)


def symbolic_certificate(active: list[str]) -> dict[str, sp.Expr] | None:
    """Express n1 as c_0 + sum_D c_D D(n1) for the active diagonal KL operators.

    Such an identity forces <psi_k| n1 |psi_k'> to be proportional to delta_kk'
    on any fixed-number code, hence also <psi_k| H |psi_k'> since
    H = n1 - N/2 there. Returns the coefficients, or None when no identity exists.
    """
    cs = sp.symbols(f"c0:{len(active) + 1}")
    expr = cs[0] + sum(c * _DIAGONAL[name] for c, name in zip(cs[1:], active)) - _n
    eqs = sp.Poly(sp.expand(expr), _n).all_coeffs()
    sol = sp.solve(eqs, cs, dict=True)
    if not sol:
        return None
    sol = sol[0]
    out = {"1": sp.simplify(sol.get(cs[0], 0))}
    for c, name in zip(cs[1:], active):
        # Free coefficients may be set to zero.
        out[name] = sp.simplify(sol.get(c, c).subs({f: 0 for f in cs}))
    out["1"] = sp.simplify(out["1"].subs({f: 0 for f in cs}))
    check = sp.simplify(out["1"] + sum(out[k] * _DIAGONAL[k] for k in active) - _n)
    return out if check == 0 else None


def _diagonal_ops(N: int, active: list[str]) -> np.ndarray:
    n1 = np.arange(N + 1, dtype=float)
    funcs = [sp.lambdify((_n, _N), _DIAGONAL[name]) for name in active]
    return np.array([np.broadcast_to(f(n1, N), n1.shape) for f in funcs], dtype=float) / N**2


@lru_cache(maxsize=64)
def _cached_search(N, active, trials, seed, dim_cap):
    return random_code_search(N, list(active), trials, seed, dim_cap)


def random_code_search(
    N: int,
    active: list[str],
    trials: int = 10_000,
    seed: int = 0,
    dim_cap: int | None = None,
    steps: int = 1000,
    lr: float = 0.5,
) -> dict:
    """Seeded local search for a fixed-number code that is correctable and nontrivial.

    Trials are orthonormal Gaussian pairs in the N-atom sector (a random
    ``dim_cap`` subset of its Fock states when it is larger), polished by
    projected gradient descent on violation + penalty on lack of signal.
    """
    rng = np.random.default_rng(seed)
    dim = N + 1
    D = _diagonal_ops(N, active)  # (nD, dim)
    h = (np.arange(dim) - N / 2) / N  # generator n1 - N/2, scaled

    mask = np.ones((trials, dim))
    if dim_cap is not None and dim_cap < dim:
        mask[:] = 0
        for t in range(trials):
            mask[t, rng.choice(dim, dim_cap, replace=False)] = 1
    Z = (rng.standard_normal((trials, 2, dim)) + 1j * rng.standard_normal((trials, 2, dim))) * mask[:, None]

    def orthonormalise(p1, p2):
        p1 = p1 / np.linalg.norm(p1, axis=1, keepdims=True)
        p2 = p2 - np.sum(p1.conj() * p2, axis=1, keepdims=True) * p1
        return p1, p2 / np.linalg.norm(p2, axis=1, keepdims=True)

    def measures(p1, p2):
        cross = p1.conj() * p2
        pop = np.abs(p1) ** 2 - np.abs(p2) ** 2
        m12, d = cross @ D.T, pop @ D.T
        viol = np.maximum(np.abs(m12).max(axis=1), np.abs(d).max(axis=1)) * N**2
        s12, sd = cross @ h, pop @ h
        signal = np.sqrt(np.abs(s12) ** 2 + sd**2 / 4) * N
        return m12, d, s12, sd, viol, signal

    tau = 1e-3 / N
    rho = 10.0
    p1, p2 = orthonormalise(Z[:, 0], Z[:, 1])
    for _ in range(steps):
        m12, d, s12, sd, _, _ = measures(p1, p2)
        # Wirtinger gradients (d/d conj psi) of the violation sum; D and h are diagonal.
        g1 = (m12.conj() @ D) * p2 + 2 * (d @ D) * p1
        g2 = (m12 @ D) * p1 - 2 * (d @ D) * p2
        nt = np.abs(s12) ** 2 + sd**2 / 4
        # rho * max(0, tau^2 - nt)^2 pushes the logical signal up
        w = (-2 * rho * np.maximum(0.0, tau**2 - nt))[:, None]
        g1 += w * (s12.conj()[:, None] * h * p2 + 0.5 * sd[:, None] * h * p1)
        g2 += w * (s12[:, None] * h * p1 - 0.5 * sd[:, None] * h * p2)
        p1, p2 = orthonormalise(p1 - lr * g1 * mask, p2 - lr * g2 * mask)
    *_, viol, signal = measures(p1, p2)
    hits = (viol <= KL_TOL) & (signal >= 1e-3)
    return {
        "trials": trials,
        "seed": seed,
        "counterexamples": int(hits.sum()),
        "min_violation_with_signal": float(viol[signal >= 1e-3].min(initial=math.inf)),
        "max_signal_when_correctable": float(signal[viol <= KL_TOL].max(initial=0.0)),
    }


def impossibility_certificate(
    g11: float,
    g22: float,
    g12: float,
    N: int,
    dim_cap: int | None = None,
    trials: int = 10_000,
    seed: int = 0,
) -> Certificate:
    """Show that fixed-number codes cannot carry signal when two or more rates are nonzero."""
    rates = dict(zip(RATE_NAMES, (g11, g22, g12)))
    if any(r < 0 for r in rates.values()):
        raise ValueError("rates must be non-negative")
    active = [k for k, r in rates.items() if r > 0]
    if len(active) < 2:
        raise ValueError("certificate needs two nonzero rates; a correcting code exists otherwise")
    coeffs = symbolic_certificate(active)
    evidence = {"active": active}
    if coeffs is not None:
        evidence["identity"] = " + ".join(f"({v})*{k}" for k, v in coeffs.items()) + " = n1"
        evidence["at_N"] = {k: float(v.subs(_N, N)) for k, v in coeffs.items()}
    if trials:
        # The search only sees which rates are nonzero, so it is shared across triples.
        evidence["search"] = dict(_cached_search(N, tuple(active), trials, seed, dim_cap))
    forced = coeffs is not None and (not trials or evidence["search"]["counterexamples"] == 0)
    return Certificate(forced, coeffs or {}, evidence)
