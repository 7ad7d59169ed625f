"""Channel-extension bound on the quantum Fisher information per unit time.

For a model with Hamiltonian H and noise vector L the bound reads

    F_Q <= 4 T * multiplicity * min ||alpha||   subject to beta = 0,

    alpha = K^dag K,   K_j = h_j 1 + sum_j' hh_{jj'} L_j',
    beta  = H + h 1 + sum_j (h_j^* L_j + L_j^dag h_j) + sum_{jj'} hh_{jj'} L_j^dag L_j'.

The equality constraint is eliminated exactly (particular solution plus null
space) and ``||K||`` is minimised as a linear matrix inequality
``[[t 1, K^dag], [K, t 1]] >= 0`` with ``lambda = t^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers

from ..algebra import hermitian_to_real, real_to_hermitian
from ..model import LindbladModel

GAP_TOL = 1e-7
CONSTRAINT_TOL = 1e-9


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class BoundVariables:
    h: float
    h_vec: np.ndarray
    h_mat: np.ndarray


@dataclass(frozen=True)
class BoundResult:
    lambda_star: float
    variables: BoundVariables | None
    fq_per_time: float
    status: Status
    duality_gap: float
    multiplicity: float = 1.0
    constraint_residual: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _Problem:
    """Real parameterisation of (h, h_vec, h_mat) and the affine maps beta, K."""

    J: int
    dim: int
    B: np.ndarray  # beta(x) = vec(H) + B x (Hermitian-real vectorisation)
    Kmaps: np.ndarray  # K(x) = sum_i x_i Kmaps[i], shape (nvar, J*dim, dim)

    @property
    def nvar(self) -> int:
        return self.B.shape[1]

    def unpack(self, x: np.ndarray) -> BoundVariables:
        J = self.J
        h_vec = x[1 : 1 + J] + 1j * x[1 + J : 1 + 2 * J]
        return BoundVariables(float(x[0]), h_vec, real_to_hermitian(x[1 + 2 * J :], J))

    def K(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x, self.Kmaps, axes=1)


def _hermitian_basis(J: int) -> np.ndarray:
    m = J * J
    return np.array([real_to_hermitian(e, J) for e in np.eye(m)]).reshape(m, J, J)


def _build(H: np.ndarray, P: np.ndarray, Ls: list[np.ndarray]) -> _Problem:
    J, d = len(Ls), H.shape[0]
    cols, kmaps = [], []
    zeroK = np.zeros((J * d, d), dtype=complex)

    cols.append(hermitian_to_real(P))
    kmaps.append(zeroK)
    for part in (1.0, 1j):  # real and imaginary parts of h_vec
        for j, L in enumerate(Ls):
            c = np.conj(part)
            cols.append(hermitian_to_real(c * L + np.conj(c) * L.conj().T))
            Kj = zeroK.copy()
            Kj[j * d : (j + 1) * d] = part * P
            kmaps.append(Kj)
    if J:
        LdL = np.einsum("aik,bkl->abil", np.conj(np.transpose(Ls, (0, 2, 1))), np.asarray(Ls))
        for E in _hermitian_basis(J):
            cols.append(hermitian_to_real(np.einsum("ab,abil->il", E, LdL)))
            Kj = np.einsum("ab,bkl->akl", E, np.asarray(Ls)).reshape(J * d, d)
            kmaps.append(Kj)
    return _Problem(J, d, np.stack(cols, axis=1), np.array(kmaps))


def _reduce(K0: np.ndarray, Ks: np.ndarray, tol: float = 1e-12):
    """Orthonormal bases of the joint column range and row range of all K maps.

    ``||K|| = ||U^dag K V||`` for every K in the affine family, and the reduced
    LMI is often much smaller than the raw one.
    """
    stack = np.concatenate([K0[None], Ks]) if Ks.size else K0[None]
    wide = np.concatenate(list(stack), axis=1)
    tall = np.concatenate(list(stack), axis=0)
    out = []
    for M, left in ((wide, True), (tall, False)):
        if not M.size:
            out.append(np.zeros((M.shape[0] if left else M.shape[1], 0)))
            continue
        u, sv, vh = np.linalg.svd(M, full_matrices=False)
        keep = sv > tol * max(float(sv[0]), 1e-300)
        out.append(u[:, keep] if left else vh[keep].conj().T)
    return out[0], out[1]


def _realify(K: np.ndarray) -> np.ndarray:
    return np.block([[K.real, -K.imag], [K.imag, K.real]])


def _min_spectral_norm(K0: np.ndarray, Ks: np.ndarray, opts: dict):
    """min_y ||K0 + sum_i y_i Ks[i]|| via cvxopt; returns (y, primal t, dual t, status)."""
    R0 = _realify(K0)
    Rs = [_realify(k) for k in Ks]
    r, c = R0.shape
    s = r + c

    def lift(R):
        M = np.zeros((s, s))
        M[c:, :c] = R
        M[:c, c:] = R.T
        return M

    # h - sum_z z_i G_i >= 0 with z = (t, y):  t*1 + lift(K(y)) >= 0
    G = np.empty((s * s, 1 + len(Rs)))
    G[:, 0] = -np.eye(s).ravel(order="F")
    for i, R in enumerate(Rs):
        G[:, 1 + i] = -lift(R).ravel(order="F")
    h = lift(R0)
    cost = np.zeros(1 + len(Rs))
    cost[0] = 1.0
    sol = solvers.sdp(
        cvx_matrix(cost),
        Gs=[cvx_matrix(G)],
        hs=[cvx_matrix(h)],
        options=opts,
    )
    z = np.array(sol["x"]).ravel() if sol["x"] is not None else np.zeros(1 + len(Rs))
    return z[1:], sol["primal objective"], sol["dual objective"], sol["status"]


def solve_sdp(
    model: LindbladModel,
    multiplicity: float = 1,
    gap_tol: float = GAP_TOL,
    max_iter: int = 200,
) -> BoundResult:
    """Minimise ||alpha|| subject to beta = 0 for ``model``.

    ``fq_per_time = 4 * multiplicity * lambda_star`` bounds the quantum Fisher
    information per unit probing time. ``lambda_star`` is the value of
    ``||alpha||`` evaluated at the returned feasible point, so it is a valid
    bound even before the duality gap closes.
    """
    H = model.hamiltonian.data
    P = model.identity.data
    Ls = [L.data for L in model.noise_ops()]

    # alpha scales as (H scale)^2 / (L scale)^2; normalise both for the solver.
    s_h = 1.0 / (np.linalg.norm(H, 2) or 1.0)
    s_l = 1.0 / max([np.linalg.norm(L, 2) for L in Ls], default=1.0)
    prob = _build(H * s_h, P, [L * s_l for L in Ls])

    target = -hermitian_to_real(H * s_h)
    x_p, *_ = np.linalg.lstsq(prob.B, target, rcond=None)
    resid = float(np.linalg.norm(prob.B @ x_p - target))
    if resid > CONSTRAINT_TOL * max(1.0, float(np.linalg.norm(target))):
        return BoundResult(math.inf, None, math.inf, Status.INFEASIBLE, math.nan, multiplicity, resid)

    U, sv, Vt = np.linalg.svd(prob.B)
    rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size else 0
    Z = Vt[rank:].T  # null space of B

    K0 = np.tensordot(x_p, prob.Kmaps, axes=1)
    Ks = np.tensordot(Z.T, prob.Kmaps, axes=1)
    # Directions where every K vanishes only pad the LMI with slack.
    U, V = _reduce(K0, Ks)
    K0 = U.conj().T @ K0 @ V
    Ks = U.conj().T @ Ks @ V
    status = Status.OPTIMAL
    gap = 0.0
    y = np.zeros(Z.shape[1])
    if K0.size and Z.shape[1] and np.abs(Ks).max() > 0:
        base = {
            "show_progress": False,
            "abstol": 1e-11,
            "reltol": 1e-9,
            "feastol": 1e-10,
            "maxiters": max_iter,
        }
        # cvxopt occasionally breaks down in its scaling update; these usually recover.
        attempts = [base, dict(base, refinement=3), dict(base, abstol=1e-10, reltol=1e-8, feastol=1e-9)]
        best = None
        for opts in attempts:
            try:
                y_try, primal, dual, st = _min_spectral_norm(K0, Ks, opts)
            except (ArithmeticError, ValueError):
                continue
            g = abs(primal - dual) / max(abs(dual), 1e-300) if dual is not None else math.nan
            norm = float(np.linalg.norm(K0 + np.tensordot(y_try, Ks, axes=1), 2))
            if best is None or norm < best[0]:
                best = (norm, y_try, g)
            if st == "optimal" or g <= gap_tol:
                break
        if best is None:
            # The particular solution is still feasible, so its norm is a valid bound.
            gap = math.nan
            status = Status.MAX_ITER
        else:
            _, y, gap = best
    x = x_p + Z @ y
    knorm = float(np.linalg.norm(prob.K(x), 2)) if prob.Kmaps.size else 0.0
    if status is Status.OPTIMAL and not gap <= gap_tol:
        status = Status.MAX_ITER

    scale = s_l / s_h  # K_original = (s_l / s_h) K_scaled
    lam = (knorm * scale) ** 2
    v = prob.unpack(x)
    variables = BoundVariables(v.h / s_h, v.h_vec * s_l / s_h, v.h_mat * s_l**2 / s_h)
    con = float(np.linalg.norm(prob.B @ x - target)) / s_h
    return BoundResult(lam, variables, 4 * multiplicity * lam, status, gap, multiplicity, con)


def alpha_beta(model: LindbladModel, variables: BoundVariables) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate alpha and beta at given variables (used for certificates and tests)."""
    H = model.hamiltonian.data
    P = model.identity.data
    Ls = [L.data for L in model.noise_ops()]
    hv, hm = variables.h_vec, variables.h_mat
    beta = H + variables.h * P
    Ks = []
    for j, Lj in enumerate(Ls):
        beta = beta + np.conj(hv[j]) * Lj + hv[j] * Lj.conj().T
        Kj = hv[j] * P
        for jp, Ljp in enumerate(Ls):
            beta = beta + hm[j, jp] * Lj.conj().T @ Ljp
            Kj = Kj + hm[j, jp] * Ljp
        Ks.append(Kj)
    K = np.vstack(Ks) if Ks else np.zeros((0, H.shape[0]))
    return K.conj().T @ K, beta


def extension_matrix(model: LindbladModel, variables: BoundVariables, lam: float) -> np.ndarray:
    """The block matrix [[sqrt(lam) 1, K^dag], [K, sqrt(lam) 1]] whose PSD-ness is ||alpha|| <= lam."""
    P = model.identity.data
    Ls = [L.data for L in model.noise_ops()]
    blocks = [variables.h_vec[j] * P + sum(variables.h_mat[j, jp] * Ljp for jp, Ljp in enumerate(Ls)) for j in range(len(Ls))]
    K = np.vstack(blocks)
    d, r = K.shape[1], K.shape[0]
    root = np.sqrt(lam)
    return np.block([[root * np.eye(d), K.conj().T], [K, root * np.eye(r)]])
