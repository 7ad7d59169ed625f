"""Quantum Fisher information of trajectory ensembles.

The state is block diagonal in the atom number and each block is stored in
low-rank form rho_n = A A^dag. The derivative with respect to omega comes
from a central difference of two ensembles that share random streams, and

    F = 2 sum_{ab} |<a| drho |b>|^2 / (l_a + l_b)

is evaluated on the support of rho plus the support-kernel cross terms,
which only need || (1 - P) drho |b> ||^2. Pairs with l_a + l_b below the
floor are dropped and their share is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import ProtocolSpec, TrajectoryEnsemble, prepare, ramsey

EIG_FLOOR = 1e-12
RANK_TOL = 1e-14


@dataclass(frozen=True)
class QfiEstimate:
    value: float
    statistical_error: float
    fd_step: float
    floor_contribution: float = 0.0


def fd_step(t: float, N: float) -> float:
    """Finite-difference step in omega; keeps the phase step t*sqrt(N)*delta small."""
    return 1e-4 / max(1.0, t * math.sqrt(N))


def qfi_dense(rho: np.ndarray, drho: np.ndarray, floor: float = EIG_FLOOR) -> tuple[float, float]:
    """(F, dropped) for a dense state and its derivative."""
    lam, V = np.linalg.eigh(rho)
    D = V.conj().T @ drho @ V
    s = lam[:, None] + lam[None, :]
    w = np.abs(D) ** 2
    keep = s > floor
    F = 2 * float(np.sum(w[keep] / s[keep]))
    # a dropped pair would contribute at least |D|^2 / floor; report the raw weight
    return F, float(np.sum(w[~keep]))


def qfi_lowrank(Ap: np.ndarray, Am: np.ndarray, delta: float, floor: float = EIG_FLOOR) -> tuple[float, float]:
    """QFI of one block from the omega +- delta factors; rho = (Ap Ap^dag + Am Am^dag) / 2."""
    B = np.hstack([Ap, Am]) / math.sqrt(2)
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    lam = s**2
    r = int(np.sum(lam > RANK_TOL * max(lam[0], 1e-300))) if lam.size else 0
    U, lam = U[:, :r], lam[:r]

    def drho(X):
        return (Ap @ (Ap.conj().T @ X) - Am @ (Am.conj().T @ X)) / (2 * delta)

    Vd = drho(U)
    D = U.conj().T @ Vd
    ssum = lam[:, None] + lam[None, :]
    w = np.abs(D) ** 2
    keep = ssum > floor
    F = 2 * float(np.sum(w[keep] / ssum[keep]))
    dropped = float(np.sum(w[~keep]))
    if U.shape[0] > r:
        K = Vd - U @ D
        kn = np.sum(np.abs(K) ** 2, axis=0)
        ok = lam > floor
        # (kernel, b) and (b, kernel) pairs, each 2 |.|^2 / l_b
        F += 4 * float(np.sum(kn[ok] / lam[ok]))
        dropped += float(np.sum(kn[~ok]))
    return F, dropped


def _pair_qfi(plus: TrajectoryEnsemble, minus: TrajectoryEnsemble, delta: float) -> tuple[float, float]:
    if not np.array_equal(plus.n_tot, minus.n_tot):
        raise RuntimeError("finite-difference ensembles left different number sectors")
    bp, bm = plus.blocks(), minus.blocks()
    F = dropped = 0.0
    for n in bp:
        f, d = qfi_lowrank(bp[n], bm[n], delta)
        F += f
        dropped += d
    return F, dropped


def ensemble_qfi(
    plus: TrajectoryEnsemble,
    minus: TrajectoryEnsemble,
    delta: float,
    bootstrap: int = 32,
    seed: int = 0,
) -> QfiEstimate:
    """QFI from ensembles at omega +- delta; error from a stratified bootstrap."""
    if not delta > 0:
        raise ValueError("finite-difference step must be positive")
    F, dropped = _pair_qfi(plus, minus, delta)
    err = 0.0
    if bootstrap > 1 and plus.count > 1:
        rng = np.random.default_rng(seed)
        strata = [np.flatnonzero(plus.origin[:, 0] == N) for N in np.unique(plus.origin[:, 0])]
        samples = []
        for _ in range(bootstrap):
            idx = np.concatenate([rng.choice(s, size=len(s)) for s in strata])
            samples.append(_pair_qfi(plus.subset(idx), minus.subset(idx), delta)[0])
        err = float(np.std(samples, ddof=1))
    return QfiEstimate(F, err, delta, dropped)


def simulate_qfi(
    spec: ProtocolSpec,
    count: int,
    seed: int,
    t: float | None = None,
    prepared: TrajectoryEnsemble | None = None,
    bootstrap: int = 32,
) -> QfiEstimate:
    """QFI about spec.omega after a Ramsey stage of length t (default spec.T_ramsey)."""
    t = spec.T_ramsey if t is None else t
    if prepared is None:
        prepared = prepare(spec, count, seed)
    delta = fd_step(t, spec.N_mean)
    plus = ramsey(prepared, spec, t, spec.omega + delta)
    minus = ramsey(prepared, spec, t, spec.omega - delta)
    return ensemble_qfi(plus, minus, delta, bootstrap, seed)


def richardson_check(spec: ProtocolSpec, count: int, seed: int, t: float | None = None) -> tuple[float, float]:
    """QFI at the default step and at half of it; a large gap flags a bad step."""
    t = spec.T_ramsey if t is None else t
    prepared = prepare(spec, count, seed)
    out = []
    for delta in (fd_step(t, spec.N_mean), fd_step(t, spec.N_mean) / 2):
        plus = ramsey(prepared, spec, t, spec.omega + delta)
        minus = ramsey(prepared, spec, t, spec.omega - delta)
        out.append(_pair_qfi(plus, minus, delta)[0])
    return out[0], out[1]
