"""Independent reference computations used by the tests.

Nothing here imports the package's bound or simulation code; each oracle is
the slow, obvious way of computing the same quantity.
"""

import math

import numpy as np
from scipy.linalg import expm


def grid_minimax(g11, g22, g12, points=400):
    """4 * min over xi of max over x of the two-body objective, on a grid."""
    # a vanishing rate pins xi to the value that removes its term
    forced = [v for g, v in ((g22, 0.5), (g11, -0.5), (g12, 0.0)) if g == 0]
    xi = np.array(forced[:1]) if forced else np.linspace(-0.5, 0.5, points)
    xi = xi[:, None]
    x = np.linspace(0.0, 1.0, points)[None, :]

    def term(coef, q, g):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = coef * q / g
        # a vanishing rate is harmless only if its coefficient vanishes too
        return np.where(coef * q == 0, 0.0, out) if g == 0 else out

    f = (
        term((0.5 + xi) ** 2, x**2, g11)
        + term((0.5 - xi) ** 2, (1 - x) ** 2, g22)
        + term(4 * xi**2, x * (1 - x), g12)
    )
    return 4 * float(np.min(np.max(f, axis=1)))


def trapezoid(f, a, b, nodes=1000):
    t = np.linspace(a, b, nodes)
    y = np.array([f(s) for s in t])
    return float(np.sum((y[1:] + y[:-1]) * np.diff(t)) / 2)


def dephasing_rate_limit(coherence_rate):
    """Per-time QFI bound for a qubit whose coherence decays as exp(-G t).

    Single-shot QFI for omega at time t is t^2 eta^2 / (1 - eta^2) per
    repetition (eta = exp(-G t)); with T/t repetitions the rate is
    t eta^2 / (1 - eta^2), which is largest as t -> 0.
    """
    t = 1e-7
    eta2 = math.exp(-2 * coherence_rate * t)
    return t * eta2 / (1 - eta2)


def two_mode_ladder(N):
    """States (n1, n2) with n1 + n2 <= N and the two annihilation operators."""
    states = [(n1, n - n1) for n in range(N + 1) for n1 in range(n + 1)]
    idx = {s: i for i, s in enumerate(states)}
    d = len(states)
    a1 = np.zeros((d, d))
    a2 = np.zeros((d, d))
    for (n1, n2), i in idx.items():
        if n1:
            a1[idx[(n1 - 1, n2)], i] = math.sqrt(n1)
        if n2:
            a2[idx[(n1, n2 - 1)], i] = math.sqrt(n2)
    return states, idx, a1, a2


def dense_lindblad(N, jumps, chi, chit, omega, T, psi_by_n1):
    """rho(T) from the matrix exponential of the vectorised Liouvillian.

    jumps: list of (rate, p, q) for L = sqrt(rate) a1^p a2^q. The initial
    pure state lives in the N-atom sector with amplitudes psi_by_n1.
    """
    states, idx, a1, a2 = two_mode_ladder(N)
    d = len(states)
    n1 = a1.T @ a1
    n2 = a2.T @ a2
    Sz = (n1 - n2) / 2
    Ntot = n1 + n2
    H = omega * Sz + chi * Sz @ Sz + chit * Ntot @ Sz
    I = np.eye(d)
    # row-major vec: vec(A X B) = kron(A, B^T) vec(X)
    Lv = -1j * (np.kron(H, I) - np.kron(I, H.T))
    for g, p, q in jumps:
        L = math.sqrt(g) * np.linalg.matrix_power(a1, p) @ np.linalg.matrix_power(a2, q)
        LdL = L.conj().T @ L
        Lv = Lv + np.kron(L, L.conj()) - 0.5 * np.kron(LdL, I) - 0.5 * np.kron(I, LdL.T)
    psi = np.zeros(d, dtype=complex)
    for k, c in enumerate(psi_by_n1):
        psi[idx[(k, N - k)]] = c
    rho0 = np.outer(psi, psi.conj())
    return states, (expm(Lv * T) @ rho0.reshape(-1)).reshape(d, d)


def binomial_coherent(N):
    return np.array([math.sqrt(math.comb(N, k) / 2**N) for k in range(N + 1)], dtype=complex)


def spin_ops(N):
    k = np.arange(N + 1)
    up = np.sqrt((k[:-1] + 1) * (N - k[:-1]))
    Sp = np.diag(up, -1)  # a1^dag a2 raises n1
    Sx = (Sp + Sp.T) / 2
    Sy = (Sp - Sp.T) / 2j
    Sz = np.diag(k - N / 2)
    return Sx, Sy, Sz


def oat_qfi(N, chi, t_prep, t, angles=4001):
    """Pure-state QFI 4 t^2 Var(S_z) after twisting and the best x rotation."""
    Sx, _, Sz = spin_ops(N)
    psi = np.exp(-1j * chi * t_prep * np.diag(Sz) ** 2) * binomial_coherent(N)
    lam, V = np.linalg.eigh(Sx)
    best = 0.0
    for th in np.linspace(0, np.pi, angles):
        v = V @ (np.exp(-1j * th * lam) * (V.T @ psi))
        m = np.real(v.conj() @ (np.diag(Sz) * v))
        m2 = np.real(v.conj() @ (np.diag(Sz) ** 2 * v))
        best = max(best, m2 - m * m)
    return 4 * t * t * best
