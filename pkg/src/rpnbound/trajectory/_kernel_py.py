"""Reference implementation of the trajectory kernel.

Inside a number sector every generator term and every L^dag L is diagonal in
the Fock basis, so the no-jump evolution is exact:

    c_k(t) = c_k(0) exp(-i E_k t - G_k t / 2).

The next jump happens when the squared norm sum_k |c_k|^2 exp(-G_k t) falls
to a uniform threshold. That time is found by Newton's method, which
converges monotonically from t = 0 because the norm is convex and decreasing.
"""

from __future__ import annotations

import math

import numpy as np

NEWTON_TOL = 1e-13
NEWTON_MAXIT = 200


def _falling(x, p):
    out = 1.0
    for i in range(p):
        out *= max(x - i, 0)
    return out


def _sector_tables(n, omega, chi, chit, p, q, gam):
    k = np.arange(n + 1)
    s = k - n / 2
    E = omega * s + chi * s * s + chit * n * s
    W = np.array([[g * _falling(kk, pj) * _falling(n - kk, qj) for kk in k] for pj, qj, g in zip(p, q, gam)])
    W = W.reshape(len(gam), n + 1)
    return E, W, W.sum(axis=0)


def jump_time(prob, G, r, horizon):
    """Smallest t in [0, horizon] with sum prob * exp(-G t) = r, or None."""
    if np.dot(prob, np.exp(-G * horizon)) > r:
        return None
    t = 0.0
    for _ in range(NEWTON_MAXIT):
        e = prob * np.exp(-G * t)
        f = e.sum() - r
        if f <= NEWTON_TOL * r:
            break
        t += f / np.dot(e, G)
    return min(t, horizon)


def evolve(n_tot, amps, T, omega, chi, chit, p, q, gam, bitgens):
    """Advance every trajectory by T in place; returns per-trajectory jump logs."""
    logs = []
    for i in range(len(n_tot)):
        rng = np.random.Generator(bitgens[i])
        n = int(n_tot[i])
        c = np.array(amps[i, : n + 1])
        log = []
        t = 0.0
        E, W, G = _sector_tables(n, omega, chi, chit, p, q, gam)
        while True:
            prob = np.abs(c) ** 2
            r = rng.random()
            tau = jump_time(prob, G, r, T - t)
            step = T - t if tau is None else tau
            c = c * np.exp((-1j * E - G / 2) * step)
            c /= np.linalg.norm(c)
            if tau is None:
                break
            t += tau
            w = W @ (np.abs(c) ** 2)
            u = rng.random() * w.sum()
            j = min(int(np.searchsorted(np.cumsum(w), u, side="right")), len(w) - 1)
            pj, qj = int(p[j]), int(q[j])
            m = n - pj - qj
            new = np.zeros(m + 1, dtype=complex)
            for k in range(pj, n - qj + 1):
                new[k - pj] = math.sqrt(W[j, k]) * c[k]
            c = new / np.linalg.norm(new)
            n = m
            log.append((t, j))
            E, W, G = _sector_tables(n, omega, chi, chit, p, q, gam)
        amps[i, :] = 0
        amps[i, : n + 1] = c
        n_tot[i] = n
        logs.append(log)
    return logs
