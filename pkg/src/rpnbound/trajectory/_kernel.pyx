# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernel; same algorithm and random stream as _kernel_py."""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, exp, sin, sqrt
from numpy.random cimport bitgen_t

cnp.import_array()

cdef double NEWTON_TOL = 1e-13
cdef int NEWTON_MAXIT = 200


cdef inline double falling(long x, long p) nogil:
    cdef double out = 1.0
    cdef long i
    for i in range(p):
        if x - i <= 0:
            return 0.0
        out *= x - i
    return out


cdef void sector_tables(long n, double omega, double chi, double chit,
                        long[:] p, long[:] q, double[:] gam,
                        double[:] E, double[:, :] W, double[:] G) nogil:
    cdef long k, j
    cdef double s
    for k in range(n + 1):
        s = k - n / 2.0
        E[k] = omega * s + chi * s * s + chit * n * s
        G[k] = 0.0
        for j in range(gam.shape[0]):
            W[j, k] = gam[j] * falling(k, p[j]) * falling(n - k, q[j])
            G[k] += W[j, k]


cdef double jump_time(long n, double[:] prob, double[:] G, double r, double horizon) nogil:
    """Returns -1 when no jump happens before the horizon."""
    cdef long k
    cdef double f = 0.0, d, e, t = 0.0
    cdef int it
    for k in range(n + 1):
        f += prob[k] * exp(-G[k] * horizon)
    if f > r:
        return -1.0
    for it in range(NEWTON_MAXIT):
        f = 0.0
        d = 0.0
        for k in range(n + 1):
            e = prob[k] * exp(-G[k] * t)
            f += e
            d += e * G[k]
        f -= r
        if f <= NEWTON_TOL * r:
            break
        t += f / d
    return t if t < horizon else horizon


def evolve(cnp.int64_t[:] n_tot, double complex[:, :] amps, double T,
           double omega, double chi, double chit,
           long[:] p, long[:] q, double[:] gam, list bitgens):
    cdef Py_ssize_t i, width = amps.shape[1]
    cdef long n, m, k, j, pj, qj, nch = gam.shape[0]
    cdef double t, tau, step, norm, r, u, acc, wsum, ph, damp
    cdef double complex z
    cdef bitgen_t *rng
    cdef double[:] E = np.empty(width)
    cdef double[:] G = np.empty(width)
    cdef double[:] prob = np.empty(width)
    cdef double[:] w = np.empty(max(nch, 1))
    cdef double[:, :] W = np.empty((max(nch, 1), width))
    cdef double complex[:] c = np.empty(width, dtype=complex)
    cdef double complex[:] new = np.empty(width, dtype=complex)
    logs = []
    for i in range(n_tot.shape[0]):
        rng = <bitgen_t *> PyCapsule_GetPointer(bitgens[i].capsule, "BitGenerator")
        n = n_tot[i]
        for k in range(n + 1):
            c[k] = amps[i, k]
        log = []
        t = 0.0
        sector_tables(n, omega, chi, chit, p, q, gam, E, W, G)
        while True:
            for k in range(n + 1):
                prob[k] = c[k].real * c[k].real + c[k].imag * c[k].imag
            r = rng.next_double(rng.state)
            tau = jump_time(n, prob, G, r, T - t)
            step = T - t if tau < 0 else tau
            norm = 0.0
            for k in range(n + 1):
                ph = -E[k] * step
                damp = exp(-G[k] * step / 2)
                z = c[k] * (cos(ph) + 1j * sin(ph)) * damp
                c[k] = z
                norm += z.real * z.real + z.imag * z.imag
            norm = sqrt(norm)
            for k in range(n + 1):
                c[k] = c[k] / norm
            if tau < 0:
                break
            t += tau
            wsum = 0.0
            for j in range(nch):
                acc = 0.0
                for k in range(n + 1):
                    acc += W[j, k] * (c[k].real * c[k].real + c[k].imag * c[k].imag)
                w[j] = acc
                wsum += acc
            u = rng.next_double(rng.state) * wsum
            acc = 0.0
            j = nch - 1
            for k in range(nch):
                acc += w[k]
                if u < acc:
                    j = k
                    break
            pj = p[j]
            qj = q[j]
            m = n - pj - qj
            norm = 0.0
            for k in range(m + 1):
                new[k] = 0
            for k in range(pj, n - qj + 1):
                z = sqrt(W[j, k]) * c[k]
                new[k - pj] = z
                norm += z.real * z.real + z.imag * z.imag
            norm = sqrt(norm)
            for k in range(m + 1):
                c[k] = new[k] / norm
            n = m
            log.append((t, j))
            sector_tables(n, omega, chi, chit, p, q, gam, E, W, G)
        for k in range(width):
            amps[i, k] = c[k] if k <= n else 0
        n_tot[i] = n
        logs.append(log)
    return logs
