# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the hot kernels in ``_pure``.

Same functions, same semantics: confluent divided differences of the
evolution phase factor, the prefix-merged path recursion for evolution
coefficients, and cyclic Jacobi sweeps for the dense Hermitian oracle.
"""

from libc.stdlib cimport free, malloc
from libc.math cimport sin, sqrt

import numpy as np


cdef extern from "complex.h":
    double cabs(double complex) nogil
    double complex cexp(double complex) nogil
    double complex conj(double complex) nogil
    double creal(double complex) nogil


cdef double complex _dd_exp_core(const double* xs, Py_ssize_t n, double t) noexcept nogil:
    """Newton table over ascending nodes; repeated nodes take derivative limits."""
    cdef Py_ssize_t i, j
    cdef double complex mit = -1j * t
    cdef double complex out
    cdef double gap
    cdef double complex* cur = <double complex*> malloc(n * sizeof(double complex))
    cdef double complex* fact = <double complex*> malloc(n * sizeof(double complex))
    for i in range(n):
        cur[i] = cexp(mit * xs[i])
        fact[i] = cur[i] * mit
    if n > 1:
        # first layer in product form; the naive quotient of two nearly
        # equal phases cancels catastrophically for small spread*t
        for i in range(n - 1):
            if xs[i + 1] == xs[i]:
                cur[i] = fact[i]
            else:
                gap = xs[i] - xs[i + 1]
                cur[i] = -2j * cexp(-0.5j * (xs[i] + xs[i + 1]) * t) * sin(0.5 * gap * t) / gap
    for j in range(2, n):
        for i in range(n - j + 1):
            fact[i] = fact[i] * (mit / j)
        for i in range(n - j):
            if xs[i + j] == xs[i]:
                cur[i] = fact[i]
            else:
                cur[i] = (cur[i + 1] - cur[i]) / (xs[i + j] - xs[i])
    out = cur[0]
    free(cur)
    free(fact)
    return out


def dd_exp_sorted(xs, double t):
    """Confluent divided difference of exp(-i E t) over sorted nodes."""
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one node")
    cdef double complex val
    with nogil:
        val = _dd_exp_core(&x[0], n, t)
    return complex(val)


def pathsum_order(levels, coupling, int l, double t):
    """Order-l evolution coefficient by prefix-merged path recursion."""
    cdef const double[::1] lv = np.ascontiguousarray(levels, dtype=np.float64)
    cdef const double complex[:, ::1] g = np.ascontiguousarray(coupling, dtype=np.complex128)
    cdef Py_ssize_t dim = lv.shape[0]
    cdef Py_ssize_t start, cur, nxt, i, j, k, pos, nn
    out_arr = np.zeros((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    if l == 0:
        for i in range(dim):
            out[i, i] = cexp(-1j * t * lv[i])
        return out_arr
    if dim > 9 or l > 63:
        raise ValueError("pathsum kernel packs node counts in 6-bit fields (dim <= 9, l <= 63)")

    # state key = (counts packed 6 bits per index) * 16 + current index
    cdef dict dd_memo = {}
    cdef dict idx_of
    cdef long long csig, nsig, key
    cdef double complex w, gc, dd
    cdef object found
    cdef double* nbuf = <double*> malloc((l + 1) * sizeof(double))
    # adjacency of nonzero couplings
    cdef Py_ssize_t* nz_idx = <Py_ssize_t*> malloc(dim * dim * sizeof(Py_ssize_t))
    cdef Py_ssize_t* nz_cnt = <Py_ssize_t*> malloc(dim * sizeof(Py_ssize_t))
    for i in range(dim):
        nz_cnt[i] = 0
        for j in range(dim):
            if g[i, j] != 0:
                nz_idx[i * dim + nz_cnt[i]] = j
                nz_cnt[i] += 1

    cdef long long* st_sig
    cdef double complex* st_w
    cdef long long* nx_sig
    cdef double complex* nx_w
    cdef Py_ssize_t n_states, n_next, m, alloc

    try:
        for start in range(dim):
            n_states = 1
            st_sig = <long long*> malloc(sizeof(long long))
            st_w = <double complex*> malloc(sizeof(double complex))
            st_sig[0] = (((<long long> 1) << (6 * start)) * 16) + start
            st_w[0] = 1.0 + 0j
            for k in range(l):
                idx_of = {}
                n_next = 0
                alloc = n_states * dim + 1
                nx_sig = <long long*> malloc(alloc * sizeof(long long))
                nx_w = <double complex*> malloc(alloc * sizeof(double complex))
                for m in range(n_states):
                    key = st_sig[m]
                    cur = <Py_ssize_t> (key & 15)
                    csig = key >> 4
                    w = st_w[m]
                    for i in range(nz_cnt[cur]):
                        nxt = nz_idx[cur * dim + i]
                        gc = g[cur, nxt]
                        nsig = (csig + ((<long long> 1) << (6 * nxt))) * 16 + nxt
                        found = idx_of.get(nsig)
                        if found is None:
                            idx_of[nsig] = n_next
                            nx_sig[n_next] = nsig
                            nx_w[n_next] = w * gc
                            n_next += 1
                        else:
                            pos = <Py_ssize_t> found
                            nx_w[pos] = nx_w[pos] + w * gc
                free(st_sig)
                free(st_w)
                st_sig = nx_sig
                st_w = nx_w
                n_states = n_next
            for m in range(n_states):
                key = st_sig[m]
                cur = <Py_ssize_t> (key & 15)
                csig = key >> 4
                found = dd_memo.get(csig)
                if found is None:
                    nn = 0
                    for i in range(dim):
                        for j in range((csig >> (6 * i)) & 63):
                            nbuf[nn] = lv[i]
                            nn += 1
                    # insertion sort; repeats must be adjacent and ascending
                    for i in range(1, nn):
                        pos = i
                        while pos > 0 and nbuf[pos - 1] > nbuf[pos]:
                            nbuf[pos - 1], nbuf[pos] = nbuf[pos], nbuf[pos - 1]
                            pos -= 1
                    dd = _dd_exp_core(nbuf, nn, t)
                    dd_memo[csig] = complex(dd)
                else:
                    dd = found
                out[start, cur] = out[start, cur] + st_w[m] * dd
            free(st_sig)
            free(st_w)
    finally:
        free(nbuf)
        free(nz_idx)
        free(nz_cnt)
    return out_arr


def jacobi_eig(h, double tol=1e-14, int max_sweeps=100):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix."""
    a_arr = np.array(h, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.diag(a_arr).real.copy(), v_arr, 0, True
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, i, sweeps
    cdef double scale = 0.0, offnorm, app, aqq, tau, tt, c, s, am
    cdef double complex apq, phase, gpp, gpq, gqp, gqq, xp, xq
    cdef bint converged = False

    for p in range(n):
        for q in range(n):
            scale += cabs(a[p, q]) ** 2
    scale = sqrt(scale)
    if scale < 1e-300:
        scale = 1e-300

    sweeps = 0
    with nogil:
        while sweeps < max_sweeps:
            offnorm = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        offnorm += cabs(a[p, q]) ** 2
            offnorm = sqrt(offnorm)
            if offnorm <= tol * scale:
                converged = True
                break
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    am = cabs(apq)
                    if am <= 1e-300:
                        continue
                    app = creal(a[p, p])
                    aqq = creal(a[q, q])
                    phase = apq / am
                    tau = (aqq - app) / (2.0 * am)
                    if tau >= 0:
                        tt = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        tt = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + tt * tt)
                    s = tt * c
                    gpp = c
                    gpq = s * phase
                    gqp = -s * conj(phase)
                    gqq = c
                    for i in range(n):
                        xp = conj(gpp) * a[p, i] + conj(gqp) * a[q, i]
                        xq = conj(gpq) * a[p, i] + conj(gqq) * a[q, i]
                        a[p, i] = xp
                        a[q, i] = xq
                    for i in range(n):
                        xp = a[i, p] * gpp + a[i, q] * gqp
                        xq = a[i, p] * gpq + a[i, q] * gqq
                        a[i, p] = xp
                        a[i, q] = xq
                    for i in range(n):
                        xp = v[i, p] * gpp + v[i, q] * gqp
                        xq = v[i, p] * gpq + v[i, q] * gqq
                        v[i, p] = xp
                        v[i, q] = xq
        if not converged:
            offnorm = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        offnorm += cabs(a[p, q]) ** 2
            converged = sqrt(offnorm) <= tol * scale
    return np.diag(a_arr).real.copy(), v_arr, int(sweeps), bool(converged)
