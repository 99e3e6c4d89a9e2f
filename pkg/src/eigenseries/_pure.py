"""Pure NumPy fallbacks for the hot kernels.

Same contracts as the compiled module ``_fast``; selected at import time by
:mod:`eigenseries.backend` when the extension is unavailable or disabled.
"""

from __future__ import annotations

import numpy as np


def dd_exp_sorted(xs: np.ndarray, t: float) -> complex:
    """Confluent divided difference of exp(-i E t) over sorted nodes.

    ``xs`` must be ascending so repeated nodes are adjacent; repeated nodes
    take the derivative limit phi^(j)(x)/j! = (-it)^j exp(-i x t)/j!.
    """
    xs = np.asarray(xs, dtype=np.float64)
    n = xs.shape[0]
    cur = np.exp(-1j * xs * t).astype(np.complex128)
    if n == 1:
        return complex(cur[0])
    mit = -1j * t
    # fact_term[i] tracks (-it)^j exp(-i xs[i] t) / j! along the layers
    fact_term = cur * mit
    # first layer in product form: the naive difference quotient of two
    # nearly equal phases cancels catastrophically for small spread*t
    first = np.empty(n - 1, dtype=np.complex128)
    for i in range(n - 1):
        if xs[i + 1] == xs[i]:
            first[i] = fact_term[i]
        else:
            gap = xs[i] - xs[i + 1]
            mid = np.exp(-0.5j * (xs[i] + xs[i + 1]) * t)
            first[i] = -2j * mid * np.sin(0.5 * gap * t) / gap
    cur = first
    for j in range(2, n):
        fact_term = fact_term * (mit / j)
        nxt = np.empty(n - j, dtype=np.complex128)
        for i in range(n - j):
            if xs[i + j] == xs[i]:
                nxt[i] = fact_term[i]
            else:
                nxt[i] = (cur[i + 1] - cur[i]) / (xs[i + j] - xs[i])
        cur = nxt
    return complex(cur[0])


def pathsum_order(levels: np.ndarray, coupling: np.ndarray, l: int, t: float) -> np.ndarray:
    """Order-l evolution coefficient by prefix-merged path recursion.

    Paths of l hops are walked from every start index; prefixes sharing the
    same (node multiset, endpoint) are merged, and the divided-difference
    factor is memoized per multiset. Exact regrouping of the literal path
    enumeration.
    """
    levels = np.asarray(levels, dtype=np.float64)
    g = np.asarray(coupling, dtype=np.complex128)
    dim = levels.shape[0]
    if l == 0:
        return np.diag(np.exp(-1j * levels * t)).astype(np.complex128)
    out = np.zeros((dim, dim), dtype=np.complex128)
    dd_memo: dict[tuple, complex] = {}
    nonzero = [np.nonzero(g[i])[0] for i in range(dim)]
    for start in range(dim):
        counts0 = [0] * dim
        counts0[start] = 1
        states = {(tuple(counts0), start): 1.0 + 0.0j}
        for _ in range(l):
            nxt_states: dict[tuple, complex] = {}
            for (counts, cur), w in states.items():
                for nxt in nonzero[cur]:
                    nc = list(counts)
                    nc[nxt] += 1
                    key = (tuple(nc), int(nxt))
                    prev = nxt_states.get(key)
                    val = w * g[cur, nxt]
                    nxt_states[key] = val if prev is None else prev + val
            states = nxt_states
        for (counts, cur), w in states.items():
            dd = dd_memo.get(counts)
            if dd is None:
                nodes = np.sort(np.repeat(levels, counts))
                dd = dd_exp_sorted(nodes, t)
                dd_memo[counts] = dd
            out[start, cur] += w * dd
    return out


def jacobi_eig(h: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Returns (eigenvalues, eigenvector columns, sweeps, converged); values
    and vectors are unsorted, phase unfixed. Row/column rotation updates are
    vectorized.
    """
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.diag(a).real.copy(), v, 0, True
    scale = max(np.linalg.norm(a), 1e-300)
    sweeps = 0
    converged = False
    for _ in range(max_sweeps):
        offnorm = np.linalg.norm(a - np.diag(np.diag(a)))
        if offnorm <= tol * scale:
            converged = True
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                if tau >= 0:
                    tt = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    tt = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + tt * tt)
                s = tt * c
                gpp, gpq = c, s * phase
                gqp, gqq = -s * np.conj(phase), c
                rp = np.conj(gpp) * a[p, :] + np.conj(gqp) * a[q, :]
                rq = np.conj(gpq) * a[p, :] + np.conj(gqq) * a[q, :]
                a[p, :] = rp
                a[q, :] = rq
                cp = a[:, p] * gpp + a[:, q] * gqp
                cq = a[:, p] * gpq + a[:, q] * gqq
                a[:, p] = cp
                a[:, q] = cq
                vp = v[:, p] * gpp + v[:, q] * gqp
                vq = v[:, p] * gpq + v[:, q] * gqq
                v[:, p] = vp
                v[:, q] = vq
    if not converged:
        offnorm = np.linalg.norm(a - np.diag(np.diag(a)))
        converged = bool(offnorm <= tol * scale)
    return np.diag(a).real.copy(), v, sweeps, converged
