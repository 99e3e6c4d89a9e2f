"""The kernel function R_gamma(z): level-gamma self-energy of the coupling.

Three evaluation routes share one piece of geometry. With b the coupling
column into level gamma restricted to the other indices, D(z) the diagonal
of 1/(E_gamma - E_other - z), and Hbar the coupling block over the other
indices, the order-l path sum is b^dag D(z) (Hbar D(z))^(l-1) b; summing the
geometric series gives the closed form b^dag ((E_gamma - z) I - Hperp)^(-1) b
where Hperp is the full complement block including its levels. The jet route
carries derivatives at z = 0 for the eigenvalue power series: the m-th
derivative of the closed form is m! b^dag A^-(m+1) b with A = E_gamma I - Hperp,
realized as repeated solves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IllConditionedWarning, PoleHit, SingularSolve
from .hamiltonian import SplitHamiltonian
from .jets import Jet

POLE_DISTANCE = 1e-14
SINGULAR_COND = 1e13
WARN_COND = 1e12


def cond1(a: np.ndarray) -> float:
    """1-norm condition number as a plain float; inf for singular input."""
    if a.size == 0:
        return 0.0
    try:
        c = np.linalg.cond(a, 1)
    except np.linalg.LinAlgError:
        return float("inf")
    return float(abs(complex(c)))


@dataclass(frozen=True)
class KernelConfig:
    """Truncation and tolerance knobs for the series and jet routes."""

    max_path_order: int = 30
    jet_order: int = 8
    conv_tol: float = 1e-10

    def __post_init__(self):
        if self.max_path_order < 1:
            raise ValueError("max_path_order must be >= 1")
        if self.jet_order < 0:
            raise ValueError("jet_order must be >= 0")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")


class KernelSeriesResult(NamedTuple):
    value: complex
    tail: float
    converged: bool
    terms: np.ndarray


def complement(s: SplitHamiltonian, gamma: int):
    """(indices, b, Hbar, levels) of the complement of level gamma.

    b is the coupling column into gamma, Hbar the coupling block, both
    restricted to indices != gamma.
    """
    idx = np.array([i for i in range(s.dim) if i != gamma], dtype=np.intp)
    b = s.coupling[idx, gamma]
    hbar = s.coupling[np.ix_(idx, idx)]
    return idx, b, hbar, s.levels[idx]


def kernel_series(s: SplitHamiltonian, gamma: int, z: complex, cfg: KernelConfig | None = None) -> KernelSeriesResult:
    """Truncated path-sum evaluation of R_gamma(z).

    Computed by iterated restricted matrix-vector products, an exact
    regrouping of the literal sum over index paths. The tail estimate is the
    magnitude of the last retained order; the converged flag (non-fatal)
    compares it against ``cfg.conv_tol``.
    """
    cfg = cfg or KernelConfig()
    s.require_nondegenerate()
    _, b, hbar, lv = complement(s, gamma)
    if b.shape[0] == 0:
        return KernelSeriesResult(0j, 0.0, True, np.zeros(0, dtype=np.complex128))
    denom = s.levels[gamma] - lv - z
    bad = np.abs(denom) <= POLE_DISTANCE
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0])
        raise PoleHit(f"denominator E[{gamma}] - E[{j}] - z is {denom[j]:.3e} (within {POLE_DISTANCE:.0e})")
    dinv = 1.0 / denom
    terms = np.empty(cfg.max_path_order, dtype=np.complex128)
    v = dinv * b
    bconj = b.conj()
    for l in range(cfg.max_path_order):
        terms[l] = bconj @ v
        v = dinv * (hbar @ v)
    tail = float(abs(terms[-1]))
    return KernelSeriesResult(complex(terms.sum()), tail, tail <= cfg.conv_tol, terms)


def _complement_solve(s: SplitHamiltonian, gamma: int, z: complex, rhs: np.ndarray):
    """Solve ((E_gamma - z) I - Hperp) x = rhs with condition reporting."""
    _, b, hbar, lv = complement(s, gamma)
    a = (s.levels[gamma] - z) * np.eye(lv.shape[0], dtype=np.complex128) - np.diag(lv) - hbar
    cond = cond1(a)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularSolve(
            f"complement system for level {gamma} at z={z} is singular "
            f"(1-norm condition {cond:.3e})"
        )
    if cond > WARN_COND:
        warnings.warn(
            f"complement solve for level {gamma} has condition {cond:.3e}",
            IllConditionedWarning,
            stacklevel=3,
        )
    return np.linalg.solve(a, rhs), cond


def kernel_resolvent(s: SplitHamiltonian, gamma: int, z: complex) -> complex:
    """Closed form of R_gamma(z): one linear solve against the complement block.

    Equals the infinite-order limit of :func:`kernel_series` wherever that
    series converges, and stays valid beyond its radius.
    """
    _, b, _, lv = complement(s, gamma)
    if b.shape[0] == 0 or not np.any(b):
        return 0j
    x, _ = _complement_solve(s, gamma, z, b)
    return complex(b.conj() @ x)


def kernel_resolvent_with_condition(s: SplitHamiltonian, gamma: int, z: complex) -> tuple[complex, float]:
    """As :func:`kernel_resolvent`, also returning the solve's 1-norm condition."""
    _, b, _, lv = complement(s, gamma)
    if b.shape[0] == 0:
        return 0j, 0.0
    x, cond = _complement_solve(s, gamma, z, b)
    return complex(b.conj() @ x), cond


def kernel_jet(s: SplitHamiltonian, gamma: int, cfg: KernelConfig | None = None) -> Jet:
    """Jet of R_gamma(z) around z = 0 to order ``cfg.jet_order``.

    Coefficient m is b^dag A^-(m+1) b from m+1 successive solves against
    A = E_gamma I - Hperp; no finite differencing is involved.
    """
    cfg = cfg or KernelConfig()
    _, b, hbar, lv = complement(s, gamma)
    m = cfg.jet_order
    if b.shape[0] == 0 or not np.any(b):
        return Jet(np.zeros(m + 1, dtype=np.complex128))
    a = s.levels[gamma] * np.eye(lv.shape[0], dtype=np.complex128) - np.diag(lv) - hbar
    cond = cond1(a)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularSolve(f"complement system for level {gamma} at z=0 is singular")
    if cond > WARN_COND:
        warnings.warn(
            f"jet solves for level {gamma} have condition {cond:.3e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    coeffs = np.empty(m + 1, dtype=np.complex128)
    x = b.astype(np.complex128)
    bconj = b.conj()
    for k in range(m + 1):
        x = np.linalg.solve(a, x)
        coeffs[k] = bconj @ x
    return Jet(coeffs)


def spectral_radius_estimate(s: SplitHamiltonian, gamma: int, z: complex, iters: int = 60) -> float:
    """Power-iteration estimate of the spectral radius of Hbar D(z).

    Diagnostic only: convergence of the path sum is implied when this is
    below one. Deterministic start vector; geometric-mean growth rate of the
    last few iterations.
    """
    _, b, hbar, lv = complement(s, gamma)
    n = lv.shape[0]
    if n == 0 or not np.any(hbar):
        return 0.0
    dinv = 1.0 / (s.levels[gamma] - lv - z)
    v = np.ones(n, dtype=np.complex128) / np.sqrt(n)
    rates = []
    for _ in range(iters):
        w = hbar @ (dinv * v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        rates.append(nw)
        v = w / nw
    tail = rates[-8:]
    return float(np.exp(np.mean(np.log(tail))))
