"""Coupling-order expansion of the propagator exp(-i H t).

The order-l coefficient matrix A_l collects every l-hop coupling path
weighted by the confluent divided difference of exp(-i E t) over the path's
level multiset; repeated levels take derivative limits, so the apparent
singularities of the raw energy-denominator form never arise. A_0 is the
bare phase diagonal, and sum_l A_l converges to the exact propagator.

Two equivalent routes are implemented. The path route walks the paths
directly (prefix-merged, divided differences memoized) and is kept within a
desk-scale regime. The jet route treats the coupling strength as a nilpotent
series variable and exponentiates the matrix-coefficient jet by scaling and
squaring; each retained order is exact, and truncation order 30 costs
milliseconds, so it backs the assembled series and the propagator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import AccuracyWarning
from .hamiltonian import SplitHamiltonian

PATHSUM_MAX_DIM = 8
PATHSUM_MAX_ORDER = 12
CANCELLATION_SPREAD = 50.0
DEFAULT_CONV_TOL = 1e-10


def confluent_divided_difference(nodes, t: float) -> complex:
    """Divided difference of exp(-i E t) over a real node multiset.

    Order does not matter; repeated nodes are handled by the derivative
    substitution, making the value continuous in the nodes. Warns when the
    node spread times |t| is large enough for the recursion to lose digits.
    """
    xs = np.sort(np.asarray(nodes, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("need at least one node")
    spread = float(xs[-1] - xs[0])
    if spread * abs(t) > CANCELLATION_SPREAD:
        warnings.warn(
            f"divided difference over spread {spread:.3g} at t={t:.3g} may lose accuracy",
            AccuracyWarning,
            stacklevel=2,
        )
    return backend.dd_exp_sorted(xs, float(t))


def evolution_coefficient(s: SplitHamiltonian, l: int, t: float, method: str = "auto") -> np.ndarray:
    """Order-l coefficient matrix A_l at time t.

    ``method`` selects the route: "pathsum" walks coupling paths with
    memoized confluent divided differences and requires dim <= 8, l <= 12;
    "jet" extracts the order from the nilpotent-series exponential and has
    no such cap. "auto" prefers the path route inside its regime.
    """
    if l < 0:
        raise ValueError("order must be >= 0")
    if not math.isfinite(t):
        raise ValueError("time must be finite")
    if method == "auto":
        method = "pathsum" if (s.dim <= PATHSUM_MAX_DIM and l <= PATHSUM_MAX_ORDER) else "jet"
    if method == "pathsum":
        if s.dim > PATHSUM_MAX_DIM or l > PATHSUM_MAX_ORDER:
            raise ValueError(
                f"pathsum route is limited to dim <= {PATHSUM_MAX_DIM} and "
                f"l <= {PATHSUM_MAX_ORDER}; use method='jet'"
            )
        return backend.pathsum_order(s.levels, s.coupling, l, float(t))
    if method == "jet":
        return _jet_terms(s.levels, s.coupling, float(t), l)[l]
    raise ValueError(f"unknown method {method!r}")


def _jet_terms(levels: np.ndarray, coupling: np.ndarray, t: float, order: int,
               theta_target: float = 0.25, taylor_terms: int = 17) -> np.ndarray:
    """All A_0..A_order at once: exp of a matrix jet by scaling and squaring.

    The propagator of H0 + eps*H1 is expanded in the nilpotent variable eps
    truncated past ``order``; the Taylor/squaring error is controlled through
    the submultiplicative ring norm (sum of coefficient 1-norms), so every
    retained coefficient is exact to roundoff.
    """
    dim = levels.shape[0]
    x0 = (-1j * t) * np.diag(levels).astype(np.complex128)
    x1 = (-1j * t) * np.asarray(coupling, dtype=np.complex128)
    theta = np.linalg.norm(x0, 1) + np.linalg.norm(x1, 1)
    squarings = int(np.ceil(np.log2(theta / theta_target))) if theta > theta_target else 0
    y0 = x0 / 2.0**squarings
    y1 = x1 / 2.0**squarings

    n = order + 1
    eye = np.eye(dim, dtype=np.complex128)
    # Horner form of the ring Taylor series: E = I + Y(I + Y/2 (I + ...))
    e = np.zeros((n, dim, dim), dtype=np.complex128)
    e[0] = eye
    for k in range(taylor_terms, 0, -1):
        nxt = np.empty_like(e)
        for l in range(n):
            acc = y0 @ e[l]
            if l > 0:
                acc = acc + y1 @ e[l - 1]
            nxt[l] = acc / k
        nxt[0] += eye
        e = nxt
    for _ in range(squarings):
        sq = np.zeros_like(e)
        for l in range(n):
            for i in range(l + 1):
                sq[l] += e[i] @ e[l - i]
        e = sq
    return e


@dataclass
class EvolutionSeries:
    t: float
    order: int
    terms: list
    assembled: np.ndarray
    term_norms: np.ndarray
    converged: bool
    conv_tol: float = DEFAULT_CONV_TOL

    @property
    def unitarity_defect(self) -> float:
        u = self.assembled
        return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def evolution_series(s: SplitHamiltonian, t: float, order: int,
                     conv_tol: float = DEFAULT_CONV_TOL) -> EvolutionSeries:
    """Assemble A_0..A_order and their sum at time t (jet route)."""
    if order < 0:
        raise ValueError("order must be >= 0")
    if not math.isfinite(t):
        raise ValueError("time must be finite")
    terms = _jet_terms(s.levels, s.coupling, float(t), order)
    norms = np.array([np.linalg.norm(a) for a in terms])
    return EvolutionSeries(
        t=float(t),
        order=order,
        terms=[terms[l] for l in range(order + 1)],
        assembled=terms.sum(axis=0),
        term_norms=norms,
        converged=bool(norms[-1] <= conv_tol),
        conv_tol=conv_tol,
    )


@dataclass
class PropagationResult:
    psi: np.ndarray
    per_order_norms: np.ndarray
    converged: bool
    series: EvolutionSeries = field(repr=False, default=None)


def propagate(s: SplitHamiltonian, psi0, t: float, order: int = 30,
              conv_tol: float = DEFAULT_CONV_TOL) -> PropagationResult:
    """Apply the truncated evolution expansion to a state.

    Returns the propagated state together with the per-order contribution
    norms ||A_l psi0||; the converged flag (non-fatal) checks the last
    order's contribution against ``conv_tol``.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.shape != (s.dim,):
        raise ValueError(f"psi0 must have length {s.dim}")
    nrm = np.linalg.norm(psi0)
    if nrm == 0:
        raise ValueError("psi0 must be nonzero")
    series = evolution_series(s, t, order, conv_tol)
    contrib = np.array([np.linalg.norm(a @ psi0) for a in series.terms])
    psi = series.assembled @ psi0
    return PropagationResult(
        psi=psi,
        per_order_norms=contrib,
        converged=bool(contrib[-1] <= conv_tol),
        series=series,
    )
