"""Self-contained reference oracle: dense Hermitian eigensolver and propagator.

Ground truth for every acceptance test, so it deliberately shares no code
with the series solver: eigenpairs come from cyclic Jacobi rotations (the
backend provides the sweep kernel in compiled and pure variants of the same
algorithm), and the propagator is assembled from the eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import NoConvergence
from .hamiltonian import HermitianMatrix

SWEEP_CAP = 100
OFF_TOL = 1e-14


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the unitary of column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def _entries(h) -> np.ndarray:
    if isinstance(h, HermitianMatrix):
        return h.entries
    return HermitianMatrix(h).entries


def dense_eig(h, max_sweeps: int = SWEEP_CAP) -> EigenDecomposition:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Deterministic: fixed sweep order, ascending eigenvalue sort with a
    stable tie rule, and each eigenvector's largest-magnitude component made
    real and positive.
    """
    a = _entries(h)
    w, v, sweeps, converged = backend.jacobi_eig(a, OFF_TOL, max_sweeps)
    if not converged:
        raise NoConvergence(f"Jacobi sweeps did not converge within {max_sweeps} sweeps")
    order = np.argsort(w, kind="stable")
    w = np.ascontiguousarray(w[order])
    v = np.ascontiguousarray(v[:, order])
    for j in range(v.shape[1]):
        k = int(np.argmax(np.abs(v[:, j])))
        pivot = v[k, j]
        mag = abs(pivot)
        if mag > 0:
            v[:, j] *= np.conj(pivot) / mag
    return EigenDecomposition(values=w, vectors=v, sweeps=sweeps)


def expm_minus_iHt(h, t: float) -> np.ndarray:
    """exp(-i H t) from the Jacobi eigendecomposition; unitary by construction."""
    dec = dense_eig(h)
    phases = np.exp(-1j * dec.values * t)
    return (dec.vectors * phases) @ dec.vectors.conj().T
