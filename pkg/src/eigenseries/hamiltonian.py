"""Hermitian matrices, the diagonal/off-diagonal split, and model generators.

Everything downstream works in the basis in which the solvable part is
diagonal: a Hamiltonian is stored as a dense complex matrix, and ``split``
partitions it into a real level vector (the diagonal) and a strictly
off-diagonal coupling matrix. The split is a partition of the entries, so
reconstruction is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, InvalidSpec, NotHermitian

DEFAULT_TOL_HERM = 1e-12
DEFAULT_GAP_TOL = 1e-9


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class HermitianMatrix:
    """Dense square complex Hermitian matrix in dimensionless energy units.

    Parameters
    ----------
    entries : array_like
        Square matrix. Checked against its conjugate transpose.
    tol_herm : float
        Largest tolerated entrywise deviation from Hermitian symmetry.
    symmetrize : bool
        If True, replace the input by (H + H^dag)/2 instead of rejecting a
        slightly asymmetric matrix. Off by default: silent correction hides
        data errors.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, tol_herm: float = DEFAULT_TOL_HERM, symmetrize: bool = False):
        a = np.array(entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidSpec(f"matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidSpec("matrix must have dim >= 1")
        dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if symmetrize:
            a = (a + a.conj().T) / 2.0
        elif dev > tol_herm:
            i, j = np.unravel_index(int(np.argmax(np.abs(a - a.conj().T))), a.shape)
            raise NotHermitian(
                f"entry ({i},{j}) deviates from conjugate symmetry by {dev:.3e} "
                f"(tol_herm={tol_herm:.1e}); pass symmetrize=True to average"
            )
        self._entries = _as_readonly(a)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def trace(self) -> float:
        return float(np.trace(self._entries).real)

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"

    def to_jsonable(self) -> dict:
        """Matrix file payload: {"dim", "re", "im"} with row-major arrays."""
        return {
            "dim": self.dim,
            "re": self._entries.real.tolist(),
            "im": self._entries.imag.tolist(),
        }

    @classmethod
    def from_jsonable(cls, obj, tol_herm: float = DEFAULT_TOL_HERM, symmetrize: bool = False):
        if not isinstance(obj, dict):
            raise InvalidSpec("matrix document must be a JSON object")
        if "dim" not in obj:
            raise InvalidSpec("missing field 'dim'")
        try:
            dim = int(obj["dim"])
        except (TypeError, ValueError):
            raise InvalidSpec("field 'dim' must be an integer") from None
        if dim < 1:
            raise InvalidSpec("field 'dim' must be >= 1")
        if "re" not in obj:
            raise InvalidSpec("missing field 're'")
        re = _parse_square(obj["re"], dim, "re")
        if obj.get("im") is None:
            im = np.zeros((dim, dim))
        else:
            im = _parse_square(obj["im"], dim, "im")
        return cls(re + 1j * im, tol_herm=tol_herm, symmetrize=symmetrize)


def _parse_square(rows, dim: int, field: str) -> np.ndarray:
    try:
        a = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError):
        raise InvalidSpec(f"field '{field}' must be a {dim}x{dim} numeric array") from None
    if a.shape != (dim, dim):
        raise InvalidSpec(f"field '{field}' has shape {a.shape}, expected ({dim}, {dim})")
    return a


def load_matrix_json(path, tol_herm: float = DEFAULT_TOL_HERM, symmetrize: bool = False) -> HermitianMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"not valid JSON: {exc}") from None
    return HermitianMatrix.from_jsonable(obj, tol_herm=tol_herm, symmetrize=symmetrize)


class SplitHamiltonian:
    """Levels (real diagonal) plus strictly off-diagonal Hermitian coupling.

    The coupling diagonal is exactly zero by construction; any diagonal
    content handed in through ``coupling`` is rejected rather than silently
    moved. Use :func:`split` to build one from a full matrix.
    """

    __slots__ = ("_levels", "_coupling", "_gap_tol", "_nondegenerate", "_closest_pair", "_min_gap")

    def __init__(self, levels, coupling, gap_tol: float = DEFAULT_GAP_TOL):
        lv = np.array(levels, dtype=np.float64)
        g = np.array(coupling, dtype=np.complex128)
        if lv.ndim != 1:
            raise InvalidSpec("levels must be a 1-d real vector")
        n = lv.shape[0]
        if g.shape != (n, n):
            raise InvalidSpec(f"coupling shape {g.shape} does not match dim {n}")
        if n and np.any(np.diag(g) != 0):
            raise InvalidSpec("coupling diagonal must be exactly zero")
        dev = float(np.max(np.abs(g - g.conj().T))) if n else 0.0
        if dev > DEFAULT_TOL_HERM:
            raise NotHermitian(f"coupling deviates from Hermitian symmetry by {dev:.3e}")
        self._levels = _as_readonly(lv)
        self._coupling = _as_readonly(g)
        self._gap_tol = float(gap_tol)
        ok, pair, gap = check_nondegenerate(lv, gap_tol)
        self._nondegenerate = ok
        self._closest_pair = pair
        self._min_gap = gap

    @property
    def dim(self) -> int:
        return self._levels.shape[0]

    @property
    def levels(self) -> np.ndarray:
        return self._levels

    @property
    def coupling(self) -> np.ndarray:
        return self._coupling

    @property
    def gap_tol(self) -> float:
        return self._gap_tol

    @property
    def nondegenerate(self) -> bool:
        return self._nondegenerate

    @property
    def closest_pair(self):
        """(i, j) of the closest level pair, or None for dim < 2."""
        return self._closest_pair

    @property
    def min_gap(self) -> float:
        return self._min_gap

    def reconstruct(self) -> HermitianMatrix:
        h = self._coupling.copy()
        h[np.diag_indices(self.dim)] = self._levels
        return HermitianMatrix(h)

    def scaled(self, s: float) -> "SplitHamiltonian":
        """Same levels, coupling multiplied by a real scale factor."""
        return SplitHamiltonian(self._levels, s * self._coupling, gap_tol=self._gap_tol)

    def require_nondegenerate(self):
        if not self._nondegenerate:
            i, j = self._closest_pair
            raise DegenerateInput(
                f"levels {i} and {j} are {self._min_gap:.3e} apart "
                f"(gap_tol={self._gap_tol:.1e}); the nondegenerate solver does not apply"
            )

    def __repr__(self):
        return f"SplitHamiltonian(dim={self.dim}, nondegenerate={self._nondegenerate})"


def check_nondegenerate(levels, gap_tol: float = DEFAULT_GAP_TOL):
    """Check all pairwise level gaps against ``gap_tol``.

    Accepts a level vector or a :class:`SplitHamiltonian`.

    Returns
    -------
    (ok, pair, min_gap)
        ``ok`` is True iff every pairwise gap exceeds ``gap_tol``. ``pair``
        holds the original indices of the closest pair (None for dim < 2)
        and ``min_gap`` its distance (inf for dim < 2).
    """
    if isinstance(levels, SplitHamiltonian):
        levels = levels.levels
    lv = np.asarray(levels, dtype=np.float64)
    n = lv.shape[0]
    if n < 2:
        return True, None, float("inf")
    order = np.argsort(lv, kind="stable")
    gaps = np.diff(lv[order])
    k = int(np.argmin(gaps))
    i, j = int(order[k]), int(order[k + 1])
    if i > j:
        i, j = j, i
    gap = float(gaps[k])
    return gap > gap_tol, (i, j), gap


def split(h: HermitianMatrix, gap_tol: float = DEFAULT_GAP_TOL) -> SplitHamiltonian:
    """Partition a Hermitian matrix into diagonal levels and off-diagonal coupling.

    The levels take the real part of the diagonal (imaginary residue is at
    most the Hermiticity tolerance and is discarded); the coupling is the
    matrix with its diagonal zeroed. Moving every diagonal element into the
    level vector in one step also covers the redivision of any provisional
    split whose off-diagonal part still carried diagonal content.
    """
    a = h.entries
    levels = np.diag(a).real.copy()
    coupling = a.copy()
    coupling[np.diag_indices(h.dim)] = 0.0
    return SplitHamiltonian(levels, coupling, gap_tol=gap_tol)


_FAMILIES = ("two_level", "chain", "banded_random")


@dataclass(frozen=True)
class ModelSpec:
    """Parameters for the built-in model families.

    ``delta`` is the level spacing, ``lam`` the coupling strength;
    ``bandwidth`` and ``seed`` only apply to ``banded_random``.
    """

    family: str
    dim: int = 2
    delta: float = 1.0
    lam: float = 0.1
    bandwidth: int = 2
    seed: int = 0


def generate_model(spec: ModelSpec) -> HermitianMatrix:
    """Build a model Hamiltonian; reproducible for a fixed spec."""
    if spec.family not in _FAMILIES:
        raise InvalidSpec(f"unknown model family {spec.family!r}; choose from {_FAMILIES}")
    if spec.family == "two_level":
        if spec.dim != 2:
            raise InvalidSpec("two_level model has dim=2")
        h = np.array([[0.0, spec.lam], [np.conj(spec.lam), spec.delta]], dtype=np.complex128)
        return HermitianMatrix(h)
    if spec.dim < 2:
        raise InvalidSpec(f"{spec.family} model requires dim >= 2")
    if spec.family == "chain":
        h = np.diag(spec.delta * np.arange(spec.dim)).astype(np.complex128)
        for i in range(spec.dim - 1):
            h[i, i + 1] = spec.lam
            h[i + 1, i] = np.conj(spec.lam)
        return HermitianMatrix(h)
    # banded_random: fixed integer diagonal, seeded complex band, Hermitized
    if spec.bandwidth < 1:
        raise InvalidSpec("banded_random requires bandwidth >= 1")
    rng = np.random.default_rng(spec.seed)
    h = np.diag(np.arange(spec.dim, dtype=np.float64)).astype(np.complex128)
    for d in range(1, min(spec.bandwidth, spec.dim - 1) + 1):
        for i in range(spec.dim - d):
            val = spec.lam * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
            h[i, i + d] = val
            h[i + d, i] = np.conj(val)
    return HermitianMatrix(h)


def model_from_args(family: str, dim: int, delta: float, lam, bandwidth: int = 2, seed: int = 0) -> HermitianMatrix:
    """Convenience wrapper used by the CLI."""
    return generate_model(ModelSpec(family=family, dim=dim, delta=delta, lam=lam, bandwidth=bandwidth, seed=seed))
