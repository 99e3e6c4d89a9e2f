"""Kernel backend selection.

The hot inner loops (confluent divided differences, the path-recursion
evolution coefficients, Jacobi sweeps) exist twice: a Cython extension
(``_fast``) and a pure NumPy fallback (``_pure``). The compiled module is
preferred when importable; set ``EIGENSERIES_PURE=1`` to force the fallback.
Both expose identical signatures, so callers go through this module.
"""

from __future__ import annotations

import os

from . import _pure

try:  # pragma: no cover - presence depends on the build
    from . import _fast
except ImportError:  # pragma: no cover
    _fast = None

_FORCE_PURE = os.environ.get("EIGENSERIES_PURE", "").strip() not in ("", "0")

if _fast is not None and not _FORCE_PURE:
    _impl = _fast
    BACKEND = "compiled"
else:
    _impl = _pure
    BACKEND = "pure"

dd_exp_sorted = _impl.dd_exp_sorted
pathsum_order = _impl.pathsum_order
jacobi_eig = _impl.jacobi_eig


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'pure'."""
    return BACKEND


def available_backends() -> tuple[str, ...]:
    return ("pure",) if _fast is None else ("compiled", "pure")


def get_impl(name: str):
    """Fetch a specific backend module (for parity tests and benchmarks)."""
    if name == "pure":
        return _pure
    if name == "compiled":
        if _fast is None:
            raise ValueError("compiled backend is not available")
        return _fast
    raise ValueError(f"unknown backend {name!r}")
