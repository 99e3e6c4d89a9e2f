"""Truncated power series (jets) around z = 0.

A jet stores the coefficients of f(z) = sum_m c[m] z^m up to a fixed order.
Arithmetic is exact truncation: adding, multiplying, or inverting jets of
order M yields the order-M jet of the exact result. The reciprocal needs a
nonzero constant term.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.shape[0] < 1:
            raise ValueError("jet coefficients must be a nonempty 1-d sequence")
        self.coeffs = c

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = value
        return cls(c)

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, m):
        return self.coeffs[m]

    def derivative(self, m: int) -> complex:
        """m-th derivative at z = 0, i.e. m! times coefficient m."""
        return complex(math.factorial(m) * self.coeffs[m])

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jet orders must match")
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet(self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Jet(self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        return Jet(o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet(-self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * other)
        o = self._coerce(other)
        n = self.coeffs.shape[0]
        out = np.zeros(n, dtype=np.complex128)
        for k in range(n):
            out[k] = np.dot(self.coeffs[: k + 1], o.coeffs[k::-1])
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        c = self.coeffs
        if c[0] == 0:
            raise ZeroDivisionError("jet reciprocal requires a nonzero constant term")
        n = c.shape[0]
        out = np.zeros(n, dtype=np.complex128)
        out[0] = 1.0 / c[0]
        for k in range(1, n):
            out[k] = -np.dot(c[1 : k + 1], out[k - 1 :: -1]) / c[0]
        return Jet(out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / other)
        return self * self._coerce(other).reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("jet powers must be non-negative integers")
        out = Jet.constant(1.0, self.order)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet({np.array2string(self.coeffs, precision=6)})"
