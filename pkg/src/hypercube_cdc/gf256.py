"""Arithmetic over GF(2^8) with the AES polynomial ``x^8+x^4+x^3+x+1``.

The heavy lifting (matrix products and Gauss-Jordan elimination over payload
rows) is done by one of two interchangeable kernel modules: the compiled
``_gfcore`` extension when it has been built, otherwise the pure-Python
``_gfpure``.  :data:`BACKEND` names the active one; :func:`set_backend`
switches at runtime.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _gfpure
from .errors import SingularMatrixError

try:
    from . import _gfcore
except ImportError:  # extension not built
    _gfcore = None

_BACKENDS = {"python": _gfpure}
if _gfcore is not None:
    _BACKENDS["cython"] = _gfcore

_kernel = _gfcore if _gfcore is not None else _gfpure
BACKEND = "cython" if _gfcore is not None else "python"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> str:
    """Select the kernel module; returns the previously active name."""
    global _kernel, BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = BACKEND
    _kernel, BACKEND = _BACKENDS[name], name
    return previous


def add(a: int, b: int) -> int:
    return a ^ b


def mul(a: int, b: int) -> int:
    return _kernel.mul(a, b)


def inv(a: int) -> int:
    return _kernel.inv(a)


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix of field elements, one byte each."""

    rows: int
    cols: int
    data: bytes

    def __post_init__(self):
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"{len(self.data)} bytes cannot fill a {self.rows}x{self.cols} matrix")

    @classmethod
    def from_rows(cls, rows: Sequence[bytes | Sequence[int]], cols: int | None = None) -> "FieldMatrix":
        rows = [bytes(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("rows have unequal length")
        return cls(len(rows), cols, b"".join(rows))

    @classmethod
    def identity(cls, n: int) -> "FieldMatrix":
        data = bytearray(n * n)
        data[:: n + 1] = b"\x01" * n
        return cls(n, n, bytes(data))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "FieldMatrix":
        return cls(rows, cols, bytes(rows * cols))

    def row(self, i: int) -> bytes:
        return self.data[i * self.cols:(i + 1) * self.cols]

    def row_list(self) -> list[bytes]:
        c = self.cols
        return [self.data[i * c:(i + 1) * c] for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i * self.cols + j]

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        return matmul(self, other)

    def __xor__(self, other: "FieldMatrix") -> "FieldMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        n = len(self.data)
        v = int.from_bytes(self.data, "little") ^ int.from_bytes(other.data, "little")
        return FieldMatrix(self.rows, self.cols, v.to_bytes(n, "little"))

    __add__ = __xor__


def vstack(blocks: Iterable[FieldMatrix]) -> FieldMatrix:
    blocks = list(blocks)
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise ValueError("column counts differ")
    return FieldMatrix(sum(b.rows for b in blocks), cols, b"".join(b.data for b in blocks))


def matmul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    if a.cols != b.rows:
        raise ValueError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    return FieldMatrix(a.rows, b.cols, _kernel.matmul(a.data, a.rows, a.cols, b.data, b.cols))


def solve(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    """Return ``X`` with ``A @ X == B``.

    Raises :class:`SingularMatrixError` if ``A`` has no inverse.
    """
    if a.rows != a.cols:
        raise ValueError("coefficient matrix must be square")
    if b.rows != a.rows:
        raise ValueError("right-hand side has the wrong number of rows")
    x = _kernel.solve(a.data, a.rows, b.data, b.cols)
    if x is None:
        raise SingularMatrixError(f"{a.rows}x{a.cols} system is singular")
    return FieldMatrix(b.rows, b.cols, x)


def inverse(a: FieldMatrix) -> FieldMatrix:
    return solve(a, FieldMatrix.identity(a.rows))


def rank(a: FieldMatrix) -> int:
    return _kernel.rank(a.data, a.rows, a.cols)


def random_matrix(rows: int, cols: int, *key: int) -> FieldMatrix:
    """Uniform coefficients from a counter-keyed SHAKE-256 stream."""
    tag = struct.pack(f"<{len(key)}Q", *key)
    return FieldMatrix(rows, cols, hashlib.shake_256(b"hcdc/coef" + tag).digest(rows * cols))
