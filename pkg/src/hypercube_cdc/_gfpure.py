"""Pure-Python GF(2^8) kernels (polynomial 0x11B).

Matrices travel as row-major ``bytes`` with explicit shapes.  Scaling a row
by a constant is one ``bytes.translate`` through a 256-entry table, and row
addition is a big-integer XOR.
"""

from __future__ import annotations

from typing import Optional

POLY = 0x11B
GENERATOR = 3

EXP = [0] * 510
LOG = [0] * 256

_v = 1
for _e in range(255):
    EXP[_e] = EXP[_e + 255] = _v
    LOG[_v] = _e
    # multiply by the generator x+1
    _v ^= _v << 1
    if _v & 0x100:
        _v ^= POLY
del _v, _e


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return EXP[255 - LOG[a]]


SCALE = [bytes(mul(c, v) for v in range(256)) for c in range(256)]


def matmul(a: bytes, m: int, n: int, b: bytes, w: int) -> bytes:
    """(m x n) @ (n x w) -> (m x w)."""
    rows = [b[k * w:(k + 1) * w] for k in range(n)]
    out = []
    for i in range(m):
        acc = 0
        base = i * n
        for k in range(n):
            c = a[base + k]
            if c:
                acc ^= int.from_bytes(rows[k].translate(SCALE[c]), "little")
        out.append(acc.to_bytes(w, "little"))
    return b"".join(out)


def _eliminate(rows: list[int], n: int, width: int, lead: int) -> Optional[list[int]]:
    # Gauss-Jordan on little-endian integer rows; the first n bytes of each
    # row are the coefficient part, pivots are taken from the first `lead` rows
    mask = 0xFF
    for col in range(n):
        shift = 8 * col
        piv = next((r for r in range(col, lead) if (rows[r] >> shift) & mask), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = (rows[col] >> shift) & mask
        if pv != 1:
            scaled = rows[col].to_bytes(width, "little").translate(SCALE[inv(pv)])
            rows[col] = int.from_bytes(scaled, "little")
        prow = rows[col].to_bytes(width, "little")
        for r in range(len(rows)):
            if r != col:
                f = (rows[r] >> shift) & mask
                if f:
                    rows[r] ^= int.from_bytes(prow.translate(SCALE[f]), "little")
    return rows


def solve(a: bytes, n: int, b: bytes, w: int) -> Optional[bytes]:
    """Solve ``A X = B`` for square ``A``; ``None`` when ``A`` is singular."""
    width = n + w
    rows = [int.from_bytes(a[i * n:(i + 1) * n] + b[i * w:(i + 1) * w], "little") for i in range(n)]
    done = _eliminate(rows, n, width, n)
    if done is None:
        return None
    return b"".join(r.to_bytes(width, "little")[n:] for r in done)


def rank(a: bytes, m: int, n: int) -> int:
    rows = [int.from_bytes(a[i * n:(i + 1) * n], "little") for i in range(m)]
    r = 0
    for col in range(n):
        shift = 8 * col
        piv = next((i for i in range(r, m) if (rows[i] >> shift) & 0xFF), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r].to_bytes(n, "little").translate(SCALE[inv((rows[r] >> shift) & 0xFF)])
        for i in range(r + 1, m):
            f = (rows[i] >> shift) & 0xFF
            if f:
                rows[i] ^= int.from_bytes(prow.translate(SCALE[f]), "little")
        r += 1
        if r == m:
            break
    return r
