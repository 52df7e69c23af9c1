# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled GF(2^8) kernels (polynomial 0x11B).

Same calling convention as ``_gfpure``: matrices are row-major bytes with
explicit shapes.  The full 64 KiB product table is built at import by
shift-and-add, independently of the log tables used by the fallback.
"""


from libc.stdint cimport uint8_t
from libc.stdlib cimport calloc, free
from libc.string cimport memcpy

cdef extern from "_gfsimd.h":
    int HCDC_HAVE_SSSE3
    void hcdc_axpy_padded(uint8_t *dst, const uint8_t *src, const uint8_t *lo,
                          const uint8_t *hi, const uint8_t *full, size_t chunks) nogil

cdef unsigned char MUL[256][256]
cdef unsigned char INV[256]
cdef unsigned char LO[256][16]
cdef unsigned char HI[256][16]

SIMD = bool(HCDC_HAVE_SSSE3)


cdef unsigned char _shift_add(unsigned int a, unsigned int b):
    cdef unsigned int p = 0
    while b:
        if b & 1:
            p ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11B
        b >>= 1
    return <unsigned char>p


cdef void _build_tables():
    cdef unsigned int a, b
    for a in range(256):
        for b in range(256):
            MUL[a][b] = _shift_add(a, b)
    for a in range(256):
        for b in range(16):
            LO[a][b] = MUL[a][b]
            HI[a][b] = MUL[a][b << 4]
    INV[0] = 0
    for a in range(1, 256):
        for b in range(1, 256):
            if MUL[a][b] == 1:
                INV[a] = <unsigned char>b
                break


_build_tables()


def mul(unsigned int a, unsigned int b):
    return MUL[a & 0xFF][b & 0xFF]


def inv(unsigned int a):
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return INV[a & 0xFF]


cdef inline void _axpy(unsigned char *dst, const unsigned char *src, unsigned char c, Py_ssize_t w) noexcept nogil:
    # dst ^= c * src
    cdef const unsigned char *t = MUL[c]
    cdef Py_ssize_t j
    for j in range(w):
        dst[j] ^= t[src[j]]


def matmul(const unsigned char[::1] a, Py_ssize_t m, Py_ssize_t n, const unsigned char[::1] b, Py_ssize_t w):
    """(m x n) @ (n x w) -> (m x w)."""
    if a.shape[0] != m * n or b.shape[0] != n * w:
        raise ValueError("buffer sizes do not match the stated shapes")
    out = bytearray(m * w)
    if m * w == 0 or n == 0:
        return bytes(out)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t i, k
    cdef unsigned char c
    # rows are copied to a 16-byte stride so the vector loop never needs a tail
    cdef Py_ssize_t chunks = (w + 15) // 16
    cdef Py_ssize_t ws = 16 * chunks
    cdef uint8_t *pb = <uint8_t *> calloc(n * ws, 1)
    cdef uint8_t *po = <uint8_t *> calloc(m * ws, 1)
    if pb == NULL or po == NULL:
        free(pb)
        free(po)
        raise MemoryError()
    with nogil:
        for k in range(n):
            memcpy(pb + k * ws, &b[k * w], w)
        for i in range(m):
            for k in range(n):
                c = a[i * n + k]
                if c:
                    hcdc_axpy_padded(po + i * ws, pb + k * ws, LO[c], HI[c], MUL[c], chunks)
        for i in range(m):
            memcpy(&o[i * w], po + i * ws, w)
    free(pb)
    free(po)
    return bytes(out)


cdef int _gauss_jordan(unsigned char *a, unsigned char *b, Py_ssize_t n, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t col, r, piv, j
    cdef unsigned char pv, f
    cdef unsigned char tmp
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if a[r * n + col]:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != col:
            for j in range(n):
                tmp = a[col * n + j]; a[col * n + j] = a[piv * n + j]; a[piv * n + j] = tmp
            for j in range(w):
                tmp = b[col * w + j]; b[col * w + j] = b[piv * w + j]; b[piv * w + j] = tmp
        pv = INV[a[col * n + col]]
        if pv != 1:
            for j in range(n):
                a[col * n + j] = MUL[pv][a[col * n + j]]
            for j in range(w):
                b[col * w + j] = MUL[pv][b[col * w + j]]
        for r in range(n):
            if r != col:
                f = a[r * n + col]
                if f:
                    _axpy(&a[r * n], &a[col * n], f, n)
                    _axpy(&b[r * w], &b[col * w], f, w)
    return 1


def solve(const unsigned char[::1] a, Py_ssize_t n, const unsigned char[::1] b, Py_ssize_t w):
    """Solve ``A X = B`` for square ``A``; ``None`` when ``A`` is singular."""
    if a.shape[0] != n * n or b.shape[0] != n * w:
        raise ValueError("buffer sizes do not match the stated shapes")
    wa = bytearray(a)
    wb = bytearray(b)
    if n == 0:
        return bytes(wb)
    cdef unsigned char[::1] va = wa
    cdef unsigned char *pb = NULL
    cdef unsigned char[::1] vb
    if n * w:
        vb = wb
        pb = &vb[0]
    cdef int ok
    with nogil:
        ok = _gauss_jordan(&va[0], pb, n, w)
    if not ok:
        return None
    return bytes(wb)


def rank(const unsigned char[::1] a, Py_ssize_t m, Py_ssize_t n):
    if a.shape[0] != m * n:
        raise ValueError("buffer size does not match the stated shape")
    if m * n == 0:
        return 0
    wa = bytearray(a)
    cdef unsigned char[::1] v = wa
    cdef Py_ssize_t col, i, j, piv, r = 0
    cdef unsigned char pv, f, tmp
    for col in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if v[i * n + col]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(n):
                tmp = v[r * n + j]; v[r * n + j] = v[piv * n + j]; v[piv * n + j] = tmp
        pv = INV[v[r * n + col]]
        for j in range(n):
            v[r * n + j] = MUL[pv][v[r * n + j]]
        for i in range(r + 1, m):
            f = v[i * n + col]
            if f:
                _axpy(&v[i * n], &v[r * n], f, n)
        r += 1
    return r
