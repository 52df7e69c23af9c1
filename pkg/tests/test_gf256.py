import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from hypercube_cdc import gf256
from hypercube_cdc.errors import SingularMatrixError
from hypercube_cdc.gf256 import FieldMatrix


def peasant(a, b):
    # shift-and-add multiplication modulo x^8+x^4+x^3+x+1
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        if a & 0x100:
            a ^= 0x11B
        b >>= 1
    return out


def naive_matmul(a, b):
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = 0
            for k in range(a.cols):
                acc ^= peasant(a[i, k], b[k, j])
            row.append(acc)
        out.append(row)
    return FieldMatrix.from_rows(out, b.cols)


def test_mul_table_against_peasant(backend):
    for a in range(256):
        for b in range(256):
            assert gf256.mul(a, b) == peasant(a, b)


def test_known_inverse_pair(backend):
    assert gf256.mul(0x53, 0xCA) == 0x01
    assert gf256.inv(0x53) == 0xCA


def test_inverse(backend):
    for a in range(1, 256):
        assert gf256.mul(a, gf256.inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        gf256.inv(0)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_field_axioms(a, b, c):
    assert gf256.add(a, a) == 0
    assert gf256.mul(a, 1) == a
    assert gf256.mul(a, b) == gf256.mul(b, a)
    assert gf256.mul(a, gf256.mul(b, c)) == gf256.mul(gf256.mul(a, b), c)
    assert gf256.mul(a, b ^ c) == gf256.mul(a, b) ^ gf256.mul(a, c)


matrices = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(1, 40), st.binary(min_size=n * n, max_size=n * n), st.binary(min_size=n * 40, max_size=n * 40))
)


@settings(max_examples=60)
@given(matrices)
def test_matmul_matches_naive(case):
    n, w, a, b = case
    A = FieldMatrix(n, n, a)
    B = FieldMatrix(n, w, b[: n * w])
    for name in gf256.available_backends():
        prev = gf256.set_backend(name)
        try:
            assert A @ B == naive_matmul(A, B)
        finally:
            gf256.set_backend(prev)


def test_matmul_wide_rows(backend):
    # exercises the padded SIMD path with widths not divisible by 16
    for w in (1, 15, 16, 17, 33, 250):
        A = gf256.random_matrix(5, 7, 1, w)
        B = gf256.random_matrix(7, w, 2, w)
        assert A @ B == naive_matmul(A, B)


def test_solve_identity(backend):
    b = gf256.random_matrix(4, 9, 5)
    assert gf256.solve(FieldMatrix.identity(4), b) == b


def test_solve_duplicate_rows(backend):
    r = gf256.random_matrix(1, 4, 9).data
    a = FieldMatrix.from_rows([r, r, bytes([1, 2, 3, 4]), bytes([5, 6, 7, 8])])
    with pytest.raises(SingularMatrixError):
        gf256.solve(a, gf256.random_matrix(4, 3, 1))
    assert gf256.rank(a) == 3


def test_solve_round_trip(backend):
    done = 0
    for t in range(1000):
        a = gf256.random_matrix(6, 6, 11, t)
        x = gf256.random_matrix(6, 12, 12, t)
        if gf256.rank(a) < 6:
            with pytest.raises(SingularMatrixError):
                gf256.solve(a, a @ x)
            continue
        assert gf256.solve(a, a @ x) == x
        done += 1
    assert done > 980


def test_inverse_matrix(backend):
    a = gf256.random_matrix(8, 8, 3)
    assert gf256.inverse(a) @ a == FieldMatrix.identity(8)


@pytest.mark.parametrize("n", [1, 4, 32])
def test_singular_iff_rank_deficient(n, backend):
    for t in range(20):
        a = gf256.random_matrix(n, n, 77, n, t)
        b = gf256.random_matrix(n, 3, 78, n, t)
        try:
            x = gf256.solve(a, b)
        except SingularMatrixError:
            assert gf256.rank(a) < n
        else:
            assert gf256.rank(a) == n
            assert a @ x == b


def test_singular_rate():
    n, trials = 3, 10_000
    expected = 1.0
    for i in range(1, n + 1):
        expected *= 1 - 256.0**-i
    p = 1 - expected
    singular = sum(gf256.rank(gf256.random_matrix(n, n, 5, t)) < n for t in range(trials))
    sigma = (trials * p * (1 - p)) ** 0.5
    assert abs(singular - trials * p) <= 3 * sigma


def test_backends_agree():
    names = gf256.available_backends()
    a = gf256.random_matrix(10, 10, 1)
    b = gf256.random_matrix(10, 100, 2)
    results = []
    for name in names:
        prev = gf256.set_backend(name)
        try:
            results.append((a @ b, gf256.solve(a, b) if gf256.rank(a) == 10 else None, gf256.rank(a)))
        finally:
            gf256.set_backend(prev)
    assert all(r == results[0] for r in results)


def test_unknown_backend():
    with pytest.raises(ValueError):
        gf256.set_backend("fortran")


def test_shapes():
    with pytest.raises(ValueError):
        FieldMatrix(2, 2, b"abc")
    with pytest.raises(ValueError):
        FieldMatrix.zeros(2, 3) @ FieldMatrix.zeros(2, 3)
    z = FieldMatrix.zeros(2, 2) ^ FieldMatrix.identity(2)
    assert z == FieldMatrix.identity(2)


def test_pure_fallback_selected_without_extension():
    # hide the compiled module and check the package still works end to end
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'hypercube_cdc._gfcore':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "from hypercube_cdc import gf256\n"
        "from hypercube_cdc.lattice import HypercubeParams, SMode\n"
        "from hypercube_cdc.pipeline import simulate\n"
        "assert gf256.BACKEND == 'python', gf256.BACKEND\n"
        "assert gf256.available_backends() == ['python']\n"
        "res = simulate(HypercubeParams(2, 3, s_mode=SMode.SD))\n"
        "assert res.ok\n"
        "print('ok')\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "ok"
