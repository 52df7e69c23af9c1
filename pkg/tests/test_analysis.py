from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from hypercube_cdc.analysis import (
    CSV_HEADER,
    corollary1,
    dec,
    frac,
    optimal_cascaded,
    optimality_ratios,
    ratio_s1,
    ratio_s2,
    row_json,
    sweep,
    sweep_row,
    theorem1,
    theorem2,
    uncoded,
)
from hypercube_cdc.lattice import SMode

F = Fraction


def test_theorem1():
    assert theorem1(3, 3) == (F(5, 3), F(1, 3))
    assert theorem1(2, 2) == (F(1), F(1, 2))


def test_theorem1_limit():
    d = 4
    gaps = [abs(theorem1(x, d).L - F(1, d - 1)) for x in (10, 100, 1000)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < F(1, 1000)


def test_corollary1():
    assert corollary1(3, 3) == (3, F(1, 3))
    assert corollary1(3, 2) == (2, F(2, 3))
    assert corollary1(2, 2) == (2, F(1, 2))


def test_theorem2():
    assert theorem2(3, 2) == (F(14, 9), F(20, 27))
    assert theorem2(2, 2) == (F(3, 2), F(2, 3))
    r, L = theorem2(2, 3)
    assert r == F(21, 8)
    # hand evaluation: 3/16 + (1/64)(2*3*1*2*2*2/3 + 2*1*1*1*3*4/5)
    assert L == F(3, 16) + F(1, 64) * (F(48, 3) + F(24, 5))
    assert L == F(41, 80)


def _eq8_oracle(K, r, s):
    # independent transcription with math.comb and a single final division
    num = 0
    for l in range(1, K + 1):
        if l < r + 1 or l < s or l > r + s:
            continue
        if l - s < 0 or l - s > r or r - 1 > l - 2:
            continue
        num += l * comb(K, l) * comb(l - 2, r - 1) * comb(r, l - s)
    return F(num, r * comb(K, r) * comb(K, s))


def test_optimal_anchors():
    assert optimal_cascaded(6, 2, 2) == F(8, 15)
    assert optimal_cascaded(9, 3, 1) == F(2, 9)
    # only l = 3 contributes: 3*C(4,3)*C(1,1)*C(2,2) / (2*C(4,2)*C(4,1))
    assert optimal_cascaded(4, 2, 1) == F(1, 4)


@pytest.mark.parametrize("K", range(2, 13))
def test_optimal_matches_oracle(K):
    for r in range(1, K + 1):
        for s in range(1, K + 1):
            assert optimal_cascaded(K, r, s) == _eq8_oracle(K, r, s)


@given(st.integers(2, 40), st.data())
def test_optimal_s1_closed_form(K, data):
    r = data.draw(st.integers(1, K))
    assert optimal_cascaded(K, r, 1) == (1 - F(r, K)) / r


def test_optimal_range_errors():
    with pytest.raises(ValueError):
        optimal_cascaded(4, 0, 1)
    assert optimal_cascaded(4, 4, 1) == 0


def test_uncoded():
    assert uncoded(9, 3) == F(2, 3)
    assert uncoded(7, 7) == 0
    assert uncoded(6, 2) == F(2, 3)
    assert uncoded(6, 2, 2) == F(4, 3)


def test_ratio_s1_identity():
    assert ratio_s1(3, 3) == F(3, 2)
    for x in range(2, 11):
        for d in range(2, 11):
            r = corollary1(x, d).r
            assert ratio_s1(x, d) == r / (r - 1)


def test_ratio_s2():
    assert ratio_s2(3) == F(25, 18)
    rows = optimality_ratios(range(3, 51), s_mode=SMode.SD)
    vals = [r for _, _, r in rows]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < F(105, 100)


def test_ratio_s2_needs_d2():
    with pytest.raises(ValueError):
        optimality_ratios([3], ds=[3], s_mode=SMode.SD)


def test_sweep_rows():
    rows = {(r.x, r.d, r.s): r for r in sweep([3], [2, 3])}
    r = rows[(3, 3, 1)]
    assert (r.L_hc, r.L_opt, r.L_uncoded) == (F(1, 3), F(2, 9), F(2, 3))
    assert (r.N_hc, r.N_li) == (27, 84)
    r = rows[(3, 2, 2)]
    assert (r.L_hc, r.L_opt) == (F(20, 27), F(8, 15))
    # unicast to both reducers: 2 * (1 - 2/6)
    assert r.L_uncoded == F(4, 3)
    assert (r.N_hc, r.Q_hc, r.N_li, r.Q_li) == (9, 9, 15, 15)


def test_sweep_order_and_sandwich():
    rows = sweep(range(2, 11), range(2, 8))
    keys = [(r.x, r.d, r.s) for r in rows]
    assert keys == sorted(keys)
    assert all(r.sandwiched() for r in rows)


def test_sweep_deterministic():
    assert sweep([2, 5], [3, 2]) == sweep([5, 2], [2, 3])


def test_formatting():
    assert frac(F(20, 27)) == "20/27"
    assert frac(F(3)) == "3"
    assert dec(F(20, 27)) == "0.740741"
    doc = row_json(sweep_row(3, 2, SMode.SD))
    assert doc["L_hc"] == {"fraction": "20/27", "decimal": "0.740741"}
    assert CSV_HEADER == ("x", "d", "s", "r_hc", "L_hc", "L_opt", "L_uncoded", "N_hc", "N_li", "Q_hc", "Q_li")


def test_loads_bounded():
    for x in range(2, 8):
        for d in range(2, 6):
            for r, L in (theorem1(x, d), theorem2(x, d)):
                assert 0 < L <= 1
                assert 1 <= r <= d
