import pytest

from hypercube_cdc.design import build_placement, build_placement_s1, build_placement_sd, min_requirements
from hypercube_cdc.errors import ConfigError
from hypercube_cdc.lattice import HypercubeParams, SMode, binom

GRID = [(x, d, e1, e2) for x in (2, 3, 4) for d in (2, 3) for e1 in (1, 2) for e2 in (1, 2)]


def test_cube_node_file_set():
    pl = build_placement_s1(HypercubeParams(3, 3))
    assert (pl.params.K, pl.params.N, pl.params.Q) == (9, 27, 9)
    files = pl.files_of_node[4]
    assert len(files) == 9
    assert all(pl.params.points[j][1] == 1 for j in files)


def test_small_s1():
    pl = build_placement_s1(HypercubeParams(2, 2))
    for j in range(4):
        assert sum(j in m for m in pl.files_of_node) == 2


def test_sd_reducers():
    pl = build_placement_sd(HypercubeParams(3, 2, s_mode=SMode.SD))
    assert pl.params.N == pl.params.Q == 9
    assert set(pl.reducers_of_function[0]) == {0, 3}
    pl2 = build_placement_sd(HypercubeParams(2, 2, s_mode=SMode.SD))
    assert all(len(r) == 2 for r in pl2.reducers_of_function)


def test_wrong_mode():
    with pytest.raises(ValueError):
        build_placement_sd(HypercubeParams(2, 2))
    with pytest.raises(ValueError):
        build_placement_s1(HypercubeParams(2, 2, s_mode=SMode.SD))


@pytest.mark.parametrize("x,d,e1,e2", GRID)
@pytest.mark.parametrize("mode", list(SMode))
def test_invariants(x, d, e1, e2, mode):
    p = HypercubeParams(x, d, e1, e2, mode)
    pl = build_placement(p)
    assert all(len(m) == e1 * x ** (d - 1) for m in pl.files_of_node)
    assert sum(len(m) for m in pl.files_of_node) == d * p.N
    for j in range(p.N):
        pt = p.points[p.file_point(j)]
        for k in range(p.K):
            dim, coord = p.node(k)
            assert (j in pl.files_of_node[k]) == (pt[dim] == coord)
    if mode is SMode.S1:
        ids = sorted(i for w in pl.functions_of_node for i in w)
        assert ids == list(range(p.Q))
        assert all(len(w) == e2 for w in pl.functions_of_node)
    else:
        assert sum(len(w) for w in pl.functions_of_node) == d * p.Q
        for i in range(p.Q):
            assert set(pl.reducers_of_function[i]) == set(pl.nodes_of_batch[pl.function_point(i)])
    assert all(len(r) == pl.s for r in pl.reducers_of_function)


def test_to_json_shape():
    doc = build_placement(HypercubeParams(2, 2)).to_json()
    assert set(doc) >= {"nodes", "batches", "reducers"}
    assert len(doc["batches"]) == 4


def test_min_requirements():
    r = min_requirements(9, 3, 1)
    assert (r.N_hc, r.N_li) == (27, 84)
    r = min_requirements(6, 2, 2)
    assert (r.N_hc, r.Q_hc, r.N_li, r.Q_li) == (9, 9, 15, 15)
    r = min_requirements(4, 2, 1)
    assert (r.N_hc, r.N_li) == (4, 6)


def test_min_requirements_errors():
    with pytest.raises(ConfigError):
        min_requirements(9, 2, 1)
    with pytest.raises(ConfigError):
        min_requirements(9, 3, 2)


def test_requirements_never_worse():
    for K in range(2, 25):
        for r in range(2, K + 1):
            if K % r or K // r < 2:
                continue
            req = min_requirements(K, r, 1)
            assert req.N_hc <= req.N_li
            if r >= 3 or K // r >= 3:
                assert req.N_hc < req.N_li
            assert req.N_li == binom(K, r)
