import json
from fractions import Fraction

import pytest

from hypercube_cdc.design import build_placement
from hypercube_cdc.errors import MissingIVError, SingularMatrixError
from hypercube_cdc.lattice import HypercubeParams, SMode, binom, gamma, point_to_index
from hypercube_cdc.mapper import MapFunction, MapPolicy, run_map
from hypercube_cdc.reducer import OracleTable
from hypercube_cdc.shuffle import (
    GroupCode,
    GroupDescriptor,
    Multicast,
    RoundTag,
    TransmissionLog,
    coded_groups,
    draw_group_code,
    inject_fault,
    shuffle,
    shuffle_s1,
    shuffle_sd,
    verify_delivery,
)


def run(params, policy=MapPolicy.NECESSARY, seed=0):
    pl = build_placement(params)
    fn = MapFunction(seed, params.T_bytes)
    oracle = OracleTable(params, fn)
    stores = run_map(pl, policy, fn)
    return pl, stores, oracle, shuffle(pl, stores, seed, oracle)


def test_s1_cube_example():
    pl, stores, oracle, res = run(HypercubeParams(3, 3))
    assert res.log.load(pl) == Fraction(1, 3)
    for k in range(9):
        sent = res.log.sent_by(k)
        assert len(sent) == 9
        # each message is the size of one intermediate value
        assert all(m.payload_bits == pl.params.T_bits for m in sent)
    assert verify_delivery(pl, stores, res.delivered, oracle).ok


def test_s1_small():
    pl, stores, oracle, res = run(HypercubeParams(2, 2))
    assert res.log.load(pl) == Fraction(1, 2)


def test_degenerate_x1():
    pl, stores, oracle, res = run(HypercubeParams(1, 3))
    assert res.log.total_bits == 0
    assert verify_delivery(pl, stores, res.delivered, oracle).ok


def test_sd_plane_example():
    p = HypercubeParams(3, 2, s_mode=SMode.SD)
    pl, stores, oracle, res = run(p)
    assert res.log.load(pl) == Fraction(20, 27)
    coded = [m for m in res.log.messages if m.round.kind == "gamma_ge2"]
    # each sender emits 2 combinations of 1-byte packets (T = 3 split in 3)
    assert all(len(m.payload) == 2 for m in coded)
    assert len(coded) == 4 * 9


def test_sd_example_group():
    desc = GroupDescriptor(dims=(0, 1), pairs=((1, 2), (1, 2)), fixed=())
    assert set(desc.nodes(3)) == {1, 2, 4, 5}
    pts = {point_to_index(desc.point(b, 2), 3) for b in range(4)}
    assert pts == {4, 5, 7, 8}
    # value pairs are antipodal, so function and file point differ in both dims
    for b in range(4):
        assert gamma(desc.point(b, 2), desc.point(b ^ 3, 2)) == 2


def test_sd_small():
    pl, stores, oracle, res = run(HypercubeParams(2, 2, s_mode=SMode.SD))
    assert res.log.load(pl) == Fraction(2, 3)


def test_group_counts():
    for x, d in [(2, 2), (3, 2), (3, 3), (4, 3)]:
        for g in range(2, d + 1):
            assert len(list(coded_groups(x, d, g))) == binom(d, g) * binom(x, 2) ** g * x ** (d - g)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_group_code_structure(g):
    code, retries = draw_group_code(g, seed=0)
    P, c = 2 * g - 1, 2 ** (g - 1)
    assert code.packets == P and code.combos == c
    for rho in range(2 * g):
        known, wanted = set(code.known[rho]), set(code.wanted[rho])
        assert known.isdisjoint(wanted)
        assert known | wanted == set(range(2**g))
        assert len(known) * P == c * P
        # square system: (2g-1) senders times c combos each
        assert code.decode[rho].rows == code.decode[rho].cols == c * P


def test_group_code_retry_budget(monkeypatch):
    def always_singular(cls, gamma, seed, attempt):
        raise SingularMatrixError("forced")

    monkeypatch.setattr(GroupCode, "draw", classmethod(always_singular))
    with pytest.raises(SingularMatrixError):
        draw_group_code(2, 0, budget=3)


def test_retry_counted(monkeypatch):
    real = GroupCode.draw.__func__

    def flaky(cls, gamma, seed, attempt):
        if attempt < 2:
            raise SingularMatrixError("forced")
        return real(cls, gamma, seed, attempt)

    monkeypatch.setattr(GroupCode, "draw", classmethod(flaky))
    p = HypercubeParams(3, 2, s_mode=SMode.SD)
    pl, stores, oracle, res = run(p)
    assert res.retries == 2
    # coefficients are metadata, so retries do not change the load
    assert res.log.load(pl) == Fraction(20, 27)
    assert verify_delivery(pl, stores, res.delivered, oracle).ok


def test_no_gamma0_traffic():
    p = HypercubeParams(3, 3, 1, 1, SMode.SD)
    pl, stores, oracle, res = run(p)
    for k, inbox in enumerate(res.delivered):
        for i, j in inbox:
            assert pl.function_point(i) != p.file_point(j)


@pytest.mark.parametrize("x,d,e1,e2", [(2, 2, 1, 1), (3, 2, 2, 1), (2, 3, 1, 2), (3, 3, 2, 2), (4, 2, 2, 2)])
@pytest.mark.parametrize("mode", list(SMode))
def test_delivery_exactly_once(x, d, e1, e2, mode):
    p = HypercubeParams(x, d, e1, e2, mode)
    pl, stores, oracle, res = run(p)
    needed = 0
    for k in range(p.K):
        inbox = res.delivered[k]
        for i in pl.functions_of_node[k]:
            for j in range(p.N):
                local = (i, j) in stores.per_node[k]
                # delivered values are exactly the ones a reducer lacks
                assert ((i, j) in inbox) != local
                needed += not local
    assert res.deliveries == needed
    assert verify_delivery(pl, stores, res.delivered, oracle).ok


@pytest.mark.parametrize("mode", list(SMode))
def test_payload_sizes_equal_within_group(mode):
    pl, stores, oracle, res = run(HypercubeParams(3, 3, 2, 1, mode))
    sizes = {}
    for m in res.log.messages:
        sizes.setdefault((m.round, m.group), set()).add(len(m.payload))
    assert all(len(s) == 1 for s in sizes.values())


def test_missing_iv_detected():
    p = HypercubeParams(3, 3)
    pl = build_placement(p)
    fn = MapFunction(0, p.T_bytes)
    stores = run_map(pl, MapPolicy.NECESSARY, fn)
    # drop a value node 0 only computes for someone else's multicast
    victim = min(key for key in stores.per_node[0] if key[0] not in pl.functions_of_node[0])
    del stores.per_node[0][victim]
    with pytest.raises(MissingIVError):
        shuffle_s1(pl, stores)


def test_fault_injection_detected():
    pl, stores, oracle, res = run(HypercubeParams(3, 2, s_mode=SMode.SD))
    where = inject_fault(res.delivered)
    rep = verify_delivery(pl, stores, res.delivered, oracle)
    assert rep.mismatches == 1 and rep.mismatched == [where]
    assert not rep.ok


def test_log_rejects_outsider():
    log = TransmissionLog()
    with pytest.raises(ValueError):
        log.append(Multicast(5, (0, 1), RoundTag("s1", point=0), b"x"))


def test_jsonl_export():
    pl, stores, oracle, res = run(HypercubeParams(2, 2))
    lines = res.log.to_jsonl().splitlines()
    assert len(lines) == len(res.log.messages)
    rec = json.loads(lines[0])
    assert set(rec) == {"round", "sender", "group", "bits"}


def test_mode_guards():
    p1 = HypercubeParams(2, 2)
    pl = build_placement(p1)
    stores = run_map(pl, MapPolicy.ALL, MapFunction(0, 3))
    with pytest.raises(ValueError):
        shuffle_sd(pl, stores)


def test_reproducible_log():
    a = run(HypercubeParams(2, 3, s_mode=SMode.SD), seed=4)[3]
    b = run(HypercubeParams(2, 3, s_mode=SMode.SD), seed=4)[3]
    assert [m.payload for m in a.log.messages] == [m.payload for m in b.log.messages]
