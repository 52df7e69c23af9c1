"""Desk-scale invariant suite behind ``hypercube-cdc verify``.

Each check returns ``(passed, detail)``.  The default grid is small enough to
finish well under a minute on one core.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from . import gf256
from .analysis import optimal_cascaded, ratio_s1, ratio_s2, sweep, theorem1, theorem2, corollary1, uncoded
from .design import build_placement, min_requirements
from .lattice import HypercubeParams, SMode, binom, index_to_point, nodes_through_point, point_to_index
from .mapper import MapPolicy
from .pipeline import chain_round, simulate
from .reducer import oracle_run

DEFAULT_GRID = tuple(itertools.product((2, 3, 4), (2, 3)))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": round(self.seconds, 3)}


def grid_params(grid: Iterable[tuple[int, int]] = DEFAULT_GRID, etas=(1, 2)) -> list[HypercubeParams]:
    out = []
    for x, d in grid:
        for e1, e2 in itertools.product(etas, repeat=2):
            for mode in SMode:
                out.append(HypercubeParams(x, d, e1, e2, mode))
    return out


def _lattice(grid):
    for x, d in grid:
        for n in range(x**d):
            pt = index_to_point(n, x, d)
            if point_to_index(pt, x) != n:
                return False, f"index round trip broken at x={x}, d={d}, n={n}"
            t = nodes_through_point(pt, x)
            if len(t) != d or len({k // x for k in t}) != d:
                return False, f"T-set of {pt} is {t}"
    for x in range(1, 7):
        for d in range(1, 7):
            total = sum(binom(d, g) * (x * (x - 1)) ** g * x ** (d - g) for g in range(d + 1))
            if total != x ** (2 * d):
                return False, f"gamma partition fails at x={x}, d={d}"
    return True, f"{len(grid)} lattices, partition identity for x,d <= 6"


def _design(grid):
    for p in grid_params(grid):
        pl = build_placement(p)
        want = p.eta1 * p.x ** (p.d - 1)
        if any(len(m) != want for m in pl.files_of_node):
            return False, f"|M_k| != {want} for {p}"
        if any(len(pl.nodes_of_batch[p.file_point(j)]) != p.d for j in range(p.N)):
            return False, f"file replication != d for {p}"
        if any(len(r) != p.s for r in pl.reducers_of_function):
            return False, f"reducers per function != s for {p}"
        if p.s_mode is SMode.S1 and sorted(i for w in pl.functions_of_node for i in w) != list(range(p.Q)):
            return False, f"S1 functions are not a partition for {p}"
    return True, "storage, replication and reducer counts"


def _gf(seed):
    for a in range(1, 256):
        if gf256.mul(a, gf256.inv(a)) != 1:
            return False, f"inverse of {a}"
    m = gf256.random_matrix(6, 6, seed, 99)
    b = gf256.random_matrix(6, 5, seed, 98)
    try:
        xs = gf256.solve(m, b)
    except Exception:  # a singular draw is fine, fall back to identity
        m, xs = gf256.FieldMatrix.identity(6), b
    if m @ xs != b:
        return False, "solve round trip"
    saved = gf256.BACKEND
    results = []
    try:
        for name in gf256.available_backends():
            gf256.set_backend(name)
            results.append((m @ b if m.cols == b.rows else None, gf256.rank(m)))
    finally:
        gf256.set_backend(saved)
    if any(r != results[0] for r in results):
        return False, "backends disagree"
    return True, f"backends {gf256.available_backends()} agree"


def _simulations(grid, seed):
    n = 0
    for p in grid_params(grid):
        for pol in MapPolicy:
            res = simulate(p, pol, seed)
            n += 1
            if not res.ok:
                return False, f"{p} {pol.value}: r={res.r} vs {res.theory.r}, L={res.L} vs {res.theory.L}, verified={res.verified}"
            if res.retries > 16:
                return False, f"{res.retries} retries for {p}"
            sizes: dict = {}
            for m in res.log.messages:
                sizes.setdefault((m.round, m.group), set()).add(len(m.payload))
            if any(len(v) != 1 for v in sizes.values()):
                return False, f"unequal payload sizes within a group for {p}"
    return True, f"{n} runs: exact r and L, all digests match the oracle"


def _fault(seed):
    res = simulate(HypercubeParams(3, 3), MapPolicy.NECESSARY, seed, inject_fault=True)
    rep = res.report
    if rep.mismatches != 1 or rep.mismatched != [res.fault]:
        return False, f"expected exactly {res.fault}, got {rep.mismatched}"
    return True, f"injected {res.fault} and detected exactly that"


def _oracle(seed):
    a = oracle_run(HypercubeParams(2, 2), seed)
    b = oracle_run(HypercubeParams(2, 2, s_mode=SMode.SD), seed)
    if a != b:
        return False, "S1 and SD oracles differ for equal Q, N"
    return True, "oracle ignores placement"


def _chain(seed):
    rounds = chain_round(HypercubeParams(3, 2, s_mode=SMode.SD), seed, 3)
    t = theorem2(3, 2)
    for i, r in enumerate(rounds):
        if not r.verified or (r.r, r.L) != t:
            return False, f"round {i}: verified={r.verified}, r={r.r}, L={r.L}"
    return True, "3 chained rounds verified at the closed-form loads"


def _analysis():
    if optimal_cascaded(6, 2, 2) != Fraction(8, 15) or optimal_cascaded(9, 3, 1) != Fraction(2, 9):
        return False, "cascaded anchors"
    if theorem1(3, 3) != (Fraction(5, 3), Fraction(1, 3)) or theorem2(3, 2) != (Fraction(14, 9), Fraction(20, 27)):
        return False, "closed-form anchors"
    if uncoded(9, 3) != Fraction(2, 3):
        return False, "uncoded anchor"
    for x in range(2, 7):
        for d in range(2, 7):
            corollary1(x, d)
            if ratio_s1(x, d) != Fraction(d, d - 1):
                return False, f"s=1 ratio at x={x}, d={d}"
    ratios = [ratio_s2(x) for x in range(3, 51)]
    if any(b >= a for a, b in zip(ratios, ratios[1:])) or ratios[-1] >= Fraction(105, 100):
        return False, "s=2 ratio not decreasing to below 1.05"
    rows = sweep(range(2, 9), range(2, 7))
    bad = [(r.x, r.d, r.s) for r in rows if not r.sandwiched()]
    if bad:
        return False, f"sandwich fails at {bad}"
    if min_requirements(9, 3, 1)[::2] != (27, 84):
        return False, "requirements anchor"
    return True, f"anchors, ratios, sandwich on {len(rows)} rows"


def _determinism(seed):
    p = HypercubeParams(2, 3, s_mode=SMode.SD)
    a = json.dumps(simulate(p, MapPolicy.NECESSARY, seed).to_json(), sort_keys=True)
    b = json.dumps(simulate(p, MapPolicy.NECESSARY, seed).to_json(), sort_keys=True)
    if a != b:
        return False, "reports differ"
    return True, "identical reports"


def _seeds(seed):
    for s in range(seed, seed + 5):
        for p in (HypercubeParams(3, 2, s_mode=SMode.SD), HypercubeParams(2, 3, 2, 1, SMode.SD)):
            if not simulate(p, MapPolicy.NECESSARY, s).ok:
                return False, f"seed {s} fails on {p}"
    return True, "5 seeds pass"


def run_suite(seed: int = 0, grid: Iterable[tuple[int, int]] = DEFAULT_GRID, inject_fault: bool = False) -> list[CheckResult]:
    grid = tuple(grid)
    checks: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
        ("lattice", lambda: _lattice(grid)),
        ("design", lambda: _design(grid)),
        ("gf256", lambda: _gf(seed)),
        ("analysis", _analysis),
        ("simulation grid", lambda: _simulations(grid, seed)),
        ("oracle independence", lambda: _oracle(seed)),
        ("chained rounds", lambda: _chain(seed)),
        ("determinism", lambda: _determinism(seed)),
        ("seed sweep", lambda: _seeds(seed)),
    ]
    if inject_fault:
        checks.append(("fault injection", lambda: _fault(seed)))
    out = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, ok, detail, time.perf_counter() - t0))
    return out
