"""End-to-end runs: map, shuffle, reduce, and comparison with the central oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

from . import shuffle as _shuffle
from .analysis import Loads, exact, theory
from .design import Placement, build_placement
from .errors import ConfigError
from .lattice import HypercubeParams, SMode
from .mapper import IVStore, MapFunction, MapPolicy, expand_file, run_map
from .reducer import OracleTable, reduce_node


@dataclass
class SimulationResult:
    params: HypercubeParams
    policy: MapPolicy
    seed: int
    r: Fraction
    L: Fraction
    theory: Loads
    retries: int
    log: _shuffle.TransmissionLog
    report: _shuffle.DeliveryReport
    digests: list[dict[int, bytes]]
    oracle_digests: list[bytes]
    fault: Optional[tuple[int, tuple[int, int]]] = None
    digest_mismatches: list[tuple[int, int]] = field(default_factory=list)
    # values handed over by the shuffle vs. values reducers lacked after map
    deliveries: int = 0
    needed: int = 0

    @property
    def r_match(self) -> bool:
        return self.r == self.theory.r

    @property
    def L_match(self) -> bool:
        return self.L == self.theory.L

    @property
    def messages(self) -> int:
        return len(self.log.messages)

    @property
    def verified(self) -> bool:
        return self.report.ok and not self.digest_mismatches

    @property
    def ok(self) -> bool:
        return self.verified and self.r_match and self.L_match

    def to_json(self, transmissions: bool = True) -> dict[str, Any]:
        p = self.params
        out: dict[str, Any] = {
            "config": {
                "x": p.x,
                "d": p.d,
                "eta1": p.eta1,
                "eta2": p.eta2,
                "s": p.s_mode.value,
                "policy": self.policy.value,
                "T_bytes": p.T_bytes,
                "seed": self.seed,
            },
            "K": p.K,
            "N": p.N,
            "Q": p.Q,
            "r": exact(self.r),
            "L": exact(self.L),
            "theory": {"r": exact(self.theory.r), "L": exact(self.theory.L)},
            "r_match": self.r_match,
            "L_match": self.L_match,
            "messages": self.messages,
            "bits": self.log.total_bits,
            "retries": self.retries,
            "deliveries": self.deliveries,
            "needed": self.needed,
            "verification": {
                "verified": self.verified,
                "complete": [str(self.report.completeness(k)) for k in range(p.K)],
                "mismatches": self.report.mismatches,
                "mismatched": [[k, list(key)] for k, key in self.report.mismatched],
                "digest_mismatches": [list(m) for m in self.digest_mismatches],
            },
            "digests": {
                str(k): {str(i): v.hex() for i, v in sorted(dk.items())} for k, dk in enumerate(self.digests)
            },
        }
        if self.fault is not None:
            out["fault"] = {"node": self.fault[0], "key": list(self.fault[1])}
        if transmissions:
            out["transmissions"] = self.log.records()
        return out


def theory_for(params: HypercubeParams, policy: MapPolicy) -> Loads:
    return theory(params.x, params.d, params.s_mode, MapPolicy(policy) is MapPolicy.ALL)


def _run(
    placement: Placement,
    policy: MapPolicy,
    seed: int,
    mapfn: MapFunction,
    oracle: OracleTable,
    local_files=None,
    fault: bool = False,
) -> SimulationResult:
    p = placement.params
    stores: IVStore = run_map(placement, policy, mapfn, local_files)
    res = _shuffle.shuffle(placement, stores, seed, oracle)
    injected = _shuffle.inject_fault(res.delivered) if fault else None
    report = _shuffle.verify_delivery(placement, stores, res.delivered, oracle)
    ref = oracle.digests()
    digests, bad = [], []
    needed = 0
    for k in range(p.K):
        dk = reduce_node(placement, stores, res.delivered, k)
        bad.extend((k, i) for i, v in dk.items() if v != ref[i])
        digests.append(dk)
        local = stores.per_node[k]
        needed += sum((i, j) not in local for i in placement.functions_of_node[k] for j in range(p.N))
    return SimulationResult(
        params=p,
        policy=policy,
        seed=seed,
        r=Fraction(stores.computations, p.Q * p.N),
        L=res.log.load(placement),
        theory=theory_for(p, policy),
        retries=res.retries,
        log=res.log,
        report=report,
        digests=digests,
        oracle_digests=ref,
        fault=injected,
        digest_mismatches=bad,
        deliveries=res.deliveries,
        needed=needed,
    )


def simulate(
    params: HypercubeParams,
    policy: MapPolicy = MapPolicy.NECESSARY,
    seed: int = 0,
    *,
    inject_fault: bool = False,
) -> SimulationResult:
    """One full Map-Shuffle-Reduce round on synthetic files."""
    policy = MapPolicy(policy)
    placement = build_placement(params)
    mapfn = MapFunction(seed, params.T_bytes)
    return _run(placement, policy, seed, mapfn, OracleTable(params, mapfn), fault=inject_fault)


def chain_round(
    params: HypercubeParams,
    seed: Union[int, Sequence[int]],
    rounds: int = 1,
    policy: MapPolicy = MapPolicy.NECESSARY,
) -> list[SimulationResult]:
    """Run ``rounds`` rounds where each round's outputs become the next round's files.

    The file at index ``j`` in round ``t+1`` is grown from the digest of
    function ``j`` in round ``t``.  Every node builds its next-round files
    from its own reduce outputs, and a central oracle chains alongside.
    ``seed`` is either one seed for all rounds or one per round.
    """
    if params.s_mode is not SMode.SD:
        raise ConfigError("chaining needs s=d")
    if params.eta1 != params.eta2:
        raise ConfigError(f"chaining needs eta1 == eta2 so that Q == N; got {params.eta1}, {params.eta2}")
    if rounds < 1:
        raise ConfigError(f"rounds must be >= 1; got {rounds}")
    seeds = [seed] * rounds if isinstance(seed, int) else list(seed)
    if len(seeds) != rounds:
        raise ConfigError(f"got {len(seeds)} seeds for {rounds} rounds")
    policy = MapPolicy(policy)

    placement = build_placement(params)
    results: list[SimulationResult] = []
    local_files = None
    blobs = None
    for t, s in enumerate(seeds):
        mapfn = MapFunction(s, params.T_bytes)
        oracle = OracleTable(params, mapfn, blobs)
        res = _run(placement, policy, s, mapfn, oracle, local_files)
        results.append(res)
        if t + 1 == rounds:
            break
        nxt = seeds[t + 1]
        T = params.T_bytes
        local_files = []
        for k in range(params.K):
            own = res.digests[k]
            # a node stores file j exactly when it reduces function j
            local_files.append({j: expand_file(nxt, j, own[j], T) for j in sorted(placement.files_of_node[k])})
        blobs = [expand_file(nxt, j, res.oracle_digests[j], T) for j in range(params.N)]
    return results


__all__ = ["SimulationResult", "simulate", "chain_round", "theory_for"]
