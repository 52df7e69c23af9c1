"""Shuffle phase: XOR multicasts and random-linear-combination exchanges.

Every transmission is appended to a :class:`TransmissionLog`; the measured
communication load is its bit total divided by ``Q*N*T``.  Receivers decode
from their own map outputs only, so a missing operand surfaces as
:class:`MissingIVError` rather than being hidden.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import gf256
from .design import Placement
from .errors import DecodeMismatchError, DuplicateDeliveryError, MissingIVError, SingularMatrixError
from .gf256 import FieldMatrix
from .lattice import SMode, point_to_index
from .mapper import IVKey, IVStore

RETRY_BUDGET = 16

Oracle = Callable[[int, int], bytes]


@dataclass(frozen=True)
class GroupDescriptor:
    """A 2*gamma node group: two nodes on each of ``gamma`` dimensions.

    ``pairs[t] = (a, b)`` with ``a < b`` are the two coordinates used along
    ``dims[t]``; ``fixed`` pins every other dimension.
    """

    dims: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    fixed: tuple[tuple[int, int], ...]

    @property
    def gamma(self) -> int:
        return len(self.dims)

    def nodes(self, x: int) -> tuple[int, ...]:
        # role 2t+e is node (dims[t], pairs[t][e]); this is also flat-id order
        return tuple(m * x + pair[e] for m, pair in zip(self.dims, self.pairs) for e in (0, 1))

    def point(self, bits: int, d: int) -> tuple[int, ...]:
        coords = [0] * d
        for t, m in enumerate(self.dims):
            coords[m] = self.pairs[t][(bits >> t) & 1]
        for m, c in self.fixed:
            coords[m] = c
        return tuple(coords)

    def to_json(self) -> dict[str, Any]:
        return {
            "dims": list(self.dims),
            "pairs": [list(p) for p in self.pairs],
            "fixed": {str(m): c for m, c in self.fixed},
        }


def coded_groups(x: int, d: int, gamma: int):
    """All group descriptors for one gamma, in canonical order."""
    for dims in itertools.combinations(range(d), gamma):
        rest = [m for m in range(d) if m not in dims]
        for pairs in itertools.product(itertools.combinations(range(x), 2), repeat=gamma):
            for coords in itertools.product(range(x), repeat=len(rest)):
                yield GroupDescriptor(dims, pairs, tuple(zip(rest, coords)))


@dataclass(frozen=True)
class RoundTag:
    kind: str  # "s1", "gamma1" or "gamma_ge2"
    point: Optional[int] = None
    group: Optional[GroupDescriptor] = None

    def to_json(self) -> dict[str, Any]:
        if self.group is not None:
            return {"kind": self.kind, "gamma": self.group.gamma, **self.group.to_json()}
        return {"kind": self.kind, "point": self.point}


@dataclass(frozen=True)
class Multicast:
    sender: int
    group: tuple[int, ...]
    round: RoundTag
    payload: bytes

    @property
    def payload_bits(self) -> int:
        return 8 * len(self.payload)

    def record(self) -> dict[str, Any]:
        return {
            "round": self.round.to_json(),
            "sender": self.sender,
            "group": list(self.group),
            "bits": self.payload_bits,
        }


@dataclass
class TransmissionLog:
    messages: list[Multicast] = field(default_factory=list)

    def append(self, msg: Multicast) -> None:
        if msg.sender not in msg.group:
            raise ValueError(f"sender {msg.sender} is not a member of group {msg.group}")
        self.messages.append(msg)

    @property
    def total_bits(self) -> int:
        return sum(m.payload_bits for m in self.messages)

    def load(self, placement: Placement) -> Fraction:
        p = placement.params
        return Fraction(self.total_bits, p.Q * p.N * p.T_bits)

    def records(self) -> list[dict[str, Any]]:
        return [m.record() for m in self.messages]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def sent_by(self, k: int) -> list[Multicast]:
        return [m for m in self.messages if m.sender == k]


@dataclass
class ShuffleResult:
    log: TransmissionLog
    delivered: list[dict[IVKey, bytes]]
    retries: int = 0

    @property
    def deliveries(self) -> int:
        return sum(len(d) for d in self.delivered)


class _Exchange:
    """Shared state for one shuffle run: stores, log, delivery bookkeeping."""

    def __init__(self, placement: Placement, stores: IVStore, oracle: Optional[Oracle]):
        self.placement = placement
        self.params = placement.params
        self.stores = stores.per_node
        self.oracle = oracle
        self.log = TransmissionLog()
        self.delivered: list[dict[IVKey, bytes]] = [{} for _ in range(self.params.K)]

    def value(self, k: int, key: IVKey) -> bytes:
        try:
            return self.stores[k][key]
        except KeyError:
            raise MissingIVError(k, key) from None

    def deliver(self, k: int, key: IVKey, payload: bytes) -> None:
        inbox = self.delivered[k]
        if key in inbox:
            raise DuplicateDeliveryError(f"node {k} received v[{key[0]},{key[1]}] twice")
        if self.oracle is not None and payload != self.oracle(*key):
            raise DecodeMismatchError(f"node {k} decoded a wrong v[{key[0]},{key[1]}]")
        inbox[key] = payload

    def stream(self, k: int, keys: Sequence[IVKey], idx: int, size: int) -> int:
        """Packet ``idx`` of each listed value, concatenated, as an integer."""
        lo, hi = idx * size, (idx + 1) * size
        return int.from_bytes(b"".join(self.value(k, key)[lo:hi] for key in keys), "little")

    def xor_multicast(self, group: tuple[int, ...], requests: dict[int, list[IVKey]], tag: RoundTag) -> None:
        """Each node of ``group`` sends one XOR of the packets it owes the others.

        ``requests[z]`` lists what ``z`` alone needs and the rest of the group
        holds.  Each value is cut into ``len(group)-1`` packets; packet ``l``
        of a value for ``z`` is carried by the ``l``-th other node.
        """
        count = len(requests[group[0]])
        if count == 0:
            return
        if any(len(requests[z]) != count for z in group):
            raise ValueError("unequal request lists inside one multicast group")
        parts = len(group) - 1
        size = self.params.T_bytes // parts
        others = {z: [k for k in group if k != z] for z in group}
        owner = {z: {k: idx for idx, k in enumerate(others[z])} for z in group}
        width = count * size

        sent = {}
        for k in group:
            acc = 0
            for z in others[k]:
                acc ^= self.stream(k, requests[z], owner[z][k], size)
            payload = acc.to_bytes(width, "little")
            self.log.append(Multicast(k, group, tag, payload))
            sent[k] = payload

        for z in group:
            pieces: list[bytes] = [b""] * parts
            for k in others[z]:
                acc = int.from_bytes(sent[k], "little")
                for z2 in others[k]:
                    if z2 != z:
                        acc ^= self.stream(z, requests[z2], owner[z2][k], size)
                pieces[owner[z][k]] = acc.to_bytes(width, "little")
            for v, key in enumerate(requests[z]):
                lo = v * size
                self.deliver(z, key, b"".join(piece[lo:lo + size] for piece in pieces))


def _aligned_points(params, n: int, m: int) -> list[int]:
    """Lattice points differing from ``n`` only in dimension ``m``."""
    c = params.points[n][m]
    stride = params.x**m
    return [n + (c2 - c) * stride for c2 in range(params.x) if c2 != c]


def shuffle_s1(placement: Placement, stores: IVStore, oracle: Optional[Oracle] = None) -> ShuffleResult:
    """One XOR multicast round per lattice point.

    In the group through point ``n``, node ``z`` receives its functions' values
    for the files on the ``x-1`` points that differ from ``n`` only along
    ``z``'s own dimension.
    """
    p = placement.params
    if p.s_mode is not SMode.S1:
        raise ValueError("shuffle_s1 needs an S1 placement")
    ex = _Exchange(placement, stores, oracle)
    for n in range(p.num_points):
        group = placement.nodes_of_batch[n]
        requests = {}
        for z in group:
            m = z // p.x
            files = [j for q in _aligned_points(p, n, m) for j in p.files_at(q)]
            requests[z] = sorted((i, j) for i in placement.functions_of_node[z] for j in files)
        ex.xor_multicast(group, requests, RoundTag("s1", point=n))
    return ShuffleResult(ex.log, ex.delivered)


@dataclass
class GroupCode:
    """Coefficients and per-receiver decoders shared by every group of one gamma.

    All groups with the same gamma are isomorphic under the role labelling of
    :class:`GroupDescriptor`, so one draw serves them all.  Role ``2t+e``
    knows the values whose bit ``t`` differs from ``e`` and wants the others.
    Receiver ``r`` sees ``decode[r]**-1 @ u = y - cancel[r] @ known`` where
    ``u`` are its wanted packets and ``y`` the stacked combinations of the
    other members.
    """

    gamma: int
    attempt: int
    coeffs: list[FieldMatrix]
    known: list[list[int]]
    wanted: list[list[int]]
    cancel: list[FieldMatrix]
    decode: list[FieldMatrix]
    solver: list[FieldMatrix] = field(init=False, repr=False)

    def __post_init__(self):
        # received combinations stacked over own packet rows -> wanted packets
        self.solver = [
            _hstack(dec, dec @ can) for dec, can in zip(self.decode, self.cancel)
        ]

    @property
    def packets(self) -> int:
        return 2 * self.gamma - 1

    @property
    def combos(self) -> int:
        return 2 ** (self.gamma - 1)

    @classmethod
    def draw(cls, gamma: int, seed: int, attempt: int) -> "GroupCode":
        P = 2 * gamma - 1
        c = 2 ** (gamma - 1)
        n = c * P
        roles = range(2 * gamma)
        known, wanted = [], []
        for rho in roles:
            t, e = divmod(rho, 2)
            known.append([b for b in range(2**gamma) if (b >> t) & 1 != e])
            wanted.append([b for b in range(2**gamma) if (b >> t) & 1 == e])
        coeffs = [gf256.random_matrix(c, n, seed, gamma, attempt, rho) for rho in roles]
        columns = [[(b, l) for b in known[rho] for l in range(P)] for rho in roles]

        cancel, decode = [], []
        for r in roles:
            unknown_at = {bl: i for i, bl in enumerate((b, l) for b in wanted[r] for l in range(P))}
            known_at = {bl: i for i, bl in enumerate(columns[r])}
            a_rows, m_rows = [], []
            for s in roles:
                if s == r:
                    continue
                for row in range(c):
                    a_row, m_row = bytearray(n), bytearray(n)
                    for col, bl in enumerate(columns[s]):
                        v = coeffs[s][row, col]
                        if bl in unknown_at:
                            a_row[unknown_at[bl]] = v
                        else:
                            m_row[known_at[bl]] = v
                    a_rows.append(a_row)
                    m_rows.append(m_row)
            cancel.append(FieldMatrix.from_rows(m_rows, n))
            decode.append(gf256.inverse(FieldMatrix.from_rows(a_rows, n)))
        return cls(gamma, attempt, coeffs, known, wanted, cancel, decode)


def _hstack(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    return FieldMatrix.from_rows([a.row(i) + b.row(i) for i in range(a.rows)], a.cols + b.cols)


def draw_group_code(gamma: int, seed: int, budget: int = RETRY_BUDGET) -> tuple[GroupCode, int]:
    """First decodable coefficient draw and the number of singular re-draws."""
    for attempt in range(budget + 1):
        try:
            return GroupCode.draw(gamma, seed, attempt), attempt
        except SingularMatrixError:
            continue
    raise SingularMatrixError(f"gamma={gamma}: no decodable coefficients after {budget} retries")


def _coded_class(ex: _Exchange, descs: Sequence[GroupDescriptor], code: GroupCode) -> None:
    """Run every group of one gamma at once.

    The coefficients are shared by all groups and by every (function offset,
    file offset) slot, so the packet matrices of all groups and slots sit side
    by side as column blocks and each role needs one encode and one decode
    product.  Rows are (value, packet) pairs in the role's known or wanted
    order; columns are (group, slot, byte within packet).
    """
    p = ex.params
    if not descs:
        return
    T, P, c = p.T_bytes, code.packets, code.combos
    w = T // P
    G, S = len(descs), p.eta1 * p.eta2
    width = G * S * w
    rows = c * P
    full = 2**code.gamma - 1
    nodes = [desc.nodes(p.x) for desc in descs]
    roles = range(2 * code.gamma)

    # keys[g][slot][beta]; slot = a * eta1 + b
    keys = []
    for desc in descs:
        fp = [point_to_index(desc.point(beta, p.d), p.x) for beta in range(full + 1)]
        keys.append([
            [(fp[beta] * p.eta2 + a, fp[beta ^ full] * p.eta1 + b) for beta in range(full + 1)]
            for a in range(p.eta2)
            for b in range(p.eta1)
        ])

    def packet_matrix(rho: int) -> FieldMatrix:
        blob = b"".join(
            ex.value(nodes[g][rho], ks[beta]) for g in range(G) for ks in keys[g] for beta in code.known[rho]
        )
        a = np.frombuffer(blob, dtype=np.uint8).reshape(G * S, len(code.known[rho]), P, w)
        return FieldMatrix(rows, width, a.transpose(1, 2, 0, 3).tobytes())

    held = [packet_matrix(rho) for rho in roles]
    sent = [code.coeffs[rho] @ held[rho] for rho in roles]

    for r in roles:
        stacked = b"".join(sent[s].data for s in roles if s != r) + held[r].data
        sol = code.solver[r] @ FieldMatrix(2 * rows, width, stacked)
        wn = len(code.wanted[r])
        out = np.frombuffer(sol.data, dtype=np.uint8).reshape(wn, P, G * S, w).transpose(2, 0, 1, 3).tobytes()
        pos = 0
        for g in range(G):
            k = nodes[g][r]
            for ks in keys[g]:
                for beta in code.wanted[r]:
                    ex.deliver(k, ks[beta], out[pos:pos + T])
                    pos += T

    # one message per sender per group, slot payloads concatenated
    msg = S * c * w
    per_group = [
        np.frombuffer(y.data, dtype=np.uint8).reshape(c, G, S, w).transpose(1, 2, 0, 3).tobytes() for y in sent
    ]
    for g, desc in enumerate(descs):
        tag = RoundTag("gamma_ge2", group=desc)
        for rho in roles:
            ex.log.append(Multicast(nodes[g][rho], nodes[g], tag, per_group[rho][g * msg:(g + 1) * msg]))


def shuffle_sd(
    placement: Placement,
    stores: IVStore,
    seed: int = 0,
    oracle: Optional[Oracle] = None,
    retry_budget: int = RETRY_BUDGET,
) -> ShuffleResult:
    """Three rounds keyed by how many reducers lack the file.

    gamma=0 values are computed by every reducer and never sent.  gamma=1
    values go out as XOR multicasts inside the T-set of the function point.
    gamma>=2 values are exchanged inside 2*gamma node groups as random linear
    combinations over GF(2^8).
    """
    p = placement.params
    if p.s_mode is not SMode.SD:
        raise ValueError("shuffle_sd needs an SD placement")
    ex = _Exchange(placement, stores, oracle)

    for n in range(p.num_points):
        group = placement.nodes_of_batch[n]
        funcs = placement.functions_at(n)
        requests = {}
        for z in group:
            files = [j for q in _aligned_points(p, n, z // p.x) for j in p.files_at(q)]
            requests[z] = sorted((i, j) for i in funcs for j in files)
        ex.xor_multicast(group, requests, RoundTag("gamma1", point=n))

    retries = 0
    for g in range(2, p.d + 1):
        if p.x < 2:
            break
        code, extra = draw_group_code(g, seed, retry_budget)
        retries += extra
        _coded_class(ex, list(coded_groups(p.x, p.d, g)), code)
    return ShuffleResult(ex.log, ex.delivered, retries)


def shuffle(placement: Placement, stores: IVStore, seed: int = 0, oracle: Optional[Oracle] = None) -> ShuffleResult:
    if placement.params.s_mode is SMode.S1:
        return shuffle_s1(placement, stores, oracle)
    return shuffle_sd(placement, stores, seed, oracle)


@dataclass
class DeliveryReport:
    complete: list[int]
    expected: list[int]
    mismatches: int
    mismatched: list[tuple[int, IVKey]]

    @property
    def missing(self) -> int:
        return sum(e - c for c, e in zip(self.complete, self.expected))

    @property
    def ok(self) -> bool:
        return self.missing == 0 and self.mismatches == 0

    def completeness(self, k: int) -> Fraction:
        return Fraction(self.complete[k], self.expected[k]) if self.expected[k] else Fraction(1)


def verify_delivery(
    placement: Placement, stores: IVStore, delivered: list[dict[IVKey, bytes]], oracle: Oracle
) -> DeliveryReport:
    """Check that every reducer holds all N values of each of its functions,
    byte-identical to the reference map output."""
    p = placement.params
    complete, expected, bad = [], [], []
    for k in range(p.K):
        local, inbox = stores.per_node[k], delivered[k]
        have = 0
        funcs = sorted(placement.functions_of_node[k])
        for i in funcs:
            for j in range(p.N):
                key = (i, j)
                v = inbox.get(key)
                if v is None:
                    v = local.get(key)
                if v is None:
                    continue
                have += 1
                if v != oracle(i, j):
                    bad.append((k, key))
        complete.append(have)
        expected.append(len(funcs) * p.N)
    return DeliveryReport(complete, expected, len(bad), bad)


def inject_fault(delivered: list[dict[IVKey, bytes]]) -> tuple[int, IVKey]:
    """Flip one bit of the first delivered payload in canonical order."""
    for k, inbox in enumerate(delivered):
        if inbox:
            key = min(inbox)
            v = bytearray(inbox[key])
            v[0] ^= 0x01
            inbox[key] = bytes(v)
            return k, key
    raise ValueError("nothing was delivered")
