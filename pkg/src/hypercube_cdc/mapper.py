"""Map phase: deterministic synthetic payloads and per-node computation rules."""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .design import Placement
from .lattice import SMode

# (function id, file id)
IVKey = tuple[int, int]


class MapPolicy(str, enum.Enum):
    NECESSARY = "necessary"
    ALL = "all"


def synth_iv(seed: int, i: int, j: int, T_bytes: int) -> bytes:
    """Stand-in for ``g_{i,j}(w_j)``: a SHAKE-256 stream keyed by ``(seed, i, j)``."""
    return hashlib.shake_256(b"hcdc/iv" + struct.pack("<QQQ", seed, i, j)).digest(T_bytes)


def expand_file(seed: int, j: int, digest: bytes, T_bytes: int) -> bytes:
    """File contents for a chained round, grown from the previous reduce digest."""
    return hashlib.shake_256(b"hcdc/file" + struct.pack("<QQ", seed, j) + digest).digest(T_bytes)


@dataclass(frozen=True)
class MapFunction:
    """The family ``g_{i,j}``.

    Without a file blob the output depends only on ``(seed, i, j)``; with one
    (chained rounds) the blob is hashed in, so a node holding the wrong file
    contents produces the wrong value.
    """

    seed: int
    T_bytes: int

    def __call__(self, i: int, j: int, blob: Optional[bytes] = None) -> bytes:
        if blob is None:
            return synth_iv(self.seed, i, j, self.T_bytes)
        h = hashlib.shake_256(b"hcdc/map" + struct.pack("<QQQ", self.seed, i, j) + blob)
        return h.digest(self.T_bytes)


@dataclass
class IVStore:
    """Per-node computed intermediate values and the global evaluation tally."""

    per_node: list[dict[IVKey, bytes]]
    computations: int = 0

    def has(self, k: int, key: IVKey) -> bool:
        return key in self.per_node[k]

    def count(self, k: int) -> int:
        return len(self.per_node[k])


def _own_points(placement: Placement, k: int) -> list[int]:
    p = placement.params
    m, c = p.node(k)
    return [n for n, pt in enumerate(p.points) if pt[m] == c]


def map_necessary_s1(placement: Placement, k: int) -> set[IVKey]:
    """Own functions on local files, plus values that nodes of other
    dimension groups need from local files they do not hold."""
    p = placement.params
    m, c = p.node(k)
    own = placement.functions_of_node[k]
    keys: set[IVKey] = set()
    for n in _own_points(placement, k):
        pt = p.points[n]
        funcs = set(own)
        for m2 in range(p.d):
            if m2 == m:
                continue
            for c2 in range(p.x):
                if c2 != pt[m2]:
                    funcs.update(placement.functions_of_node[m2 * p.x + c2])
        keys.update((i, j) for j in p.files_at(n) for i in funcs)
    return keys


def _sd_skipped_points(placement: Placement, k: int, n: int) -> set[int]:
    # function points that differ from file point n only along k's own dimension
    p = placement.params
    m, c = p.node(k)
    stride = p.x**m
    return {n + (c2 - c) * stride for c2 in range(p.x) if c2 != c}


def map_necessary_sd(placement: Placement, k: int) -> set[IVKey]:
    """Every value on local files except those whose function point differs
    from the file point in exactly one dimension, that dimension being the
    node's own.  Only the node aligned with the function point needs such a
    value, and the d-1 other senders of that XOR round already hold it.
    """
    p = placement.params
    keys: set[IVKey] = set()
    for n in _own_points(placement, k):
        skip = _sd_skipped_points(placement, k, n)
        funcs = [i for fp in range(p.num_points) if fp not in skip for i in placement.functions_at(fp)]
        keys.update((i, j) for j in p.files_at(n) for i in funcs)
    return keys


def map_all(placement: Placement, k: int) -> set[IVKey]:
    p = placement.params
    files = sorted(placement.files_of_node[k])
    return {(i, j) for j in files for i in range(p.Q)}


def map_keys(placement: Placement, k: int, policy: MapPolicy) -> set[IVKey]:
    if MapPolicy(policy) is MapPolicy.ALL:
        return map_all(placement, k)
    if placement.params.s_mode is SMode.S1:
        return map_necessary_s1(placement, k)
    return map_necessary_sd(placement, k)


def run_map(
    placement: Placement,
    policy: MapPolicy,
    mapfn: MapFunction,
    local_files: Optional[Mapping[int, Mapping[int, bytes]]] = None,
) -> IVStore:
    """Evaluate the Map phase on every node.

    ``local_files`` maps node -> file id -> contents for chained rounds; a node
    may only read files it stores.
    """
    per_node: list[dict[IVKey, bytes]] = []
    total = 0
    # g is deterministic, so a value several nodes evaluate is hashed once;
    # every evaluation still counts toward the tally
    memo: dict = {}
    for k in range(placement.params.K):
        keys = sorted(map_keys(placement, k, policy))
        store = {}
        if local_files is None:
            for key in keys:
                v = memo.get(key)
                if v is None:
                    v = memo[key] = mapfn(*key)
                store[key] = v
        else:
            blobs = local_files[k]
            for i, j in keys:
                blob = blobs[j]
                v = memo.get((i, j, blob))
                if v is None:
                    v = memo[(i, j, blob)] = mapfn(i, j, blob)
                store[(i, j)] = v
        total += len(store)
        per_node.append(store)
    return IVStore(per_node, total)


def all_keys(placement: Placement) -> Iterable[IVKey]:
    p = placement.params
    return ((i, j) for i in range(p.Q) for j in range(p.N))
