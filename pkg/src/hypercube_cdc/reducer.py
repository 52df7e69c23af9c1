"""Reduce phase and the centralized reference computation."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

from .design import Placement
from .errors import IncompleteInputsError
from .lattice import HypercubeParams
from .mapper import IVKey, IVStore, MapFunction


@dataclass(frozen=True)
class ReduceDigest:
    func: int
    digest: bytes

    def to_json(self) -> dict:
        return {"func": self.func, "digest": self.digest.hex()}


def reduce(func: int, ivs: Sequence[Optional[bytes]]) -> ReduceDigest:
    """Hash the function id and its N intermediate values in file order.

    ``ivs[j]`` must hold the value for file ``j``; ``None`` marks a value the
    caller could not find.
    """
    missing = [j for j, v in enumerate(ivs) if v is None]
    if missing:
        raise IncompleteInputsError(func, missing)
    h = hashlib.blake2b(struct.pack("<Q", func), digest_size=32, person=b"hcdc-reduce")
    for v in ivs:
        h.update(v)
    return ReduceDigest(func, h.digest())


def reduce_node(
    placement: Placement, stores: IVStore, delivered: list[dict[IVKey, bytes]], k: int
) -> dict[int, bytes]:
    """Digests of every function node ``k`` is responsible for."""
    N = placement.params.N
    local, inbox = stores.per_node[k], delivered[k]
    out = {}
    for i in sorted(placement.functions_of_node[k]):
        ivs = [inbox.get((i, j)) or local.get((i, j)) for j in range(N)]
        out[i] = reduce(i, ivs).digest
    return out


class OracleTable:
    """All Q*N intermediate values computed in one place, no placement involved.

    Callable as ``table(i, j)`` so it can stand in for the map function when
    checking decoded payloads.
    """

    def __init__(self, params: HypercubeParams, mapfn: MapFunction, file_blobs: Optional[Sequence[bytes]] = None):
        self.Q, self.N = params.Q, params.N
        if file_blobs is None:
            self.values = [[mapfn(i, j) for j in range(self.N)] for i in range(self.Q)]
        else:
            self.values = [[mapfn(i, j, file_blobs[j]) for j in range(self.N)] for i in range(self.Q)]

    def __call__(self, i: int, j: int) -> bytes:
        return self.values[i][j]

    def digests(self) -> list[bytes]:
        return [reduce(i, row).digest for i, row in enumerate(self.values)]


def oracle_run(params: HypercubeParams, seed: int, file_blobs: Optional[Sequence[bytes]] = None) -> list[bytes]:
    """Reference digests for all Q functions."""
    return OracleTable(params, MapFunction(seed, params.T_bytes), file_blobs).digests()
