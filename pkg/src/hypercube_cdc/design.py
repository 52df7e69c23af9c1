"""File placement and reduce-function assignment on the hypercube lattice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple

from .errors import ConfigError
from .lattice import HypercubeParams, SMode, binom, nodes_through_point


@dataclass(frozen=True)
class Placement:
    """Who stores which files and who reduces which functions.

    Batches are indexed by flat lattice index.  In S1 mode function ids are
    handed out to nodes in contiguous blocks of ``eta2``; in SD mode they are
    handed out to lattice points the same way, and every node through the
    point reduces them.
    """

    params: HypercubeParams
    files_of_node: tuple[frozenset[int], ...]
    nodes_of_batch: tuple[tuple[int, ...], ...]
    functions_of_node: tuple[frozenset[int], ...]
    reducers_of_function: tuple[tuple[int, ...], ...]

    @property
    def s(self) -> int:
        return self.params.s

    def function_point(self, i: int) -> int:
        """Lattice index of an SD function batch."""
        if self.params.s_mode is not SMode.SD:
            raise ValueError("functions live on lattice points only in SD mode")
        return i // self.params.eta2

    def functions_at(self, n: int) -> range:
        e = self.params.eta2
        return range(n * e, (n + 1) * e)

    def holds_file(self, k: int, j: int) -> bool:
        return k in self.nodes_of_batch[self.params.file_point(j)]

    def to_json(self) -> dict[str, Any]:
        p = self.params
        return {
            "x": p.x,
            "d": p.d,
            "eta1": p.eta1,
            "eta2": p.eta2,
            "s": p.s,
            "K": p.K,
            "N": p.N,
            "Q": p.Q,
            "T_bytes": p.T_bytes,
            "nodes": [
                {
                    "id": k,
                    "dim": p.node(k).dim,
                    "coord": p.node(k).coord,
                    "files": sorted(self.files_of_node[k]),
                    "functions": sorted(self.functions_of_node[k]),
                }
                for k in range(p.K)
            ],
            "batches": [
                {
                    "point": list(p.points[n]),
                    "files": list(p.files_at(n)),
                    "T_set": list(self.nodes_of_batch[n]),
                }
                for n in range(p.num_points)
            ],
            "reducers": [list(r) for r in self.reducers_of_function],
        }


def _file_side(params: HypercubeParams):
    t_sets = tuple(nodes_through_point(pt, params.x) for pt in params.points)
    files: list[set[int]] = [set() for _ in range(params.K)]
    for n, t_set in enumerate(t_sets):
        for k in t_set:
            files[k].update(params.files_at(n))
    return t_sets, tuple(frozenset(f) for f in files)


def build_placement_s1(params: HypercubeParams) -> Placement:
    if params.s_mode is not SMode.S1:
        raise ConfigError("build_placement_s1 needs s_mode=S1")
    t_sets, files = _file_side(params)
    e = params.eta2
    funcs = tuple(frozenset(range(k * e, (k + 1) * e)) for k in range(params.K))
    reducers = tuple((i // e,) for i in range(params.Q))
    return Placement(params, files, t_sets, funcs, reducers)


def build_placement_sd(params: HypercubeParams) -> Placement:
    if params.s_mode is not SMode.SD:
        raise ConfigError("build_placement_sd needs s_mode=SD")
    t_sets, files = _file_side(params)
    e = params.eta2
    funcs: list[set[int]] = [set() for _ in range(params.K)]
    reducers: list[tuple[int, ...]] = []
    for n, t_set in enumerate(t_sets):
        for k in t_set:
            funcs[k].update(range(n * e, (n + 1) * e))
        reducers.extend([t_set] * e)
    return Placement(params, files, t_sets, tuple(frozenset(f) for f in funcs), tuple(reducers))


def build_placement(params: HypercubeParams) -> Placement:
    if params.s_mode is SMode.S1:
        return build_placement_s1(params)
    return build_placement_sd(params)


class Requirements(NamedTuple):
    N_hc: int
    Q_hc: int
    N_li: int
    Q_li: int


def min_requirements(K: int, r: int, s: int) -> Requirements:
    """Smallest file and function counts for the hypercube design vs. the
    binomial placement of the cascaded scheme at the same ``(K, r, s)``.
    """
    if r < 1 or K % r:
        raise ConfigError(f"r={r} must divide K={K}")
    if s not in (1, r):
        raise ConfigError(f"s={s} must be 1 or r={r}")
    x = K // r
    return Requirements(
        N_hc=x**r,
        Q_hc=(K // s) ** s,
        N_li=binom(K, r),
        Q_li=binom(K, s),
    )
