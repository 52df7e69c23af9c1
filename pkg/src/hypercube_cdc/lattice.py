"""Hypercube lattice geometry and index arithmetic.

A design with side ``x`` and dimension ``d`` has ``x**d`` lattice points and
``K = x*d`` nodes.  Node ``(dim, coord)`` owns the hyperplane of points whose
``dim``-th coordinate equals ``coord``; its flat id is ``dim*x + coord``.
Lattice points are flattened with dimension 0 as the least significant digit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

from .errors import ConfigError

LatticePoint = tuple[int, ...]


class SMode(str, enum.Enum):
    """How many nodes reduce each output function."""

    S1 = "1"
    SD = "d"


class NodeId(NamedTuple):
    dim: int
    coord: int

    def flat(self, x: int) -> int:
        return self.dim * x + self.coord

    @classmethod
    def from_flat(cls, k: int, x: int) -> "NodeId":
        return cls(*divmod(k, x))


def binom(n: int, k: int) -> int:
    """Exact binomial coefficient; zero outside ``0 <= k <= n``."""
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def minimal_T(d: int) -> int:
    """Smallest payload size in bytes that every packet split divides evenly.

    The XOR rounds cut each intermediate value into ``d-1`` packets and a
    gamma-node coded round cuts it into ``2*gamma - 1``.
    """
    if d < 2:
        raise ConfigError(f"d={d} must be at least 2")
    moduli = [d - 1] + [2 * g - 1 for g in range(2, d + 1)]
    return reduce(math.lcm, moduli, 1)


def point_to_index(coords: Sequence[int], x: int) -> int:
    n = 0
    for m in reversed(range(len(coords))):
        c = coords[m]
        if not 0 <= c < x:
            raise ValueError(f"coordinate {c} in dimension {m} is outside [0, {x})")
        n = n * x + c
    return n


def index_to_point(n: int, x: int, d: int) -> LatticePoint:
    if not 0 <= n < x**d:
        raise ValueError(f"lattice index {n} is outside [0, {x**d})")
    coords = []
    for _ in range(d):
        n, c = divmod(n, x)
        coords.append(c)
    return tuple(coords)


def nodes_through_point(coords: Sequence[int], x: int) -> tuple[int, ...]:
    """Flat ids of the d nodes whose hyperplanes contain ``coords`` (its T-set)."""
    return tuple(m * x + c for m, c in enumerate(coords))


def gamma(p: Sequence[int], q: Sequence[int]) -> int:
    """Number of dimensions in which two lattice points differ."""
    if len(p) != len(q):
        raise ValueError("points have different dimension")
    return sum(a != b for a, b in zip(p, q))


@dataclass(frozen=True)
class HypercubeParams:
    """Design tuple plus everything derived from it.

    ``T_bytes`` defaults to :func:`minimal_T` and must be a multiple of it.
    ``x = 1`` is accepted as the degenerate design where every node stores
    every file.
    """

    x: int
    d: int
    eta1: int = 1
    eta2: int = 1
    s_mode: SMode = SMode.S1
    T_bytes: int | None = None
    points: tuple[LatticePoint, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("x", "d", "eta1", "eta2"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name}={value!r} must be an integer")
        if self.x < 1:
            raise ConfigError(f"x={self.x} must be at least 1")
        if self.d < 2:
            raise ConfigError(f"d={self.d} must be at least 2")
        if self.eta1 < 1 or self.eta2 < 1:
            raise ConfigError(f"eta1={self.eta1}, eta2={self.eta2} must both be at least 1")
        object.__setattr__(self, "s_mode", SMode(self.s_mode))
        modulus = minimal_T(self.d)
        if self.T_bytes is None:
            object.__setattr__(self, "T_bytes", modulus)
        if not isinstance(self.T_bytes, int) or self.T_bytes <= 0 or self.T_bytes % modulus:
            raise ConfigError(
                f"T_bytes={self.T_bytes} must be a positive multiple of {modulus} (minimal_T(d={self.d}))"
            )
        pts = tuple(index_to_point(n, self.x, self.d) for n in range(self.x**self.d))
        object.__setattr__(self, "points", pts)

    @property
    def K(self) -> int:
        return self.x * self.d

    @property
    def num_points(self) -> int:
        return self.x**self.d

    @property
    def N(self) -> int:
        return self.eta1 * self.num_points

    @property
    def Q(self) -> int:
        if self.s_mode is SMode.S1:
            return self.eta2 * self.K
        return self.eta2 * self.num_points

    @property
    def s(self) -> int:
        return 1 if self.s_mode is SMode.S1 else self.d

    @property
    def T_bits(self) -> int:
        return 8 * self.T_bytes

    def node(self, k: int) -> NodeId:
        return NodeId.from_flat(k, self.x)

    def file_point(self, j: int) -> int:
        return j // self.eta1

    def files_at(self, n: int) -> range:
        return range(n * self.eta1, (n + 1) * self.eta1)
