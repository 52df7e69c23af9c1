"""Closed-form loads, baselines and the comparison sweep.

Everything here is exact: loads are :class:`fractions.Fraction` and decimals
are produced only when formatting.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional

from .design import min_requirements
from .lattice import SMode, binom


class Loads(NamedTuple):
    r: Fraction
    L: Fraction


def theorem1(x: int, d: int) -> Loads:
    """s=1, necessary values only."""
    return Loads(Fraction(1 + (d - 1) * (x - 1), x), Fraction(x - 1, x * (d - 1)))


def corollary1(x: int, d: int) -> Loads:
    """s=1 with every node mapping everything it stores."""
    r = Fraction(d)
    L = Fraction(x - 1, x * (d - 1))
    K = x * d
    assert L == (1 - r / K) / (r - 1)
    return Loads(r, L)


def theorem2(x: int, d: int) -> Loads:
    """s=d, necessary values only."""
    r = Fraction(d * (x**d - x + 1), x**d)
    coded = sum(
        Fraction(2 * binom(d, g) * binom(x, 2) ** g * x ** (d - g) * g * 2 ** (g - 1), 2 * g - 1)
        for g in range(2, d + 1)
    )
    L = Fraction(d * (x - 1), x**d * (d - 1)) + coded / x ** (2 * d)
    return Loads(r, L)


def theorem2_all(x: int, d: int) -> Loads:
    """s=d with every node mapping everything; the shuffle is unchanged."""
    return Loads(Fraction(d), theorem2(x, d).L)


def theory(x: int, d: int, s_mode: SMode, compute_all: bool) -> Loads:
    if SMode(s_mode) is SMode.S1:
        return corollary1(x, d) if compute_all else theorem1(x, d)
    return theorem2_all(x, d) if compute_all else theorem2(x, d)


def optimal_cascaded(K: int, r: int, s: int) -> Fraction:
    """Minimum load of the cascaded scheme with every value mapped everywhere."""
    if not (1 <= r <= K and 1 <= s <= K):
        raise ValueError(f"need 1 <= r, s <= K; got K={K}, r={r}, s={s}")
    den = r * binom(K, r) * binom(K, s)
    total = Fraction(0)
    for l in range(max(r + 1, s), min(r + s, K) + 1):
        total += Fraction(l * binom(K, l) * binom(l - 2, r - 1) * binom(r, l - s), den)
    return total


def uncoded(K: int, r: int, s: int = 1) -> Fraction:
    """Unicast every missing value to each of its ``s`` reducers.

    A reducer lacks a fraction ``1 - r/K`` of the files, so the load is
    ``s * (1 - r/K)``.
    """
    if not 0 <= r <= K:
        raise ValueError(f"need 0 <= r <= K; got K={K}, r={r}")
    return s * (1 - Fraction(r, K))


def ratio_s1(x: int, d: int) -> Fraction:
    """Hypercube load over the cascaded optimum at the same r = d, s = 1."""
    return corollary1(x, d).L / optimal_cascaded(x * d, d, 1)


def ratio_s2(x: int) -> Fraction:
    """Hypercube load over the cascaded optimum at r = s = d = 2."""
    return theorem2(x, 2).L / optimal_cascaded(2 * x, 2, 2)


def optimality_ratios(xs: Iterable[int], ds: Iterable[int] = (2,), s_mode: SMode = SMode.S1) -> list[tuple[int, int, Fraction]]:
    """``(x, d, ratio)`` rows; the SD table is only defined for ``d = 2``."""
    rows = []
    for d in ds:
        for x in xs:
            if SMode(s_mode) is SMode.S1:
                rows.append((x, d, ratio_s1(x, d)))
            else:
                if d != 2:
                    raise ValueError("the s=d ratio table is defined for d=2 only")
                rows.append((x, d, ratio_s2(x)))
    return rows


CSV_HEADER = ("x", "d", "s", "r_hc", "L_hc", "L_opt", "L_uncoded", "N_hc", "N_li", "Q_hc", "Q_li")


@dataclass
class SweepRow:
    """One comparison point.  Both schemes map every value they can (r = d)."""

    x: int
    d: int
    s: int
    r_hc: Fraction
    L_hc: Fraction
    L_opt: Fraction
    L_uncoded: Fraction
    N_hc: int
    N_li: int
    Q_hc: int
    Q_li: int
    r_sim: Optional[Fraction] = None
    L_sim: Optional[Fraction] = None

    def cells(self, simulated: bool = False) -> list:
        names = list(CSV_HEADER) + (["r_sim", "L_sim"] if simulated else [])
        return [getattr(self, n) for n in names]

    def sandwiched(self) -> bool:
        return self.L_opt <= self.L_hc <= self.L_uncoded


def sweep_row(x: int, d: int, s_mode: SMode) -> SweepRow:
    s_mode = SMode(s_mode)
    K = x * d
    s = 1 if s_mode is SMode.S1 else d
    loads = theory(x, d, s_mode, compute_all=True)
    req = min_requirements(K, d, s)
    return SweepRow(
        x=x,
        d=d,
        s=s,
        r_hc=loads.r,
        L_hc=loads.L,
        L_opt=optimal_cascaded(K, d, s),
        L_uncoded=uncoded(K, d, s),
        N_hc=req.N_hc,
        N_li=req.N_li,
        Q_hc=req.Q_hc,
        Q_li=req.Q_li,
    )


def sweep(xs: Iterable[int], ds: Iterable[int], s_modes: Iterable[SMode] = (SMode.S1, SMode.SD)) -> list[SweepRow]:
    """Rows ordered by x, then d, then s."""
    modes = [SMode(m) for m in s_modes]
    return [sweep_row(x, d, m) for x in sorted(set(xs)) for d in sorted(set(ds)) for m in modes]


def frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def dec(v: Fraction) -> str:
    return f"{float(v):.6g}"


def exact(v: Fraction) -> dict:
    return {"fraction": frac(v), "decimal": dec(v)}


def row_json(row: SweepRow) -> dict:
    out = {}
    for f in fields(row):
        v = getattr(row, f.name)
        if v is None:
            continue
        out[f.name] = exact(v) if isinstance(v, Fraction) else v
    return out


__all__ = [
    "Loads",
    "theorem1",
    "corollary1",
    "theorem2",
    "theorem2_all",
    "theory",
    "optimal_cascaded",
    "uncoded",
    "ratio_s1",
    "ratio_s2",
    "optimality_ratios",
    "SweepRow",
    "sweep",
    "sweep_row",
    "CSV_HEADER",
    "asdict",
]
