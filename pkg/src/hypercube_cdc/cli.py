"""Command-line front end: plan, simulate, sweep, verify.

Exit codes: 0 success, 1 verification mismatch, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import gf256
from .analysis import CSV_HEADER, dec, frac, row_json, sweep
from .checks import DEFAULT_GRID, run_suite
from .design import build_placement, min_requirements
from .errors import ConfigError, HypercubeError
from .lattice import HypercubeParams, SMode
from .mapper import MapPolicy
from .pipeline import SimulationResult, chain_round, simulate

TSET_LIMIT = 512
SIM_QN_LIMIT = 10**5
SIM_K_LIMIT = 16

DEFAULTS = {
    "eta1": 1,
    "eta2": 1,
    "s": "1",
    "policy": "necessary",
    "T": None,
    "seed": 0,
    "rounds": 1,
    "format": "human",
    "out": None,
    "inject_fault": False,
    "simulated": False,
}


def _int_list(text: str) -> list[int]:
    """``"3"``, ``"2,3,5"`` or ``"2:6"`` (inclusive)."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--x", help="lattice side (sweep/verify accept lists like 2,3 or 2:8)")
    common.add_argument("--d", help="lattice dimension (sweep/verify accept lists)")
    common.add_argument("--eta1", type=int, help="files per lattice point")
    common.add_argument("--eta2", type=int, help="functions per assignment unit")
    common.add_argument("--s", choices=["1", "d"], help="reducers per function: 1 or d")
    common.add_argument("--policy", choices=[p.value for p in MapPolicy], help="map policy")
    common.add_argument("--T", type=int, help="bytes per intermediate value")
    common.add_argument("--seed", type=int)
    common.add_argument("--rounds", type=int, help="chained rounds (s=d only)")
    common.add_argument("--format", choices=["human", "json", "csv"])
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--config", metavar="PATH", help="JSON file of defaults; flags win")
    common.add_argument("--inject-fault", dest="inject_fault", action="store_true", default=None,
                        help="corrupt one delivered value before verification")

    parser = argparse.ArgumentParser(prog="hypercube-cdc", description="Hypercube coded distributed computing simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="show the placement and file/function requirements")
    sub.add_parser("simulate", parents=[common], help="run map, shuffle, reduce and verify")
    sw = sub.add_parser("sweep", parents=[common], help="closed-form comparison table")
    sw.add_argument("--simulated", action="store_true", default=None,
                    help="add simulated r and L for rows with K <= 16 and QN <= 1e5")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    explicit: set[str] = set()
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS) - {"x", "d"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
        explicit |= set(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
        explicit.add(key)
    cfg["s"] = str(cfg["s"])
    cfg["_explicit"] = explicit
    return cfg


def make_params(cfg: dict[str, Any]) -> HypercubeParams:
    for key in ("x", "d"):
        if cfg.get(key) is None:
            raise ConfigError(f"--{key} is required")
    try:
        x, d = int(cfg["x"]), int(cfg["d"])
    except ValueError:
        raise ConfigError(f"--x and --d must be single integers here; got {cfg['x']!r}, {cfg['d']!r}") from None
    if cfg["s"] not in ("1", "d"):
        raise ConfigError(f"s must be 1 or d; got {cfg['s']!r}")
    return HypercubeParams(x, d, cfg["eta1"], cfg["eta2"], SMode(cfg["s"]), cfg["T"])


def _fd(v: Fraction) -> str:
    return f"{frac(v)} ({dec(v)})"


def _csv(rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([frac(c) if isinstance(c, Fraction) else c for c in r])
    return buf.getvalue()


# plan

def cmd_plan(cfg: dict[str, Any]) -> tuple[str, int]:
    p = make_params(cfg)
    pl = build_placement(p)
    req = min_requirements(p.K, p.d, p.s)
    show_tsets = p.N <= TSET_LIMIT
    fmt = cfg["format"]
    if fmt == "json":
        out = {
            "x": p.x, "d": p.d, "eta1": p.eta1, "eta2": p.eta2, "s": p.s, "T_bytes": p.T_bytes,
            "K": p.K, "N": p.N, "Q": p.Q,
            "nodes": [
                {"id": k, "dim": p.node(k).dim, "coord": p.node(k).coord,
                 "files": len(pl.files_of_node[k]), "functions": len(pl.functions_of_node[k])}
                for k in range(p.K)
            ],
            "requirements": req._asdict(),
        }
        if show_tsets:
            out["T_sets"] = [{"point": list(p.points[n]), "nodes": list(pl.nodes_of_batch[n])} for n in range(p.num_points)]
        return json.dumps(out, indent=2, sort_keys=True) + "\n", 0
    if fmt == "csv":
        rows = [("node", "dim", "coord", "files", "functions")]
        rows += [(k, p.node(k).dim, p.node(k).coord, len(pl.files_of_node[k]), len(pl.functions_of_node[k])) for k in range(p.K)]
        return _csv(rows), 0
    lines = [
        f"x={p.x} d={p.d} eta1={p.eta1} eta2={p.eta2} s={p.s} T={p.T_bytes} bytes",
        f"K={p.K}  N={p.N}  Q={p.Q}",
        "",
        "node  dim  coord  |M_k|  |W_k|",
    ]
    for k in range(p.K):
        nid = p.node(k)
        lines.append(f"{k:>4}  {nid.dim:>3}  {nid.coord:>5}  {len(pl.files_of_node[k]):>5}  {len(pl.functions_of_node[k]):>5}")
    lines.append("")
    if show_tsets:
        lines.append("T-sets (lattice point -> nodes):")
        for n in range(p.num_points):
            lines.append(f"  {p.points[n]} -> {list(pl.nodes_of_batch[n])}")
    else:
        lines.append(f"T-set listing suppressed (N={p.N} > {TSET_LIMIT})")
    lines += [
        "",
        f"minimum requirements at K={p.K}, r={p.d}, s={p.s}:",
        f"  files     N: hypercube {req.N_hc}  vs binomial {req.N_li}",
        f"  functions Q: hypercube {req.Q_hc}  vs binomial {req.Q_li}",
    ]
    return "\n".join(lines) + "\n", 0


# simulate

def _human_result(res: SimulationResult, label: str = "") -> list[str]:
    p = res.params
    yes = {True: "match", False: "MISMATCH"}
    rep = res.report
    comp = min((rep.completeness(k) for k in range(p.K)), default=Fraction(1))
    return [
        f"{label}x={p.x} d={p.d} eta1={p.eta1} eta2={p.eta2} s={p.s} policy={res.policy.value} T={p.T_bytes} seed={res.seed}",
        f"  K={p.K}  N={p.N}  Q={p.Q}",
        f"  r = {_fd(res.r)}   theory {_fd(res.theory.r)}   {yes[res.r_match]}",
        f"  L = {_fd(res.L)}   theory {_fd(res.theory.L)}   {yes[res.L_match]}",
        f"  messages {res.messages}  bits {res.log.total_bits}  retries {res.retries}",
        f"  verification: {'ok' if res.verified else 'FAILED'}  "
        f"(min completeness {float(comp):.0%}, {rep.mismatches} value mismatches, "
        f"{len(res.digest_mismatches)} digest mismatches)",
    ]


def cmd_simulate(cfg: dict[str, Any]) -> tuple[str, int]:
    p = make_params(cfg)
    policy = MapPolicy(cfg["policy"])
    rounds = int(cfg["rounds"])
    if rounds != 1:
        if cfg["inject_fault"]:
            raise ConfigError("--inject-fault applies to single-round runs only")
        results = chain_round(p, cfg["seed"], rounds, policy)
    else:
        results = [simulate(p, policy, cfg["seed"], inject_fault=bool(cfg["inject_fault"]))]
    code = 0 if all(r.verified for r in results) else 1
    fmt = cfg["format"]
    if fmt == "json":
        body: Any = results[0].to_json() if rounds == 1 else {"rounds": [r.to_json() for r in results]}
        return json.dumps(body, indent=2, sort_keys=True) + "\n", code
    if fmt == "csv":
        rows = [("round", "x", "d", "eta1", "eta2", "s", "policy", "seed", "r", "L", "r_theory", "L_theory",
                 "r_match", "L_match", "messages", "retries", "verified")]
        for t, r in enumerate(results):
            q = r.params
            rows.append((t, q.x, q.d, q.eta1, q.eta2, q.s, r.policy.value, r.seed, r.r, r.L, r.theory.r, r.theory.L,
                         r.r_match, r.L_match, r.messages, r.retries, r.verified))
        return _csv(rows), code
    lines: list[str] = []
    for t, r in enumerate(results):
        lines += _human_result(r, f"round {t}: " if rounds > 1 else "")
    return "\n".join(lines) + "\n", code


# sweep

def _sim_columns(row, seed: int) -> None:
    K = row.x * row.d
    mode = SMode.S1 if row.s == 1 else SMode.SD
    p = HypercubeParams(row.x, row.d, s_mode=mode)
    if K > SIM_K_LIMIT or p.Q * p.N > SIM_QN_LIMIT:
        return
    res = simulate(p, MapPolicy.ALL, seed)
    row.r_sim, row.L_sim = res.r, res.L


def cmd_sweep(cfg: dict[str, Any]) -> tuple[str, int]:
    try:
        xs = _int_list(cfg["x"]) if cfg.get("x") is not None else list(range(2, 9))
        ds = _int_list(cfg["d"]) if cfg.get("d") is not None else list(range(2, 7))
    except ValueError as exc:
        raise ConfigError(f"bad grid: {exc}") from None
    if min(xs) < 2 or min(ds) < 2:
        raise ConfigError("sweep needs x >= 2 and d >= 2")
    modes = [SMode(cfg["s"])] if "s" in cfg.get("_explicit", ()) else [SMode.S1, SMode.SD]
    rows = sweep(xs, ds, modes)
    simulated = bool(cfg["simulated"])
    if simulated:
        for row in rows:
            _sim_columns(row, cfg["seed"])
    fmt = cfg["format"]
    if fmt == "json":
        return json.dumps([row_json(r) for r in rows], indent=2) + "\n", 0
    if fmt == "csv":
        header = list(CSV_HEADER) + (["r_sim", "L_sim"] if simulated else [])
        cells = [["" if c is None else c for c in r.cells(simulated)] for r in rows]
        return _csv([header] + cells), 0
    lines = []
    for r in rows:
        line = (f"x={r.x} d={r.d} s={r.s}  r={_fd(r.r_hc)}  L_hc={_fd(r.L_hc)}  L_opt={_fd(r.L_opt)}  "
                f"L_uncoded={_fd(r.L_uncoded)}  N {r.N_hc} vs {r.N_li}  Q {r.Q_hc} vs {r.Q_li}")
        if r.L_sim is not None:
            line += f"  simulated r={_fd(r.r_sim)} L={_fd(r.L_sim)}"
        lines.append(line)
    return "\n".join(lines) + "\n", 0


# verify

def cmd_verify(cfg: dict[str, Any]) -> tuple[str, int]:
    grid = DEFAULT_GRID
    if cfg.get("x") is not None or cfg.get("d") is not None:
        try:
            xs = _int_list(cfg["x"]) if cfg.get("x") is not None else sorted({g[0] for g in DEFAULT_GRID})
            ds = _int_list(cfg["d"]) if cfg.get("d") is not None else sorted({g[1] for g in DEFAULT_GRID})
        except ValueError as exc:
            raise ConfigError(f"bad grid: {exc}") from None
        grid = tuple((x, d) for x in xs for d in ds)
    results = run_suite(cfg["seed"], grid, bool(cfg["inject_fault"]))
    code = 0 if all(c.passed for c in results) else 1
    fmt = cfg["format"]
    if fmt == "json":
        body = {"backend": gf256.BACKEND, "passed": code == 0, "checks": [c.to_json() for c in results]}
        return json.dumps(body, indent=2) + "\n", code
    if fmt == "csv":
        return _csv([("check", "passed", "seconds", "detail")] + [(c.name, c.passed, f"{c.seconds:.3f}", c.detail) for c in results]), code
    width = max(len(c.name) for c in results)
    lines = [f"backend: {gf256.BACKEND}"]
    lines += [f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.seconds:6.2f}s  {c.detail}" for c in results]
    lines.append(f"{sum(c.passed for c in results)}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", code


def _origin(exc: BaseException) -> str:
    """Module of the innermost frame that raised ``exc``."""
    tb, name = exc.__traceback__, "?"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", name)
        tb = tb.tb_next
    return name


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        text, code = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hypercube-cdc: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except HypercubeError as exc:
        print(f"hypercube-cdc: {_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
