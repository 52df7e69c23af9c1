"""Compare the compiled and pure-Python GF(2^8) kernels.

    python3 benchmarks/bench_gf256.py [--repeat N]

Times a coded-shuffle sized matrix product, a dense solve, and a full s=d
simulation under each available backend.
"""

import argparse
import timeit

from hypercube_cdc import gf256
from hypercube_cdc.lattice import HypercubeParams, SMode
from hypercube_cdc.pipeline import simulate


def cases():
    # 8 senders x 4 combos x 7 packets at gamma=4, 64 groups side by side
    a = gf256.random_matrix(28, 56, 1)
    b = gf256.random_matrix(56, 15 * 64, 2)
    m = gf256.random_matrix(64, 64, 3)
    rhs = gf256.random_matrix(64, 256, 4)
    sd = HypercubeParams(3, 3, s_mode=SMode.SD)
    return {
        "matmul 28x56 @ 56x960": lambda: a @ b,
        "solve 64x64, 256 cols": lambda: gf256.solve(m, rhs),
        "simulate x=3 d=3 s=d": lambda: simulate(sd),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = gf256.available_backends()
    results = {}
    for name in names:
        gf256.set_backend(name)
        for label, fn in cases().items():
            fn()  # warm up
            n = 1 if label.startswith("simulate") else 10
            best = min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n
            results[(label, name)] = best
    width = max(len(label) for label, _ in results)
    print(f"{'case':<{width}}  " + "  ".join(f"{n:>10}" for n in names) + ("  speedup" if len(names) > 1 else ""))
    for label in dict.fromkeys(label for label, _ in results):
        row = [results[(label, n)] for n in names]
        line = f"{label:<{width}}  " + "  ".join(f"{t * 1e3:>8.2f}ms" for t in row)
        if len(names) > 1:
            line += f"  {results[(label, 'python')] / results[(label, 'cython')]:>6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
