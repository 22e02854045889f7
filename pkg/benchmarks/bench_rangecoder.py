"""Throughput of the compiled and pure-Python rANS kernels.

    python benchmarks/bench_rangecoder.py --symbols 100000 --repeat 5
"""

import argparse
import time

import numpy as np

from rqat_inr import rangecoder
from rqat_inr.entropy import BorderAwareModel, build_frequency_table


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--symbols", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--q", type=int, default=8, choices=(8, 10))
    args = ap.parse_args(argv)

    k = 2 ** (args.q - 1) - 1
    table = build_frequency_table(BorderAwareModel(0.0, 12.0, 5, args.symbols, k))
    rng = np.random.default_rng(0)
    sym = rng.choice(np.arange(-k, k + 1), size=args.symbols, p=table.freqs / table.freqs.sum())

    backends = ["python"] + (["cython"] if rangecoder._ext is not None else [])
    print(f"{args.symbols} symbols, q={args.q}, best of {args.repeat}")
    print(f"{'backend':<8} {'encode s':>10} {'decode s':>10} {'Msym/s enc':>11} {'Msym/s dec':>11}")
    base = None
    for b in backends:
        coded = rangecoder.encode(sym, table, backend=b)
        enc = best_of(lambda: rangecoder.encode(sym, table, backend=b), args.repeat)
        dec = best_of(lambda: rangecoder.decode(coded, table, sym.size, backend=b), args.repeat)
        print(f"{b:<8} {enc:10.4f} {dec:10.4f} {sym.size / enc / 1e6:11.2f} {sym.size / dec / 1e6:11.2f}")
        if base is None:
            base = (enc, dec, coded.data)
        else:
            assert coded.data == base[2], "backends disagree"
            print(f"speedup  encode x{base[0] / enc:.1f}, decode x{base[1] / dec:.1f}")
    if len(backends) == 1:
        print("compiled kernel not built; only the fallback was measured")


if __name__ == "__main__":
    main()
