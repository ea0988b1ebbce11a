"""Compare the numba kernels with their numpy twins.

    python3 benchmarks/bench_backends.py [--sizes 250 500 1000 2000] [--repeat 5]

Timings are the best of ``--repeat`` runs after one warm-up call (which
also triggers jit compilation). Results of both backends are compared.
"""
import argparse
import time

import numpy as np

from tmvksc import _accel


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    X = rng.standard_normal((n, 8))
    Y = rng.standard_normal((n // 2, 8))
    signs = np.where(rng.standard_normal((n, 6)) >= 0, 1, -1).astype(np.int8)
    codewords = np.where(rng.standard_normal((16, 6)) >= 0, 1, -1).astype(np.int8)
    return {
        "gram rbf": lambda b: _accel.gram(_accel.RBF, X, 2.0, backend=b),
        "gram npoly": lambda b: _accel.gram(_accel.NPOLY, X, 1.0, 2, 1.0, backend=b),
        "cross rbf": lambda b: _accel.cross_gram(_accel.RBF, Y, X, 2.0, backend=b),
        "hamming": lambda b: _accel.hamming_decode(signs, codewords, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba unavailable (or TMVKSC_DISABLE_NUMBA set); timing numpy only")
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    rng = np.random.default_rng(args.seed)

    print(f"{'op':<12}{'N':>6}" + "".join(f"{b + ' [ms]':>14}" for b in backends) + f"{'speedup':>10}{'max diff':>11}")
    for n in args.sizes:
        for name, fn in cases(n, rng).items():
            times = [best_time(lambda: fn(b), args.repeat) * 1e3 for b in backends]
            row = f"{name:<12}{n:>6}" + "".join(f"{t:>14.2f}" for t in times)
            if len(backends) == 2:
                ref, fast = fn("numpy"), fn("numba")
                diff = np.max(np.abs(np.asarray(ref[0] if isinstance(ref, tuple) else ref, dtype=float)
                                     - np.asarray(fast[0] if isinstance(fast, tuple) else fast, dtype=float)))
                row += f"{times[0] / times[1]:>10.1f}{diff:>11.1e}"
            print(row)


if __name__ == "__main__":
    main()
