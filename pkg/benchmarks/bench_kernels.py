"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeat 3]

Each row reports the best wall time per backend, the speedup and the largest
relative disagreement between the two outputs.
"""

import argparse
import time

import numpy as np

from fbmsde._backend import BACKENDS


def _cases(n, rng):
    t = np.linspace(0.0, 1.0, n + 1)
    F = np.cumsum(rng.standard_normal((n + 1, 2)), axis=0) / np.sqrt(n)
    return {
        "left_signed": lambda k: k.left_signed(t, F, 1.3, True),
        "left_abs": lambda k: k.left_abs(t, F, 1.3, 1.0),
        "pair_hoelder": lambda k: k.pair_hoelder(t, F, 0.6),
        "pair_owm": lambda k: k.pair_owm(t, F, 0.3),
        "pair_lambda": lambda k: k.pair_lambda(t, F, 0.3),
    }


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out, dtype=float)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 2048])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "cython" not in BACKENDS:
        print("compiled extension not built; only the python backend is available")
        return 1
    rng = np.random.default_rng(0)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    print(f"{'kernel':<14}{'n':>6}{'python s':>12}{'cython s':>12}{'speedup':>9}{'max rel diff':>14}")
    for n in args.sizes:
        for name, call in _cases(n, rng).items():
            tp, op = _best(lambda: call(py), args.repeat)
            tc, oc = _best(lambda: call(cy), args.repeat)
            scale = max(np.max(np.abs(op)), 1e-300)
            diff = float(np.max(np.abs(op - oc)) / scale)
            print(f"{name:<14}{n:>6}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}{diff:>14.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
