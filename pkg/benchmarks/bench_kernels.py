"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Shapes match a default run: 10-class logistic model on 16 features
(170 parameters), 160 training rows per node, batch size 32.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from repunet_sim import _kernels_py

try:
    from repunet_sim import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    a = rng.normal(size=170)
    b = rng.normal(size=170)
    X = rng.normal(size=(160, 16))
    y = rng.integers(0, 10, size=160).astype(np.int64)
    W = np.zeros((10, 17))
    return {
        "similarity_stats": lambda k: k.similarity_stats(a, b),
        "fraction_above": lambda k: k.fraction_above(a, 0.5),
        "sgd_epoch": lambda k: k.sgd_epoch(W.copy(), X, y, 0.1, 32),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=2000)
    args = parser.parse_args(argv)

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    print(f"{'kernel':<18}" + "".join(f"{name:>14}" for name, _ in backends) + ("    speedup" if len(backends) > 1 else ""))
    for name, fn in cases(np.random.default_rng(0)).items():
        times = []
        for _, mod in backends:
            best = min(timeit.repeat(lambda: fn(mod), number=args.number, repeat=args.repeat))
            times.append(best / args.number * 1e6)
        row = f"{name:<18}" + "".join(f"{t:>11.2f} us" for t in times)
        if len(times) > 1:
            row += f"  {times[0] / times[1]:>8.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
