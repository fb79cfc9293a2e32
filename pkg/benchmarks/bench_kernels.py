"""Time the compiled kernels against the NumPy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends are fed the
same inputs and their outputs are compared before timing.
"""

import argparse
import timeit

import numpy as np

from hetmed import _pykernels

try:
    from hetmed import _ckernels
except ImportError:
    _ckernels = None


def simex_case(K, B, rng):
    gamma = rng.normal(2, 1, K)
    tau = 4 + 1.5 * gamma + rng.standard_normal(K)
    se = rng.gamma(1, 1, K)
    sz = np.sqrt([0.5, 1.0, 1.5, 2.0])
    normals = rng.standard_normal((4, B, K))
    return gamma, tau, se, sz, normals


def split_case(n, rng):
    x = np.sort(rng.random(n))
    t = (rng.random(n) < 0.5).astype(float)
    y = rng.standard_normal(n) + 2 * t * (x > 0.5)
    x_est = np.sort(rng.random(n))
    t_est = (rng.random(n) < 0.5).astype(float)
    return x, t, y, x_est, t_est, 50.0, 2.0, 4.0


def bench(fn, args, repeat):
    times = timeit.repeat(lambda: fn(*args), number=1, repeat=repeat)
    return min(times) * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args()
    rng = np.random.default_rng(opts.seed)

    cases = [
        ("simex_moments K=30 B=200", "simex_moments", simex_case(30, 200, rng)),
        ("simex_moments K=100 B=200", "simex_moments", simex_case(100, 200, rng)),
        ("simex_moments K=1000 B=200", "simex_moments", simex_case(1000, 200, rng)),
        ("best_split n=2500", "best_split", split_case(2500, rng)),
        ("best_split n=25000", "best_split", split_case(25000, rng)),
    ]
    print(f"{'kernel':<28}{'numpy ms':>10}{'cython ms':>11}{'speedup':>9}")
    for label, name, args in cases:
        py = bench(getattr(_pykernels, name), args, opts.repeat)
        if _ckernels is None:
            print(f"{label:<28}{py:>10.3f}{'n/a':>11}{'':>9}")
            continue
        a, b = getattr(_pykernels, name)(*args), getattr(_ckernels, name)(*args)
        for u, v in zip(a, b):
            np.testing.assert_allclose(u, v, rtol=1e-9)
        cy = bench(getattr(_ckernels, name), args, opts.repeat)
        print(f"{label:<28}{py:>10.3f}{cy:>11.3f}{py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
