"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Both paths are called directly, so the result does not depend on the
SPINWWM_NUMBA flag.  The first numba call (compile or cache load) is
reported separately from the steady-state timings.  n=364 is the size of
the degree-24 grid used by the bracket scans.
"""
import argparse
import time
import timeit

import numpy as np

from spinwwm import _kernels


def cases(rng):
    out = []
    for npts in (364, 4000):
        x = np.cos(rng.uniform(0, np.pi, npts))
        s = np.sqrt(1 - x * x)
        out.append((f"alf_table lmax=32 n={npts}", "alf_table", (32, x, s)))
        out.append((f"legendre_table lmax=64 n={npts}", "legendre_table", (64, x)))
    u = rng.standard_normal((600, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = rng.standard_normal((2000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out.append(("legendre_pair_sum L=32 600x2000", "legendre_pair_sum", (u, v, rng.standard_normal(33))))
    return out


def best_of(func, args, repeat):
    number = 20 if args[-1].size < 1000 else 1
    return min(timeit.repeat(lambda: func(*args), number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    opts = parser.parse_args()
    if not _kernels.NUMBA_ENABLED:
        raise SystemExit("numba path disabled (SPINWWM_NUMBA); nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'first nb':>9s} {'numba ms':>9s} {'numpy ms':>9s} {'speedup':>8s} {'max diff':>9s}")
    for label, name, args in cases(rng):
        fast = getattr(_kernels, f"_{name}_nb")
        slow = getattr(_kernels, f"{name}_numpy")
        t0 = time.perf_counter()
        got = fast(*args)
        first = time.perf_counter() - t0
        diff = float(np.max(np.abs(got - slow(*args))))
        t_nb = best_of(fast, args, opts.repeat)
        t_np = best_of(slow, args, opts.repeat)
        print(f"{label:34s} {first:9.4f} {t_nb * 1e3:9.3f} {t_np * 1e3:9.3f} {t_np / t_nb:7.1f}x {diff:9.1e}")


if __name__ == "__main__":
    main()
