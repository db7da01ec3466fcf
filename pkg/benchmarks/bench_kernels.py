"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 8 16 32 64] [--repeat 5]

JIT compilation is triggered once before timing.  Both backends are checked
to agree on every input before anything is timed.
"""

import argparse
import timeit

import numpy as np

from perimfix import kernels
from perimfix.search import gen_random_map, gen_random_space, instance_rng

KERNELS = ("hausdorff_matrix", "max_pair_ratio", "max_triplet_ratio", "metric_closure")


def inputs(n, seed=0):
    rng = instance_rng(seed, n)
    space = gen_random_space(n, 50, rng)
    fmap = gen_random_map(space, 1, max(1, n // 4), rng)
    d = space.kernel_dist
    h = kernels.numpy_kernels.hausdorff_matrix(d, fmap.membership)
    return {
        "hausdorff_matrix": (d, fmap.membership),
        "max_pair_ratio": (d, h),
        "max_triplet_ratio": (d, h),
        "metric_closure": (d,),
    }


def best_of(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    nb, npk = kernels.numba_kernels, kernels.numpy_kernels
    if nb is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<18} {'n':>4} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in args.sizes:
        case = inputs(n)
        for name in KERNELS:
            a = getattr(npk, name)(*case[name])
            b = getattr(nb, name)(*case[name])  # also compiles
            assert np.array_equal(np.asarray(a), np.asarray(b)), (name, n)
            t_np = best_of(getattr(npk, name), case[name], args.repeat)
            t_nb = best_of(getattr(nb, name), case[name], args.repeat)
            print(f"{name:<18} {n:>4} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
