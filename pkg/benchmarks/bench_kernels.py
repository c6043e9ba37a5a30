"""Benchmark the compiled sampling kernels against the numpy fallback.

Times sample_groups (counter-based categorical draws) and group_keys
(per-group tally encoding) on identical inputs, checks the outputs are
bit-identical, and reports per-backend throughput.

Usage:
    python3 benchmarks/bench_kernels.py --n-groups 500000 --group-size 5 --d 3
"""
import argparse
import time

import numpy as np

from specmix import _kernels_np

try:
    from specmix import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def best_of(repeats, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-groups", type=int, default=200_000)
    parser.add_argument("--group-size", type=int, default=5)
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    weights = rng.dirichlet(np.ones(3))
    components = rng.dirichlet(np.ones(args.d), size=3)
    cum_w = np.cumsum(weights)
    cum_c = np.cumsum(components, axis=1)
    draws = args.n_groups * args.group_size

    backends = [("numpy", _kernels_np)]
    if HAVE_COMPILED:
        backends.insert(0, ("compiled", _kernels))
    else:
        print("compiled extension not importable; timing the fallback only")

    sample_out = {}
    key_out = {}
    print(f"{args.n_groups} groups x {args.group_size} draws, d={args.d}, "
          f"best of {args.repeats}")
    for name, impl in backends:
        t_sample, groups = best_of(
            args.repeats, impl.sample_groups,
            args.seed, args.n_groups, args.group_size, cum_w, cum_c,
        )
        t_keys, keys = best_of(args.repeats, impl.group_keys, groups, args.d)
        sample_out[name] = groups
        key_out[name] = keys
        print(f"  {name:9s} sample_groups {t_sample * 1e3:8.1f} ms "
              f"({draws / t_sample / 1e6:6.1f} M draws/s)   "
              f"group_keys {t_keys * 1e3:7.1f} ms "
              f"({args.n_groups / t_keys / 1e6:6.1f} M groups/s)")

    if len(backends) == 2:
        if not (np.array_equal(sample_out["compiled"], sample_out["numpy"])
                and np.array_equal(key_out["compiled"], key_out["numpy"])):
            print("MISMATCH: backends disagree")
            return 1
        print("outputs bit-identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
