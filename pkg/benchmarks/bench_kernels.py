"""Benchmark the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--n 14] [--repeat 5]

Both backends are imported side by side (the env flag only picks the default
one), outputs are checked for equality, and the median wall time per kernel
is printed.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from rftfl import all_pairs_distances, generate_random_instance
from rftfl._accel import HAS_NUMBA
from rftfl.kernels import BACKENDS
from rftfl.oracle import subset_masks


def timed(fn, args, repeat):
    fn(*args)  # warm-up (triggers compilation for numba)
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), out


def workloads(n: int, seed: int):
    inst = generate_random_instance(n, 0.3, 20, 10, 40, seed)
    D = all_pairs_distances(inst).d
    w = inst.weights
    masks, _ = subset_masks(list(inst.nodes), n)
    masks = masks[masks.sum(axis=1) >= 1]
    servers = np.arange(0, n, 3, dtype=np.int64)
    is_server = np.zeros(n, dtype=np.bool_)
    is_server[servers] = True
    free = [v for v in inst.nodes if not is_server[v - 1]]
    pools, _ = subset_masks(free, n, base=list(servers + 1))
    return {
        "ship_costs": (D, w, masks),
        "kth_backup_values(k=2)": (D, w, servers, pools, 2),
        "alpha_backup_values(alpha=2)": (D, w, is_server, pools, 2),
    }


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=14)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not HAS_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return
    print(f"n = {args.n}, median of {args.repeat} runs")
    print(f"{'kernel':<30}{'rows':>8}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for label, call_args in workloads(args.n, args.seed).items():
        name = label.split("(")[0]
        t_nb, out_nb = timed(BACKENDS["numba"][name], call_args, args.repeat)
        t_np, out_np = timed(BACKENDS["numpy"][name], call_args, args.repeat)
        assert np.array_equal(out_nb, out_np), f"{label}: backends disagree"
        rows = len(call_args[2] if name == "ship_costs" else call_args[3])
        print(f"{label:<30}{rows:>8}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
