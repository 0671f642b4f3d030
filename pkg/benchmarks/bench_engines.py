"""Benchmark the two feature-sweep backends against each other.

Times the full 37-map extraction on a seeded random image for every
available backend (best wall time of --repeat runs), checks that the
backends agree to 1e-12 first, and sweeps thread counts for the compiled
backend. Run from the repo root:

    python3 benchmarks/bench_engines.py
    python3 benchmarks/bench_engines.py --size 128 --kernel 5 --repeat 5
"""

import argparse
import os
import time

import numpy as np

from rfmap import GrayImage, RfmConfig, active_backend, extract_maps


def best_time(img, cfg, backend, threads, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        extract_maps(img, cfg, backend=backend, threads=threads)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256, help="square image side (default 256)")
    ap.add_argument("--kernel", type=int, default=13, help="window side (default 13)")
    ap.add_argument("--ng", type=int, default=32, help="gray levels (default 32)")
    ap.add_argument("--repeat", type=int, default=3, help="runs per cell, best kept")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    img = GrayImage(rng.integers(0, 256, size=(args.size, args.size), dtype=np.uint8))
    cfg = RfmConfig(kernel=args.kernel, ng=args.ng)
    npx = args.size * args.size

    backends = ["python"]
    try:
        active_backend("compiled")
        backends.append("compiled")
    except (ValueError, ImportError):
        print("compiled extension not built, timing the numpy backend only")

    print(
        f"image {args.size}x{args.size}, kernel {args.kernel}, "
        f"ng {args.ng}, best of {args.repeat}"
    )

    if len(backends) == 2:
        a = extract_maps(img, cfg, backend="python")
        b = extract_maps(img, cfg, backend="compiled")
        if not np.allclose(a.data, b.data, rtol=1e-12, atol=1e-12):
            raise SystemExit("backends disagree beyond 1e-12, not timing broken code")

    times = {}
    for backend in backends:
        t = best_time(img, cfg, backend, 1, args.repeat)
        times[backend] = t
        print(f"  {backend:>8} 1 thread : {t:8.3f} s  ({npx / t / 1e3:8.1f} kpx/s)")
    if len(backends) == 2:
        print(f"  compiled/python speedup: {times['python'] / times['compiled']:.1f}x")

    if "compiled" in backends:
        cpus = len(os.sched_getaffinity(0))
        print(f"  thread sweep (compiled, {cpus} visible cpu(s)):")
        for threads in (1, 2, 4):
            t = best_time(img, cfg, "compiled", threads, args.repeat)
            print(
                f"  {threads} thread(s): {t:8.3f} s  "
                f"(x{times['compiled'] / t:.2f} vs 1 thread)"
            )


if __name__ == "__main__":
    main()
