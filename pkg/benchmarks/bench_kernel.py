"""Timing comparison of the pure-Python and compiled radial kernels.

Both backends march the same g'' = w(t) g profile; the profile mimics a
deep unitarity run (constant supercritical channel plus the kappa^2
rho^2 tail) so the renormalization branch is exercised too.

Usage: python benchmarks/bench_kernel.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from efimov_lab import efimov_constants
from efimov_lab._kernel import BACKEND, get_backend


def make_profile(n: int) -> np.ndarray:
    b = efimov_constants().b
    t = np.linspace(0.0, math.log(36.0 / 1e-6), n)
    rho = np.exp(t)
    return -b * b + (1e-6 * rho) ** 2


def best_of(fn, w, h, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(w, h, 0.0, 1.0)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ns = ap.parse_args()

    backends = {"pure": get_backend("pure").integrate_numerov}
    try:
        backends["compiled"] = get_backend("compiled").integrate_numerov
    except ImportError:
        print("compiled backend not built; timing the pure kernel only")

    print(f"active backend at import: {BACKEND}")
    print(f"{'points':>10} {'backend':>10} {'time':>12} {'steps/s':>12}")
    for n in (10_000, 100_000, 1_000_000):
        w = make_profile(n)
        h = float(np.log(36.0 / 1e-6) / (n - 1))
        times = {}
        for name, fn in backends.items():
            dt = best_of(fn, w, h, ns.repeats)
            times[name] = dt
            print(f"{n:>10} {name:>10} {dt * 1e3:>10.2f}ms {n / dt:>12.3g}")
        if len(times) == 2:
            print(f"{'':>10} {'speedup':>10} {times['pure'] / times['compiled']:>11.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
