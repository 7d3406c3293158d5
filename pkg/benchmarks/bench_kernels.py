"""Compare the compiled kernel backend against the NumPy fallback.

Per-kernel timings run in-process against both backend modules; the
full right-hand-side timing runs in subprocesses so the import-time
backend selection (SPECTRALNS_DISABLE_EXT) is what is measured.

Usage: python benchmarks/bench_kernels.py [--n 32,64] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from spectralns import _kernels_py
from spectralns.grid import GridSpec

try:
    from spectralns import _kernels_cy
except ImportError:
    _kernels_cy = None


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _inputs(n, rng):
    g = GridSpec(n)
    u = rng.standard_normal((3, n, n, n))
    du = rng.standard_normal((3, 3, n, n, n))
    c = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    f = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    return g, u, du, np.ascontiguousarray(c), np.ascontiguousarray(f)


def per_kernel(n, repeat):
    rng = np.random.default_rng(0)
    g, u, du, c, f = _inputs(n, rng)
    cases = {
        "advective_sum": lambda m: m.advective_sum(u, du),
        "project": lambda m: m.project(c, g.k1d),
        "combine_rhs": lambda m: m.combine_rhs(c, c, f, g.k1d, 1e-3),
        "apply_mask": lambda m: m.apply_mask(c, g.dealias_mask),
        "max_magnitude": lambda m: m.max_magnitude(u),
        "max_divergence": lambda m: m.max_divergence(c, g.k1d),
        "shell_max": lambda m: m.shell_max(c, g.shell_index, g.k_max),
    }
    print(f"\nn = {n}")
    print(f"  {'kernel':<15} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, call in cases.items():
        t_py = _best_of(lambda: call(_kernels_py), repeat)
        if _kernels_cy is None:
            print(f"  {name:<15} {t_py * 1e3:>8.3f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_cy = _best_of(lambda: call(_kernels_cy), repeat)
        print(
            f"  {name:<15} {t_py * 1e3:>8.3f}ms {t_cy * 1e3:>8.3f}ms"
            f" {t_py / t_cy:>7.2f}x"
        )


_RHS_SNIPPET = """
import json, time
import numpy as np
from spectralns import kernels
from spectralns.grid import GridSpec
from spectralns.dynamics import InitialConditionSpec, PhysicsParams, make_initial_condition, rhs

n, repeat = {n}, {repeat}
g = GridSpec(n)
u = make_initial_condition(InitialConditionSpec(kind="taylor_green"), g)
p = PhysicsParams(nu=1e-3)
rhs(u, 0.0, p)
best = float("inf")
for _ in range(repeat):
    t0 = time.perf_counter()
    rhs(u, 0.0, p)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({{"backend": kernels.BACKEND, "seconds": best}}))
"""


def full_rhs(n, repeat):
    results = {}
    for disable in ("0", "1"):
        env = dict(os.environ, SPECTRALNS_DISABLE_EXT=disable, SPECTRALNS_THREADS="1")
        out = subprocess.run(
            [sys.executable, "-c", _RHS_SNIPPET.format(n=n, repeat=repeat)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        info = json.loads(out.stdout)
        results[info["backend"]] = info["seconds"]
    line = f"  full rhs n={n:<3}"
    for backend, seconds in sorted(results.items()):
        line += f"  {backend}: {seconds * 1e3:8.3f}ms"
    if "cy" in results and "py" in results:
        line += f"  speedup: {results['py'] / results['cy']:.2f}x"
    print(line)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", default="32,64")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.n.split(",")]
    if _kernels_cy is None:
        print("compiled backend not available; reporting numpy only")
    for n in sizes:
        per_kernel(n, args.repeat)
    print("\nfull right-hand side (backend chosen at import):")
    for n in sizes:
        full_rhs(n, args.repeat)


if __name__ == "__main__":
    main()
