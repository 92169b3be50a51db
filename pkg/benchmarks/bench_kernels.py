"""Time the hot paths under both backends.

Each backend runs in its own interpreter because the choice is fixed at
import time. Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from streamharvest import BACKEND, OptimizationProblem, TwoPatchScenario, solve_equilibrium, sweep_theta, three_one_one
from streamharvest.optimize import simplex_grid_search

repeat = int(sys.argv[1])
tree = three_one_one(1.0, 2.0, 50.0, 1.0)
fig2 = TwoPatchScenario.homogeneous(3.0, 1.0, 1.0, 3.0, 4.0)
grid = OptimizationProblem(tree, 4.0, "biomass")
cases = {
    "solve_equilibrium (5 patches)": lambda: solve_equilibrium(tree, [0, 0, 0, 4, 0]),
    "sweep_theta yield (res 1e-3)": lambda: sweep_theta(fig2, "yield", 1e-3),
    "simplex grid (5 patches, k=12)": lambda: simplex_grid_search(grid, 12),
}
t0 = time.perf_counter()
for fn in cases.values():
    fn()
warm = time.perf_counter() - t0
out = {"backend": BACKEND, "warmup_s": warm}
for name, fn in cases.items():
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, STREAMHARVEST_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    names = [k for k in fast if k not in ("backend", "warmup_s")]
    print(f"{'case':34s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>9s}")
    for name in names:
        print(f"{name:34s} {fast[name]:11.4f} {slow[name]:11.4f} {slow[name] / fast[name]:8.1f}x")
    print(f"{'first call incl. compile/cache load':34s} {fast['warmup_s']:11.4f} {slow['warmup_s']:11.4f}")


if __name__ == "__main__":
    main()
