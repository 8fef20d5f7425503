"""Backend comparison: compiled kernels vs the pure-numpy fallback.

The kernel backend is fixed at import time by MEMDRIFT_BACKEND, so each
measurement runs in a fresh subprocess. Reports wall time per time step for
a desk-scale 1D sweep and a small 2D sweep, plus the speedup ratio.

Usage: python3 benchmarks/bench_backends.py [--steps N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
from memdrift import config as cf
from memdrift import solver as sv
from memdrift._kernels import BACKEND

case = sys.argv[1]
steps = int(sys.argv[2])
overrides = {"time": {"steps_per_cycle": str(steps)},
             "protocol.right": {"cycles": "1"}}
if case == "2d":
    overrides["geometry"] = {"dimension": "2", "contact_config": "mixed",
                             "h_e": "1e-7", "nx": "48", "nz": "6"}
cfg = cf.load_config(None, environ={}, overrides=overrides)
mesh, dev, grid, settings, t_final, _ = cf.build_simulation(cfg)
# warm: equilibrium solve triggers every kernel once
t0 = time.time()
traj, res = sv.run_sweep(mesh, dev, grid, settings, t_final_s=t_final)
wall = time.time() - t0
print(json.dumps({"backend": BACKEND, "case": case, "cells": mesh.n_cells,
                  "steps": res.n_steps, "wall_s": wall,
                  "per_step_ms": 1e3 * wall / res.n_steps}))
"""


def measure(backend: str, case: str, steps: int) -> dict:
    env = dict(os.environ, MEMDRIFT_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, case, str(steps)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=40, help="time steps per case")
    args = ap.parse_args()

    print(f"{'case':<6} {'backend':<8} {'cells':>6} {'steps':>6} {'wall_s':>8} {'ms/step':>9}")
    ratios = {}
    for case in ("1d", "2d"):
        for backend in ("numba", "numpy"):
            r = measure(backend, case, args.steps)
            print(
                f"{r['case']:<6} {r['backend']:<8} {r['cells']:>6} {r['steps']:>6} "
                f"{r['wall_s']:>8.2f} {r['per_step_ms']:>9.2f}"
            )
            ratios.setdefault(case, {})[r["backend"]] = r["per_step_ms"]
    for case, d in ratios.items():
        if "numba" in d and "numpy" in d:
            print(f"{case}: numpy/numba per-step ratio = {d['numpy'] / d['numba']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
