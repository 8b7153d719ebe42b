"""Time the numba kernels against their numpy twins, then a full train step
under each backend (the step runs in a subprocess so DSPTSC_DISABLE_NUMBA
takes effect at import).

    python3 benchmarks/bench_kernels.py [--repeat 20] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from dsptsc import _kernels

STEP_SNIPPET = """
import time, numpy as np
from dsptsc import _kernels, ops
from dsptsc.architectures import ArchConfig, build_model
from dsptsc.tensor import GradContext
arch, T, B, reps = {arch!r}, {T}, {B}, {reps}
m = build_model(ArchConfig(arch, series_length=T), seed=0)
x = np.random.default_rng(0).standard_normal((B, 1, T)).astype(np.float32)
y = np.arange(B) % 2
def step():
    with GradContext() as ctx:
        loss = ops.softmax_cross_entropy(m.forward(x, mode="train")[0], y)
    ctx.backward(loss)
step()
t0 = time.perf_counter()
for _ in range(reps):
    step()
print(_kernels.BACKEND, (time.perf_counter() - t0) / reps)
"""


def kernel_cases(rng):
    B, C, T = 64, 32, 150
    xpad = rng.standard_normal((B, C, T + 39)).astype(np.float32)
    cols = _kernels.im2col_np(xpad, 40, 1, T)
    w = rng.standard_normal((C, 20)).astype(np.float32)
    xdw = rng.standard_normal((B, C, T + 38)).astype(np.float32)
    g = rng.standard_normal((B, C, T)).astype(np.float32)
    xmp = rng.standard_normal((B, C, T + 2)).astype(np.float32)
    _, idx = _kernels.maxpool_fwd_np(xmp, 3, T)
    return {
        "im2col K=40": ("im2col", (xpad, 40, 1, T)),
        "col2im K=40": ("col2im", (cols, B, C, T, 40, 1, T + 39)),
        "depthwise_fwd K=20 d=2": ("depthwise_fwd", (xdw, w, 2, T)),
        "depthwise_bwd K=20 d=2": ("depthwise_bwd", (xdw, w, g, 2)),
        "maxpool_fwd": ("maxpool_fwd", (xmp, 3, T)),
        "maxpool_bwd": ("maxpool_bwd", (g, idx, 3, T + 2)),
        "channel_l2": ("channel_l2", (g,)),
    }


def bench_kernels(repeat: int) -> list[dict]:
    if not _kernels._HAVE_NUMBA:
        print("numba is not installed; kernel comparison skipped")
        return []
    rng = np.random.default_rng(0)
    rows = []
    for label, (name, args) in kernel_cases(rng).items():
        f_np = getattr(_kernels, name + "_np")
        f_nb = getattr(_kernels, name + "_nb")
        f_nb(*args)  # compile outside the timing
        a, b = f_np(*args), f_nb(*args)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        err = max(float(np.max(np.abs(np.asarray(u, np.float64) - np.asarray(v, np.float64))))
                  for u, v in zip(a, b))
        t_np = min(timeit.repeat(lambda: f_np(*args), number=1, repeat=repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*args), number=1, repeat=repeat))
        rows.append({"kernel": label, "numpy_ms": 1e3 * t_np, "numba_ms": 1e3 * t_nb,
                     "speedup": t_np / t_nb, "max_abs_diff": err})
    return rows


def bench_steps(reps: int) -> list[dict]:
    rows = []
    for arch, T in (("lite", 150), ("inception", 150)):
        r = {"arch": arch, "T": T, "batch": 16}
        for flag in ("0", "1"):
            env = dict(os.environ, DSPTSC_DISABLE_NUMBA=flag)
            code = STEP_SNIPPET.format(arch=arch, T=T, B=16, reps=reps)
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                 text=True, check=True).stdout.split()
            r[f"{out[0]}_step_ms"] = 1e3 * float(out[1])
        rows.append(r)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--step-reps", type=int, default=5)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)
    kernels = bench_kernels(args.repeat)
    print(f"{'kernel':26s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'max diff':>10s}")
    for r in kernels:
        print(f"{r['kernel']:26s} {r['numpy_ms']:10.3f} {r['numba_ms']:10.3f} {r['speedup']:8.1f}x "
              f"{r['max_abs_diff']:10.2e}")
    steps = bench_steps(args.step_reps)
    print(f"\n{'train step (B=16, T=150)':26s} {'numpy ms':>10s} {'numba ms':>10s}")
    for r in steps:
        print(f"{r['arch']:26s} {r.get('numpy_step_ms', float('nan')):10.1f} "
              f"{r.get('numba_step_ms', float('nan')):10.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": kernels, "steps": steps}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
