"""Timing comparison of the jit kernels against the pure-numpy fallback.

The kernel path is chosen at import time from the WELLPOLES_NUMBA
environment variable, so each path runs in its own child interpreter.

    python3 benchmarks/bench_kernels.py [--reps N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, sys, time

reps = int(sys.argv[1])
t0 = time.perf_counter()
import wellpoles as wp
from wellpoles.chart import build_chart, working_window
from wellpoles.rootfinder import CountRegion, count_zeros_padded, scan_axis
t_import = time.perf_counter() - t0

spec = wp.PotentialSpec(1.0, 1.5, 2.0)
att = wp.ComplexCoupling.attractive()

# first calls pay any jit compilation; keep them out of the timings
t0 = time.perf_counter()
scan_axis(spec, att, wp.Channel.PLUS)
build_chart(spec, wp.Channel.PLUS, certify=True)
t_warm = time.perf_counter() - t0

def timed(fn, n):
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n

w = working_window(spec)
region = CountRegion(
    lo=complex(-w.re_max, w.im_min), hi=complex(w.re_max, w.im_max),
    coupling=att, channel=wp.Channel.PLUS,
)
results = {
    "numba": wp.USING_NUMBA,
    "import_s": t_import,
    "warmup_s": t_warm,
    "axis_scan_ms": 1e3 * timed(
        lambda: scan_axis(spec, att, wp.Channel.PLUS), 5 * reps),
    "chart_ms": 1e3 * timed(
        lambda: build_chart(spec, wp.Channel.PLUS, certify=False), reps),
    "window_count_ms": 1e3 * timed(
        lambda: count_zeros_padded(region, spec), reps),
}
print(json.dumps(results))
"""


def run_path(numba_flag: str, reps: int) -> dict:
    env = dict(os.environ, WELLPOLES_NUMBA=numba_flag)
    proc = subprocess.run(
        [sys.executable, "-c", _CHILD, str(reps)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=10,
                        help="repetitions per timed operation")
    args = parser.parse_args()

    jit = run_path("1", args.reps)
    pure = run_path("0", args.reps)
    if not jit["numba"]:
        print("note: numba unavailable, both runs used the numpy fallback")

    rows = [
        ("axis scan", "axis_scan_ms"),
        ("chart build", "chart_ms"),
        ("window count", "window_count_ms"),
    ]
    print(f"{'operation':<14} {'jit ms':>10} {'numpy ms':>10} {'speedup':>9}")
    for label, key in rows:
        ratio = pure[key] / jit[key] if jit[key] > 0 else float("inf")
        print(f"{label:<14} {jit[key]:>10.2f} {pure[key]:>10.2f} {ratio:>8.1f}x")
    print(f"\nimport+warmup: jit {jit['import_s'] + jit['warmup_s']:.2f}s, "
          f"numpy {pure['import_s'] + pure['warmup_s']:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
