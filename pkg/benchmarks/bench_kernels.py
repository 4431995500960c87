"""Compare the compiled and pure-Python strand integrators.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--span 40]

Each backend integrates the same strands; the script reports the best
wall time per run, the speed-up and the largest disagreement between the
two trajectories at common sample points.
"""

import argparse
import time

import numpy as np

from slcones import kernels
from slcones.cone2 import derive_params
from slcones.strands import initial_state, integrate_strand

CASES = [(1.0, 0.3), (0.4, -0.6), (1.3, 0.9)]


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run(repeat=5, span=40.0, tol=1e-12):
    try:
        kernels.get_backend("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return []
    rows = []
    sample = np.linspace(0.0, span, 257)
    for theta, level in CASES:
        coeffs = derive_params(theta, level, 0.0).beta_coeffs
        init = initial_state(coeffs, level)
        res = {}
        for name in ("cython", "python"):
            res[name] = _time(lambda n=name: integrate_strand(coeffs, init, (0.0, span),
                                                            tol=tol, backend=n), repeat)
        (tc, trc), (tp, trp) = res["cython"], res["python"]
        diff = float(np.max(np.abs(trc(sample)[0] - trp(sample)[0])))
        rows.append((theta, level, trc.n_steps, tc, tp, tp / tc, diff))
    print(f"{'theta':>6} {'B':>6} {'steps':>7} {'cython[s]':>10} {'python[s]':>10} "
          f"{'speedup':>8} {'max diff':>10}")
    for th, lv, n, tc, tp, sp, d in rows:
        print(f"{th:6.2f} {lv:6.2f} {n:7d} {tc:10.4f} {tp:10.4f} {sp:8.1f} {d:10.2e}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--span", type=float, default=40.0)
    args = ap.parse_args()
    run(args.repeat, args.span)
