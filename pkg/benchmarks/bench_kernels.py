"""Time the compiled and pure-Python kernel backends on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat R] [--quick]

Each row reports the best-of-R wall time per call for both backends, the
speedup, and the relative difference between their results.
"""
import argparse
import importlib
import math
import sys
import timeit

import numpy as np


def _cases(py, quick):
    order = 32 if quick else 100
    nodes, logw = py.laguerre_rule(order)
    weights = np.exp(logw)
    terms = 128 if quick else 512
    return [
        ("lgamma(44.5)", lambda k: k.lgamma(44.5)),
        ("lower_gamma(3.5, 2.0)", lambda k: k.lower_gamma(3.5, 2.0)),
        ("e1_scaled(0.37)", lambda k: k.e1_scaled(0.37)),
        (f"laguerre_rule({order})", lambda k: k.laguerre_rule(order)[0][-1]),
        (f"ncx2_cdf(40, 44.3, {terms})", lambda k: k.ncx2_cdf(40.0, 44.3, terms)),
        (f"bob_sum(order {order}, {terms} terms)", lambda k: k.bob_sum(nodes, logw, 1.5, 44.3, 3.2e4, terms)),
        (f"willie_sum(order {order}, split)", lambda k: k.willie_sum(nodes, weights, 3.6e5, 2.2e-3, 1.0)),
    ]


def run(repeat: int, quick: bool):
    py = importlib.import_module("ssacc._pykernels")
    try:
        cy = importlib.import_module("ssacc._ckernels")
    except ImportError:
        print("compiled backend not built; only the pure-Python timings are shown")
        cy = None
    rows = []
    for name, fn in _cases(py, quick):
        number = 1 if quick else 5
        t_py = min(timeit.repeat(lambda: fn(py), number=number, repeat=repeat)) / number
        v_py = float(fn(py))
        if cy is None:
            rows.append((name, t_py, math.nan, math.nan, math.nan))
            continue
        t_cy = min(timeit.repeat(lambda: fn(cy), number=number * 20, repeat=repeat)) / (number * 20)
        v_cy = float(fn(cy))
        rel = abs(v_cy - v_py) / max(abs(v_py), 1e-300)
        rows.append((name, t_py, t_cy, t_py / t_cy, rel))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python [s]':>11}  {'cython [s]':>11}  {'speedup':>8}  {'rel diff':>9}")
    for name, t_py, t_cy, sp, rel in rows:
        print(f"{name:<{width}}  {t_py:11.3e}  {t_cy:11.3e}  {sp:8.1f}  {rel:9.1e}")
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small orders, one call per timing")
    args = ap.parse_args(argv)
    rows = run(args.repeat, args.quick)
    bad = [r[0] for r in rows if r[4] > 1e-11]
    if bad:
        print("backends disagree on: " + ", ".join(bad), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
