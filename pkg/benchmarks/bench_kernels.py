"""Compiled versus pure-Python kernels.

Run from the repository root after ``pip install -e . --no-build-isolation``::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on both backends with identical inputs and the outputs
are compared for bitwise equality.
"""
import argparse
import time

import numpy as np

from shapereg import _pykernels

try:
    from shapereg import _ckernels
except ImportError:  # built without the extension
    _ckernels = None


def _cases(rng):
    n, d = 4000, 2
    x = rng.random((n, d))
    y = x.sum(axis=1) + 0.5 * rng.standard_normal(n)
    pts = rng.random((20000, d))
    sites = rng.random((200, d))

    # a CART-like tree from the compiled fit is reused as tree_apply input
    from shapereg.core import Dataset
    from shapereg.estimators import fit_cart_like

    tree = fit_cart_like(Dataset(x, y), 20, 2.0)
    order = np.argsort(x, axis=0, kind="stable").T.copy()
    lower, upper = np.zeros(d), np.ones(d)

    N, reps = 64, 20000
    dirs = rng.integers(d, size=(reps, N))
    fracs = rng.random((reps, N))
    budget = 96
    expo = rng.exponential(size=(reps, budget))
    uc, up = rng.random((reps, budget)), rng.random((reps, budget))
    half = np.full(d, 0.5)
    return {
        "nearest_site": (pts, sites),
        "tree_apply": (pts, tree.feature, tree.threshold, tree.left, tree.right),
        "cart_scan": (x, y, order, lower, upper, 20, 2.0),
        "prt_paths": (half, dirs, fracs),
        "prt_sides": (half, dirs, fracs),
        "mondrian_paths": (half, 10.0, expo, uc, up),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


def _best(fn, args, repeat):
    t = []
    for _ in range(repeat):
        s = time.perf_counter()
        out = fn(*args)
        t.append(time.perf_counter() - s)
    return min(t), out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    cases = _cases(np.random.default_rng(args.seed))
    print(f"{'kernel':<16}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}  equal")
    for name, a in cases.items():
        tp, op = _best(getattr(_pykernels, name), a, args.repeat)
        tc, oc = _best(getattr(_ckernels, name), a, args.repeat)
        print(f"{name:<16}{tp * 1e3:>14.2f}{tc * 1e3:>14.2f}{tp / tc:>10.1f}  {_same(op, oc)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
