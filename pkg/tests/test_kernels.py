import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shapereg import _pykernels, kernels

_ck = pytest.importorskip("shapereg._ckernels")


def _eq(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_eq(u, v) for u, v in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


def test_pure_python_switch():
    env = dict(os.environ, SHAPEREG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import shapereg.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 60))
def test_nearest_site_parity(seed, d, m):
    r = np.random.default_rng(seed)
    pts, sites = r.random((200, d)), r.random((m, d))
    assert _eq(_pykernels.nearest_site(pts, sites), _ck.nearest_site(pts, sites))


def test_nearest_site_ties_larger_index():
    sites = np.array([[0.0], [1.0], [2.0]])
    q = np.array([[0.5], [1.5]])
    assert _ck.nearest_site(q, sites).tolist() == [1, 2]
    assert _pykernels.nearest_site(q, sites).tolist() == [1, 2]


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(2, 15), st.sampled_from([2.0, 2.5, 3.0]))
def test_cart_scan_parity(seed, d, m, beta):
    r = np.random.default_rng(seed)
    n = int(r.integers(2, 120))
    x = np.round(r.random((n, d)), 2)
    y = r.standard_normal(n)
    lo = np.zeros(d)
    up = np.where(r.random(d) < 0.5, 1.0, 0.5 + 0.5 * r.random(d))
    order = np.argsort(x, axis=0, kind="stable").T.copy()
    assert _eq(_pykernels.cart_scan(x, y, order, lo, up, m, beta), _ck.cart_scan(x, y, order, lo, up, m, beta))


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(0, 70), st.booleans(), st.booleans())
def test_prt_parity(seed, d, N, centered, branch):
    r = np.random.default_rng(seed)
    reps = 7
    x = r.random(d)
    dirs = r.integers(d, size=(reps, N))
    fracs = np.full((reps, N), 0.5) if centered else r.random((reps, N))
    keep = r.integers(2, size=(reps, N), dtype=np.uint8) if branch else None
    with np.errstate(all="ignore"):
        for name in ("prt_paths", "prt_sides"):
            assert _eq(getattr(_pykernels, name)(x, dirs, fracs, keep), getattr(_ck, name)(x, dirs, fracs, keep))


@given(st.integers(0, 10_000), st.integers(1, 3), st.floats(0.0, 20.0))
def test_mondrian_paths_parity(seed, d, lifetime):
    r = np.random.default_rng(seed)
    reps, budget = 9, 40
    args = (r.random(d), lifetime, r.exponential(size=(reps, budget)), r.random((reps, budget)), r.random((reps, budget)))
    assert _eq(_pykernels.mondrian_paths(*args), _ck.mondrian_paths(*args))


def test_tree_apply_parity():
    r = np.random.default_rng(1)
    from shapereg.core import Dataset
    from shapereg.estimators import fit_cart_like

    x = r.random((500, 2))
    tree = fit_cart_like(Dataset(x, x.sum(1)), 10)
    pts = r.random((3000, 2))
    a = _pykernels.tree_apply(pts, tree.feature, tree.threshold, tree.left, tree.right)
    b = _ck.tree_apply(pts, tree.feature, tree.threshold, tree.left, tree.right)
    assert _eq(a, b)


def test_centered_sides_exact():
    dirs = np.zeros((1, 40), dtype=np.int64)
    sides, sbar = _ck.prt_sides(np.array([0.3]), dirs, np.full((1, 40), 0.5))
    assert sides[0, 0] == 2.0**-40 and np.all(sbar == 0.5)
