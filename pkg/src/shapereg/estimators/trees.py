"""Rectangular partition estimators: fixed grids, CART-like trees and purely random trees."""
from __future__ import annotations

import math

import numpy as np

from .. import _pykernels, kernels
from ..core import Dataset, HyperRect
from ..errors import InvalidArgument
from ..seeding import as_generator
from .base import GridModel, SplitSpec, TreeModel, tree_arrays_from_nodes

MAX_PRT_DEPTH = 20
MAX_NODES = 1 << 22


def fit_fixed_partition(data: Dataset, cuts_per_dim) -> GridModel:
    """Product grid with cut lists per coordinate; cells are ``(u, u']`` boxes."""
    if len(cuts_per_dim) != data.d:
        raise InvalidArgument(f"need one cut list per coordinate ({data.d}), got {len(cuts_per_dim)}")
    cuts = []
    for k, c in enumerate(cuts_per_dim):
        c = np.asarray(c, dtype=np.float64).reshape(-1)
        if c.size and not (np.all(c > 0.0) and np.all(c < 1.0)):
            raise InvalidArgument(f"cuts of coordinate {k} must lie strictly inside (0, 1)")
        if c.size > 1 and not np.all(np.diff(c) > 0):
            raise InvalidArgument(f"cuts of coordinate {k} must be strictly increasing")
        cuts.append(c)
    return GridModel(data, cuts)


def uniform_cuts(n_cells: int) -> list[float]:
    """Cut positions of ``n_cells`` equal intervals of [0, 1]."""
    return [j / n_cells for j in range(1, n_cells)]


def fit_uniform_grid(data: Dataset, n_cells_per_dim: int) -> GridModel:
    return fit_fixed_partition(data, [uniform_cuts(n_cells_per_dim)] * data.d)


# CART-like growth


def cart_cost(data: Dataset, cell: HyperRect, split: SplitSpec) -> float:
    """Sum over both children of the within-child mean squared deviation."""
    inside = data.x[cell.contains(data.x)] if data.n else data.x
    ys = data.y[cell.contains(data.x)] if data.n else data.y
    go_left = inside[:, split.p] <= split.threshold
    total = 0.0
    for part in (ys[go_left], ys[~go_left]):
        if part.size == 0:
            raise InvalidArgument("both children of the split must contain sample points")
        total += float(np.sum((part - part.mean()) ** 2)) / part.size
    return total


def _best_custom(data, idx, rect, m, beta, cost):
    x = data.x[idx]
    order = np.argsort(x, axis=0, kind="stable").T.copy()
    sm, cands = _pykernels.cart_candidates(x, order, rect.lower, rect.upper, m, beta)
    sub = Dataset(x, data.y[idx])
    best = (math.inf, -1, 0.0)
    for p, (_, ts) in enumerate(cands):
        for t in ts:
            c = float(cost(sub, rect, SplitSpec.at(rect, p, float(t))))
            if c < best[0]:
                best = (c, p, float(t))
    return sm, best[1] >= 0, best[1], best[2]


def fit_cart_like(data: Dataset, m: int, beta: float = 2.0, cost=None) -> TreeModel:
    """Grow the shape-regular CART-like tree.

    A cell with at least one split leaving ``m`` points on each side is
    split at the cheapest such split whose children are both ``beta``-regular;
    when none is, the largest side is halved (children that end up as leaves
    carry ``fallback=True``).  Cells admitting no ``m``-split are leaves.

    ``cost(data_in_cell, cell, split)`` defaults to the CART sum of child
    mean squared deviations, which runs in the compiled kernel.  Candidate
    thresholds are one per gap between distinct in-cell coordinates; ties go
    to the smallest cost, then coordinate, then threshold.
    """
    if int(m) != m or m < 1:
        raise InvalidArgument("m must be a positive integer")
    if m > data.n:
        raise InvalidArgument(f"m = {m} exceeds the sample size n = {data.n}")
    if not beta >= 2.0:
        raise InvalidArgument("beta must be >= 2")
    m = int(m)
    d = data.d
    root = HyperRect.unit(d, half_open=True)
    # node record: lower, upper, p, t, left, right, from_fallback
    nodes = [[root.lower, root.upper, -1, 0.0, -1, -1, False]]
    members = [np.arange(data.n)]
    i = 0
    while i < len(nodes):
        lo, up = nodes[i][0], nodes[i][1]
        idx = members[i]
        rect = HyperRect(lo, up, half_open=True)
        if cost is None:
            x = data.x[idx]
            order = np.argsort(x, axis=0, kind="stable").T.copy()
            sm, found, p, t, _ = kernels.cart_scan(x, data.y[idx], order, lo, up, m, float(beta))
        else:
            sm, found, p, t = _best_custom(data, idx, rect, m, float(beta), cost)
        members[i] = None
        if not sm:
            i += 1
            continue
        fallback = not found
        if fallback:
            sides = up - lo
            p = int(np.argmax(sides))
            t = lo[p] + 0.5 * sides[p]
        go_left = data.x[idx, p] <= t
        lup = up.copy()
        lup[p] = t
        rlo = lo.copy()
        rlo[p] = t
        nodes[i][2:6] = [int(p), float(t), len(nodes), len(nodes) + 1]
        nodes.append([lo, lup, -1, 0.0, -1, -1, fallback])
        nodes.append([rlo, up, -1, 0.0, -1, -1, fallback])
        members.append(idx[go_left])
        members.append(idx[~go_left])
        i += 1
    arrays = list(tree_arrays_from_nodes(nodes, d))
    left = arrays[2]
    arrays[6] = arrays[6] & (left < 0)
    params = {"m": m, "beta": float(beta), "cost": "cart" if cost is None else getattr(cost, "__name__", "custom")}
    return TreeModel(data, params, "CartLike", *arrays)


# purely random trees


def _full_random_tree(data: Dataset, N: int, rng, centered: bool, method: str) -> TreeModel:
    if int(N) != N or N < 0:
        raise InvalidArgument("N must be a nonnegative integer")
    if N > MAX_PRT_DEPTH:
        raise InvalidArgument(f"a full tree of depth N = {N} has 2^N leaves; N must be <= {MAX_PRT_DEPTH}")
    d = data.d
    total = (1 << (N + 1)) - 1
    lower = np.zeros((total, d))
    upper = np.ones((total, d))
    feature = np.full(total, -1, dtype=np.int64)
    threshold = np.zeros(total)
    left = np.full(total, -1, dtype=np.int64)
    right = np.full(total, -1, dtype=np.int64)
    for level in range(N):
        ids = np.arange((1 << level) - 1, (1 << (level + 1)) - 1)
        p = rng.integers(d, size=ids.size)
        s = np.full(ids.size, 0.5) if centered else rng.random(ids.size)
        a = lower[ids, p]
        b = upper[ids, p]
        cut = a + (b - a) * s
        feature[ids] = p
        threshold[ids] = cut
        li = 2 * ids + 1
        ri = 2 * ids + 2
        left[ids] = li
        right[ids] = ri
        lower[li] = lower[ids]
        upper[li] = upper[ids]
        upper[li, p] = cut
        lower[ri] = lower[ids]
        upper[ri] = upper[ids]
        lower[ri, p] = cut
    return TreeModel(data, {"N": int(N)}, method, feature, threshold, left, right, lower, upper)


def fit_centered_tree(N: int, data: Dataset, seed) -> TreeModel:
    """N rounds of midpoint splits along independently uniform coordinates."""
    return _full_random_tree(data, N, as_generator(seed), True, "CenteredTree")


def fit_uniform_tree(N: int, data: Dataset, seed) -> TreeModel:
    """N rounds of splits at uniform positions along independently uniform coordinates."""
    return _full_random_tree(data, N, as_generator(seed), False, "UniformTree")


def fit_mondrian(lifetime: float, data: Dataset, seed) -> TreeModel:
    """Mondrian partition of [0, 1]^d pruned at ``lifetime``.

    Each cell draws its split time as its birth time plus an exponential
    with rate equal to its side-length sum; cells whose time exceeds the
    lifetime are leaves.  The split coordinate is drawn proportionally to
    side length and the position uniformly along that side.  Cells are
    processed generation by generation, so the draw order is fixed.
    """
    if not (lifetime >= 0 and math.isfinite(lifetime)):
        raise InvalidArgument("lifetime must be finite and >= 0")
    rng = as_generator(seed)
    d = data.d
    lower = [np.zeros(d)]
    upper = [np.ones(d)]
    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    birth = [0.0]
    gen = [0]
    while gen:
        cur = np.asarray(gen)
        lo = np.asarray([lower[i] for i in cur])
        up = np.asarray([upper[i] for i in cur])
        e = rng.exponential(size=cur.size)
        uc = rng.random(cur.size)
        upos = rng.random(cur.size)
        sides = up - lo
        cum = np.cumsum(sides, axis=1)
        rate = cum[:, d - 1]
        t = np.asarray([birth[i] for i in cur]) + e / rate
        nxt = []
        for j, node in enumerate(cur):
            if not (lifetime > 0 and t[j] <= lifetime):
                continue
            target = uc[j] * rate[j]
            p = min(int(np.sum(cum[j] <= target)), d - 1)
            cut = lo[j, p] + sides[j, p] * upos[j]
            li = len(lower)
            lup = up[j].copy()
            lup[p] = cut
            rlo = lo[j].copy()
            rlo[p] = cut
            lower += [lo[j], rlo]
            upper += [lup, up[j]]
            feature += [-1, -1]
            threshold += [0.0, 0.0]
            left += [-1, -1]
            right += [-1, -1]
            birth += [float(t[j]), float(t[j])]
            feature[node] = p
            threshold[node] = cut
            left[node] = li
            right[node] = li + 1
            nxt += [li, li + 1]
            if len(lower) > MAX_NODES:
                raise InvalidArgument("Mondrian partition too large; lower the lifetime")
        gen = nxt
    return TreeModel(
        data, {"lifetime": float(lifetime)}, "Mondrian",
        np.asarray(feature), np.asarray(threshold), np.asarray(left), np.asarray(right),
        np.asarray(lower), np.asarray(upper),
    )
