"""Pure numpy implementations of the hot kernels.

Each function mirrors its counterpart in ``_ckernels.pyx`` operation by
operation (same accumulation order, no fused multiply-add), so both backends
return bit-identical results for identical inputs.
"""
import numpy as np

BACKEND = "python"

_CHUNK = 2048


def nearest_site(points, sites):
    """Index of the nearest site for each point; ties go to the larger index."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    sites = np.ascontiguousarray(sites, dtype=np.float64)
    q, d = points.shape
    m = sites.shape[0]
    out = np.empty(q, dtype=np.int64)
    for start in range(0, q, _CHUNK):
        block = points[start:start + _CHUNK]
        acc = np.zeros((block.shape[0], m))
        for k in range(d):
            diff = block[:, k:k + 1] - sites[None, :, k]
            acc += diff * diff
        # argmin over reversed columns picks the last minimiser
        out[start:start + _CHUNK] = m - 1 - np.argmin(acc[:, ::-1], axis=1)
    return out


def tree_apply(points, feature, threshold, left, right):
    """Leaf node id reached by each point; ``x[f] <= t`` descends left."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    node = np.zeros(points.shape[0], dtype=np.int64)
    rows = np.arange(points.shape[0])
    active = left[node] >= 0
    while active.any():
        idx = rows[active]
        cur = node[idx]
        go_left = points[idx, feature[cur]] <= threshold[cur]
        node[idx] = np.where(go_left, left[cur], right[cur])
        active[idx] = left[node[idx]] >= 0
    return node


def cart_candidates(x, order, lower, upper, m, beta):
    """Candidate splits of one cell, one per gap of distinct coordinates.

    The candidate for a gap is its midpoint, clamped into the beta-feasible
    cut interval when needed (any cut inside a gap induces the same
    partition of the sample).  Returns ``(sm_nonempty, cands)`` where
    ``cands[p]`` is a pair ``(nl, t)`` of left-child counts and absolute
    thresholds, sorted by threshold, restricted to beta-feasible splits
    leaving at least ``m`` points on each side.
    """
    c, d = x.shape
    sides = upper - lower
    sm_nonempty = False
    cands = [(np.empty(0, dtype=np.int64), np.empty(0)) for _ in range(d)]
    if c < 2 * m:
        return False, cands
    for p in range(d):
        xs = x[order[p], p]
        nl = np.arange(m, c - m + 1)
        a = xs[nl - 1]
        b = xs[nl]
        distinct = a < b
        if not distinct.any():
            continue
        sm_nonempty = True
        nl = nl[distinct]
        a = a[distinct]
        b = b[distinct]
        others = np.delete(sides, p)
        omax = others.max() if others.size else -np.inf
        omin = others.min() if others.size else np.inf
        # beta-feasible cut positions form an interval
        t_lo = max(lower[p] + omax / beta, upper[p] - beta * omin)
        t_hi = min(lower[p] + beta * omin, upper[p] - omax / beta)
        lo_b = np.maximum(a, t_lo)
        hi_b = np.minimum(b, t_hi)
        keep = lo_b <= hi_b
        t = np.minimum(np.maximum(0.5 * (a + b), lo_b), hi_b)
        at_b = t >= b
        t = np.where(at_b, lo_b, t)
        keep &= ~(at_b & (lo_b >= b))
        sl = t - lower[p]
        sr = upper[p] - t
        ok = keep & (np.maximum(omax, sl) <= beta * np.minimum(omin, sl)) & (
            np.maximum(omax, sr) <= beta * np.minimum(omin, sr)
        )
        cands[p] = (nl[ok], t[ok])
    return sm_nonempty, cands


def cart_scan(x, y, order, lower, upper, m, beta):
    """Best CART split of one cell among :func:`cart_candidates`.

    Returns ``(sm_nonempty, found, p, threshold, cost)`` where ``sm_nonempty``
    tells whether any split leaves at least ``m`` points on both sides and
    ``found`` whether such a split also keeps both children beta-regular.
    Ties go to the smallest coordinate, then the smallest threshold.
    """
    c = x.shape[0]
    sm_nonempty, cands = cart_candidates(x, order, lower, upper, m, beta)
    best = (np.inf, -1, 0.0)
    for p, (nl, t) in enumerate(cands):
        if nl.size == 0:
            continue
        ys = y[order[p]]
        s1 = np.cumsum(ys)
        s2 = np.cumsum(ys * ys)
        tot1 = s1[c - 1]
        tot2 = s2[c - 1]
        l1 = s1[nl - 1]
        l2 = s2[nl - 1]
        r1 = tot1 - l1
        r2 = tot2 - l2
        fl = nl.astype(np.float64)
        fr = (c - nl).astype(np.float64)
        cost = (l2 - l1 * l1 / fl) / fl + (r2 - r1 * r1 / fr) / fr
        j = int(np.argmin(cost))
        if cost[j] < best[0]:
            best = (float(cost[j]), p, float(t[j]))
    if best[1] < 0:
        return sm_nonempty, False, -1, 0.0, np.inf
    return True, True, best[1], best[2], best[0]


def prt_paths(x, dirs, fracs, keep_left=None):
    """Follow the cell containing ``x`` through the random split sequence.

    ``dirs[r, i]`` is the split coordinate and ``fracs[r, i]`` the relative
    split position of step ``i`` in replicate ``r``.  When ``keep_left`` is
    given it chooses the retained piece instead of ``x``.  Returns the final
    lower/upper corners and the realised one-sided reductions (new side over
    old side, as computed in floating point).
    """
    dirs = np.ascontiguousarray(dirs, dtype=np.int64)
    fracs = np.ascontiguousarray(fracs, dtype=np.float64)
    reps, steps = dirs.shape
    d = x.shape[0]
    lo = np.zeros((reps, d))
    up = np.ones((reps, d))
    sbar = np.empty((reps, steps))
    rows = np.arange(reps)
    for i in range(steps):
        p = dirs[:, i]
        s = fracs[:, i]
        a = lo[rows, p]
        b = up[rows, p]
        cut = a + (b - a) * s
        left = x[p] <= cut if keep_left is None else np.asarray(keep_left[:, i]) != 0
        up[rows, p] = np.where(left, cut, b)
        lo[rows, p] = np.where(left, a, cut)
        sbar[:, i] = np.where(left, cut - a, b - cut) / (b - a)
    return lo, up, sbar


def prt_sides(x, dirs, fracs, keep_left=None):
    """Side lengths of the cell of ``x`` after the split sequence.

    Unlike ``prt_paths`` the cell is tracked by its side lengths and the
    position of ``x`` relative to the current cell, so deep cells far below
    the floating-point spacing of their corners keep nonzero sides.
    Returns ``(sides, sbar)``.
    """
    dirs = np.ascontiguousarray(dirs, dtype=np.int64)
    fracs = np.ascontiguousarray(fracs, dtype=np.float64)
    reps, steps = dirs.shape
    d = x.shape[0]
    sides = np.ones((reps, d))
    rel = np.tile(np.asarray(x, dtype=np.float64), (reps, 1))
    sbar = np.empty((reps, steps))
    rows = np.arange(reps)
    for i in range(steps):
        p = dirs[:, i]
        s = fracs[:, i]
        r = rel[rows, p]
        left = r <= s if keep_left is None else np.asarray(keep_left[:, i]) != 0
        keep = np.where(left, s, 1.0 - s)
        with np.errstate(divide="ignore", invalid="ignore"):
            moved = np.where(left, r / s, (r - s) / (1.0 - s))
        rel[rows, p] = np.where(np.where(left, s != 0.0, s != 1.0), moved, r)
        sides[rows, p] *= keep
        sbar[:, i] = keep
    return sides, sbar


def mondrian_paths(x, lifetime, expo, ucoord, upos):
    """Cell of ``x`` under a Mondrian process pruned at ``lifetime``.

    ``expo`` holds unit-rate exponential draws, ``ucoord`` and ``upos``
    uniform draws, one column per potential split.  Returns
    ``(lower, upper, n_splits, first_time, exhausted)``.
    """
    expo = np.ascontiguousarray(expo, dtype=np.float64)
    reps, budget = expo.shape
    d = x.shape[0]
    lo = np.zeros((reps, d))
    up = np.ones((reps, d))
    t = np.zeros(reps)
    first = np.zeros(reps)
    nsplit = np.zeros(reps, dtype=np.int64)
    active = np.ones(reps, dtype=bool)
    rows = np.arange(reps)
    for k in range(budget):
        if not active.any():
            break
        r = rows[active]
        sides = up[r] - lo[r]
        cum = np.cumsum(sides, axis=1)
        rate = cum[:, d - 1]
        t[r] = t[r] + expo[r, k] / rate
        if k == 0:
            first[r] = expo[r, k] / rate
        alive = t[r] <= lifetime
        stopped = r[~alive]
        active[stopped] = False
        r = r[alive]
        if r.size == 0:
            break
        cum = cum[alive]
        sides = sides[alive]
        target = ucoord[r, k] * cum[:, d - 1]
        p = np.minimum(np.sum(cum <= target[:, None], axis=1), d - 1)
        a = lo[r, p]
        cut = a + sides[np.arange(r.size), p] * upos[r, k]
        left = x[p] <= cut
        up[r, p] = np.where(left, cut, up[r, p])
        lo[r, p] = np.where(left, a, cut)
        nsplit[r] += 1
    return lo, up, nsplit, first, active.copy()
