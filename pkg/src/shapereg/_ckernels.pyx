# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  See ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

BACKEND = "cython"


def nearest_site(points, sites):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] S = np.ascontiguousarray(sites, dtype=np.float64)
    cdef Py_ssize_t q = P.shape[0], d = P.shape[1], m = S.shape[0]
    out = np.empty(q, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i, j, k, best_j
    cdef double acc, diff, best
    with nogil:
        for i in range(q):
            best = INFINITY
            best_j = 0
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = P[i, k] - S[j, k]
                    acc = acc + diff * diff
                if acc <= best:
                    best = acc
                    best_j = j
            o[i] = best_j
    return out


def tree_apply(points, feature, threshold, left, right):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const cnp.int64_t[::1] F = np.ascontiguousarray(feature, dtype=np.int64)
    cdef const double[::1] T = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef const cnp.int64_t[::1] L = np.ascontiguousarray(left, dtype=np.int64)
    cdef const cnp.int64_t[::1] R = np.ascontiguousarray(right, dtype=np.int64)
    cdef Py_ssize_t q = P.shape[0], i
    cdef cnp.int64_t node
    out = np.empty(q, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    with nogil:
        for i in range(q):
            node = 0
            while L[node] >= 0:
                if P[i, F[node]] <= T[node]:
                    node = L[node]
                else:
                    node = R[node]
            o[i] = node
    return out


def cart_scan(x, y, order, lower, upper, Py_ssize_t m, double beta):
    cdef const double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] O = np.ascontiguousarray(order, dtype=np.int64)
    cdef const double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t c = X.shape[0], d = X.shape[1]
    if c < 2 * m:
        return False, False, -1, 0.0, np.inf
    cdef double[::1] s1 = np.empty(c)
    cdef double[::1] s2 = np.empty(c)
    cdef double[::1] xs = np.empty(c)
    cdef Py_ssize_t p, k, i, nl, best_p = -1
    cdef double acc1, acc2, yv, a, b, t, omax, omin, sl, sr, side
    cdef double t_lo, t_hi, lo_b, hi_b
    cdef double l1, l2, r1, r2, fl, fr, cost, tot1, tot2
    cdef double best_cost = INFINITY, best_t = 0.0
    cdef bint sm = False
    with nogil:
        for p in range(d):
            acc1 = 0.0
            acc2 = 0.0
            for i in range(c):
                yv = Y[O[p, i]]
                acc1 = acc1 + yv
                acc2 = acc2 + yv * yv
                s1[i] = acc1
                s2[i] = acc2
                xs[i] = X[O[p, i], p]
            tot1 = s1[c - 1]
            tot2 = s2[c - 1]
            omax = -INFINITY
            omin = INFINITY
            for k in range(d):
                if k != p:
                    side = up[k] - lo[k]
                    if side > omax:
                        omax = side
                    if side < omin:
                        omin = side
            t_lo = max(lo[p] + omax / beta, up[p] - beta * omin)
            t_hi = min(lo[p] + beta * omin, up[p] - omax / beta)
            for nl in range(m, c - m + 1):
                a = xs[nl - 1]
                b = xs[nl]
                if not (a < b):
                    continue
                sm = True
                lo_b = max(a, t_lo)
                hi_b = min(b, t_hi)
                if not (lo_b <= hi_b):
                    continue
                t = min(max(0.5 * (a + b), lo_b), hi_b)
                if t >= b:
                    if lo_b >= b:
                        continue
                    t = lo_b
                sl = t - lo[p]
                sr = up[p] - t
                if not (max(omax, sl) <= beta * min(omin, sl)):
                    continue
                if not (max(omax, sr) <= beta * min(omin, sr)):
                    continue
                l1 = s1[nl - 1]
                l2 = s2[nl - 1]
                r1 = tot1 - l1
                r2 = tot2 - l2
                fl = <double> nl
                fr = <double> (c - nl)
                cost = (l2 - l1 * l1 / fl) / fl + (r2 - r1 * r1 / fr) / fr
                if cost < best_cost:
                    best_cost = cost
                    best_p = p
                    best_t = t
    if best_p < 0:
        return bool(sm), False, -1, 0.0, np.inf
    return True, True, int(best_p), float(best_t), float(best_cost)


def prt_paths(x, dirs, fracs, keep_left=None):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] D = np.ascontiguousarray(dirs, dtype=np.int64)
    cdef const double[:, ::1] S = np.ascontiguousarray(fracs, dtype=np.float64)
    cdef Py_ssize_t reps = D.shape[0], steps = D.shape[1], d = xv.shape[0]
    cdef bint branch = keep_left is not None
    kl_arr = np.ascontiguousarray(keep_left if branch else np.zeros((reps, steps)), dtype=np.uint8)
    cdef const cnp.uint8_t[:, ::1] KL = kl_arr
    lo_arr = np.zeros((reps, d))
    up_arr = np.ones((reps, d))
    sbar_arr = np.empty((reps, steps))
    cdef double[:, ::1] lo = lo_arr
    cdef double[:, ::1] up = up_arr
    cdef double[:, ::1] sb = sbar_arr
    cdef Py_ssize_t r, i, p
    cdef double a, b, s, cut
    cdef bint left
    with nogil:
        for r in range(reps):
            for i in range(steps):
                p = D[r, i]
                s = S[r, i]
                a = lo[r, p]
                b = up[r, p]
                cut = a + (b - a) * s
                if branch:
                    left = KL[r, i] != 0
                else:
                    left = xv[p] <= cut
                if left:
                    up[r, p] = cut
                    sb[r, i] = (cut - a) / (b - a)
                else:
                    lo[r, p] = cut
                    sb[r, i] = (b - cut) / (b - a)
    return lo_arr, up_arr, sbar_arr


def prt_sides(x, dirs, fracs, keep_left=None):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] D = np.ascontiguousarray(dirs, dtype=np.int64)
    cdef const double[:, ::1] S = np.ascontiguousarray(fracs, dtype=np.float64)
    cdef Py_ssize_t reps = D.shape[0], steps = D.shape[1], d = xv.shape[0]
    cdef bint branch = keep_left is not None
    kl_arr = np.ascontiguousarray(keep_left if branch else np.zeros((reps, steps)), dtype=np.uint8)
    cdef const cnp.uint8_t[:, ::1] KL = kl_arr
    sides_arr = np.ones((reps, d))
    rel_arr = np.tile(np.asarray(x, dtype=np.float64), (reps, 1))
    sbar_arr = np.empty((reps, steps))
    cdef double[:, ::1] sd = sides_arr
    cdef double[:, ::1] rel = rel_arr
    cdef double[:, ::1] sb = sbar_arr
    cdef Py_ssize_t r, i, p
    cdef double s, q, keep
    cdef bint left
    with nogil:
        for r in range(reps):
            for i in range(steps):
                p = D[r, i]
                s = S[r, i]
                q = rel[r, p]
                if branch:
                    left = KL[r, i] != 0
                else:
                    left = q <= s
                if left:
                    keep = s
                    if s != 0.0:
                        rel[r, p] = q / s
                else:
                    keep = 1.0 - s
                    if s != 1.0:
                        rel[r, p] = (q - s) / (1.0 - s)
                sd[r, p] = sd[r, p] * keep
                sb[r, i] = keep
    return sides_arr, sbar_arr


def mondrian_paths(x, double lifetime, expo, ucoord, upos):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] E = np.ascontiguousarray(expo, dtype=np.float64)
    cdef const double[:, ::1] UC = np.ascontiguousarray(ucoord, dtype=np.float64)
    cdef const double[:, ::1] UP = np.ascontiguousarray(upos, dtype=np.float64)
    cdef Py_ssize_t reps = E.shape[0], budget = E.shape[1], d = xv.shape[0]
    lo_arr = np.zeros((reps, d))
    up_arr = np.ones((reps, d))
    first_arr = np.zeros(reps)
    nsplit_arr = np.zeros(reps, dtype=np.int64)
    exhausted_arr = np.zeros(reps, dtype=np.uint8)
    cdef double[:, ::1] lo = lo_arr
    cdef double[:, ::1] up = up_arr
    cdef double[::1] first = first_arr
    cdef cnp.int64_t[::1] ns = nsplit_arr
    cdef cnp.uint8_t[::1] ex = exhausted_arr
    cdef double[::1] cum = np.empty(d)
    cdef Py_ssize_t r, k, j, p
    cdef double t, rate, target, a, cut
    cdef bint alive
    with nogil:
        for r in range(reps):
            t = 0.0
            alive = True
            for k in range(budget):
                rate = 0.0
                for j in range(d):
                    rate = rate + (up[r, j] - lo[r, j])
                    cum[j] = rate
                t = t + E[r, k] / rate
                if k == 0:
                    first[r] = E[r, k] / rate
                if not (t <= lifetime):
                    alive = False
                    break
                target = UC[r, k] * rate
                p = d - 1
                for j in range(d):
                    if target < cum[j]:
                        p = j
                        break
                a = lo[r, p]
                cut = a + (up[r, p] - a) * UP[r, k]
                if xv[p] <= cut:
                    up[r, p] = cut
                else:
                    lo[r, p] = cut
                ns[r] += 1
            if alive:
                ex[r] = 1
    return lo_arr, up_arr, nsplit_arr, first_arr, exhausted_arr.astype(bool)
