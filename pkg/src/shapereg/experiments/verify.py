"""Monte Carlo checks of the bound and shape-regularity statements.

Each check returns a report dict with the estimated frequency, the reference
value, the binomial standard error, a boolean verdict, and the per-replicate
``rows`` that the CLI writes to ``records.csv``.
"""
from __future__ import annotations

import math

import numpy as np

from .. import bounds, kernels
from ..core import HyperRect
from ..errors import InvalidArgument
from ..seeding import derive_seed, rng_for
from ..synth import RegressionProblem, generate_with_noise
from .harness import parallel_map


def binomial_stderr(p: float, reps: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / reps)


def _check_reps(replicates):
    if int(replicates) < 1:
        raise InvalidArgument("replicates must be >= 1")
    return int(replicates)


# noise sums over a fixed partition


def _partition_cells(model):
    from ..estimators.base import GridModel, TreeModel

    if isinstance(model, GridModel):
        return model.cell_index, model.value.size
    if isinstance(model, TreeModel):
        return model.apply, model.n_nodes
    raise InvalidArgument("the variance check needs a fixed rectangular partition model")


def verify_variance_bound(partition_model, problem: RegressionProblem, n: int, delta: float,
                          replicates: int, seed: int = 0, v: int | None = None, threads=None) -> dict:
    """Frequency with which the normalised noise sum exceeds the VC bound.

    Per replicate a fresh sample is drawn (the partition is kept fixed) and
    the statistic ``max_cells sum(eps_i) / sqrt(count)`` over nonempty cells
    is compared with ``variance_bound(sigma2, n, v, delta)``; ``v`` defaults
    to ``2d``, the VC dimension of boxes ``(s, t]``.
    """
    reps = _check_reps(replicates)
    lookup, n_cells = _partition_cells(partition_model)
    v = 2 * problem.d if v is None else v
    bound = bounds.variance_bound(problem.sigma2, n, v, delta).value

    def one(rep):
        data, eps = generate_with_noise(problem, n, derive_seed(seed, n, rep, "variance"))
        cell = lookup(data.x)
        sums = np.bincount(cell, weights=eps, minlength=n_cells)
        counts = np.bincount(cell, minlength=n_cells)
        nz = counts > 0
        return float(np.max(sums[nz] / np.sqrt(counts[nz]))) if nz.any() else 0.0

    stat = parallel_map(one, range(reps), threads)
    viol = [s > bound for s in stat]
    freq = sum(viol) / reps
    se = binomial_stderr(freq, reps)
    rows = [{"replicate": r, "statistic": s, "violated": int(b)} for r, (s, b) in enumerate(zip(stat, viol))]
    return {"violation_freq": freq, "bound": bound, "delta": delta, "stderr": se,
            "verdict": freq <= delta, "rows": rows}


# purely random tree paths


def prt_draws(kind: str, N: int, d: int, replicates: int, seed, role: str):
    rng = rng_for(seed, N, 0, f"{role}-{kind}-{d}")
    dirs = rng.integers(d, size=(replicates, N))
    if kind == "centered":
        fracs = np.full((replicates, N), 0.5)
    elif kind == "uniform":
        fracs = rng.random((replicates, N))
    else:
        raise InvalidArgument("tree_kind must be 'uniform' or 'centered'")
    return dirs, fracs


PRT_LAWS = ("point", "branch")


def prt_cells(kind, N, d, replicates, seed, x=None, role="prt", law="point"):
    """Side lengths after ``N`` random-tree steps: ``(sides, sbar)``.

    ``law="point"`` follows the cell containing the fixed point ``x``.
    ``law="branch"`` follows the leaf reached by fair coin flips drawn
    independently of the cuts, so the retained fraction at each step has the
    law of the split position itself.  For a fixed point the retained piece
    is length biased (larger pieces are more likely to contain ``x``).
    """
    if int(N) != N or N < 0:
        raise InvalidArgument("N must be a nonnegative integer")
    if law not in PRT_LAWS:
        raise InvalidArgument(f"law must be one of {PRT_LAWS}")
    reps = _check_reps(replicates)
    x = np.full(d, 0.5) if x is None else np.asarray(x, dtype=np.float64)
    dirs, fracs = prt_draws(kind, int(N), d, reps, seed, role)
    keep = None
    if law == "branch":
        keep = rng_for(seed, N, 0, f"{role}-coins-{kind}-{d}").integers(2, size=(reps, int(N)), dtype=np.uint8)
    return kernels.prt_sides(x, dirs, fracs, keep)


def verify_volume_invariance(tree_kind: str, N: int, d: int, replicates: int, seed: int = 0) -> dict:
    """Largest relative gap between the leaf volume and the product of one-sided reductions.

    The query point is drawn uniformly per replicate.
    """
    reps = _check_reps(replicates)
    xs = rng_for(seed, N, 0, f"volume-x-{tree_kind}-{d}").random((reps, d))
    dirs, fracs = prt_draws(tree_kind, int(N), d, reps, seed, "volume")
    rows = []
    worst = 0.0
    exact = True
    for r in range(reps):
        lo, up, sbar = kernels.prt_paths(xs[r], dirs[r:r + 1], fracs[r:r + 1])
        vol = float(np.prod(up[0] - lo[0]))
        prod = float(np.prod(sbar[0])) if N else 1.0
        rel = abs(vol - prod) / prod
        worst = max(worst, rel)
        if tree_kind == "centered":
            exact &= vol == 2.0 ** (-N)
        rows.append({"replicate": r, "volume": vol, "product": prod, "rel_error": rel})
    out = {"max_rel_error": worst, "rows": rows, "verdict": worst <= 1e-12}
    if tree_kind == "centered":
        out["exact_dyadic"] = exact
        out["verdict"] = out["verdict"] and exact
    return out


def verify_aspect_lower_bound(tree_kind: str, N: int, d: int, replicates: int, seed: int = 0, x=None,
                              law: str = "point") -> dict:
    """Frequency of a large aspect ratio for the random-tree cell of ``x``."""
    if N < d:
        raise InvalidArgument("the aspect lower bounds need N >= d")
    reps = _check_reps(replicates)
    sides, _ = prt_cells(tree_kind, N, d, reps, seed, x, role="aspect", law=law)
    aspect = sides.max(axis=1) / sides.min(axis=1)
    if tree_kind == "uniform":
        threshold, reference_prob = math.exp(math.sqrt(N / d)), 1.0 / 11.0
    else:
        threshold, reference_prob = 2.0 ** math.sqrt(N / d), 1.0 / 14.0
    hit = aspect >= threshold
    p = float(hit.mean())
    se = binomial_stderr(p, reps)
    rows = [{"replicate": r, "aspect": float(a), "hit": int(h)} for r, (a, h) in enumerate(zip(aspect, hit))]
    return {"empirical_prob": p, "threshold": threshold, "reference_prob": reference_prob, "stderr": se,
            "verdict": p >= reference_prob - 3.0 * se, "rows": rows}


def verify_prt_diam_vol(tail_kind: str, N: int, d: int, replicates: int, seed: int = 0,
                        parameter: float = 0.5, x=None, law: str = "branch") -> dict:
    """Empirical frequency of a random-tree tail event against its closed-form bound.

    ``tail_kind`` is one of ``bounds.PRT_KINDS``; the uniform kinds use
    uniform trees and ``centered_diam`` uses centered trees.  The bounds are
    derived for leaves whose retained fractions are distributed as the split
    positions, hence the ``"branch"`` default; ``law="point"`` measures the
    cell of a fixed point instead (see ``prt_cells``).
    """
    ref = bounds.prt_tail_bounds(tail_kind, N, d, parameter)
    reps = _check_reps(replicates)
    tree = "centered" if tail_kind == "centered_diam" else "uniform"
    sides, _ = prt_cells(tree, N, d, reps, seed, x, role=f"tail-{tail_kind}", law=law)
    diam = np.sqrt(np.sum(sides**2, axis=1))
    vol = np.prod(sides, axis=1)
    thr = ref.extra["threshold"]
    event = ref.extra["event"]
    value = vol if event.startswith("vol") else diam
    hit = value >= thr if ">=" in event else value <= thr
    p = float(hit.mean())
    se = binomial_stderr(p, reps)
    rows = [{"replicate": r, "value": float(v), "hit": int(h)} for r, (v, h) in enumerate(zip(value, hit))]
    return {"empirical_tail": p, "bound_tail": ref.value, "threshold": thr, "event": event, "law": law,
            "stderr": se, "verdict": p <= ref.value + 3.0 * se, "rows": rows}


# Mondrian cell geometry


def mondrian_cells(lifetime: float, d: int, replicates: int, seed, x=None, role="mondrian"):
    """Cells of ``x`` under independent MP(lifetime) partitions.

    Returns ``(lower, upper, n_splits, first_time)``.  The per-replicate draw
    budget grows until no replicate exhausts it.
    """
    reps = _check_reps(replicates)
    x = np.full(d, 0.5) if x is None else np.asarray(x, dtype=np.float64)
    mean = lifetime * d
    budget = int(math.ceil(mean + 8.0 * math.sqrt(mean) + 16))
    while True:
        rng = rng_for(seed, budget, 0, f"{role}-{d}")
        expo = rng.exponential(size=(reps, budget))
        uc = rng.random((reps, budget))
        up_ = rng.random((reps, budget))
        lo, up, ns, first, exhausted = kernels.mondrian_paths(x, float(lifetime), expo, uc, up_)
        if not exhausted.any():
            return lo, up, ns, first
        budget *= 2


def mondrian_hminus_oracle(lifetime: float, x: np.ndarray, size: int, rng) -> np.ndarray:
    """Smallest side of the cell of ``x``: per coordinate, each half-side is an
    Exp(lifetime) draw truncated at the distance to the face of the unit cube;
    the full side is then a truncated Gamma(2, lifetime) draw."""
    d = x.size
    left = np.minimum(rng.exponential(1.0 / lifetime, size=(size, d)), x)
    right = np.minimum(rng.exponential(1.0 / lifetime, size=(size, d)), 1.0 - x)
    return (left + right).min(axis=1)


def max_cdf_gap(a: np.ndarray, b: np.ndarray, points: int = 100) -> float:
    hi = max(float(a.max()), float(b.max()))
    lo = min(float(a.min()), float(b.min()))
    grid = np.linspace(lo, hi, points)
    fa = np.searchsorted(np.sort(a), grid, side="right") / a.size
    fb = np.searchsorted(np.sort(b), grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def verify_mondrian_geometry(lifetime: float, d: int, replicates: int, seed: int = 0, delta: float = 0.1,
                             x=None) -> dict:
    if not lifetime > 0:
        raise InvalidArgument("lifetime must be > 0")
    reps = _check_reps(replicates)
    x = np.full(d, 0.5) if x is None else np.asarray(x, dtype=np.float64)
    lo, up, ns, _ = mondrian_cells(lifetime, d, reps, seed, x)
    sides = up - lo
    hmin = sides.min(axis=1)
    aspect = sides.max(axis=1) / hmin
    thr = bounds.mondrian_aspect_threshold(delta, d).value
    exceed = aspect > thr
    p_aspect = float(exceed.mean())
    se_aspect = binomial_stderr(p_aspect, reps)

    oracle = mondrian_hminus_oracle(lifetime, x, reps, rng_for(seed, 0, 0, f"mondrian-oracle-{d}"))
    gap = max_cdf_gap(hmin, oracle)

    # first split time of the whole cube: rate is the side sum d
    root = HyperRect.unit(d)
    rng = rng_for(seed, 0, 0, f"mondrian-first-{d}")
    expo = rng.exponential(size=(reps, 1))
    _, _, _, first, _ = kernels.mondrian_paths(x, math.inf, expo, rng.random((reps, 1)), rng.random((reps, 1)))
    mean_first = float(first.mean())
    se_first = float(first.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    target = 1.0 / float(root.sides.sum())

    rows = [{"replicate": r, "h_minus": float(h), "aspect": float(a), "n_splits": int(k), "first_time": float(f)}
            for r, (h, a, k, f) in enumerate(zip(hmin, aspect, ns, first))]
    out = {
        "aspect_threshold": thr,
        "aspect_exceed_prob": p_aspect,
        "aspect_stderr": se_aspect,
        "aspect_verdict": p_aspect <= 2.0 * delta + 3.0 * se_aspect,
        "hminus_cdf_gap": gap,
        "hminus_verdict": gap <= 0.03,
        "first_split_mean": mean_first,
        "first_split_target": target,
        "first_split_stderr": se_first,
        "first_split_verdict": abs(mean_first - target) <= 3.0 * se_first,
        "rows": rows,
    }
    out["verdict"] = out["aspect_verdict"] and out["hminus_verdict"] and out["first_split_verdict"]
    return out


# anisotropic counterexample


def isotropic_schedule(d: int):
    return lambda n: np.full(d, n ** (-1.0 / (d + 2)))


def anisotropic_schedule(d: int, exponent: float | None = None):
    """``h_1 = n^{-3/(d+2)}`` and the remaining sides equal, set to the smallest
    value meeting the count condition ``n prod(h) >= 2^{d+4} log 2``."""
    a = 3.0 / (d + 2) if exponent is None else exponent
    need = 2.0 ** (d + 4) * math.log(2.0)

    def h(n):
        h1 = n ** (-a)
        rest = (need / (n * h1)) ** (1.0 / (d - 1)) * (1.0 + 1e-12)
        return np.array([h1] + [rest] * (d - 1))

    return h


def counterexample_valid(n: int, h: np.ndarray) -> bool:
    return n * float(np.prod(h)) >= 2.0 ** (h.size + 4) * math.log(2.0)


def gamma_bar(h: np.ndarray) -> float:
    return float(np.sum(h**2)) ** (h.size / 2.0) / float(np.prod(h))


def run_counterexample(h_schedule, n_grid, replicates: int, seed: int = 0, sigma: float = 1.0, d: int = 2,
                       label: str = "schedule", require_validity: bool = True, threads=None) -> dict:
    """RMSE at 0 of the average over the fixed cell ``prod [0, h_k]``.

    Data: X uniform on [0, 1]^d, g(x) = sum x_k, Gaussian noise with sd
    ``sigma``.  When the count condition fails, the n is skipped if
    ``require_validity`` and otherwise measured with the lower bound left
    undefined.
    """
    reps = _check_reps(replicates)
    problem = RegressionProblem(d, "LinearSum", noise="Gaussian", noise_params={"sigma": sigma})
    rows, curve = [], []
    for n in n_grid:
        h = np.asarray(h_schedule(n), dtype=np.float64)
        if h.shape != (d,) or np.any(h <= 0):
            raise InvalidArgument("h_schedule must return d positive side lengths")
        valid = counterexample_valid(n, h)
        gb = gamma_bar(h)
        lower = bounds.counterexample_lower_bound(gb, sigma**2, n, d).value if valid else None
        if not valid and require_validity:
            curve.append({"n": n, "h": h.tolist(), "gamma_bar": gb, "valid": False, "rmse": None,
                          "lower_bound": None, "skipped": "count condition n*prod(h) >= 2^(d+4) log 2 fails"})
            continue
        cell = HyperRect(np.zeros(d), h)

        def one(rep, n=n, cell=cell):
            data, _ = generate_with_noise(problem, n, derive_seed(seed, n, rep, f"counterexample-{label}"))
            inside = cell.contains(data.x)
            return float(data.y[inside].mean()) if inside.any() else 0.0

        est = np.asarray(parallel_map(one, range(reps), threads))
        rmse = float(np.sqrt(np.mean(est**2)))
        for r, e in enumerate(est):
            rows.append({"n": n, "replicate": r, "method": label, "estimate": float(e), "error": abs(float(e))})
        curve.append({"n": n, "h": h.tolist(), "gamma_bar": gb, "valid": valid, "rmse": rmse,
                      "lower_bound": lower, "rmse_stderr": float(np.std(est**2, ddof=1) / (2 * rmse * math.sqrt(reps)))
                      if reps > 1 and rmse > 0 else None})
    return {"label": label, "curve": curve, "rows": rows, "C_d": bounds.counterexample_constant(d)}


def counterexample_ordering(n_grid, replicates: int, seed: int = 0, sigma: float = 1.0, d: int = 2,
                            threads=None) -> dict:
    """Anisotropic versus isotropic schedules, with the lower bound at each n."""
    aniso = run_counterexample(anisotropic_schedule(d), n_grid, replicates, seed, sigma, d, "anisotropic",
                               True, threads)
    iso = run_counterexample(isotropic_schedule(d), n_grid, replicates, seed, sigma, d, "isotropic",
                             False, threads)
    checks = []
    by_n = {c["n"]: c for c in iso["curve"]}
    for c in aniso["curve"]:
        other = by_n.get(c["n"])
        ok = (c["rmse"] is not None and other is not None and other["rmse"] is not None
              and c["rmse"] > other["rmse"] and c["rmse"] >= c["lower_bound"])
        checks.append({"n": c["n"], "anisotropic_rmse": c["rmse"], "isotropic_rmse": other and other["rmse"],
                       "lower_bound": c["lower_bound"], "ok": bool(ok)})
    return {"anisotropic": aniso, "isotropic": iso, "checks": checks,
            "verdict": bool(checks) and all(c["ok"] for c in checks) and len(checks) == len(list(n_grid))}
