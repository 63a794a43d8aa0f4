"""Error experiments: configuration, trial execution, rate fits and record I/O."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..core import Dataset
from ..errors import ConfigError, InvalidArgument
from ..estimators import (
    choose_k,
    fit_cart_like,
    fit_centered_tree,
    fit_fixed_partition,
    fit_knn,
    fit_mondrian,
    fit_optinet,
    fit_proto_nn,
    fit_uniform_tree,
    uniform_cuts,
)
from ..seeding import derive_seed, rng_for
from ..synth import RegressionProblem, eval_g, generate

EXPERIMENT_METHODS = (
    "FixedPartition", "KNN", "ProtoNN", "OptiNet", "CartLike",
    "CenteredTree", "UniformTree", "Mondrian", "GlobalMean",
)


def worker_count() -> int:
    """Thread budget: ``SHAPEREG_THREADS`` if set, else all cores."""
    raw = os.environ.get("SHAPEREG_THREADS", "").strip()
    if raw:
        try:
            k = int(raw)
        except ValueError:
            raise ConfigError(f"SHAPEREG_THREADS must be an integer, got {raw!r}") from None
        return max(1, k)
    return os.cpu_count() or 1


def parallel_map(fn, tasks, threads=None) -> list:
    """``[fn(t) for t in tasks]`` on a thread pool; output order follows ``tasks``."""
    tasks = list(tasks)
    threads = worker_count() if threads is None else max(1, int(threads))
    if threads == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


# hyperparameter schedules


def cart_theory_m(n: int, d: int, delta: float) -> int:
    log_term = 2 * d * math.log(n + 1) + math.log(1.0 / delta)
    return max(1, round(n ** (2.0 / (d + 2)) * log_term ** (d / (d + 2))))


def _round(x, how):
    if how == "ceil":
        return int(math.ceil(x - 1e-12))
    if how == "floor":
        return int(math.floor(x + 1e-12))
    if how == "round":
        return int(round(x))
    if how == "none":
        return float(x)
    raise ConfigError(f"unknown rounding {how!r}")


def resolve_value(rule, n: int, d: int, delta: float):
    """Concrete hyperparameter value at sample size ``n``.

    A rule is a number, one of the names ``"choose_k"`` and
    ``"cart_theory"``, or ``{"power": a, "scale": c, "round": r}`` meaning
    ``c * n^a`` rounded by ``r`` in {ceil, floor, round, none} (default ceil).
    """
    if isinstance(rule, bool):
        raise ConfigError("boolean is not a valid hyperparameter")
    if isinstance(rule, (int, float)):
        return rule
    if rule == "choose_k":
        return choose_k(n, d, delta)
    if rule == "cart_theory":
        return cart_theory_m(n, d, delta)
    if isinstance(rule, dict):
        extra = set(rule) - {"power", "scale", "round"}
        if extra or "power" not in rule:
            raise ConfigError(f"power rule needs 'power' and optional 'scale', 'round'; got {sorted(rule)}")
        return _round(float(rule.get("scale", 1.0)) * n ** float(rule["power"]), rule.get("round", "ceil"))
    raise ConfigError(f"unrecognised hyperparameter rule {rule!r}")


_METHOD_PARAMS = {
    "FixedPartition": {"cuts": None},
    "KNN": {"k": "choose_k"},
    "ProtoNN": {"m": None},
    "OptiNet": {"m": None, "eta": None},
    "CartLike": {"m": None, "beta": 2.0},
    "CenteredTree": {"N": None},
    "UniformTree": {"N": None},
    "Mondrian": {"lifetime": None},
    "GlobalMean": {},
}


def resolve_params(method: str, hyper: dict, n: int, d: int, delta: float) -> dict:
    if method not in _METHOD_PARAMS:
        raise ConfigError(f"unknown method {method!r}; valid: {', '.join(EXPERIMENT_METHODS)}")
    spec = _METHOD_PARAMS[method]
    extra = set(hyper) - set(spec)
    if extra:
        raise ConfigError(f"unknown hyperparameters for {method}: {sorted(extra)}")
    out = {}
    for key, default in spec.items():
        rule = hyper.get(key, default)
        if rule is None:
            raise ConfigError(f"{method} needs hyperparameter {key!r}")
        out[key] = resolve_value(rule, n, d, delta)
    return out


def fit_method(method: str, data: Dataset, params: dict, seed):
    """Fit ``method`` with concrete ``params``; raises InvalidArgument when infeasible."""
    if method == "FixedPartition":
        cuts = int(params["cuts"])
        if cuts < 0:
            raise InvalidArgument("cuts must be >= 0")
        return fit_fixed_partition(data, [uniform_cuts(cuts + 1)] * data.d)
    if method == "GlobalMean":
        return fit_fixed_partition(data, [[]] * data.d)
    if method == "KNN":
        return fit_knn(data, int(params["k"]))
    if method == "ProtoNN":
        return fit_proto_nn(data, int(params["m"]), seed)
    if method == "OptiNet":
        return fit_optinet(data, int(params["m"]), float(params["eta"]), seed)
    if method == "CartLike":
        return fit_cart_like(data, int(params["m"]), float(params["beta"]))
    if method == "CenteredTree":
        return fit_centered_tree(int(params["N"]), data, seed)
    if method == "UniformTree":
        return fit_uniform_tree(int(params["N"]), data, seed)
    if method == "Mondrian":
        return fit_mondrian(float(params["lifetime"]), data, seed)
    raise ConfigError(f"unknown method {method!r}")


# evaluation grids


def default_grid_spec(d: int) -> dict:
    if d <= 2:
        return {"G": 101}
    if d == 3:
        return {"G": 21}
    return {"random": 10_000}


def eval_points(d: int, spec: dict | None = None, seed: int = 0) -> np.ndarray:
    """Regular lattice of ``G^d`` points, or ``random`` uniform points."""
    spec = dict(spec or default_grid_spec(d))
    if "G" in spec:
        G = int(spec["G"])
        if G < 1:
            raise InvalidArgument("grid size G must be >= 1")
        axis = np.linspace(0.0, 1.0, G) if G > 1 else np.array([0.5])
        mesh = np.meshgrid(*[axis] * d, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)
    if "points" in spec:
        pts = np.asarray(spec["points"], dtype=np.float64).reshape(-1, d)
        if pts.shape[0] == 0:
            raise InvalidArgument("evaluation grid is empty")
        return pts
    count = int(spec.get("random", 10_000))
    if count < 1:
        raise InvalidArgument("evaluation grid is empty")
    return rng_for(spec.get("seed", seed), role="eval-grid").random((count, d))


def sup_norm_error(model, problem: RegressionProblem, eval_grid=None) -> float:
    """Empirical sup of ``|predict - g|`` over the evaluation points."""
    pts = eval_grid if isinstance(eval_grid, np.ndarray) else eval_points(problem.d, eval_grid)
    if pts.shape[0] == 0:
        raise InvalidArgument("evaluation grid is empty")
    return float(np.max(np.abs(model.predict(pts) - eval_g(problem, pts))))


# configuration and records


@dataclass
class ExperimentConfig:
    problem: RegressionProblem
    method: str
    hyper: dict = field(default_factory=dict)
    n_grid: list = field(default_factory=list)
    replicates: int = 1
    eval: dict = field(default_factory=lambda: {"kind": "supnorm"})
    seed: int = 0
    delta: float = 0.1

    def __post_init__(self):
        if self.method not in EXPERIMENT_METHODS:
            raise ConfigError(f"unknown method {self.method!r}; valid: {', '.join(EXPERIMENT_METHODS)}")
        ns = [int(v) for v in self.n_grid]
        if not ns or ns != sorted(ns) or any(v < 1 for v in ns):
            raise ConfigError("n_grid must be a nonempty ascending list of positive integers")
        self.n_grid = ns
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be >= 1")
        self.replicates = int(self.replicates)
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        kind = self.eval.get("kind")
        if kind == "pointwise":
            x0 = np.asarray(self.eval.get("x0", [0.5] * self.problem.d), dtype=float)
            if x0.shape != (self.problem.d,):
                raise ConfigError("pointwise x0 must have d coordinates")
            if set(self.eval) - {"kind", "x0"}:
                raise ConfigError(f"unknown keys in eval: {sorted(set(self.eval) - {'kind', 'x0'})}")
        elif kind == "supnorm":
            if set(self.eval) - {"kind", "grid"}:
                raise ConfigError(f"unknown keys in eval: {sorted(set(self.eval) - {'kind', 'grid'})}")
        else:
            raise ConfigError("eval.kind must be 'pointwise' or 'supnorm'")

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "method": self.method,
            "hyper": self.hyper,
            "n_grid": self.n_grid,
            "replicates": self.replicates,
            "eval": self.eval,
            "seed": self.seed,
            "delta": self.delta,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        allowed = {"problem", "method", "hyper", "n_grid", "replicates", "eval", "seed", "delta"}
        extra = set(doc) - allowed
        if extra:
            raise ConfigError(f"unknown keys in experiment: {sorted(extra)}")
        for key in ("problem", "method", "n_grid"):
            if key not in doc:
                raise ConfigError(f"experiment section is missing {key!r}")
        try:
            return cls(
                problem=RegressionProblem.from_dict(doc["problem"]),
                method=doc["method"],
                hyper=dict(doc.get("hyper", {})),
                n_grid=list(doc["n_grid"]),
                replicates=doc.get("replicates", 1),
                eval=dict(doc.get("eval", {"kind": "supnorm"})),
                seed=int(doc.get("seed", 0)),
                delta=float(doc.get("delta", 0.1)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid experiment section: {exc}") from None


@dataclass
class TrialRecord:
    n: int
    replicate: int
    method: str
    params: dict
    error: float | None
    wall_time: float = 0.0
    skipped: str | None = None


RECORD_COLUMNS = ("n", "replicate", "method", "params_json", "error", "wall_time_ms")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, timing: bool = False) -> str:
    """CSV text; ``wall_time_ms`` stays blank unless ``timing`` (keeps output byte-stable)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        params = dict(r.params)
        if r.skipped:
            params["skipped"] = r.skipped
        w.writerow([
            r.n, r.replicate, r.method, json.dumps(params, sort_keys=True),
            _fmt(r.error), _fmt(r.wall_time * 1000.0) if timing else "",
        ])
    return buf.getvalue()


def rows_to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _run_trial(config: ExperimentConfig, n: int, rep: int, grid: np.ndarray | None) -> TrialRecord:
    d = config.problem.d
    try:
        params = resolve_params(config.method, config.hyper, n, d, config.delta)
    except InvalidArgument as exc:
        return TrialRecord(n, rep, config.method, {}, None, 0.0, str(exc))
    data = generate(config.problem, n, derive_seed(config.seed, n, rep, "data"))
    start = time.perf_counter()
    try:
        model = fit_method(config.method, data, params, derive_seed(config.seed, n, rep, "model"))
    except InvalidArgument as exc:
        return TrialRecord(n, rep, config.method, params, None, 0.0, str(exc))
    if config.eval["kind"] == "pointwise":
        x0 = np.asarray(config.eval.get("x0", [0.5] * d), dtype=float)
        err = abs(model.predict(x0) - eval_g(config.problem, x0))
    else:
        err = sup_norm_error(model, config.problem, grid)
    return TrialRecord(n, rep, config.method, params, float(err), time.perf_counter() - start)


def run_error_experiment(config: ExperimentConfig, threads=None) -> list[TrialRecord]:
    """All (n, replicate) trials, ordered by n then replicate.

    Every trial draws from streams derived from ``(seed, n, replicate, role)``,
    so the records do not depend on the number of threads.
    """
    grid = None
    if config.eval["kind"] == "supnorm":
        grid = eval_points(config.problem.d, config.eval.get("grid"), config.seed)
    tasks = [(n, r) for n in config.n_grid for r in range(config.replicates)]
    return parallel_map(lambda t: _run_trial(config, t[0], t[1], grid), tasks, threads)


# rate fits


@dataclass
class RateFit:
    slope: float | None
    intercept: float | None
    r2: float | None
    slope_stderr: float | None
    n_values: list = field(default_factory=list)
    mean_errors: list = field(default_factory=list)
    dropped_n: list = field(default_factory=list)
    flag: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_by_n(records):
    groups: dict[int, list[float]] = {}
    for r in records:
        if isinstance(r, TrialRecord):
            if r.error is None:
                continue
            groups.setdefault(r.n, []).append(r.error)
        else:
            n, e = r
            groups.setdefault(int(n), []).append(float(e))
    ns = sorted(groups)
    return ns, [float(np.mean(groups[n])) for n in ns]


def fit_rate(records, g_range: float | None = None) -> RateFit:
    """Least squares of log(mean error) on log(n).

    ``records`` is a list of TrialRecord or ``(n, error)`` pairs.  When
    ``g_range`` is given and the smallest n has mean error above it, that n is
    dropped as burn-in (recorded in ``dropped_n``).
    """
    ns, means = _mean_by_n(records)
    dropped = []
    if g_range is not None and ns and means[0] > g_range:
        dropped.append(ns[0])
        ns, means = ns[1:], means[1:]
    if len(ns) < 3:
        raise InvalidArgument("a rate fit needs at least 3 distinct n values")
    if min(means) <= 0.0:
        return RateFit(None, None, None, None, ns, means, dropped, "zero mean error; slope undefined")
    res = stats.linregress(np.log(ns), np.log(means))
    return RateFit(float(res.slope), float(res.intercept), float(res.rvalue**2), float(res.stderr),
                   ns, means, dropped)


def summarize(records, g_range: float | None = None) -> dict:
    per_n = {}
    for n in sorted({r.n for r in records}):
        errs = np.array([r.error for r in records if r.n == n and r.error is not None])
        skipped = sum(1 for r in records if r.n == n and r.error is None)
        entry = {"count": int(errs.size), "skipped": skipped}
        if errs.size:
            entry.update(
                mean=float(errs.mean()), median=float(np.median(errs)),
                q10=float(np.quantile(errs, 0.1)), q90=float(np.quantile(errs, 0.9)),
            )
        per_n[str(n)] = entry
    out = {"per_n": per_n}
    try:
        out["rate_fit"] = fit_rate(records, g_range).to_dict()
    except InvalidArgument as exc:
        out["rate_fit"] = {"slope": None, "flag": str(exc)}
    return out
