"""Command-line front end.

Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 infeasible or
out-of-domain arguments.  The config format is documented in ``docs/config.md``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import bounds
from .core import Dataset
from .errors import ConfigError, InvalidArgument
from .estimators import dumps, loads
from .experiments import harness, verify
from .synth import RegressionProblem, generate

SCHEMA_VERSION = 1
EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

_SECTIONS = {"schema", "problem", "method", "experiment", "output"}
_METHOD_KEYS = {"name", "params"}
_EXPERIMENT_KEYS = {"kind", "n", "n_grid", "replicates", "eval", "seed", "delta", "check", "args"}
_OUTPUT_KEYS = {"timing"}


class IOFailure(Exception):
    pass


# config


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return validate_config(doc)


def validate_config(doc) -> dict:
    _check_keys(doc, _SECTIONS, "config")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA_VERSION}")
    out = {"schema": SCHEMA_VERSION}
    if "problem" in doc:
        out["problem"] = RegressionProblem.from_dict(doc["problem"])
    method = doc.get("method")
    if method is not None:
        _check_keys(method, _METHOD_KEYS, "method")
        if method.get("name") not in harness.EXPERIMENT_METHODS:
            raise ConfigError(f"unknown method {method.get('name')!r}; valid: {', '.join(harness.EXPERIMENT_METHODS)}")
        if not isinstance(method.get("params", {}), dict):
            raise ConfigError("method.params must be an object")
        out["method"] = {"name": method["name"], "params": dict(method.get("params", {}))}
    exp = doc.get("experiment", {})
    _check_keys(exp, _EXPERIMENT_KEYS, "experiment")
    out["experiment"] = dict(exp)
    output = doc.get("output", {})
    _check_keys(output, _OUTPUT_KEYS, "output")
    out["output"] = dict(output)
    return out


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config is missing the {key!r} section")
    return cfg[key]


# CSV


def _fmt(v: float) -> str:
    return repr(float(v))


def read_xy_csv(path: str, with_y: bool = True):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path} has no header")
    header = [h.strip() for h in rows[0]]
    d = len(header) - (1 if with_y else 0)
    want = [f"x{i + 1}" for i in range(d)] + (["y"] if with_y else [])
    if d < 1 or header != want:
        raise ConfigError(f"{path}: expected header {','.join(want) or 'x1,...'}")
    try:
        vals = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64).reshape(-1, len(header))
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None
    if with_y:
        return vals[:, :d], vals[:, d]
    return vals, None


def _write(path: str, text: str):
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from None


# commands


def cmd_fit(config_path: str, out_model_path: str, data_path: str | None = None) -> int:
    cfg = load_config(config_path)
    method = _require(cfg, "method")
    exp = cfg["experiment"]
    seed = int(exp.get("seed", 0))
    if data_path:
        x, y = read_xy_csv(data_path)
        data = Dataset(x, y)
    else:
        problem = _require(cfg, "problem")
        if "n" not in exp:
            raise ConfigError("experiment.n is needed to synthesize training data")
        data = generate(problem, int(exp["n"]), harness.derive_seed(seed, int(exp["n"]), 0, "data"))
    params = harness.resolve_params(method["name"], method["params"], data.n, data.d, float(exp.get("delta", 0.1)))
    model = harness.fit_method(method["name"], data, params, harness.derive_seed(seed, data.n, 0, "model"))
    _write(out_model_path, dumps(model))
    return EXIT_OK


def cmd_predict(model_path: str, points_csv: str, out_csv: str) -> int:
    try:
        with open(model_path) as fh:
            model = loads(fh.read())
    except OSError as exc:
        raise IOFailure(f"cannot read model {model_path}: {exc}") from None
    pts, _ = read_xy_csv(points_csv, with_y=False) if _has_rows(points_csv) else (np.empty((0, model.d)), None)
    if pts.shape[1] != model.d:
        raise InvalidArgument(f"points have dimension {pts.shape[1]} but the model has {model.d}")
    yhat = model.predict(pts) if pts.shape[0] else np.empty(0)
    outside = np.flatnonzero(np.any((pts < 0) | (pts > 1), axis=1))
    for i in outside:
        print(f"warning: row {i + 1} lies outside [0,1]^{model.d}", file=sys.stderr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(model.d)] + ["yhat"])
    for row, v in zip(pts, np.atleast_1d(yhat)):
        w.writerow([_fmt(a) for a in row] + [_fmt(v)])
    _write(out_csv, buf.getvalue())
    return EXIT_OK


def _has_rows(path):
    try:
        with open(path) as fh:
            return bool(fh.read().strip())
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from None


VERIFY_CHECKS = ("variance", "volume", "aspect", "prt_tail", "mondrian", "counterexample")

_VERIFY_ARGS = {
    "variance": {"n", "delta", "replicates", "v", "n_cells"},
    "volume": {"tree_kind", "N", "d", "replicates"},
    "aspect": {"tree_kind", "N", "d", "replicates", "law"},
    "prt_tail": {"tail_kind", "N", "d", "replicates", "parameter", "law"},
    "mondrian": {"lifetime", "d", "replicates", "delta"},
    "counterexample": {"n_grid", "replicates", "sigma", "d"},
}

_VERIFY_COLUMNS = {
    "variance": ("replicate", "statistic", "violated"),
    "volume": ("replicate", "volume", "product", "rel_error"),
    "aspect": ("replicate", "aspect", "hit"),
    "prt_tail": ("replicate", "value", "hit"),
    "mondrian": ("replicate", "h_minus", "aspect", "n_splits", "first_time"),
    "counterexample": ("n", "replicate", "method", "estimate", "error"),
}


def run_verify(check: str, args: dict, seed: int = 0, problem: RegressionProblem | None = None,
               threads=None) -> tuple[str, dict]:
    """Run a named verification; returns ``(records_csv, summary)``."""
    if check not in VERIFY_CHECKS:
        raise ConfigError(f"unknown check {check!r}; valid: {', '.join(VERIFY_CHECKS)}")
    extra = set(args) - _VERIFY_ARGS[check]
    if extra:
        raise ConfigError(f"unknown arguments for {check}: {sorted(extra)}")
    a = dict(args)
    try:
        if check == "variance":
            if problem is None:
                raise ConfigError("the variance check needs a problem section")
            n = int(a.get("n", 200))
            from .estimators import fit_uniform_grid

            model = fit_uniform_grid(Dataset.empty(problem.d), int(a.get("n_cells", 4)))
            res = verify.verify_variance_bound(model, problem, n, float(a.get("delta", 0.1)),
                                               int(a.get("replicates", 2000)), seed, a.get("v"), threads)
        elif check == "volume":
            res = verify.verify_volume_invariance(a.get("tree_kind", "uniform"), int(a.get("N", 30)),
                                                  int(a.get("d", 2)), int(a.get("replicates", 1000)), seed)
        elif check == "aspect":
            res = verify.verify_aspect_lower_bound(a.get("tree_kind", "uniform"), int(a.get("N", 64)),
                                                   int(a.get("d", 2)), int(a.get("replicates", 10000)), seed,
                                                   law=a.get("law", "point"))
        elif check == "prt_tail":
            res = verify.verify_prt_diam_vol(a.get("tail_kind", "uniform_vol"), int(a.get("N", 32)), int(a.get("d", 2)),
                                             int(a.get("replicates", 10000)), seed, float(a.get("parameter", 0.5)),
                                             law=a.get("law", "branch"))
        elif check == "mondrian":
            res = verify.verify_mondrian_geometry(float(a.get("lifetime", 10.0)), int(a.get("d", 2)),
                                                  int(a.get("replicates", 10000)), seed, float(a.get("delta", 0.1)))
        else:
            grid = [int(v) for v in a.get("n_grid", [2**k for k in range(10, 15)])]
            res = verify.counterexample_ordering(grid, int(a.get("replicates", 200)), seed,
                                                 float(a.get("sigma", 1.0)), int(a.get("d", 2)), threads)
            res["rows"] = res["anisotropic"]["rows"] + res["isotropic"]["rows"]
            for key in ("anisotropic", "isotropic"):
                res[key] = {k: v for k, v in res[key].items() if k != "rows"}
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise ConfigError(f"invalid arguments for {check}: {exc}") from None
    rows = res.pop("rows")
    summary = {"check": check, "args": args, "seed": seed, **res}
    return harness.rows_to_csv(rows, _VERIFY_COLUMNS[check]), summary


def run_rate(cfg: dict, threads=None) -> tuple[str, dict]:
    exp = cfg["experiment"]
    method = _require(cfg, "method")
    extra = set(exp) - {"kind", "n_grid", "replicates", "eval", "seed", "delta"}
    if extra:
        raise ConfigError(f"unknown keys for a rate experiment: {sorted(extra)}")
    conf = harness.ExperimentConfig.from_dict({
        "problem": _require(cfg, "problem").to_dict(),
        "method": method["name"],
        "hyper": method["params"],
        **{k: v for k, v in exp.items() if k != "kind"},
    })
    records = harness.run_error_experiment(conf, threads)
    summary = {"kind": "rate", "config": conf.to_dict(), **harness.summarize(records, conf.problem.g_range)}
    return harness.records_to_csv(records, timing=bool(cfg["output"].get("timing", False))), summary


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def cmd_experiment(config_path: str, out_dir: str) -> int:
    cfg = load_config(config_path)
    exp = cfg["experiment"]
    kind = exp.get("kind", "rate")
    if kind == "rate":
        records, summary = run_rate(cfg)
    elif kind == "verify":
        extra = set(exp) - {"kind", "check", "args", "seed"}
        if extra:
            raise ConfigError(f"unknown keys for a verify experiment: {sorted(extra)}")
        records, summary = run_verify(exp.get("check"), dict(exp.get("args", {})), int(exp.get("seed", 0)),
                                      cfg.get("problem"))
    else:
        raise ConfigError("experiment.kind must be 'rate' or 'verify'")
    _write(os.path.join(out_dir, "records.csv"), records)
    _write(os.path.join(out_dir, "summary.json"), _dump_json(summary))
    return EXIT_OK


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_flags(tokens: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or i + 1 >= len(tokens):
            raise ConfigError(f"expected '--name value' pairs, got {tok!r}")
        out[tok[2:].replace("-", "_")] = _parse_value(tokens[i + 1])
        i += 2
    return out


def cmd_bound(name: str, flags: list[str]) -> int:
    if name not in bounds.REGISTRY:
        raise ConfigError(f"unknown bound {name!r}; valid: {', '.join(sorted(bounds.REGISTRY))}")
    kw = _parse_flags(flags)
    params = bounds.parameters_of(name)
    known = {p for p, _ in params}
    extra = set(kw) - known
    if extra:
        raise ConfigError(f"unknown flags for {name}: {sorted(extra)}; accepted: {', '.join(sorted(known))}")
    missing = [p for p, req in params if req and p not in kw]
    if missing:
        raise ConfigError(f"{name} needs {', '.join('--' + m for m in missing)}")
    try:
        res = bounds.REGISTRY[name](**kw)
    except TypeError as exc:
        raise ConfigError(f"bad arguments for {name}: {exc}") from None
    print(_dump_json(res.to_dict()), end="")
    return EXIT_OK


def cmd_verify(check: str, flags: list[str]) -> int:
    kw = _parse_flags(flags)
    out_dir = kw.pop("out", None)
    seed = int(kw.pop("seed", 0))
    problem = None
    if "problem" in kw:
        problem = RegressionProblem.from_dict(kw.pop("problem"))
    elif check == "variance":
        problem = RegressionProblem(1, "LinearSum", noise="Gaussian", noise_params={"sigma": 1.0})
    records, summary = run_verify(check, kw, seed, problem)
    if out_dir:
        _write(os.path.join(str(out_dir), "records.csv"), records)
        _write(os.path.join(str(out_dir), "summary.json"), _dump_json(summary))
    print(_dump_json({k: v for k, v in summary.items() if k not in ("curve",)}), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shapereg", description="Local averaging estimators and shape-regularity tools.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fit", help="fit a model and write it as JSON")
    p.add_argument("config")
    p.add_argument("out_model")
    p.add_argument("--data", help="training CSV with header x1..xd,y")
    p = sub.add_parser("predict", help="predict at the points of a CSV")
    p.add_argument("model")
    p.add_argument("points")
    p.add_argument("out_csv")
    p = sub.add_parser("experiment", help="run a rate or verification experiment from a config")
    p.add_argument("config")
    p.add_argument("out_dir")
    p = sub.add_parser("bound", help="evaluate a closed-form bound; flags are the evaluator's parameters")
    p.add_argument("name")
    p = sub.add_parser("verify", help=f"run a Monte Carlo check: {', '.join(VERIFY_CHECKS)}")
    p.add_argument("check")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args, rest = ap.parse_known_args(argv)
    if rest and args.command not in ("bound", "verify"):
        ap.error(f"unrecognized arguments: {' '.join(rest)}")
    try:
        if args.command == "fit":
            return cmd_fit(args.config, args.out_model, args.data)
        if args.command == "predict":
            return cmd_predict(args.model, args.points, args.out_csv)
        if args.command == "experiment":
            return cmd_experiment(args.config, args.out_dir)
        if args.command == "bound":
            return cmd_bound(args.name, rest)
        return cmd_verify(args.check, rest)
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgument as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
