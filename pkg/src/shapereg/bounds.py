"""Closed-form deviation bounds and thresholds, with explicit constants.

Every evaluator returns a :class:`BoundResult` carrying the value, the
validity predicates of the underlying statement, and any auxiliary
quantities.  Logarithms of polynomial factors are taken in log space so
evaluators stay finite for very large ``n`` and ``v``.
"""
from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field

from .core import unit_ball_volume
from .errors import InvalidArgument


@dataclass(frozen=True)
class BoundResult:
    value: float
    predicates: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "predicates": dict(self.predicates), **({"extra": dict(self.extra)} if self.extra else {})}


def _delta(delta, hi=1.0):
    if not (0.0 < delta < hi):
        raise InvalidArgument(f"delta must lie in (0, {hi:g}), got {delta}")


def _pos(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise InvalidArgument(f"{k} must be > 0, got {v}")


def _nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise InvalidArgument(f"{k} must be >= 0, got {v}")


def _log_poly(n, v, delta):
    """log((n + 1)^v / delta)."""
    return v * math.log1p(n) + math.log(1.0 / delta)


def shattering_bound(n, v) -> BoundResult:
    """Sauer-type bound (n + 1)^v on the shattering coefficient."""
    if n < 1 or v < 1:
        raise InvalidArgument("need n >= 1 and v >= 1")
    log_value = v * math.log1p(n)
    try:
        value = float((n + 1) ** v) if isinstance(n, int) and isinstance(v, int) else math.exp(log_value)
    except OverflowError:
        value = math.inf
    return BoundResult(value, {}, {"log_value": log_value})


def variance_bound(sigma2, n, v, delta) -> BoundResult:
    """Uniform bound on the normalised noise sums over a VC family."""
    _delta(delta)
    _nonneg(sigma2=sigma2)
    _pos(n=n, v=v)
    return BoundResult(math.sqrt(2.0 * sigma2 * _log_poly(n, v, delta)))


def pointwise_bound_general(sigma2, n, v, delta, Pn, L, diam) -> BoundResult:
    """Variance term over the empirical cell count plus the Lipschitz bias."""
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L, diam=diam, Pn=Pn)
    _pos(n=n, v=v)
    bias = L * diam
    if Pn == 0:
        return BoundResult(math.inf, {"nonempty_cell": False}, {"bias": bias, "variance": math.inf})
    var = math.sqrt(2.0 * sigma2 * _log_poly(n, v, delta) / (n * Pn))
    return BoundResult(var + bias, {"nonempty_cell": True}, {"bias": bias, "variance": var})


def delta_n_large_threshold(n, v, delta, mass=None) -> BoundResult:
    """Count threshold 8 log(4 (2n+1)^v / delta); compares ``n * mass`` when given."""
    _delta(delta)
    _pos(n=n, v=v)
    thr = 8.0 * (math.log(4.0) + v * math.log(2 * n + 1) + math.log(1.0 / delta))
    preds = {} if mass is None else {"is_large": n * mass >= thr}
    return BoundResult(thr, preds)


def pointwise_bound_mass(sigma2, n, v, delta, ell, vol, L, diam) -> BoundResult:
    """Bound in terms of the mass floor ``ell`` and the cell volume."""
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L, diam=diam)
    _pos(n=n, v=v, ell=ell)
    bias = L * diam
    if vol <= 0:
        return BoundResult(math.inf, {"positive_volume": False}, {"bias": bias, "variance": math.inf})
    if math.isinf(vol):
        var = 0.0
    else:
        var = math.sqrt(3.0 * sigma2 * _log_poly(n, v, delta) / (n * ell * vol))
    thr = delta_n_large_threshold(n, v, delta).value
    preds = {"positive_volume": True, "mass_floor_large": n * ell * vol >= thr}
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var})


def localizing_map_rate(sigma2, n, v, delta, ell, L, gamma, d) -> BoundResult:
    """Rate statement for gamma-regular maps with tuned volume.

    The universal constant is not specified; the value returned is
    ``c * rate`` with ``c = sqrt(3 sigma2 / ell) + L gamma^{1/d}`` and
    ``rate = (log((n+1)^v/delta)/n)^{1/(d+2)}``, both also reported.
    """
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, v=v, ell=ell, gamma=gamma, d=d)
    c = math.sqrt(3.0 * sigma2 / ell) + L * gamma ** (1.0 / d)
    lp = _log_poly(n, v, delta)
    rate = (lp / n) ** (1.0 / (d + 2))
    vol = (lp / n) ** (d / (d + 2))
    return BoundResult(c * rate, {}, {"constant": c, "rate": rate, "target_volume": vol})


def knn_bound(sigma2, n, d, delta, k, ell, L, T0=1.0) -> BoundResult:
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, d=d, ell=ell)
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    var = math.sqrt(2.0 * sigma2 * _log_poly(n, d + 1, delta) / k)
    bias = 2.0 * (2.0 * k / (n * ell)) ** (1.0 / d) * L
    preds = {
        "k_large": k >= 8.0 * (math.log(4.0) + (d + 1) * math.log(2 * n + 1) + math.log(1.0 / delta)),
        "radius_in_range": 2 * k <= T0**d * n * ell,
    }
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var})


def cart_bound(sigma2, n, d, delta, m, beta, b, L) -> BoundResult:
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, d=d, b=b, beta=beta)
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    var = math.sqrt(2.0 * sigma2 * _log_poly(n, 2 * d, delta) / m)
    bias = L * beta * math.sqrt(d) * (5.0 * m / (n * b)) ** (1.0 / d)
    preds = {"m_large": m >= 4.0 * (math.log(4.0) + 2 * d * math.log(2 * n + 1) + math.log(1.0 / delta))}
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var})


def psi_d(d, M, b, c_d) -> float:
    return (18.0 * M * d) ** d * (c_d * b) ** (-d)


def proto_bound(sigma2, n, m, d, delta, M, b, c_d, L, T0=1.0) -> BoundResult:
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, m=m, d=d, M=M, b=b, c_d=c_d)
    psi = psi_d(d, M, b, c_d)
    Vd = unit_ball_volume(d)
    ld = math.log(1.0 / delta)
    var = math.sqrt(4.0 * sigma2 * psi * ld / delta**d) * math.sqrt(m / n)
    inner = 32.0 * d * math.log(12.0 * m / delta)
    bias = 2.0 * L * (inner / (m * b * c_d * Vd)) ** (1.0 / d)
    preds = {
        "n_over_m_large": n / m >= 8.0 * psi * ld / delta**d,
        "prototypes_dense": inner <= T0**d * m * b * c_d * Vd,
    }
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var, "psi_d": psi})


def optinet_bound(sigma2, n, m, d, delta, b, c_d, eta, L, T0=1.0) -> BoundResult:
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, m=m, d=d, b=b, c_d=c_d, eta=eta)
    Vd = unit_ball_volume(d)
    ld = math.log(1.0 / delta)
    if math.isinf(eta):
        var, bias = 0.0, math.inf
    else:
        var = math.sqrt(2.0 ** (d + 2) * sigma2 * ld / (n * b * Vd * c_d * eta**d))
        bias = 2.0 * L * (eta + (32.0 * d * math.log(12.0 * m / delta) / (m * b * c_d * Vd)) ** (1.0 / d))
    preds = {
        "prototypes_dense": 32.0 * d * math.log(12.0 * m / delta) <= T0**d * m * b * c_d * Vd,
        "eta_in_range": eta <= 2.0 * T0,
        "cells_heavy": n * b * Vd * c_d * eta**d >= 2.0 ** (d + 3) * ld,
    }
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var})


def c_delta_d(delta, d) -> float:
    return math.log(1.0 / delta) * (d / math.log(1.0 / (1.0 - delta))) ** d


def mondrian_bound(sigma2, n, d, delta, b, Lambda, L) -> BoundResult:
    """Bound for the Mondrian cell with the lifetime left explicit."""
    _delta(delta)
    _nonneg(sigma2=sigma2, L=L)
    _pos(n=n, d=d, b=b, Lambda=Lambda)
    c = c_delta_d(delta, d)
    var = math.sqrt(4.0 * sigma2 * c * Lambda**d / (n * b))
    bias = 5.0 * math.sqrt(d) * L * math.log(d / delta) / Lambda
    preds = {"n_large": n ** (2.0 / (d + 2)) * b >= 8.0 * c}
    return BoundResult(var + bias, preds, {"bias": bias, "variance": var, "c_delta_d": c})


def mondrian_aspect_threshold(delta, d) -> BoundResult:
    """Aspect-ratio level exceeded with probability at most 2 delta."""
    _pos(d=d)
    if not 0 < delta <= 1.0 - (1.0 - math.exp(-1.0)) ** d:
        raise InvalidArgument("delta must lie in (0, 1 - (1 - 1/e)^d]")
    return BoundResult(5.0 * d * math.log(delta / d) / math.log(1.0 - delta), {}, {"probability": 2.0 * delta})


def chernoff_lower(n_mu, delta) -> BoundResult:
    _pos(n_mu=n_mu)
    if not 0 < delta <= 1:
        raise InvalidArgument("delta must lie in (0, 1]")
    return BoundResult(1.0 - math.sqrt(2.0 * math.log(1.0 / delta) / n_mu))


def chernoff_upper(n_mu, delta) -> BoundResult:
    _pos(n_mu=n_mu)
    if not 0 < delta <= 1:
        raise InvalidArgument("delta must lie in (0, 1]")
    return BoundResult(1.0 + math.sqrt(3.0 * math.log(1.0 / delta) / n_mu))


PRT_KINDS = ("uniform_diam_up", "uniform_diam_down", "uniform_vol", "centered_diam")


def prt_tail_bounds(kind, N, d, parameter) -> BoundResult:
    """Tail probability bound and event threshold for random-tree cells.

    ``parameter`` is theta for the uniform diameter tails and alpha for the
    volume and centered-diameter tails.  ``extra["event"]`` describes the
    event whose probability is bounded.
    """
    if N < 0 or d < 1:
        raise InvalidArgument("need N >= 0 and d >= 1")
    rd = math.sqrt(d)
    if kind == "uniform_diam_up":
        theta = parameter
        if not theta >= 0:
            raise InvalidArgument("theta must be >= 0")
        return BoundResult(d * math.exp(-N * d * theta**2 / 4.0), {},
                           {"threshold": rd * math.exp(-N / d + N * theta), "event": "diam >= threshold"})
    if kind == "uniform_diam_down":
        theta = parameter
        if not 0 < theta < 2.0 / d:
            raise InvalidArgument("theta must lie in (0, 2/d)")
        return BoundResult(d * math.exp(-N * d * theta**2 / 8.0), {},
                           {"threshold": rd * math.exp(-N / d - N * theta), "event": "diam <= threshold"})
    if kind == "uniform_vol":
        alpha = parameter
        if not alpha > 0 or alpha == 1:
            raise InvalidArgument("alpha must be > 0 and != 1")
        event = "vol <= threshold" if alpha > 1 else "vol >= threshold"
        return BoundResult((alpha * math.exp(1.0 - alpha)) ** N, {},
                           {"threshold": math.exp(-alpha * N), "event": event})
    if kind == "centered_diam":
        alpha = parameter
        if d < 2:
            raise InvalidArgument("the centered diameter tail needs d >= 2")
        if not (0 < alpha < 1.0 / d or 1.0 / d < alpha < 1):
            raise InvalidArgument("alpha must lie in (0, 1/d) or (1/d, 1)")
        theta = (d - 1) * alpha / (1.0 - alpha)
        log_p = math.log(d) + N * math.log(1.0 - (1.0 - theta) / d) - alpha * N * math.log(theta)
        event = "diam >= threshold" if alpha < 1.0 / d else "diam <= threshold"
        return BoundResult(math.exp(min(log_p, 700.0)), {},
                           {"threshold": rd * 2.0 ** (-alpha * N), "event": event, "theta": theta})
    raise InvalidArgument(f"unknown tail kind {kind!r}; valid: {', '.join(PRT_KINDS)}")


def counterexample_constant(d) -> float:
    return math.sqrt(2.0 / d + 1.0) * (d / 2.0) ** (1.0 / (d + 2)) * (2.0**d * math.sqrt(72.0)) ** (-d / (d + 2))


def counterexample_lower_bound(gamma_bar, sigma2, n, d) -> BoundResult:
    """Lower bound on the RMSE at 0 of a fixed rectangle with shape ratio >= gamma_bar."""
    _pos(n=n, d=d)
    _nonneg(gamma_bar=gamma_bar, sigma2=sigma2)
    c = counterexample_constant(d)
    return BoundResult(c * (gamma_bar * sigma2 / n) ** (1.0 / (d + 2)), {}, {"C_d": c})


REGISTRY = {
    "shattering": shattering_bound,
    "variance": variance_bound,
    "general": pointwise_bound_general,
    "mass": pointwise_bound_mass,
    "delta_n_large": delta_n_large_threshold,
    "localizing_map": localizing_map_rate,
    "knn": knn_bound,
    "cart": cart_bound,
    "proto": proto_bound,
    "optinet": optinet_bound,
    "mondrian": mondrian_bound,
    "mondrian_aspect": mondrian_aspect_threshold,
    "chernoff_lower": chernoff_lower,
    "chernoff_upper": chernoff_upper,
    "prt_tail": prt_tail_bounds,
    "counterexample": counterexample_lower_bound,
}


def parameters_of(name: str) -> list[tuple[str, bool]]:
    """``(parameter, required)`` pairs of a registered evaluator."""
    sig = inspect.signature(REGISTRY[name])
    return [(p.name, p.default is inspect.Parameter.empty) for p in sig.parameters.values()]
