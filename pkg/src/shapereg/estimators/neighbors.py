"""Nearest-neighbour style estimators: k-NN, Proto-NN and OptiNet."""
from __future__ import annotations

import math

import numpy as np

from ..core import Dataset
from ..errors import InvalidArgument
from ..seeding import as_generator
from ..synth import RegressionProblem, sample_x
from .base import KNNModel, VoronoiModel


def fit_knn(data: Dataset, k: int) -> KNNModel:
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    if k > data.n:
        raise InvalidArgument(f"k = {k} exceeds the sample size n = {data.n}")
    return KNNModel(data, int(k))


def choose_k(n: int, d: int, delta: float = 0.1) -> int:
    """k ~ n^{2/(d+2)} log((n+1)^{d+1}/delta)^{d/(d+2)} with constant 1, clamped to [1, n]."""
    if n < 1 or d < 1:
        raise InvalidArgument("n and d must be >= 1")
    if not 0.0 < delta < 1.0:
        raise InvalidArgument("delta must lie in (0, 1)")
    log_term = (d + 1) * math.log(n + 1) + math.log(1.0 / delta)
    k = round(n ** (2.0 / (d + 2)) * log_term ** (d / (d + 2)))
    return int(min(max(k, 1), n))


def _prototype_law(law, d) -> RegressionProblem:
    if law is None:
        return RegressionProblem(d)
    if isinstance(law, RegressionProblem):
        if law.d != d:
            raise InvalidArgument("prototype law dimension does not match the data")
        return law
    if isinstance(law, str):
        return RegressionProblem(d, x_law=law)
    if isinstance(law, dict):
        params = dict(law)
        return RegressionProblem(d, x_law=params.pop("kind"), x_params=params)
    raise InvalidArgument(f"unsupported prototype law {law!r}")


def draw_prototypes(d: int, m: int, seed, prototype_law=None) -> np.ndarray:
    if int(m) != m or m < 1:
        raise InvalidArgument("m must be a positive integer")
    return sample_x(_prototype_law(prototype_law, d), int(m), as_generator(seed))


def _law_doc(law, d):
    p = _prototype_law(law, d)
    return {"kind": p.x_law, **p.x_params}


def fit_proto_nn(data: Dataset, m: int, seed, prototype_law=None) -> VoronoiModel:
    """1-NN rule on ``m`` random prototypes, labels averaged over the original sample."""
    sites = draw_prototypes(data.d, m, seed, prototype_law)
    params = {"m": int(m), "prototype_law": _law_doc(prototype_law, data.d)}
    return VoronoiModel(data, sites, "ProtoNN", params)


def _dist_to(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((points - z) ** 2, axis=1))


def greedy_net(points: np.ndarray, eta: float) -> np.ndarray:
    """Indices of a maximal eta-separated subset, scanning in index order."""
    points = np.asarray(points, dtype=np.float64)
    taken = []
    net = np.empty((0, points.shape[1]))
    for j in range(points.shape[0]):
        if net.shape[0] == 0 or _dist_to(net, points[j]).min() > eta:
            taken.append(j)
            net = points[taken]
    return np.asarray(taken, dtype=np.int64)


def net_is_valid(points, subset, eta: float) -> bool:
    """True iff ``points[subset]`` is eta-separated and maximal among ``points``."""
    points = np.asarray(points, dtype=np.float64)
    subset = np.asarray(subset, dtype=np.int64).reshape(-1)
    if points.shape[0] == 0:
        return subset.size == 0
    if subset.size == 0:
        return False
    if np.unique(subset).size != subset.size:
        return False
    net = points[subset]
    for i in range(net.shape[0] - 1):
        if not (_dist_to(net[i + 1:], net[i]) > eta).all():
            return False
    rest = np.setdiff1d(np.arange(points.shape[0]), subset)
    for j in rest:
        if (_dist_to(net, points[j]) > eta).all():
            return False
    return True


def fit_optinet(data: Dataset, m: int, eta: float, seed, prototype_law=None) -> VoronoiModel:
    """Proto-NN restricted to a greedy maximal eta-net of the prototypes."""
    if not eta > 0:
        raise InvalidArgument("eta must be > 0")
    z = draw_prototypes(data.d, m, seed, prototype_law)
    keep = greedy_net(z, eta)
    params = {"m": int(m), "eta": float(eta), "prototype_law": _law_doc(prototype_law, data.d)}
    model = VoronoiModel(data, z[keep], "OptiNet", params)
    model.prototypes = z
    model.net_indices = keep
    return model
