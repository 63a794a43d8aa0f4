"""Fitted local-map models and the prediction entry points."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core import BallCell, Dataset, HyperRect, VoronoiCellRef, _as_matrix, mean_exact
from ..errors import InvalidArgument

METHODS = (
    "FixedPartition",
    "KNN",
    "ProtoNN",
    "OptiNet",
    "CartLike",
    "CenteredTree",
    "UniformTree",
    "Mondrian",
)


@dataclass(frozen=True)
class SplitSpec:
    """Split of a rectangle along coordinate ``p`` (0-based).

    ``u`` is the relative position inside the cell side and ``threshold``
    the cached absolute cut; points with ``x[p] <= threshold`` go left.
    """

    p: int
    u: float
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.u < 1.0:
            raise InvalidArgument(f"split position u={self.u} must lie in (0, 1)")

    @classmethod
    def at(cls, rect: HyperRect, p: int, threshold: float) -> "SplitSpec":
        side = rect.upper[p] - rect.lower[p]
        return cls(int(p), float((threshold - rect.lower[p]) / side), float(threshold))

    @classmethod
    def relative(cls, rect: HyperRect, p: int, u: float) -> "SplitSpec":
        t = rect.lower[p] + (rect.upper[p] - rect.lower[p]) * u
        return cls(int(p), float(u), float(t))


def _check_points(x, d):
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = _as_matrix(pts, d)
    if pts.shape[1] != d:
        raise InvalidArgument(f"point dimension {pts.shape[1]} != model dimension {d}")
    return pts, single


class LocalModel:
    """Base class: a fitted local-averaging estimator on [0, 1]^d."""

    method: str = ""

    def __init__(self, data: Dataset, params: dict):
        self.data = data
        self.params = dict(params)

    @property
    def d(self) -> int:
        return self.data.d

    def predict(self, x):
        pts, single = _check_points(x, self.d)
        out = self._predict(pts)
        return float(out[0]) if single else out

    def cell_of(self, x):
        pts, single = _check_points(x, self.d)
        if not single and pts.shape[0] != 1:
            raise InvalidArgument("cell_of takes a single point")
        return self._cell(pts[0])

    def _predict(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cell(self, x: np.ndarray):
        raise NotImplementedError


class TreeModel(LocalModel):
    """Rectangular partition stored as a binary tree in flat arrays.

    Node 0 is the root ``[0, 1]^d``.  ``left[i] < 0`` marks a leaf.  Leaf
    values are the local averages of the training responses in the leaf.
    """

    def __init__(self, data, params, method, feature, threshold, left, right, lower, upper, fallback=None):
        super().__init__(data, params)
        self.method = method
        self.feature = np.ascontiguousarray(feature, dtype=np.int64)
        self.threshold = np.ascontiguousarray(threshold, dtype=np.float64)
        self.left = np.ascontiguousarray(left, dtype=np.int64)
        self.right = np.ascontiguousarray(right, dtype=np.int64)
        self.lower = np.ascontiguousarray(lower, dtype=np.float64)
        self.upper = np.ascontiguousarray(upper, dtype=np.float64)
        k = self.left.size
        self.fallback = np.zeros(k, dtype=bool) if fallback is None else np.asarray(fallback, dtype=bool)
        self.value = np.zeros(k)
        self.count = np.zeros(k, dtype=np.int64)
        if data.n:
            leaf = kernels.tree_apply(data.x, self.feature, self.threshold, self.left, self.right)
            order = np.argsort(leaf, kind="stable")
            ids, starts, counts = np.unique(leaf[order], return_index=True, return_counts=True)
            ys = data.y[order]
            for i, s, c in zip(ids, starts, counts):
                self.value[i] = mean_exact(ys[s:s + c])
                self.count[i] = c

    @property
    def n_nodes(self) -> int:
        return self.left.size

    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(self.left < 0)

    def leaves(self) -> list[HyperRect]:
        return [self.rect(i) for i in self.leaf_ids()]

    def rect(self, node: int) -> HyperRect:
        return HyperRect(self.lower[node], self.upper[node], half_open=True)

    def apply(self, x) -> np.ndarray:
        pts, _ = _check_points(x, self.d)
        return kernels.tree_apply(pts, self.feature, self.threshold, self.left, self.right)

    def leaf_sample_indices(self, node: int) -> np.ndarray:
        if self.data.n == 0:
            return np.empty(0, dtype=np.int64)
        return np.flatnonzero(self.apply(self.data.x) == node)

    def _predict(self, pts):
        return self.value[kernels.tree_apply(pts, self.feature, self.threshold, self.left, self.right)]

    def _cell(self, x):
        node = int(kernels.tree_apply(x[None, :], self.feature, self.threshold, self.left, self.right)[0])
        return self.rect(node)


def tree_arrays_from_nodes(nodes, d):
    """Pack a list of ``(lower, upper, p, t, left, right, fallback)`` records."""
    k = len(nodes)
    feature = np.full(k, -1, dtype=np.int64)
    threshold = np.zeros(k)
    left = np.full(k, -1, dtype=np.int64)
    right = np.full(k, -1, dtype=np.int64)
    lower = np.zeros((k, d))
    upper = np.zeros((k, d))
    fallback = np.zeros(k, dtype=bool)
    for i, (lo, up, p, t, li, ri, fb) in enumerate(nodes):
        lower[i] = lo
        upper[i] = up
        feature[i] = p
        threshold[i] = t
        left[i] = li
        right[i] = ri
        fallback[i] = fb
    return feature, threshold, left, right, lower, upper, fallback


class GridModel(LocalModel):
    """Fixed product partition; cells are half-open boxes ``(u, u']``."""

    method = "FixedPartition"

    def __init__(self, data, cuts):
        super().__init__(data, {"cuts": [list(map(float, c)) for c in cuts]})
        self.cuts = [np.asarray(c, dtype=np.float64) for c in cuts]
        self.edges = [np.concatenate(([0.0], c, [1.0])) for c in self.cuts]
        self.shape = tuple(c.size + 1 for c in self.cuts)
        ncell = int(np.prod(self.shape))
        self.value = np.zeros(ncell)
        self.count = np.zeros(ncell, dtype=np.int64)
        if data.n:
            cell = self.cell_index(data.x)
            order = np.argsort(cell, kind="stable")
            ids, starts, counts = np.unique(cell[order], return_index=True, return_counts=True)
            ys = data.y[order]
            for i, s, c in zip(ids, starts, counts):
                self.value[i] = mean_exact(ys[s:s + c])
                self.count[i] = c

    def cell_index(self, pts) -> np.ndarray:
        # number of cuts strictly below x gives the (u, u'] slot
        multi = [np.searchsorted(c, pts[:, k], side="left") for k, c in enumerate(self.cuts)]
        return np.ravel_multi_index(multi, self.shape, mode="clip")

    def rect(self, flat: int) -> HyperRect:
        multi = np.unravel_index(flat, self.shape)
        lo = [self.edges[k][j] for k, j in enumerate(multi)]
        up = [self.edges[k][j + 1] for k, j in enumerate(multi)]
        return HyperRect(lo, up, half_open=True)

    def leaves(self) -> list[HyperRect]:
        return [self.rect(i) for i in range(self.value.size)]

    def _predict(self, pts):
        return self.value[self.cell_index(pts)]

    def _cell(self, x):
        return self.rect(int(self.cell_index(x[None, :])[0]))


class KNNModel(LocalModel):
    """k-nearest-neighbour averaging; the cell of x is the closed ball of radius tau_k(x)."""

    method = "KNN"

    def __init__(self, data, k):
        super().__init__(data, {"k": int(k)})
        from scipy.spatial import cKDTree

        self.k = int(k)
        self._tree = cKDTree(data.x)

    def radius_and_members(self, x: np.ndarray):
        """``(tau_k, member indices)`` for one query point."""
        n = self.data.n
        k = self.k
        width = min(n, k + 8)
        while True:
            kd_dist, idx = self._tree.query(x, k=width)
            idx = np.atleast_1d(idx)
            kd_dist = np.atleast_1d(kd_dist)
            # exact distances, computed exactly as BallCell.contains does
            dist = np.sqrt(np.sum((self.data.x[idx] - x) ** 2, axis=1))
            tau = float(np.partition(dist, k - 1)[k - 1])
            if width == n or kd_dist[-1] > tau * (1.0 + 1e-9) + 1e-300:
                return tau, idx[dist <= tau]
            width = min(n, 2 * width)

    def _predict(self, pts):
        n, k = self.data.n, self.k
        width = min(n, k + 8)
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], 1024):
            block = pts[start:start + 1024]
            kd_dist, idx = self._tree.query(block, k=width)
            idx = idx.reshape(block.shape[0], width)
            kd_dist = kd_dist.reshape(block.shape[0], width)
            diff = self.data.x[idx] - block[:, None, :]
            dist = np.sqrt(np.sum(diff**2, axis=2))
            tau = np.partition(dist, k - 1, axis=1)[:, k - 1]
            ys = self.data.y[idx]
            for i in range(block.shape[0]):
                if width < n and not kd_dist[i, -1] > tau[i] * (1.0 + 1e-9) + 1e-300:
                    _, members = self.radius_and_members(block[i])
                    out[start + i] = mean_exact(self.data.y[members])
                else:
                    out[start + i] = mean_exact(ys[i][dist[i] <= tau[i]])
        return out

    def _cell(self, x):
        tau, _ = self.radius_and_members(x)
        return BallCell(x.copy(), tau)


class VoronoiModel(LocalModel):
    """Nearest-site rule with site labels averaged from the original sample."""

    def __init__(self, data, sites, method, params, labels=None):
        super().__init__(data, params)
        self.method = method
        self.sites = np.ascontiguousarray(sites, dtype=np.float64)
        if labels is None:
            labels = np.zeros(self.sites.shape[0])
            if data.n:
                owner = kernels.nearest_site(data.x, self.sites)
                for j in np.unique(owner):
                    labels[j] = mean_exact(data.y[owner == j])
        self.labels = np.asarray(labels, dtype=np.float64)

    def site_of(self, pts) -> np.ndarray:
        return kernels.nearest_site(pts, self.sites)

    def _predict(self, pts):
        return self.labels[self.site_of(pts)]

    def _cell(self, x):
        return VoronoiCellRef(self.sites, int(self.site_of(x[None, :])[0]))


def predict(model: LocalModel, x):
    """Local average over ``cell_of(x)``; vectorised when ``x`` is a matrix."""
    return model.predict(x)


def cell_of(model: LocalModel, x):
    return model.cell_of(x)
