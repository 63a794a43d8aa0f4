"""Shared domain types and the local-averaging rule.

Cells are immutable value objects.  Every cell answers ``contains``,
``diameter`` and ``volume``; Voronoi cells do so through Monte Carlo
estimates only (see :func:`voronoi_cell_estimate`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidArgument


def _as_matrix(x, d: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if d == 1 else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidArgument(f"expected a 2-d array, got shape {arr.shape}")
    return arr


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the Euclidean unit ball in dimension ``d``."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64).reshape(-1)
        if x.ndim != 2 or x.shape[1] < 1:
            raise InvalidArgument("x must be an n-by-d matrix with d >= 1")
        if x.shape[0] != y.shape[0]:
            raise InvalidArgument(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidArgument("dataset entries must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @classmethod
    def empty(cls, d: int) -> "Dataset":
        return cls(np.empty((0, d)), np.empty(0))


@dataclass(frozen=True)
class HyperRect:
    """Axis-aligned box.

    With ``half_open=True`` membership is ``lower < x <= upper`` per axis,
    except that a lower face lying on 0 (the domain boundary) is closed, so
    the cells of a partition of [0, 1]^d tile it with no gaps or overlaps.
    """

    lower: np.ndarray
    upper: np.ndarray
    half_open: bool = False

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64).reshape(-1)
        up = np.array(self.upper, dtype=np.float64).reshape(-1)
        if lo.shape != up.shape or lo.size == 0:
            raise InvalidArgument("lower and upper must be nonempty vectors of equal length")
        if np.any(lo > up):
            raise InvalidArgument("lower must be <= upper in every coordinate")
        lo.flags.writeable = False
        up.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def unit(cls, d: int, half_open: bool = False) -> "HyperRect":
        return cls(np.zeros(d), np.ones(d), half_open)

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def sides(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def h_minus(self) -> float:
        return float(self.sides.min())

    @property
    def h_plus(self) -> float:
        return float(self.sides.max())

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def diameter(self) -> float:
        return float(np.sqrt(np.sum(self.sides**2)))

    def contains(self, points) -> np.ndarray | bool:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = _as_matrix(pts)
        if pts.shape[1] != self.d:
            raise InvalidArgument(f"point dimension {pts.shape[1]} != cell dimension {self.d}")
        below = pts <= self.upper
        if self.half_open:
            above = (pts > self.lower) | ((self.lower <= 0.0) & (pts >= self.lower))
        else:
            above = pts >= self.lower
        inside = np.all(below & above, axis=1)
        return bool(inside[0]) if single else inside

    def scaled(self, c: float) -> "HyperRect":
        return HyperRect(self.lower * c, self.upper * c, self.half_open)


@dataclass(frozen=True)
class BallCell:
    """Closed Euclidean ball; geometry is reported unclipped."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64).reshape(-1)
        if self.radius < 0 or not math.isfinite(self.radius):
            raise InvalidArgument("radius must be a finite nonnegative number")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def d(self) -> int:
        return self.center.size

    def volume(self) -> float:
        return unit_ball_volume(self.d) * self.radius**self.d

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, points) -> np.ndarray | bool:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = _as_matrix(pts)
        if pts.shape[1] != self.d:
            raise InvalidArgument(f"point dimension {pts.shape[1]} != cell dimension {self.d}")
        dist = np.sqrt(np.sum((pts - self.center) ** 2, axis=1))
        inside = dist <= self.radius
        return bool(inside[0]) if single else inside

    def clipped_volume(self, domain: HyperRect | None = None, n_mc: int = 20000, seed=0) -> float:
        """Monte Carlo volume of the ball intersected with ``domain``."""
        domain = domain or HyperRect.unit(self.d)
        lo = np.maximum(domain.lower, self.center - self.radius)
        up = np.minimum(domain.upper, self.center + self.radius)
        if np.any(lo >= up):
            return 0.0
        box = float(np.prod(up - lo))
        rng = np.random.default_rng(seed)
        pts = lo + (up - lo) * rng.random((n_mc, self.d))
        return box * float(np.mean(self.contains(pts)))


@dataclass(frozen=True)
class VoronoiCellRef:
    sites: np.ndarray
    index: int

    def __post_init__(self):
        s = np.ascontiguousarray(self.sites, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] == 0:
            raise InvalidArgument("sites must be a nonempty m-by-d matrix")
        if not 0 <= self.index < s.shape[0]:
            raise InvalidArgument(f"index {self.index} outside [0, {s.shape[0]})")
        s.flags.writeable = False
        object.__setattr__(self, "sites", s)

    @property
    def d(self) -> int:
        return self.sites.shape[1]

    def contains(self, points) -> np.ndarray | bool:
        from .kernels import nearest_site

        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = _as_matrix(pts)
        if pts.shape[1] != self.d:
            raise InvalidArgument(f"point dimension {pts.shape[1]} != cell dimension {self.d}")
        inside = nearest_site(pts, self.sites) == self.index
        return bool(inside[0]) if single else inside

    def volume(self, n_mc: int = 20000, seed=0) -> float:
        return voronoi_cell_estimate(self, HyperRect.unit(self.d), n_mc, seed).volume_est

    def diameter(self, n_mc: int = 20000, seed=0) -> float:
        return voronoi_cell_estimate(self, HyperRect.unit(self.d), n_mc, seed).diameter_est


Cell = Union[HyperRect, BallCell, VoronoiCellRef]


def _check_dims(data: Dataset, cell: Cell):
    if data.d != cell.d:
        raise InvalidArgument(f"dataset dimension {data.d} != cell dimension {cell.d}")


def mean_exact(values: np.ndarray) -> float:
    """Mean that is exact for constant input and independent of ordering."""
    if values.size == 0:
        return 0.0
    base = float(values.min())
    return base + math.fsum((values - base).tolist()) / values.size


def local_average(data: Dataset, cell: Cell, x=None) -> float:
    """Average of responses whose covariates fall in ``cell`` (0 if none)."""
    _check_dims(data, cell)
    if x is not None:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.size != cell.d:
            raise InvalidArgument("query point dimension does not match the cell")
        if not cell.contains(x):
            raise InvalidArgument("query point is not inside the cell")
    if data.n == 0:
        return 0.0
    return mean_exact(data.y[cell.contains(data.x)])


def empirical_mass(data: Dataset, cell: Cell) -> float:
    _check_dims(data, cell)
    if data.n == 0:
        raise InvalidArgument("empirical mass is undefined for n = 0")
    return int(np.count_nonzero(cell.contains(data.x))) / data.n


@dataclass(frozen=True)
class RectGeometry:
    h_minus: float
    h_plus: float
    volume: float
    diameter: float


def rect_geometry(r: HyperRect) -> RectGeometry:
    return RectGeometry(r.h_minus, r.h_plus, r.volume(), r.diameter())


@dataclass(frozen=True)
class VoronoiEstimate:
    volume_est: float
    diameter_est: float
    std_err: float
    n_inside: int
    degenerate: bool = field(default=False)


def voronoi_cell_estimate(v: VoronoiCellRef, domain: HyperRect, n_mc: int, seed) -> VoronoiEstimate:
    """Monte Carlo volume and (lower-bound) diameter of a Voronoi cell within ``domain``.

    The diameter estimate is the largest pairwise distance among in-cell
    samples, so it never exceeds the true diameter.
    """
    if n_mc < 100:
        raise InvalidArgument("n_mc must be at least 100")
    if domain.d != v.d:
        raise InvalidArgument("domain and sites have different dimensions")
    rng = np.random.default_rng(seed)
    pts = domain.lower + domain.sides * rng.random((n_mc, v.d))
    inside = pts[v.contains(pts)]
    k = inside.shape[0]
    frac = k / n_mc
    vol = domain.volume()
    se = vol * math.sqrt(frac * (1.0 - frac) / n_mc)
    if k == 0:
        return VoronoiEstimate(0.0, 0.0, se, 0, degenerate=True)
    return VoronoiEstimate(vol * frac, _max_pairwise_distance(inside), se, k)


def _max_pairwise_distance(pts: np.ndarray) -> float:
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    # The farthest pair lies on the convex hull; fall back to brute force when
    # the hull is degenerate or tiny.
    if pts.shape[0] > 50:
        try:
            from scipy.spatial import ConvexHull

            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass
    best = 0.0
    for start in range(0, pts.shape[0], 512):
        block = pts[start:start + 512]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        best = max(best, float(d2.max()))
    return math.sqrt(best)
