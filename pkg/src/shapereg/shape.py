"""Shape-regularity diagnostics for cells and fitted partitions."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BallCell, HyperRect, VoronoiCellRef, voronoi_cell_estimate
from .errors import InvalidArgument
from .seeding import rng_for


def gamma_of(cell, n_mc: int = 20000, seed=0) -> float:
    """``diam^d / volume``; ``inf`` for zero-volume cells."""
    if isinstance(cell, VoronoiCellRef):
        est = voronoi_cell_estimate(cell, HyperRect.unit(cell.d), n_mc, seed)
        diam, vol = est.diameter_est, est.volume_est
    else:
        diam, vol = cell.diameter(), cell.volume()
    if vol <= 0.0:
        return math.inf
    return diam**cell.d / vol


def beta_of(rect: HyperRect) -> float:
    """Aspect ratio ``h_+ / h_-``; ``inf`` when a side is zero."""
    lo = rect.h_minus
    if lo <= 0.0:
        return math.inf
    return rect.h_plus / lo


def beta_to_gamma(beta: float, d: int) -> float:
    if beta < 1 or d < 1:
        raise InvalidArgument("need beta >= 1 and d >= 1")
    return beta**d * d ** (d / 2)


def gamma_to_beta_check(rect: HyperRect, gamma: float) -> bool:
    """For a gamma-regular rectangle, whether its aspect ratio is at most gamma."""
    return beta_of(rect) <= gamma


@dataclass
class CellRecord:
    diameter: float
    volume: float
    gamma: float
    aspect: float | None = None
    std_err: float | None = None


@dataclass
class ShapeReport:
    cells: list = field(default_factory=list)
    gamma_threshold: float | None = None
    aspect_threshold: float | None = None
    estimated: bool = False

    @property
    def finite_gammas(self):
        return [c.gamma for c in self.cells if math.isfinite(c.gamma)]

    @property
    def n_degenerate(self) -> int:
        return sum(1 for c in self.cells if not math.isfinite(c.gamma))

    @property
    def max_gamma(self) -> float:
        g = [c.gamma for c in self.cells]
        return max(g) if g else math.nan

    @property
    def max_aspect(self) -> float:
        a = [c.aspect for c in self.cells if c.aspect is not None]
        return max(a) if a else math.nan

    def fraction_violating(self) -> dict:
        out = {}
        n = len(self.cells)
        if self.gamma_threshold is not None and n:
            out["gamma"] = sum(c.gamma > self.gamma_threshold for c in self.cells) / n
        if self.aspect_threshold is not None and n:
            a = [c.aspect for c in self.cells if c.aspect is not None]
            out["aspect"] = sum(v > self.aspect_threshold for v in a) / len(a) if a else math.nan
        return out

    def aggregates(self) -> dict:
        return {
            "n_cells": len(self.cells),
            "n_degenerate": self.n_degenerate,
            "max_gamma": self.max_gamma,
            "max_finite_gamma": max(self.finite_gammas) if self.finite_gammas else math.nan,
            "max_aspect": self.max_aspect,
            "gamma_threshold": self.gamma_threshold,
            "aspect_threshold": self.aspect_threshold,
            "fraction_violating": self.fraction_violating(),
            "estimated": self.estimated,
        }

    def to_json(self) -> str:
        return json.dumps(self.aggregates(), allow_nan=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cell", "diameter", "volume", "gamma", "aspect", "std_err"])
        for i, c in enumerate(self.cells):
            w.writerow([i] + [repr(v) if v is not None else "" for v in (c.diameter, c.volume, c.gamma, c.aspect, c.std_err)])
        return buf.getvalue()


def _rect_record(r: HyperRect) -> CellRecord:
    return CellRecord(r.diameter(), r.volume(), gamma_of(r), beta_of(r))


def audit_partition(model, domain: HyperRect | None = None, mc_budget: int = 200, seed=0,
                    gamma_threshold=None, aspect_threshold=None) -> ShapeReport:
    """Per-cell gamma and aspect for a fitted model.

    Partition models report every leaf exactly.  k-NN models report the ball
    cells at ``mc_budget`` random query points.  Voronoi models report every
    site's cell with Monte Carlo volume and diameter (``mc_budget`` samples
    per site, at least 100 times the number of sites overall).
    """
    from .estimators.base import GridModel, KNNModel, TreeModel, VoronoiModel

    if not isinstance(model, (TreeModel, GridModel, KNNModel, VoronoiModel)):
        raise InvalidArgument(f"cannot audit {type(model).__name__}")
    d = model.d
    domain = domain or HyperRect.unit(d)
    report = ShapeReport(gamma_threshold=gamma_threshold, aspect_threshold=aspect_threshold)
    if isinstance(model, (TreeModel, GridModel)):
        report.cells = [_rect_record(r) for r in model.leaves()]
    elif isinstance(model, KNNModel):
        rng = rng_for(seed, role="audit-knn")
        q = domain.lower + domain.sides * rng.random((mc_budget, d))
        for x in q:
            ball: BallCell = model.cell_of(x)
            report.cells.append(CellRecord(ball.diameter(), ball.volume(), gamma_of(ball)))
    elif isinstance(model, VoronoiModel):
        report.estimated = True
        m = model.sites.shape[0]
        n_mc = max(100, mc_budget * m)
        for j in range(m):
            est = voronoi_cell_estimate(VoronoiCellRef(model.sites, j), domain, n_mc, rng_for(seed, role="audit-voronoi"))
            g = est.diameter_est**d / est.volume_est if est.volume_est > 0 else math.inf
            report.cells.append(CellRecord(est.diameter_est, est.volume_est, g, None, est.std_err))
    else:
        raise InvalidArgument(f"cannot audit {type(model).__name__}")
    return report
