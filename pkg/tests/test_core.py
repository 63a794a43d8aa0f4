import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shapereg.core import (
    BallCell, Dataset, HyperRect, VoronoiCellRef, empirical_mass, local_average, mean_exact,
    rect_geometry, unit_ball_volume, voronoi_cell_estimate,
)
from shapereg.errors import InvalidArgument


def test_empty_cell_average_is_zero():
    data = Dataset([[0.1], [0.2]], [5.0, 7.0])
    assert local_average(data, HyperRect([0.5], [0.9])) == 0.0
    assert local_average(Dataset.empty(2), HyperRect.unit(2)) == 0.0


def test_local_average_hand_value():
    data = Dataset([[0.1, 0.1], [0.2, 0.3], [0.9, 0.9]], [1.0, 3.0, 100.0])
    assert local_average(data, HyperRect([0, 0], [0.5, 0.5])) == 2.0


def test_local_average_query_must_be_inside():
    data = Dataset([[0.1]], [1.0])
    with pytest.raises(InvalidArgument):
        local_average(data, HyperRect([0.5], [1.0]), x=[0.1])


def test_dataset_validation():
    with pytest.raises(InvalidArgument):
        Dataset(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(InvalidArgument):
        Dataset([[np.nan]], [0.0])
    data = Dataset(np.zeros((3, 2)), np.zeros(3))
    assert not data.x.flags.writeable


def test_rect_geometry_hand_values():
    g = rect_geometry(HyperRect([0, 0], [1, 0.5]))
    assert (g.h_minus, g.h_plus, g.volume) == (0.5, 1.0, 0.5)
    assert g.diameter == pytest.approx(math.sqrt(1.25), rel=1e-15)


def test_rect_rejects_inverted_bounds():
    with pytest.raises(InvalidArgument):
        HyperRect([0.5], [0.2])


def test_half_open_tiles_unit_interval():
    left = HyperRect([0.0], [0.5], half_open=True)
    right = HyperRect([0.5], [1.0], half_open=True)
    pts = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])
    assert np.all(left.contains(pts) ^ right.contains(pts))
    assert left.contains([0.5]) and not right.contains([0.5])


def test_empirical_mass():
    data = Dataset([[0.1], [0.6], [0.7], [0.8]], np.zeros(4))
    assert empirical_mass(data, HyperRect([0.5], [1.0])) == 0.75
    with pytest.raises(InvalidArgument):
        empirical_mass(Dataset.empty(1), HyperRect.unit(1))


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_ball_geometry_and_clip():
    b = BallCell([0.5, 0.5], 0.25)
    assert b.diameter() == 0.5
    assert b.volume() == pytest.approx(math.pi / 16)
    # a ball well inside the cube loses nothing to clipping
    assert b.clipped_volume(n_mc=40000, seed=1) == pytest.approx(math.pi / 16, rel=0.03)
    corner = BallCell([0.0, 0.0], 0.5)
    assert corner.clipped_volume(n_mc=40000, seed=2) == pytest.approx(math.pi / 16, rel=0.03)


def test_voronoi_collinear_sites_middle_cell():
    # bisectors at 0.25 and 0.75
    ref = VoronoiCellRef(np.array([[0.0], [0.5], [1.0]]), 1)
    est = voronoi_cell_estimate(ref, HyperRect.unit(1), 40000, 0)
    assert est.volume_est == pytest.approx(0.5, abs=4 * est.std_err + 1e-3)
    assert est.diameter_est <= 0.5
    assert est.diameter_est == pytest.approx(0.5, abs=1e-3)


def test_voronoi_diameter_is_lower_bound_2d():
    sites = np.array([[0.25, 0.5], [0.75, 0.5]])
    est = voronoi_cell_estimate(VoronoiCellRef(sites, 0), HyperRect.unit(2), 20000, 3)
    # the left cell is [0, 0.5] x [0, 1], diameter sqrt(1.25)
    assert est.diameter_est <= math.sqrt(1.25) + 1e-12
    assert est.volume_est == pytest.approx(0.5, abs=0.02)


def test_voronoi_budget_check():
    with pytest.raises(InvalidArgument):
        voronoi_cell_estimate(VoronoiCellRef(np.array([[0.5]]), 0), HyperRect.unit(1), 10, 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.randoms())
def test_mean_exact_order_independent(vals, r):
    a = np.array(vals)
    b = a.copy()
    r.shuffle(b)
    assert mean_exact(a) == mean_exact(b)
    assert min(vals) <= mean_exact(a) <= max(vals)


@given(st.floats(-1e3, 1e3), st.integers(1, 40))
def test_mean_exact_constant(c, n):
    assert mean_exact(np.full(n, c)) == c


@given(st.integers(1, 4), st.data())
def test_rect_contains_its_corners(d, data):
    lo = np.array(data.draw(st.lists(st.floats(0, 0.5), min_size=d, max_size=d)))
    up = lo + np.array(data.draw(st.lists(st.floats(0, 0.5), min_size=d, max_size=d)))
    r = HyperRect(lo, up)
    assert r.contains(lo) and r.contains(up)
    assert r.volume() <= r.h_plus ** d + 1e-15
