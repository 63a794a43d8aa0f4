import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shapereg.core import BallCell, HyperRect, VoronoiCellRef
from shapereg.errors import InvalidArgument
from shapereg.estimators import fit_cart_like, fit_knn, fit_proto_nn, fit_uniform_tree
from shapereg.shape import audit_partition, beta_of, beta_to_gamma, gamma_of, gamma_to_beta_check
from shapereg.synth import RegressionProblem, generate


def test_gamma_hand_values():
    assert gamma_of(BallCell([0.5, 0.5], 0.1)) == pytest.approx(4 / math.pi, rel=1e-14)
    assert gamma_of(HyperRect([0, 0], [1, 0.5])) == pytest.approx(2.5, rel=1e-15)
    assert gamma_of(HyperRect([0.2], [0.7])) == 1.0
    assert gamma_of(HyperRect([0, 0], [1, 0])) == math.inf


def test_beta_values():
    assert beta_of(HyperRect([0, 0], [1, 0.25])) == 4.0
    assert beta_of(HyperRect([0, 0], [0, 1])) == math.inf
    assert beta_to_gamma(2, 2) == 8.0
    with pytest.raises(InvalidArgument):
        beta_to_gamma(0.5, 2)


def test_voronoi_gamma_is_estimated():
    ref = VoronoiCellRef(np.array([[0.25, 0.5], [0.75, 0.5]]), 0)
    # true cell [0, 0.5] x [0, 1]: gamma = 1.25 / 0.5
    assert gamma_of(ref, n_mc=40000, seed=0) == pytest.approx(2.5, rel=0.05)


@st.composite
def beta_rects(draw):
    d = draw(st.integers(1, 4))
    beta = draw(st.floats(1.0, 10.0))
    base = draw(st.floats(1e-3, 1.0))
    ratios = draw(st.lists(st.floats(1.0, beta), min_size=d, max_size=d))
    sides = base * np.array(ratios) / max(ratios)
    return HyperRect(np.zeros(d), sides), beta


@given(beta_rects())
def test_beta_regular_implies_gamma_regular(case):
    rect, beta = case
    assert gamma_of(rect) <= beta_to_gamma(beta, rect.d) * (1 + 1e-12)


@given(st.integers(1, 4), st.lists(st.floats(1e-3, 1.0), min_size=4, max_size=4))
def test_gamma_regular_implies_aspect_bounded(d, sides):
    rect = HyperRect(np.zeros(d), np.array(sides[:d]))
    assert gamma_to_beta_check(rect, gamma_of(rect))
    assert beta_of(rect) <= gamma_of(rect) * (1 + 1e-12)


def test_audit_cart_meets_threshold():
    data = generate(RegressionProblem(2, noise_params={"sigma": 0.5}), 500, 0)
    model = fit_cart_like(data, 20, 2.0)
    rep = audit_partition(model, aspect_threshold=2.0, gamma_threshold=beta_to_gamma(2.0, 2))
    agg = rep.aggregates()
    assert agg["max_aspect"] <= 2.0
    assert agg["fraction_violating"] == {"gamma": 0.0, "aspect": 0.0}
    assert agg["n_cells"] == len(model.leaves())
    json.loads(rep.to_json())
    lines = rep.to_csv().splitlines()
    assert lines[0] == "cell,diameter,volume,gamma,aspect,std_err"
    assert len(lines) == agg["n_cells"] + 1


def test_audit_knn_balls_constant_gamma():
    data = generate(RegressionProblem(2), 300, 1)
    rep = audit_partition(fit_knn(data, 10), mc_budget=50, seed=3)
    assert len(rep.cells) == 50
    assert all(c.gamma == pytest.approx(4 / math.pi, rel=1e-12) for c in rep.cells)


def test_audit_voronoi_is_estimated_and_seeded():
    data = generate(RegressionProblem(2), 100, 2)
    model = fit_proto_nn(data, 8, seed=1)
    a = audit_partition(model, mc_budget=100, seed=5)
    b = audit_partition(model, mc_budget=100, seed=5)
    assert a.estimated and a.to_csv() == b.to_csv()
    assert sum(c.volume for c in a.cells) == pytest.approx(1.0, abs=1e-12)


def test_audit_uniform_tree_degenerate_reporting():
    model = fit_uniform_tree(8, generate(RegressionProblem(2), 50, 0), seed=0)
    rep = audit_partition(model, aspect_threshold=5.0)
    assert rep.n_degenerate == 0
    assert rep.max_aspect >= 1.0


def test_audit_rejects_unknown():
    with pytest.raises(InvalidArgument):
        audit_partition(object())
