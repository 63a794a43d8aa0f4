import numpy as np
import pytest

from shapereg.errors import ConfigError, InvalidArgument
from shapereg.synth import (
    G_KINDS, NOISE_KINDS, X_KINDS, RegressionProblem, eval_g, generate, generate_with_noise,
)


def test_linear_sum_at_origin_is_zero():
    assert eval_g(RegressionProblem(3), np.zeros(3)) == 0.0


def test_eval_g_kinds():
    x = np.array([[0.25, 0.5]])
    assert eval_g(RegressionProblem(2, "LinearSum"), x)[0] == 0.75
    sine = RegressionProblem(2, "AdditiveSine", {"amp": 2.0})
    assert eval_g(sine, x)[0] == pytest.approx(2 * (np.sin(np.pi / 2) + np.sin(np.pi)))
    tent = RegressionProblem(2, "MaxAffine")
    # max(x1, x2, 1 - x1, 1 - x2)
    assert eval_g(tent, x)[0] == 0.75
    assert eval_g(RegressionProblem(2, "Constant", {"c": 3.0}), x)[0] == 3.0


def test_eval_g_rejects_outside_support():
    with pytest.raises(InvalidArgument):
        eval_g(RegressionProblem(1), [1.5])


def test_unknown_kinds_rejected():
    with pytest.raises(InvalidArgument):
        RegressionProblem(1, "Quadratic")
    with pytest.raises(InvalidArgument):
        RegressionProblem(1, noise="Cauchy")
    with pytest.raises(InvalidArgument):
        RegressionProblem(1, x_law="Normal")


def test_noise_parameter_aliases():
    p = RegressionProblem(1, noise="BoundedUniform", noise_params={"sigma": 0.3})
    assert p.noise_params == {"a": 0.3}
    # sub-Gaussian parameter of a bounded variable, not its variance
    assert p.sigma2 == pytest.approx(0.09)


@pytest.mark.parametrize("noise", NOISE_KINDS)
def test_variance_dominated_by_subgaussian_parameter(noise):
    p = RegressionProblem(2, "Constant", noise=noise, noise_params={"sigma": 0.7})
    _, eps = generate_with_noise(p, 20000, 11)
    assert eps.var() <= p.sigma2 * 1.05
    assert abs(eps.mean()) < 4 * 0.7 / np.sqrt(20000)


def test_same_seed_same_data():
    p = RegressionProblem(2, "AdditiveSine", noise="Gaussian", noise_params={"sigma": 1.0})
    a, b = generate(p, 50, 7), generate(p, 50, 7)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = generate(p, 50, 8)
    assert not np.array_equal(a.x, c.x)


def test_noise_is_returned_exactly():
    p = RegressionProblem(2, noise="HeteroGaussian", noise_params={"sigma_max": 1.0})
    data, eps = generate_with_noise(p, 200, 1)
    assert np.array_equal(data.y, eval_g(p, data.x) + eps)


@pytest.mark.parametrize("law", X_KINDS)
def test_covariates_in_unit_cube(law):
    data = generate(RegressionProblem(3, x_law=law), 2000, 0)
    assert data.x.min() >= 0.0 and data.x.max() <= 1.0


def test_floored_mixture_mean_and_floor():
    p = RegressionProblem(2, x_law="FlooredMixture", x_params={"b": 0.3})
    assert p.density_floor == pytest.approx(0.3)
    data = generate(p, 20000, 0)
    assert data.x.mean() == pytest.approx(0.5, abs=0.01)


def test_noise_moments():
    p = RegressionProblem(1, "Constant", noise="Gaussian", noise_params={"sigma": 2.0})
    y = generate(p, 40000, 3).y
    assert y.std() == pytest.approx(2.0, rel=0.02)
    u = RegressionProblem(1, "Constant", noise="BoundedUniform", noise_params={"a": 1.0})
    yu = generate(u, 1000, 0).y
    assert np.abs(yu).max() <= 1.0


@pytest.mark.parametrize("g", G_KINDS)
@pytest.mark.parametrize("noise", NOISE_KINDS)
def test_problem_dict_round_trip(g, noise):
    p = RegressionProblem(2, g, noise=noise, noise_params={"sigma": 0.5})
    q = RegressionProblem.from_dict(p.to_dict())
    assert q == p


def test_problem_from_dict_strict():
    doc = RegressionProblem(1).to_dict()
    doc["extra"] = 1
    with pytest.raises(ConfigError):
        RegressionProblem.from_dict(doc)


def test_lipschitz_constants():
    assert RegressionProblem(3, "LinearSum").lipschitz == pytest.approx(np.sqrt(3))
    assert RegressionProblem(2, "Constant").lipschitz == 0.0
