"""Reference values computed independently with ``tools/oracles.py``
(mpmath, 50 digits) and frozen here."""
import math

import pytest

from shapereg import bounds
from shapereg.estimators import choose_k
from shapereg.shape import beta_to_gamma

ORACLE = {
    "shattering_3_2": 16,
    "variance_1_1_half": 1.6651092223153956,
    "general_example": 1.0605342732740592,
    "mass_example": 3.23137351991543,
    "delta_n_large_100_2": 114.3639141618567,
    "choose_k_4096_2": 334,
    "knn_plugin": 1.0096763089849512,
    "cart_plugin": 1.0748600220702267,
    "psi_1": 18,
    "optinet_plugin": 3.839066657530874,
    "c_delta_1_inv_e": 2.1801922560161553,
    "chernoff_lower_200_005": 0.8269181617397715,
    "centered_theta_d2_a025": 0.3333333333333333,
    "centered_tail_d2_a025_N64": 0.00046251890800576523,
    "beta_to_gamma_2_2": 8.0,
    "mondrian_aspect_01_2": 284.33158805743415,
    "counterexample_C2": 0.24274588585366172,
}

REL = 1e-12


def close(a, key):
    assert a == pytest.approx(ORACLE[key], rel=REL)


def test_shattering():
    close(bounds.shattering_bound(3, 2).value, "shattering_3_2")


def test_variance():
    close(bounds.variance_bound(1, 1, 1, 0.5).value, "variance_1_1_half")


def test_general():
    # n * Pn = 25 with n = 100
    close(bounds.pointwise_bound_general(1, 100, 2, 0.1, 0.25, 1, 0.1).value, "general_example")


def test_mass():
    close(bounds.pointwise_bound_mass(1, 1000, 4, 0.05, 1, 0.01, 1, 0.2).value, "mass_example")


def test_delta_n_large():
    close(bounds.delta_n_large_threshold(100, 2, 0.1).value, "delta_n_large_100_2")


def test_choose_k():
    assert choose_k(4096, 2, 0.1) == ORACLE["choose_k_4096_2"]


def test_knn_plugin():
    k = choose_k(4096, 2, 0.1)
    close(bounds.knn_bound(0.25, 4096, 2, 0.1, k, 1, 1).value, "knn_plugin")


def test_cart_plugin():
    m = math.ceil((10**4) ** 0.5)
    close(bounds.cart_bound(0.25, 10**4, 2, 0.1, m, 2, 1, 1).value, "cart_plugin")


def test_psi():
    assert bounds.psi_d(1, 1, 1, 1) == ORACLE["psi_1"]


def test_optinet_plugin():
    n = 4096
    close(bounds.optinet_bound(0.25, n, 64, 2, 0.1, 1, 1, n ** -0.25, 1).value, "optinet_plugin")


def test_c_delta():
    close(bounds.c_delta_d(math.exp(-1), 1), "c_delta_1_inv_e")


def test_chernoff():
    close(bounds.chernoff_lower(200, 0.05).value, "chernoff_lower_200_005")


def test_centered_tail():
    res = bounds.prt_tail_bounds("centered_diam", 64, 2, 0.25)
    close(res.extra["theta"], "centered_theta_d2_a025")
    close(res.value, "centered_tail_d2_a025_N64")


def test_beta_to_gamma():
    close(beta_to_gamma(2, 2), "beta_to_gamma_2_2")


def test_mondrian_aspect():
    close(bounds.mondrian_aspect_threshold(0.1, 2).value, "mondrian_aspect_01_2")


def test_counterexample_constant():
    close(bounds.counterexample_constant(2), "counterexample_C2")
