"""Independent high-precision evaluation of the reference values frozen in
``tests/test_oracle_values.py``.

The formulas are written out again here with mpmath at 50 digits and share no
code with the package.  Run ``python3 tools/oracles.py`` to regenerate.
"""
import json

from mpmath import mp, mpf, log, sqrt, exp, pi, e, nint

mp.dps = 50


def lp(n, v, delta):
    return v * log(n + 1) + log(1 / mpf(delta))


def choose_k(n, d, delta):
    return int(nint(mpf(n) ** (mpf(2) / (d + 2)) * lp(n, d + 1, delta) ** (mpf(d) / (d + 2))))


def values():
    out = {}
    out["shattering_3_2"] = (3 + 1) ** 2
    out["variance_1_1_half"] = sqrt(2 * log(4))
    out["general_example"] = sqrt(2 * (2 * log(101) + log(10)) / 25) + mpf("0.1")
    # sigma2=1, n=1000, v=4, delta=0.05, ell=1, vol=0.01, L=1, diam=0.2
    out["mass_example"] = sqrt(3 * lp(1000, 4, mpf("0.05")) / (1000 * mpf("0.01"))) + mpf("0.2")
    out["delta_n_large_100_2"] = 8 * (log(4) + 2 * log(201) + log(10))
    k = choose_k(4096, 2, mpf("0.1"))
    out["choose_k_4096_2"] = k
    # knn plug-in with sigma2=0.25, ell=1, L=1
    out["knn_plugin"] = sqrt(2 * mpf("0.25") * lp(4096, 3, mpf("0.1")) / k) + 2 * (mpf(2 * k) / 4096) ** (mpf(1) / 2)
    # cart plug-in, L=1
    m = 100
    out["cart_plugin"] = sqrt(2 * mpf("0.25") * lp(10**4, 4, mpf("0.1")) / m) + 2 * sqrt(2) * (mpf(5 * m) / 10**4) ** (mpf(1) / 2)
    out["psi_1"] = 18
    # optinet at n=4096, d=2: eta = n^{-1/4}, m = n^{1/2}; sigma2=0.25, b=c_d=L=1, delta=0.1
    n, d, delta = 4096, 2, mpf("0.1")
    eta = mpf(n) ** (-mpf(1) / 4)
    m = 64
    Vd = pi
    out["optinet_plugin"] = (sqrt(2 ** (d + 2) * mpf("0.25") * log(1 / delta) / (n * Vd * eta**d))
                             + 2 * (eta + (32 * d * log(12 * m / delta) / (m * Vd)) ** (mpf(1) / d)))
    out["c_delta_1_inv_e"] = 1 / log(1 / (1 - 1 / e))
    out["chernoff_lower_200_005"] = 1 - sqrt(2 * log(20) / 200)
    theta = mpf(1) / 3
    out["centered_theta_d2_a025"] = theta
    out["centered_tail_d2_a025_N64"] = 2 * (1 - (1 - theta) / 2) ** 64 * theta ** (-mpf("0.25") * 64)
    out["beta_to_gamma_2_2"] = mpf(2) ** 2 * 2
    out["mondrian_aspect_01_2"] = 5 * 2 * log(mpf("0.05")) / log(mpf("0.9"))
    out["counterexample_C2"] = sqrt(2) * 1 * (4 * sqrt(72)) ** (-mpf(1) / 2)
    out["ball_gamma_d2"] = 4 / pi
    out["rect_gamma_1_05"] = mpf("1.25") / mpf("0.5")
    return out


if __name__ == "__main__":
    print(json.dumps({k: (int(v) if isinstance(v, int) else float(v)) for k, v in values().items()}, indent=1))
