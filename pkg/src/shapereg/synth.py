"""Synthetic regression problems on [0, 1]^d with known ground truth.

A problem bundles a regression function with an analytically known Lipschitz
constant, a conditionally sub-Gaussian noise law and a covariate law whose
density is bounded below on the unit cube.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, _as_matrix
from .errors import ConfigError, InvalidArgument
from .seeding import as_generator

G_KINDS = ("LinearSum", "AdditiveSine", "MaxAffine", "Constant")
NOISE_KINDS = ("Gaussian", "BoundedUniform", "HeteroGaussian")
X_KINDS = ("Uniform01", "FlooredMixture")


def _bump(rng, size):
    # product of Beta(2, 2) marginals; smooth and vanishing on the faces
    return rng.beta(2.0, 2.0, size=size)


@dataclass(frozen=True)
class RegressionProblem:
    """Generative description of ``Y = g(X) + eps``.

    ``g_params`` by kind:

    * LinearSum: none. ``g(x) = sum_k x_k``.
    * AdditiveSine: ``amp`` (default 1), ``freq`` (default 2 pi).
      ``g(x) = amp * sum_k sin(freq * x_k)``.
    * MaxAffine: ``slopes`` (J x d) and ``offsets`` (J).
      ``g(x) = max_j slopes_j . x + offsets_j``.
    * Constant: ``c`` (default 0).

    ``noise_params``: ``sigma`` for Gaussian, ``a`` for BoundedUniform
    (uniform on [-a, a]), ``sigma_max`` for HeteroGaussian where the
    conditional standard deviation is ``sigma_max * (0.5 + 0.5 * x_1)``.

    ``x_params``: ``b`` in (0, 1] for FlooredMixture (uniform with
    probability b, Beta(2,2) product otherwise).
    """

    d: int
    g: str = "LinearSum"
    g_params: dict = field(default_factory=dict)
    noise: str = "Gaussian"
    noise_params: dict = field(default_factory=lambda: {"sigma": 0.0})
    x_law: str = "Uniform01"
    x_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidArgument("d must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        if self.g not in G_KINDS:
            raise InvalidArgument(f"unknown regression function {self.g!r}; valid: {', '.join(G_KINDS)}")
        if self.noise not in NOISE_KINDS:
            raise InvalidArgument(f"unknown noise law {self.noise!r}; valid: {', '.join(NOISE_KINDS)}")
        if self.x_law not in X_KINDS:
            raise InvalidArgument(f"unknown covariate law {self.x_law!r}; valid: {', '.join(X_KINDS)}")
        gp = dict(self.g_params)
        if self.g == "AdditiveSine":
            gp.setdefault("amp", 1.0)
            gp.setdefault("freq", 2 * math.pi)
            _check_keys(gp, {"amp", "freq"}, "g_params")
        elif self.g == "MaxAffine":
            if "slopes" not in gp:
                gp["slopes"] = np.vstack([np.eye(self.d), -np.eye(self.d)]).tolist()
                gp["offsets"] = [0.0] * self.d + [1.0] * self.d
            _check_keys(gp, {"slopes", "offsets"}, "g_params")
            s = np.asarray(gp["slopes"], dtype=float)
            o = np.asarray(gp.get("offsets", np.zeros(s.shape[0])), dtype=float)
            if s.ndim != 2 or s.shape[1] != self.d or o.shape != (s.shape[0],):
                raise InvalidArgument("MaxAffine needs slopes of shape (J, d) and offsets of shape (J,)")
            gp["slopes"] = s.tolist()
            gp["offsets"] = o.tolist()
        elif self.g == "Constant":
            gp.setdefault("c", 0.0)
            _check_keys(gp, {"c"}, "g_params")
        else:
            _check_keys(gp, set(), "g_params")
        object.__setattr__(self, "g_params", gp)

        npar = dict(self.noise_params)
        key = {"Gaussian": "sigma", "BoundedUniform": "a", "HeteroGaussian": "sigma_max"}[self.noise]
        if "sigma" in npar and key != "sigma":
            npar[key] = npar.pop("sigma")
        npar.setdefault(key, 0.0)
        _check_keys(npar, {key}, "noise_params")
        if not (npar[key] >= 0 and math.isfinite(npar[key])):
            raise InvalidArgument(f"noise parameter {key} must be finite and >= 0")
        npar[key] = float(npar[key])
        object.__setattr__(self, "noise_params", npar)

        xp = dict(self.x_params)
        if self.x_law == "FlooredMixture":
            xp.setdefault("b", 0.5)
            _check_keys(xp, {"b"}, "x_params")
            if not 0 < xp["b"] <= 1:
                raise InvalidArgument("FlooredMixture floor b must lie in (0, 1]")
            xp["b"] = float(xp["b"])
        else:
            _check_keys(xp, set(), "x_params")
        object.__setattr__(self, "x_params", xp)

    # analytic constants

    @property
    def lipschitz(self) -> float:
        if self.g == "LinearSum":
            return math.sqrt(self.d)
        if self.g == "AdditiveSine":
            return abs(self.g_params["amp"]) * abs(self.g_params["freq"]) * math.sqrt(self.d)
        if self.g == "MaxAffine":
            return float(np.linalg.norm(np.asarray(self.g_params["slopes"]), axis=1).max())
        return 0.0

    @property
    def sigma2(self) -> float:
        return next(iter(self.noise_params.values())) ** 2

    @property
    def density_floor(self) -> float:
        return self.x_params["b"] if self.x_law == "FlooredMixture" else 1.0

    @property
    def g_range(self) -> float:
        """Oscillation of g over the unit cube (an upper bound for AdditiveSine and MaxAffine)."""
        if self.g == "LinearSum":
            return float(self.d)
        if self.g == "AdditiveSine":
            return 2.0 * abs(self.g_params["amp"]) * self.d
        if self.g == "MaxAffine":
            s = np.asarray(self.g_params["slopes"])
            o = np.asarray(self.g_params["offsets"])
            # max of affine maps is convex: its max sits on a corner, and each
            # affine piece's minimum over the cube lower-bounds its minimum
            top = float((np.maximum(s, 0.0).sum(axis=1) + o).max())
            bottom = float((np.minimum(s, 0.0).sum(axis=1) + o).max())
            return top - bottom
        return 0.0

    # serialization

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "g": {"kind": self.g, **self.g_params},
            "noise": {"kind": self.noise, **self.noise_params},
            "x_law": {"kind": self.x_law, **self.x_params},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RegressionProblem":
        try:
            _check_keys(doc, {"d", "g", "noise", "x_law"}, "problem")
            g = dict(doc.get("g", {"kind": "LinearSum"}))
            noise = dict(doc.get("noise", {"kind": "Gaussian", "sigma": 0.0}))
            xl = dict(doc.get("x_law", {"kind": "Uniform01"}))
            return cls(
                d=doc["d"],
                g=g.pop("kind"),
                g_params=g,
                noise=noise.pop("kind"),
                noise_params=noise,
                x_law=xl.pop("kind"),
                x_params=xl,
            )
        except KeyError as exc:
            raise ConfigError(f"problem section is missing {exc}") from None
        except (TypeError, InvalidArgument) as exc:
            raise ConfigError(f"invalid problem section: {exc}") from None


def _check_keys(doc: dict, allowed: set, where: str):
    extra = set(doc) - allowed
    if extra:
        raise InvalidArgument(f"unknown keys in {where}: {sorted(extra)}")


def eval_g(problem: RegressionProblem, x) -> np.ndarray | float:
    """Ground-truth regression function; ``x`` must lie in [0, 1]^d."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = _as_matrix(arr, problem.d)
    if arr.shape[1] != problem.d:
        raise InvalidArgument(f"point dimension {arr.shape[1]} != problem dimension {problem.d}")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0 or not np.isfinite(arr).all()):
        raise InvalidArgument("evaluation points must lie in [0, 1]^d")
    out = _g_values(problem, arr)
    return float(out[0]) if single else out


def _g_values(problem: RegressionProblem, x: np.ndarray) -> np.ndarray:
    if problem.g == "LinearSum":
        return x.sum(axis=1)
    if problem.g == "AdditiveSine":
        p = problem.g_params
        return p["amp"] * np.sin(p["freq"] * x).sum(axis=1)
    if problem.g == "MaxAffine":
        s = np.asarray(problem.g_params["slopes"])
        o = np.asarray(problem.g_params["offsets"])
        return (x @ s.T + o).max(axis=1)
    return np.full(x.shape[0], float(problem.g_params["c"]))


def sample_x(problem: RegressionProblem, n: int, rng) -> np.ndarray:
    rng = as_generator(rng)
    d = problem.d
    if problem.x_law == "Uniform01":
        return rng.random((n, d))
    b = problem.x_params["b"]
    unif = rng.random(n) < b
    x = _bump(rng, (n, d))
    x[unif] = rng.random((int(unif.sum()), d))
    return x


def sample_noise(problem: RegressionProblem, x: np.ndarray, rng) -> np.ndarray:
    rng = as_generator(rng)
    n = x.shape[0]
    if problem.noise == "Gaussian":
        return problem.noise_params["sigma"] * rng.standard_normal(n)
    if problem.noise == "BoundedUniform":
        a = problem.noise_params["a"]
        return a * (2.0 * rng.random(n) - 1.0)
    smax = problem.noise_params["sigma_max"]
    return smax * (0.5 + 0.5 * x[:, 0]) * rng.standard_normal(n)


def generate_with_noise(problem: RegressionProblem, n: int, seed) -> tuple[Dataset, np.ndarray]:
    """Like :func:`generate` but also returns the noise draws."""
    if int(n) != n or n < 0:
        raise InvalidArgument("n must be a nonnegative integer")
    rng = as_generator(seed)
    x = sample_x(problem, int(n), rng)
    eps = sample_noise(problem, x, rng)
    y = _g_values(problem, x) + eps
    return Dataset(x, y), eps


def generate(problem: RegressionProblem, n: int, seed) -> Dataset:
    return generate_with_noise(problem, n, seed)[0]
