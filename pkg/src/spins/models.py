"""Likelihoods and synthetic data for the simulation studies.

Four generative models are covered:

``additive_msn``
    ``y = theta + eps`` with multivariate skew-normal noise ``eps ~ SN(xi, Omega, alpha)``.
``multiplicative_gaussian``
    ``y = theta * eps`` componentwise with ``eps_j ~ N(0, sigma^2)``.
``additive_gaussian``
    ``y = theta + eps`` with ``eps_j ~ N(0, sigma^2)``.
``ballstick``
    Ball-and-stick diffusion signals with Rician noise.

Log-likelihood functions take the full parameter vector and a :class:`Dataset`.
Analytic gradients are provided alongside for the smooth models.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import log_ndtr

from .errors import DegenerateState, NonSpdScale

__all__ = [
    "MsnParams",
    "Dataset",
    "BallStickConfig",
    "msn_log_pdf",
    "msn_mean",
    "sample_msn",
    "loglik_additive_msn",
    "grad_loglik_additive_msn",
    "loglik_multiplicative_gaussian",
    "grad_loglik_multiplicative_gaussian",
    "loglik_additive_gaussian",
    "grad_loglik_additive_gaussian",
    "fibonacci_directions",
    "stick_direction",
    "ball_stick_design",
    "ball_stick_mu",
    "loglik_ballstick",
    "grad_loglik_ballstick",
    "ballstick_config_from",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
    "simplex_grid",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MsnParams:
    """Multivariate skew-normal with location ``xi``, scale ``omega`` and slant ``alpha``.

    The density is ``2 phi_k(y - xi; Omega) Phi(alpha' w^-1 (y - xi))`` with
    ``w = diag(sqrt(diag(Omega)))``.
    """

    xi: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        k = xi.size
        if omega.shape != (k, k) or alpha.size != k:
            raise ValueError("xi, omega and alpha dimensions disagree")
        if not np.allclose(omega, omega.T, rtol=0, atol=1e-12):
            raise NonSpdScale("scale matrix is not symmetric")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "alpha", alpha)
        _ = self.chol

    @property
    def dim(self) -> int:
        return self.xi.size

    @cached_property
    def chol(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.omega)
        except np.linalg.LinAlgError as exc:
            raise NonSpdScale("scale matrix is not positive definite") from exc

    @cached_property
    def scales(self) -> np.ndarray:
        return np.sqrt(np.diag(self.omega))

    @cached_property
    def slant_direction(self) -> np.ndarray:
        """``alpha / w``, the vector the skewing CDF is evaluated along."""
        return self.alpha / self.scales

    @cached_property
    def delta(self) -> np.ndarray:
        corr = self.omega / np.outer(self.scales, self.scales)
        ca = corr @ self.alpha
        return ca / math.sqrt(1.0 + float(self.alpha @ ca))

    @cached_property
    def log_norm_const(self) -> float:
        return math.log(2.0) - 0.5 * self.dim * _LOG_2PI - float(np.log(np.diag(self.chol)).sum())


def msn_log_pdf(y, p: MsnParams) -> np.ndarray | float:
    """Skew-normal log density at ``y`` (one point or an ``(N, k)`` array)."""
    y = np.asarray(y, dtype=float)
    z = np.atleast_2d(y) - p.xi
    w = solve_triangular(p.chol, z.T, lower=True)
    out = p.log_norm_const - 0.5 * np.einsum("ij,ij->j", w, w) + log_ndtr(z @ p.slant_direction)
    return float(out[0]) if y.ndim == 1 else out


def msn_mean(p: MsnParams) -> np.ndarray:
    return p.xi + p.scales * p.delta * math.sqrt(2.0 / math.pi)


def sample_msn(p: MsnParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw from the skew-normal via ``xi + w (delta |z0| + z1)``.

    ``z1 ~ N(0, corr - delta delta')`` is independent of ``z0 ~ N(0, 1)``.
    """
    corr = p.omega / np.outer(p.scales, p.scales)
    z0 = np.abs(rng.standard_normal(size))
    resid = corr - np.outer(p.delta, p.delta)
    z1 = rng.multivariate_normal(np.zeros(p.dim), resid, size=size, method="cholesky")
    return p.xi + p.scales * (np.outer(z0, p.delta) + z1)


@dataclass
class Dataset:
    observations: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.ndim != 2 or obs.shape[0] < 1:
            raise ValueError("observations must be a non-empty (N, k) array")
        if not np.all(np.isfinite(obs)):
            raise ValueError("observations contain non-finite entries")
        self.observations = obs

    def __len__(self):
        return self.observations.shape[0]


def loglik_additive_msn(theta, data: Dataset, p: MsnParams) -> float:
    return float(np.sum(msn_log_pdf(data.observations - np.asarray(theta, dtype=float), p)))


def grad_loglik_additive_msn(theta, data: Dataset, p: MsnParams) -> np.ndarray:
    z = data.observations - np.asarray(theta, dtype=float) - p.xi
    prec_z = np.linalg.solve(p.omega, z.T).T
    s = z @ p.slant_direction
    mills = np.exp(-0.5 * s * s - 0.5 * _LOG_2PI - log_ndtr(s))
    return prec_z.sum(axis=0) - p.slant_direction * mills.sum()


def _positive(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DegenerateState("multiplicative model needs strictly positive weights")
    return theta


def loglik_multiplicative_gaussian(theta, data: Dataset, sigma: float) -> float:
    """``sum_ij [-log(sigma theta_j) - y_ij^2 / (2 sigma^2 theta_j^2)]``."""
    theta = _positive(theta)
    y = data.observations
    n = y.shape[0]
    return float(-n * np.log(sigma * theta).sum() - ((y / theta) ** 2).sum() / (2.0 * sigma**2))


def grad_loglik_multiplicative_gaussian(theta, data: Dataset, sigma: float) -> np.ndarray:
    theta = _positive(theta)
    y = data.observations
    return -y.shape[0] / theta + (y**2).sum(axis=0) / (sigma**2 * theta**3)


def loglik_additive_gaussian(theta, data: Dataset, sigma: float = 1.0) -> float:
    """``-sum_i ||y_i - theta||^2 / (2 sigma^2)``."""
    r = data.observations - np.asarray(theta, dtype=float)
    return float(-np.einsum("ij,ij->", r, r) / (2.0 * sigma**2))


def grad_loglik_additive_gaussian(theta, data: Dataset, sigma: float = 1.0) -> np.ndarray:
    return (data.observations - np.asarray(theta, dtype=float)).sum(axis=0) / sigma**2


# ---------------------------------------------------------------------------
# ball and stick
# ---------------------------------------------------------------------------


def fibonacci_directions(n: int) -> np.ndarray:
    """``n`` roughly uniform unit vectors on the sphere (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rad = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([rad * np.cos(phi), rad * np.sin(phi), z])


def stick_direction(elevation: float, azimuth: float) -> np.ndarray:
    return np.array(
        [math.sin(elevation) * math.cos(azimuth), math.sin(elevation) * math.sin(azimuth), math.cos(elevation)]
    )


@dataclass
class BallStickConfig:
    """Acquisition and tissue parameters of the ball-and-stick model.

    ``angles`` holds one (elevation, azimuth) pair per stick, in radians.
    Diffusivity and b-values are in mm^2/s and s/mm^2.
    """

    gradients: np.ndarray
    angles: np.ndarray
    b_values: np.ndarray | float = 1000.0
    diffusivity: float = 1.5e-3
    s0: float = 1.0
    sigma: float = 0.05

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.gradients, dtype=float))
        if g.shape[1] != 3:
            raise ValueError("gradient directions must be 3-vectors")
        if not np.allclose(np.linalg.norm(g, axis=1), 1.0, rtol=0, atol=1e-10):
            raise ValueError("gradient directions must have unit length")
        ang = np.atleast_2d(np.asarray(self.angles, dtype=float))
        if ang.shape[1] != 2 or ang.shape[0] < 1:
            raise ValueError("angles must be a (K, 2) array with K >= 1")
        self.gradients, self.angles = g, ang
        self.b_values = np.broadcast_to(np.asarray(self.b_values, dtype=float), (g.shape[0],)).copy()
        if not (self.s0 > 0 and self.sigma > 0 and self.diffusivity > 0):
            raise ValueError("s0, sigma and diffusivity must be positive")

    @classmethod
    def default(cls, snr: float = 20.0, n_gradients: int = 64, angles=None) -> "BallStickConfig":
        if angles is None:
            angles = [(math.pi / 2, 0.0), (math.pi / 3, 2 * math.pi / 3), (math.pi / 5, 4 * math.pi / 3)]
        return cls(gradients=fibonacci_directions(n_gradients), angles=angles, sigma=1.0 / snr)

    @property
    def n_sticks(self) -> int:
        return self.angles.shape[0]

    @property
    def snr(self) -> float:
        return self.s0 / self.sigma

    def to_dict(self) -> dict:
        return {
            "gradients": self.gradients.tolist(),
            "angles": self.angles.tolist(),
            "b_values": self.b_values.tolist(),
            "diffusivity": self.diffusivity,
            "s0": self.s0,
            "sigma": self.sigma,
        }


def ball_stick_design(cfg: BallStickConfig) -> np.ndarray:
    """``(n, K + 1)`` matrix ``A`` with ``mu = A @ f``."""
    bd = cfg.b_values * cfg.diffusivity
    sticks = np.array([stick_direction(*a) for a in cfg.angles])
    cos2 = (cfg.gradients @ sticks.T) ** 2
    return cfg.s0 * np.column_stack([np.exp(-bd), np.exp(-bd[:, None] * cos2)])


def ball_stick_mu(cfg: BallStickConfig, f, i: Optional[int] = None):
    """Expected signal for volume fractions ``f`` (all signals, or signal ``i``)."""
    f = np.asarray(f, dtype=float)
    if f.size != cfg.n_sticks + 1:
        raise ValueError(f"expected {cfg.n_sticks + 1} volume fractions, got {f.size}")
    mu = ball_stick_design(cfg) @ f
    return mu if i is None else float(mu[i])


def loglik_ballstick(f, data: Dataset, cfg: BallStickConfig, design: Optional[np.ndarray] = None) -> float:
    """Gaussian log-likelihood of the signals, ``-sum (S_i - mu_i)^2 / (2 sigma^2)``."""
    a = ball_stick_design(cfg) if design is None else design
    r = data.observations[:, 0] - a @ np.asarray(f, dtype=float)
    return float(-(r @ r) / (2.0 * cfg.sigma**2))


def grad_loglik_ballstick(f, data: Dataset, cfg: BallStickConfig) -> np.ndarray:
    a = ball_stick_design(cfg)
    r = data.observations[:, 0] - a @ np.asarray(f, dtype=float)
    return a.T @ r / cfg.sigma**2


# ---------------------------------------------------------------------------
# data generation and files
# ---------------------------------------------------------------------------


def generate_dataset(kind: str, params: dict, n: int, seed: int) -> Dataset:
    """Simulate ``n`` observations of model ``kind``.

    ``params`` holds ``theta`` (or ``f`` for ball-and-stick) plus the noise
    parameters of the model. Results are deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    meta = {"kind": kind, "n": int(n), "seed": int(seed), "params": _jsonable(params)}
    if kind == "additive_msn":
        theta = np.asarray(params["theta"], dtype=float)
        p = MsnParams(params.get("xi", np.zeros(theta.size)), params["omega"], params["alpha"])
        obs = theta + sample_msn(p, n, rng)
    elif kind == "multiplicative_gaussian":
        theta = np.asarray(params["theta"], dtype=float)
        obs = theta * (params.get("sigma", 10.0) * rng.standard_normal((n, theta.size)))
    elif kind == "additive_gaussian":
        theta = np.asarray(params["theta"], dtype=float)
        obs = theta + params.get("sigma", 1.0) * rng.standard_normal((n, theta.size))
    elif kind == "ballstick":
        cfg = ballstick_config_from(params)
        if cfg.gradients.shape[0] != n:
            raise ValueError(f"ball-and-stick data has one signal per gradient ({cfg.gradients.shape[0]}), not {n}")
        mu = ball_stick_mu(cfg, params["f"])
        eps = cfg.sigma * rng.standard_normal((n, 2))
        obs = np.sqrt((mu + eps[:, 0]) ** 2 + eps[:, 1] ** 2)[:, None]
        meta["acquisition"] = cfg.to_dict()
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return Dataset(obs, meta)


def ballstick_config_from(params: dict) -> BallStickConfig:
    """Build a ball-and-stick configuration from a (JSON-style) parameter dict."""
    n_grad = int(params.get("n_gradients", 64))
    snr = float(params.get("snr", 20.0))
    s0 = float(params.get("s0", 1.0))
    gradients = params.get("gradients")
    return BallStickConfig(
        gradients=fibonacci_directions(n_grad) if gradients is None else gradients,
        angles=params.get("angles", BallStickConfig.default().angles),
        b_values=params.get("b_value", 1000.0),
        diffusivity=float(params.get("diffusivity", 1.5e-3)),
        s0=s0,
        sigma=float(params.get("sigma", s0 / snr)),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_dataset(data: Dataset, csv_path) -> tuple[Path, Path]:
    """Write observations as CSV (one row each) and ``meta`` as a JSON sidecar."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    k = data.observations.shape[1]
    header = ",".join(f"y_{j + 1}" for j in range(k))
    np.savetxt(csv_path, data.observations, delimiter=",", header=header, comments="", fmt="%.17g")
    meta_path = csv_path.with_suffix(".json")
    meta_path.write_text(json.dumps(_jsonable(data.meta), indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


def load_dataset(csv_path) -> Dataset:
    csv_path = Path(csv_path)
    obs = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    meta_path = csv_path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return Dataset(obs, meta)


def simplex_grid(k: int, resolution: float) -> np.ndarray:
    """All points of the probability simplex in R^k with coordinates on a grid."""
    m = int(round(1.0 / resolution))
    pts = []

    def rec(prefix: list, left: int, slots: int):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, slots - 1)

    rec([], m, k)
    return np.array(pts, dtype=float) / m
