"""Metropolis-Hastings proposal kernels for constrained domains.

Every kernel returns a :class:`ProposalOutcome` holding the candidate and the
forward/reverse log proposal densities needed by the Hastings ratio. A
candidate outside the domain is flagged ``valid=False`` and is rejected by the
sampler without evaluating the target.

Kernels
-------
SpinsJointKernel
    Inversion-sphere proposal moving all coordinates at once. On the
    probability simplex a uniformly chosen weight is dropped each step and the
    move happens in the projected simplex.
SpinsComponentwiseKernel
    One simplex weight at a time, inverted in the unit interval about its
    nearest endpoint.
SaltKernel
    Gaussian random walk on the logit of one weight.
DirichletKernel
    Independence-style Dirichlet proposal centred at the current weights with
    concentration ``tau * 10**m``.
UniformKernel
    Uniform draws over a hypercube or the box enclosing a sphere sector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, gammaln, logit

from .domains import (
    Domain,
    Hypercube,
    Simplex,
    SphereSector,
    drop_component,
    eta,
    inversion_sphere_at,
)
from .errors import DegenerateState
from .geometry import invert, log_inversion_abs_jacobian

__all__ = [
    "SpinsConfig",
    "SaltConfig",
    "DirichletConfig",
    "ProposalOutcome",
    "spins_joint_draw",
    "spins_joint_propose",
    "spins_joint_log_density",
    "spins_cw_propose",
    "spins_cw_log_density",
    "spins_cw_jacobian",
    "spins_cw_draw",
    "salt_propose",
    "salt_log_density",
    "salt_jacobian",
    "salt_draw",
    "dirichlet_concentration_scale",
    "dirichlet_draw",
    "dirichlet_propose",
    "dirichlet_log_density",
    "uniform_propose",
    "SpinsJointKernel",
    "SpinsComponentwiseKernel",
    "SaltKernel",
    "DirichletKernel",
    "UniformKernel",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SpinsConfig:
    """Gaussian step in the inverted domain has standard deviation ``eta / d``."""

    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")


@dataclass(frozen=True)
class SaltConfig:
    """Standard deviation ``h`` of the random walk on the logit scale."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")


@dataclass(frozen=True)
class DirichletConfig:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass
class ProposalOutcome:
    candidate: np.ndarray
    log_q_forward: float
    log_q_reverse: float
    valid: bool
    removed_index: Optional[int] = None


def _gauss_logpdf(x, mean, sd: float) -> float:
    z = np.atleast_1d((np.asarray(x, dtype=float) - mean) / sd)
    return float(-0.5 * (z.size * _LOG_2PI + z @ z) - z.size * math.log(sd))


# ---------------------------------------------------------------------------
# joint inversion-sphere proposal
# ---------------------------------------------------------------------------


def _spins_frame(domain: Domain, x):
    sphere, _ = inversion_sphere_at(domain, x)
    delta = invert(sphere, x)
    return sphere, delta, eta(domain, sphere, delta)


def _back_map(sphere, delta_star: np.ndarray) -> np.ndarray:
    diff = delta_star - sphere.center
    d2 = np.einsum("...i,...i->...", diff, diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        return sphere.center + (sphere.radius**2 / d2)[..., None] * diff


def spins_joint_draw(domain: Domain, x, cfg: SpinsConfig, rng: np.random.Generator, size: int):
    """Draw ``size`` joint candidates from ``x``; returns ``(candidates, valid)``."""
    x = np.asarray(x, dtype=float)
    sphere, delta, h = _spins_frame(domain, x)
    delta_star = delta + (h / cfg.d) * rng.standard_normal((size, x.size))
    x_star = _back_map(sphere, delta_star)
    return x_star, domain.is_interior(x_star)


def spins_joint_propose(domain: Domain, x, cfg: SpinsConfig, rng: np.random.Generator) -> ProposalOutcome:
    """Propose by inverting about the nearest boundary point and stepping there.

    ``x`` must be interior to ``domain`` (a projected simplex, sphere sector or
    hypercube).
    """
    x = np.asarray(x, dtype=float)
    sphere, delta, h = _spins_frame(domain, x)
    scale = h / cfg.d
    delta_star = delta + scale * rng.standard_normal(x.size)
    x_star = _back_map(sphere, delta_star)
    if not domain.is_interior(x_star):
        return ProposalOutcome(x_star, -np.inf, -np.inf, False)
    log_fwd = _gauss_logpdf(delta_star, delta, scale) + log_inversion_abs_jacobian(sphere, x_star)
    log_rev = spins_joint_log_density(domain, x_star, x, cfg)
    return ProposalOutcome(x_star, log_fwd, log_rev, True)


def spins_joint_log_density(domain: Domain, x_from, x_to, cfg: SpinsConfig) -> float:
    """Log density of proposing ``x_to`` from ``x_from``.

    The inversion sphere and ``eta`` are those of the origin ``x_from``.
    """
    x_to = np.asarray(x_to, dtype=float)
    if not domain.is_interior(x_to):
        return -np.inf
    sphere, delta, h = _spins_frame(domain, x_from)
    return _gauss_logpdf(invert(sphere, x_to), delta, h / cfg.d) + log_inversion_abs_jacobian(sphere, x_to)


# ---------------------------------------------------------------------------
# componentwise inversion in the unit interval
# ---------------------------------------------------------------------------


def _cw_invert(t, upper: bool):
    # inversion in the unit sphere about 1 (upper) or about 0
    with np.errstate(divide="ignore", invalid="ignore"):
        return t / (t - 1.0) if upper else 1.0 / t


def _cw_eta(t: float) -> float:
    return t / (1.0 - t) if t > 0.5 else (1.0 - t) / t


def spins_cw_jacobian(theta_i: float, theta_star_i: float) -> float:
    """|dU/dtheta*| for the branch selected by the origin ``theta_i``."""
    return 1.0 / (theta_star_i - 1.0) ** 2 if theta_i > 0.5 else 1.0 / theta_star_i**2


def spins_cw_log_density(theta_i: float, theta_star_i: float, cfg: SpinsConfig) -> float:
    """Log density of the one-dimensional move ``theta_i -> theta_star_i``."""
    if not 0.0 < theta_star_i < 1.0:
        return -np.inf
    upper = theta_i > 0.5
    mean = _cw_invert(theta_i, upper)
    sd = _cw_eta(theta_i) / cfg.d
    return _gauss_logpdf(_cw_invert(theta_star_i, upper), mean, sd) + math.log(
        spins_cw_jacobian(theta_i, theta_star_i)
    )


def spins_cw_draw(theta_i: float, cfg: SpinsConfig, rng: np.random.Generator, size=None):
    """New values of one weight; entries outside (0, 1) are out-of-image draws."""
    upper = theta_i > 0.5
    delta_star = _cw_invert(theta_i, upper) + (_cw_eta(theta_i) / cfg.d) * rng.standard_normal(size)
    return _cw_invert(delta_star, upper)


def _rescale_log_jacobian(k: int, t: float) -> float:
    # volume factor of the ray (vertex e_i -> opposite face) parametrisation
    return (k - 2) * math.log1p(-t) if k > 2 else 0.0


def _componentwise_outcome(theta, i, t, t_star, log_density, cfg) -> ProposalOutcome:
    candidate = theta * ((1.0 - t_star) / (1.0 - t))
    candidate[i] = t_star
    if not (0.0 < t_star < 1.0 and candidate.min() > 0.0):
        return ProposalOutcome(candidate, -np.inf, -np.inf, False)
    k = theta.size
    log_fwd = log_density(t, t_star, cfg) + _rescale_log_jacobian(k, t)
    log_rev = log_density(t_star, t, cfg) + _rescale_log_jacobian(k, t_star)
    return ProposalOutcome(candidate, log_fwd, log_rev, True)


def _check_weight(theta: np.ndarray, i: int) -> float:
    t = float(theta[i])
    if not 0.0 < t < 1.0:
        raise DegenerateState(f"weight {i} = {t} is not strictly inside (0, 1)")
    return t


def spins_cw_propose(theta, i: int, cfg: SpinsConfig, rng: np.random.Generator) -> ProposalOutcome:
    """Move weight ``i`` by inversion about the nearest end of the unit interval.

    The other weights are rescaled to keep their ratios. The log densities
    include the volume factor this rescaling contributes on the simplex, so
    they can be used directly in the Hastings ratio.
    """
    theta = np.asarray(theta, dtype=float)
    t = _check_weight(theta, i)
    t_star = float(spins_cw_draw(t, cfg, rng))
    return _componentwise_outcome(theta, i, t, t_star, spins_cw_log_density, cfg)


# ---------------------------------------------------------------------------
# logit random walk
# ---------------------------------------------------------------------------


def salt_jacobian(theta_star_i: float) -> float:
    return 1.0 / (theta_star_i * (1.0 - theta_star_i))


def salt_log_density(theta_i: float, theta_star_i: float, cfg: SaltConfig) -> float:
    if not 0.0 < theta_star_i < 1.0:
        return -np.inf
    return _gauss_logpdf(logit(theta_star_i), logit(theta_i), cfg.h) - math.log(
        theta_star_i * (1.0 - theta_star_i)
    )


def salt_draw(theta_i: float, cfg: SaltConfig, rng: np.random.Generator, size=None):
    return expit(logit(theta_i) + cfg.h * rng.standard_normal(size))


def salt_propose(theta, i: int, cfg: SaltConfig, rng: np.random.Generator) -> ProposalOutcome:
    theta = np.asarray(theta, dtype=float)
    t = _check_weight(theta, i)
    # expit saturates to exactly 0 or 1 far in the tails; those draws are rejected
    t_star = float(salt_draw(t, cfg, rng))
    return _componentwise_outcome(theta, i, t, t_star, salt_log_density, cfg)


# ---------------------------------------------------------------------------
# adaptive Dirichlet
# ---------------------------------------------------------------------------


def dirichlet_concentration_scale(theta, tau: float) -> float:
    """``lambda = tau * 10**m`` with ``m = ceil(-log10(min(theta)))``.

    This makes every ``lambda * theta_j`` at least ``tau``.
    """
    smallest = float(np.min(theta))
    if not smallest > 0.0:
        raise DegenerateState("Dirichlet proposal needs strictly positive weights")
    # the slack keeps exact powers of ten (0.001 -> m = 3) from rounding up
    m = math.ceil(-math.log10(smallest) - 1e-9)
    return tau * 10.0**m


def _dirichlet_logpdf(x: np.ndarray, conc: np.ndarray) -> float:
    if x.min() <= 0.0:
        return -np.inf
    return float(gammaln(conc.sum()) - gammaln(conc).sum() + ((conc - 1.0) * np.log(x)).sum())


def dirichlet_log_density(theta_from, theta_to, cfg: DirichletConfig) -> float:
    theta_from = np.asarray(theta_from, dtype=float)
    conc = dirichlet_concentration_scale(theta_from, cfg.tau) * theta_from
    return _dirichlet_logpdf(np.asarray(theta_to, dtype=float), conc)


def dirichlet_draw(theta, cfg: DirichletConfig, rng: np.random.Generator, size=None):
    theta = np.asarray(theta, dtype=float)
    return rng.dirichlet(dirichlet_concentration_scale(theta, cfg.tau) * theta, size)


def dirichlet_propose(theta, cfg: DirichletConfig, rng: np.random.Generator) -> ProposalOutcome:
    theta = np.asarray(theta, dtype=float)
    candidate = dirichlet_draw(theta, cfg, rng)
    # gamma variates can underflow to exact zeros
    if not candidate.min() > 0.0:
        return ProposalOutcome(candidate, -np.inf, -np.inf, False)
    log_fwd = dirichlet_log_density(theta, candidate, cfg)
    log_rev = dirichlet_log_density(candidate, theta, cfg)
    return ProposalOutcome(candidate, log_fwd, log_rev, True)


# ---------------------------------------------------------------------------
# uniform baselines
# ---------------------------------------------------------------------------


def uniform_propose(
    domain: Domain, x, mode: str, rng: np.random.Generator, component: Optional[int] = None
) -> ProposalOutcome:
    """Uniform proposal on a hypercube (joint or one coordinate) or a sector's bounding box.

    The proposal density is constant, so both log densities are equal and
    cancel in the Hastings ratio.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(domain, Hypercube):
        a = domain.edge
        if mode == "joint":
            candidate = rng.uniform(0.0, a, size=domain.n)
            log_q = -domain.n * math.log(a)
        elif mode == "componentwise":
            if component is None:
                raise ValueError("componentwise uniform proposal needs a component index")
            candidate = x.copy()
            candidate[component] = rng.uniform(0.0, a)
            log_q = -math.log(a)
        else:
            raise ValueError(f"unknown update mode {mode!r}")
    elif isinstance(domain, SphereSector):
        if mode != "joint":
            raise ValueError("the sector baseline only supports joint updates")
        candidate = rng.random(domain.n)
        log_q = 0.0
    else:
        raise TypeError(f"no uniform baseline for {type(domain).__name__}")
    valid = domain.is_interior(candidate)
    if not valid:
        log_q = -np.inf
    return ProposalOutcome(candidate, log_q, log_q, valid)


# ---------------------------------------------------------------------------
# kernel objects used by the sampler
# ---------------------------------------------------------------------------


class SpinsJointKernel:
    """Joint inversion-sphere kernel.

    ``domain`` is a :class:`~spins.domains.Simplex` (states are full weight
    vectors; one uniformly chosen weight is dropped per step and both
    proposal densities condition on it) or any natively supported region.
    """

    mode = "joint"

    def __init__(self, domain: Domain, d: float):
        self.domain = domain
        self.cfg = SpinsConfig(d)

    def propose(self, state, rng, component=None) -> ProposalOutcome:
        if not isinstance(self.domain, Simplex):
            return spins_joint_propose(self.domain, state, self.cfg, rng)
        i = int(rng.integers(self.domain.k))
        out = spins_joint_propose(self.domain.projected, drop_component(state, i), self.cfg, rng)
        full = np.insert(out.candidate, i, 1.0 - out.candidate.sum())
        return ProposalOutcome(full, out.log_q_forward, out.log_q_reverse, out.valid, removed_index=i)

    def __repr__(self):
        return f"SpinsJointKernel({self.domain!r}, d={self.cfg.d})"


class SpinsComponentwiseKernel:
    mode = "componentwise"

    def __init__(self, d: float):
        self.cfg = SpinsConfig(d)

    def propose(self, state, rng, component=None) -> ProposalOutcome:
        return spins_cw_propose(state, component, self.cfg, rng)

    def __repr__(self):
        return f"SpinsComponentwiseKernel(d={self.cfg.d})"


class SaltKernel:
    mode = "componentwise"

    def __init__(self, h: float):
        self.cfg = SaltConfig(h)

    def propose(self, state, rng, component=None) -> ProposalOutcome:
        return salt_propose(state, component, self.cfg, rng)

    def __repr__(self):
        return f"SaltKernel(h={self.cfg.h})"


class DirichletKernel:
    mode = "joint"

    def __init__(self, tau: float):
        self.cfg = DirichletConfig(tau)

    def propose(self, state, rng, component=None) -> ProposalOutcome:
        return dirichlet_propose(state, self.cfg, rng)

    def __repr__(self):
        return f"DirichletKernel(tau={self.cfg.tau})"


class UniformKernel:
    def __init__(self, domain: Domain, mode: str = "joint"):
        if mode not in ("joint", "componentwise"):
            raise ValueError(f"unknown update mode {mode!r}")
        self.domain = domain
        self.mode = mode

    def propose(self, state, rng, component=None) -> ProposalOutcome:
        return uniform_propose(self.domain, state, self.mode, rng, component)

    def __repr__(self):
        return f"UniformKernel({self.domain!r}, mode={self.mode!r})"
