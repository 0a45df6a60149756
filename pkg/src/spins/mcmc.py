"""Metropolis-Hastings driver, chain traces and convergence diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .domains import Domain
from .errors import BoundaryPoint, NonFiniteTarget

__all__ = [
    "ChainConfig",
    "Trace",
    "Diagnostics",
    "mh_step",
    "run_chain",
    "effective_sample_size",
    "mc_standard_error",
    "iterations_to_ball",
    "compute_diagnostics",
]

TargetDensity = Callable[[np.ndarray], float]


@dataclass
class ChainConfig:
    iterations: int
    initial_state: Sequence[float]
    seed: int = 0
    burn_in: int = 0
    update_mode: Optional[str] = None  # defaults to the kernel's mode

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")
        if self.update_mode not in (None, "joint", "componentwise"):
            raise ValueError(f"unknown update mode {self.update_mode!r}")
        self.initial_state = np.asarray(self.initial_state, dtype=float)


@dataclass
class Trace:
    """States after each iteration plus the accept/reject record.

    ``accepted`` has shape ``(N,)`` for joint updates and ``(N, k)`` for
    componentwise updates, one decision per coordinate step.
    """

    states: np.ndarray
    accepted: np.ndarray
    log_posterior: np.ndarray
    initial_state: Optional[np.ndarray] = None
    mode: str = "joint"

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        self.log_posterior = np.asarray(self.log_posterior, dtype=float)
        n = len(self.states)
        if len(self.accepted) != n or len(self.log_posterior) != n:
            raise ValueError("trace arrays have inconsistent lengths")

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.mode == other.mode
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.accepted, other.accepted)
            and np.array_equal(self.log_posterior, other.log_posterior)
        )


@dataclass
class Diagnostics:
    acceptance_rate: float
    ess: np.ndarray
    posterior_mean: np.ndarray
    posterior_sd: np.ndarray
    iterations_to_ball: Optional[int] = None
    n_samples: int = 0
    mcse: np.ndarray = field(default=None)

    def to_dict(self) -> dict:
        return {
            "acceptance_rate": self.acceptance_rate,
            "ess": self.ess.tolist(),
            "posterior_mean": self.posterior_mean.tolist(),
            "posterior_sd": self.posterior_sd.tolist(),
            "mcse": self.mcse.tolist(),
            "iterations_to_ball": self.iterations_to_ball,
            "n_samples": self.n_samples,
        }


def mh_step(target: TargetDensity, kernel, state, rng: np.random.Generator, component=None, log_post=None):
    """One Metropolis-Hastings decision.

    Returns ``(new_state, accepted, new_log_post)``. ``log_post`` may be
    passed to avoid re-evaluating the target at ``state``.
    """
    if log_post is None:
        log_post = target(state)
    if not np.isfinite(log_post):
        raise NonFiniteTarget(f"target log density is {log_post} at the current state {state}")
    out = kernel.propose(state, rng, component)
    if not out.valid:
        return state, False, log_post
    log_post_star = target(out.candidate)
    if not np.isfinite(log_post_star):
        return state, False, log_post
    log_ratio = (log_post_star + out.log_q_reverse) - (log_post + out.log_q_forward)
    if rng.random() < math.exp(min(0.0, log_ratio)):
        return out.candidate, True, log_post_star
    return state, False, log_post


def run_chain(domain: Domain, target: TargetDensity, kernel, cfg: ChainConfig) -> Trace:
    """Run a chain of ``cfg.iterations`` iterations.

    A componentwise iteration performs one decision per coordinate in
    ascending order; a joint iteration performs a single decision.
    """
    mode = cfg.update_mode or kernel.mode
    if mode != kernel.mode:
        raise ValueError(f"{kernel!r} does not support {mode} updates")
    state = np.array(cfg.initial_state, dtype=float)
    if not domain.is_interior(state):
        raise BoundaryPoint(f"initial state {state} is not interior to {domain!r}")
    rng = np.random.default_rng(cfg.seed)
    log_post = target(state)
    if not np.isfinite(log_post):
        raise NonFiniteTarget(f"target log density is {log_post} at the initial state")

    n, k = cfg.iterations, state.size
    states = np.empty((n, k))
    lp = np.empty(n)
    accepted = np.zeros((n, k) if mode == "componentwise" else n, dtype=bool)
    for it in range(n):
        if mode == "componentwise":
            for j in range(k):
                state, accepted[it, j], log_post = mh_step(target, kernel, state, rng, j, log_post)
        else:
            state, accepted[it], log_post = mh_step(target, kernel, state, rng, None, log_post)
        states[it] = state
        lp[it] = log_post
    return Trace(states, accepted, lp, initial_state=np.asarray(cfg.initial_state, dtype=float), mode=mode)


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / acov[0]


def effective_sample_size(x) -> float:
    """Effective sample size of a scalar series.

    The integrated autocorrelation time is summed over pairs of lags until
    the first non-positive pair (Geyer's initial positive sequence). A
    constant series has ESS 1; the estimate is capped at the series length.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        return float(n)
    if np.ptp(x) <= 1e-14 * max(1.0, float(np.max(np.abs(x)))):
        return 1.0
    rho = _autocorrelation(x)
    tau = -1.0
    for m in range(n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
    return float(min(n, max(1.0, n / tau)))


def mc_standard_error(x) -> float:
    """Monte Carlo standard error of the mean of a correlated series."""
    x = np.asarray(x, dtype=float)
    return float(np.std(x) / math.sqrt(effective_sample_size(x)))


def iterations_to_ball(states, center, radius: float) -> Optional[int]:
    """First (1-based) iteration whose state is within ``radius`` of ``center``."""
    dist = np.linalg.norm(np.asarray(states) - np.asarray(center, dtype=float), axis=1)
    hits = np.flatnonzero(dist <= radius)
    return int(hits[0]) + 1 if hits.size else None


def compute_diagnostics(trace: Trace, burn_in: int = 0, ball=None) -> Diagnostics:
    """Summaries over iterations ``burn_in + 1 .. N``.

    ``ball`` is an optional ``(center, radius)`` pair; the first hitting
    iteration is searched over the whole trace, burn-in included.
    """
    if not 0 <= burn_in < len(trace):
        raise ValueError("nothing left after burn-in")
    kept = trace.states[burn_in:]
    dec = trace.accepted[burn_in:]
    ess = np.array([effective_sample_size(col) for col in kept.T])
    sd = kept.std(axis=0, ddof=1) if len(kept) > 1 else np.zeros(kept.shape[1])
    hit = None
    if ball is not None:
        hit = iterations_to_ball(trace.states, ball[0], ball[1])
    return Diagnostics(
        acceptance_rate=float(dec.mean()),
        ess=ess,
        posterior_mean=kept.mean(axis=0),
        posterior_sd=sd,
        iterations_to_ball=hit,
        n_samples=len(kept),
        mcse=sd / np.sqrt(ess),
    )
