"""Experiment harness: configs, targets, sampler runs, trace files and reports.

A config is a JSON object::

    {
      "name": "msn",
      "domain": {"kind": "simplex", "k": 3},
      "model": {"kind": "additive_msn", "n": 1000, "seed": 11, "params": {...}},
      "samplers": [{"name": "spins_cw", "kind": "spins", "mode": "componentwise", "d": 2.5}, ...],
      "chain": {"iterations": 10000, "burn_in": 2000, "seed": 2024, "initial_state": [...]},
      "ball": {"center": "mode", "radius": 0.05},
      "output_dir": "runs/msn"
    }

``domain.kind`` is one of ``simplex``, ``sector`` or ``cube`` (``n`` and
``edge``). Sampler kinds are ``spins`` (``d``), ``salt`` (``h``),
``dirichlet`` (``tau``) and ``uniform``. ``model.dataset`` may point to an
existing CSV instead of generation parameters. The ball center is
``"mode"`` (posterior mode), ``"truth"`` (generating parameter) or a list.
Relative paths are resolved against the config file's directory.
"""
from __future__ import annotations

import copy
import csv
import json
import math
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from . import models
from .domains import Domain, Hypercube, Simplex, SphereSector
from .errors import SpinsError
from .mcmc import ChainConfig, Trace, compute_diagnostics, run_chain
from .proposals import (
    DirichletKernel,
    SaltKernel,
    SpinsComponentwiseKernel,
    SpinsJointKernel,
    UniformKernel,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "bundled_config_names",
    "build_domain",
    "build_kernel",
    "make_log_likelihood",
    "make_target",
    "posterior_mode",
    "prepare_dataset",
    "run_experiment",
    "write_trace",
    "read_trace",
    "sampler_seeds",
    "summarize_traces",
    "format_table",
]

DEFAULT_BALL_RADIUS = 0.05


class ConfigError(SpinsError, ValueError):
    """The experiment config is malformed or inconsistent."""


@dataclass
class ExperimentConfig:
    name: str
    domain: dict
    model: dict
    samplers: list
    chain: dict
    ball: dict
    output_dir: Path
    base_dir: Path
    raw: dict

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path = Path(".")) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        missing = [key for key in ("name", "domain", "model") if key not in raw]
        if missing:
            raise ConfigError(f"config is missing {', '.join(missing)}")
        cfg = cls(
            name=str(raw["name"]),
            domain=dict(raw["domain"]),
            model=dict(raw["model"]),
            samplers=list(raw.get("samplers", [])),
            chain=dict(raw.get("chain", {})),
            ball=dict(raw.get("ball", {})),
            output_dir=Path(raw.get("output_dir", Path("runs") / str(raw["name"]))),
            base_dir=Path(base_dir),
            raw=copy.deepcopy(raw),
        )
        cfg.validate()
        return cfg

    def resolve(self, path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def validate(self) -> None:
        domain = build_domain(self.domain)
        if "dataset" not in self.model and "params" not in self.model:
            raise ConfigError("model needs either a dataset path or generation params")
        if "dataset" in self.model and not self.resolve(self.model["dataset"]).exists():
            raise ConfigError(f"dataset {self.model['dataset']} does not exist")
        names = [s.get("name", s.get("kind")) for s in self.samplers]
        if len(set(names)) != len(names):
            raise ConfigError("sampler names must be unique")
        for spec in self.samplers:
            build_kernel(spec, domain)
        if self.samplers:
            chain_config(self.chain, domain, seed=0)


def bundled_config_names() -> list[str]:
    root = resources.files("spins") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path) -> ExperimentConfig:
    """Read a config file; bare names of bundled configs (``msn.json``) also work."""
    path = Path(path)
    if not path.exists():
        bundled = resources.files("spins") / "configs" / path.name
        if path.parent == Path(".") and bundled.is_file():
            with resources.as_file(bundled) as p:
                return _parse_config(Path(p), base_dir=Path("."))
        raise ConfigError(f"config {path} not found")
    return _parse_config(path, base_dir=path.parent)


def _parse_config(path: Path, base_dir: Path) -> ExperimentConfig:
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(raw, base_dir=base_dir)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def build_domain(spec: dict) -> Domain:
    kind = spec.get("kind")
    try:
        if kind == "simplex":
            return Simplex(int(spec["k"]))
        if kind == "sector":
            return SphereSector(int(spec["n"]))
        if kind == "cube":
            return Hypercube(int(spec["n"]), float(spec.get("edge", 1.0)))
    except KeyError as exc:
        raise ConfigError(f"domain spec lacks {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad domain spec: {exc}") from exc
    raise ConfigError(f"unknown domain kind {kind!r}")


def build_kernel(spec: dict, domain: Domain):
    """Kernel object for a sampler spec, checked against the domain."""
    kind = spec.get("kind")
    mode = spec.get("mode", "joint")
    simplex = isinstance(domain, Simplex)
    try:
        if kind == "spins" and mode == "joint":
            return SpinsJointKernel(domain, float(spec["d"]))
        if kind == "spins" and mode == "componentwise" and simplex:
            return SpinsComponentwiseKernel(float(spec["d"]))
        if kind == "salt" and simplex:
            return SaltKernel(float(spec["h"]))
        if kind == "dirichlet" and simplex:
            return DirichletKernel(float(spec["tau"]))
        if kind == "uniform" and (isinstance(domain, Hypercube) or (isinstance(domain, SphereSector) and mode == "joint")):
            return UniformKernel(domain, mode)
    except KeyError as exc:
        raise ConfigError(f"sampler {spec.get('name', kind)!r} lacks tuning value {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"sampler {spec.get('name', kind)!r}: {exc}") from exc
    raise ConfigError(f"sampler kind {kind!r} ({mode}) is not available on {type(domain).__name__}")


def chain_config(spec: dict, domain: Domain, seed: int) -> ChainConfig:
    try:
        cfg = ChainConfig(
            iterations=int(spec.get("iterations", 10_000)),
            initial_state=spec["initial_state"],
            seed=seed,
            burn_in=int(spec.get("burn_in", 0)),
        )
    except KeyError as exc:
        raise ConfigError("chain settings need an initial_state") from exc
    except ValueError as exc:
        raise ConfigError(f"bad chain settings: {exc}") from exc
    if cfg.initial_state.size != domain.n or not domain.is_interior(cfg.initial_state):
        raise ConfigError(f"initial state {cfg.initial_state.tolist()} is not interior to {domain!r}")
    return cfg


def make_log_likelihood(model: dict, data: models.Dataset) -> Callable[[np.ndarray], float]:
    """Log-likelihood closure; Gaussian families use sufficient statistics."""
    kind = model["kind"]
    params = model.get("params", {})
    y = data.observations
    if kind == "additive_msn":
        p = models.MsnParams(params.get("xi", np.zeros(y.shape[1])), params["omega"], params["alpha"])
        return lambda theta: models.loglik_additive_msn(theta, data, p)
    if kind == "multiplicative_gaussian":
        sigma = float(params.get("sigma", 10.0))
        n, sq = y.shape[0], (y**2).sum(axis=0)

        def loglik(theta):
            if np.any(theta <= 0.0):
                return -math.inf
            return float(-n * np.log(sigma * theta).sum() - (sq / theta**2).sum() / (2.0 * sigma**2))

        return loglik
    if kind == "additive_gaussian":
        sigma = float(params.get("sigma", 1.0))
        n, ybar = y.shape[0], y.mean(axis=0)
        resid = float(((y - ybar) ** 2).sum())

        def loglik(theta):
            diff = theta - ybar
            return -(n * float(diff @ diff) + resid) / (2.0 * sigma**2)

        return loglik
    if kind == "ballstick":
        bs = models.ballstick_config_from(params)
        design = models.ball_stick_design(bs)
        return lambda f: models.loglik_ballstick(f, data, bs, design)
    raise ConfigError(f"unknown model kind {kind!r}")


def make_target(domain: Domain, loglik: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], float]:
    """Flat prior on the domain interior: log posterior is the log-likelihood there."""

    def target(x):
        if not domain.is_interior(x):
            return -math.inf
        return loglik(x)

    return target


def posterior_mode(domain: Domain, loglik: Callable, x0) -> np.ndarray:
    """Maximize ``loglik`` over the closed domain with SLSQP."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    cons = []
    if isinstance(domain, Simplex):
        bounds = [(0.0, 1.0)] * n
        cons.append({"type": "eq", "fun": lambda x: x.sum() - 1.0})
    elif isinstance(domain, Hypercube):
        bounds = [(0.0, domain.edge)] * n
    else:
        bounds = [(0.0, 1.0)] * n
        cons.append({"type": "ineq", "fun": lambda x: 1.0 - x @ x})

    def obj(x):
        val = loglik(np.clip(x, 1e-12, None))
        return -val if np.isfinite(val) else 1e300

    res = minimize(obj, x0, method="SLSQP", bounds=bounds, constraints=cons, options={"ftol": 1e-14, "maxiter": 500})
    return res.x


def prepare_dataset(cfg: ExperimentConfig, seed: Optional[int] = None) -> models.Dataset:
    """Load the configured dataset, or simulate it from the generation params."""
    if "dataset" in cfg.model:
        return models.load_dataset(cfg.resolve(cfg.model["dataset"]))
    model = cfg.model
    data_seed = int(model.get("seed", 0)) if seed is None else int(seed)
    try:
        return models.generate_dataset(model["kind"], model["params"], int(model.get("n", 1000)), data_seed)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot generate dataset: {exc}") from exc


# ---------------------------------------------------------------------------
# trace files
# ---------------------------------------------------------------------------


def write_trace(trace: Trace, path) -> Path:
    """CSV with header ``iter,theta_1..theta_k,accepted,log_post``.

    Joint traces store ``accepted`` as 0/1; componentwise traces store one
    0/1 character per coordinate step, in update order.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    k = trace.states.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", *(f"theta_{j + 1}" for j in range(k)), "accepted", "log_post"])
        for it in range(len(trace)):
            acc = trace.accepted[it]
            flag = "".join("1" if a else "0" for a in np.atleast_1d(acc))
            w.writerow([it + 1, *(repr(float(v)) for v in trace.states[it]), flag, repr(float(trace.log_posterior[it]))])
    return path


def read_trace(path, mode: Optional[str] = None) -> Trace:
    """Parse a trace CSV written by :func:`write_trace`.

    The update mode is inferred from the width of the ``accepted`` field
    unless given.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "iter" or rows[0][-2:] != ["accepted", "log_post"]:
        raise ValueError(f"{path}: not a trace file")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: trace has no iterations")
    k = len(rows[0]) - 3
    try:
        states = np.array([[float(v) for v in r[1 : 1 + k]] for r in body])
        flags = [r[1 + k] for r in body]
        lp = np.array([float(r[2 + k]) for r in body])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from exc
    if mode is None:
        mode = "componentwise" if len(flags[0]) > 1 else "joint"
    accepted = np.array([[c == "1" for c in f] for f in flags], dtype=bool)
    if mode == "joint":
        accepted = accepted[:, 0]
    return Trace(states, accepted, lp, mode=mode)


# ---------------------------------------------------------------------------
# running and summarizing
# ---------------------------------------------------------------------------


def _ball_center(cfg: ExperimentConfig, domain: Domain, loglik, truth) -> Optional[np.ndarray]:
    center = cfg.ball.get("center", "truth")
    if isinstance(center, list):
        return np.asarray(center, dtype=float)
    if center == "truth":
        return truth
    if center == "mode":
        start = truth if truth is not None else np.asarray(cfg.chain["initial_state"], dtype=float)
        return posterior_mode(domain, loglik, start)
    raise ConfigError(f"unknown ball center {center!r}")


def _truth(model: dict) -> Optional[np.ndarray]:
    params = model.get("params", {})
    for key in ("theta", "f"):
        if key in params:
            return np.asarray(params[key], dtype=float)
    return None


def sampler_seeds(master: int, count: int) -> list[int]:
    """Independent per-sampler seeds spawned from the master seed."""
    children = np.random.SeedSequence(master).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=None,
    seed: Optional[int] = None,
    log: Callable[[str], None] = lambda msg: None,
) -> dict:
    """Run every configured sampler and write traces plus ``report.json``.

    ``seed`` overrides the chain master seed (and the data seed when the
    dataset is simulated in-run).
    """
    t_start = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else cfg.resolve(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    domain = build_domain(cfg.domain)
    data = prepare_dataset(cfg, seed)
    if "dataset" in cfg.model:
        data_path = cfg.resolve(cfg.model["dataset"])
    else:
        data_path, _ = models.save_dataset(data, out / f"{cfg.name}_data.csv")
    loglik = make_log_likelihood(cfg.model, data)
    target = make_target(domain, loglik)
    truth = _truth(cfg.model)
    center = _ball_center(cfg, domain, loglik, truth)
    radius = float(cfg.ball.get("radius", DEFAULT_BALL_RADIUS))
    ball = None if center is None else (center, radius)

    master = int(cfg.chain.get("seed", 0)) if seed is None else int(seed)
    seeds = sampler_seeds(master, len(cfg.samplers))
    report = {
        "name": cfg.name,
        "config": cfg.raw,
        "dataset": str(data_path),
        "master_seed": master,
        "iterations": int(cfg.chain.get("iterations", 10_000)),
        "burn_in": int(cfg.chain.get("burn_in", 0)),
        "ball": None if ball is None else {"center": center.tolist(), "radius": radius},
        "output_dir": str(out),
        "samplers": {},
    }
    for spec, s in zip(cfg.samplers, seeds):
        name = spec.get("name", spec["kind"])
        kernel = build_kernel(spec, domain)
        chain = chain_config(cfg.chain, domain, s)
        t0 = time.perf_counter()
        trace = run_chain(domain, target, kernel, chain)
        elapsed = time.perf_counter() - t0
        diag = compute_diagnostics(trace, chain.burn_in, ball)
        trace_path = write_trace(trace, out / f"{name}.csv")
        report["samplers"][name] = {
            "kernel": repr(kernel),
            "mode": kernel.mode,
            "seed": s,
            "trace": str(trace_path),
            "seconds": elapsed,
            "diagnostics": diag.to_dict(),
        }
        log(f"{name}: acceptance {diag.acceptance_rate:.3f}, min ESS {diag.ess.min():.0f}, {elapsed:.1f}s")
    report["wall_clock_seconds"] = time.perf_counter() - t_start
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def summarize_traces(paths: Sequence, burn_in: int = 0, ball=None) -> dict:
    """Diagnostics for each trace file, keyed by file stem."""
    rows = {}
    for p in paths:
        trace = read_trace(p)
        rows[Path(p).stem] = compute_diagnostics(trace, burn_in, ball).to_dict()
    return rows


def format_table(rows: dict) -> str:
    header = f"{'sampler':<16} {'accept':>7} {'minESS':>8} {'to_ball':>8}  posterior mean (sd)"
    lines = [header, "-" * len(header)]
    for name, d in rows.items():
        hit = "-" if d["iterations_to_ball"] is None else str(d["iterations_to_ball"])
        stats = " ".join(f"{m:.4f}({s:.4f})" for m, s in zip(d["posterior_mean"], d["posterior_sd"]))
        lines.append(f"{name:<16} {d['acceptance_rate']:>7.3f} {min(d['ess']):>8.1f} {hit:>8}  {stats}")
    return "\n".join(lines)
