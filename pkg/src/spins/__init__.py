"""Metropolis-Hastings sampling in constrained domains via inversion spheres.

The package is organised bottom-up:

``spins.geometry``
    Sphere inversion and images of planes and spheres under it.
``spins.domains``
    Convex domains (projected simplex, sphere sector, hypercube), their faces
    and boundary projections.
``spins.proposals``
    Proposal kernels: inversion-sphere (joint and componentwise), logit
    random walk, adaptive Dirichlet and uniform baselines.
``spins.mcmc``
    Metropolis-Hastings driver and diagnostics.
``spins.models``
    Likelihoods and synthetic data generators.
``spins.experiments`` / ``spins.cli``
    Config-driven experiment runs and the ``spins`` command.
"""
from .domains import Hypercube, ProjectedSimplex, Simplex, SphereSector
from .errors import (
    BoundaryPoint,
    CenterCoincidence,
    DegenerateState,
    InvalidProjection,
    NonFiniteTarget,
    NonSpdScale,
    SpinsError,
)
from .geometry import InversionSphere, invert
from .mcmc import ChainConfig, Trace, compute_diagnostics, effective_sample_size, mh_step, run_chain
from .proposals import (
    DirichletKernel,
    SaltKernel,
    SpinsComponentwiseKernel,
    SpinsJointKernel,
    UniformKernel,
)

__version__ = "0.1.0"

__all__ = [
    "Hypercube",
    "ProjectedSimplex",
    "Simplex",
    "SphereSector",
    "InversionSphere",
    "invert",
    "ChainConfig",
    "Trace",
    "compute_diagnostics",
    "effective_sample_size",
    "mh_step",
    "run_chain",
    "DirichletKernel",
    "SaltKernel",
    "SpinsComponentwiseKernel",
    "SpinsJointKernel",
    "UniformKernel",
    "SpinsError",
    "BoundaryPoint",
    "CenterCoincidence",
    "DegenerateState",
    "InvalidProjection",
    "NonFiniteTarget",
    "NonSpdScale",
]
