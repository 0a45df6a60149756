"""Inversion in a sphere and the images of planes and balls under it.

Points are plain 1-D float arrays. The inversion in the sphere with center
``c`` and radius ``r`` is

    T(x) = c + r**2 (x - c) / ||x - c||**2

which is an involution on R^n minus the center. Planes not passing through
the center map to finite spheres through the center; planes through the
center are fixed. Spheres through the center map to planes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CenterCoincidence

__all__ = [
    "InversionSphere",
    "FiniteSphere",
    "FlatPlane",
    "FaceImage",
    "invert",
    "inversion_abs_jacobian",
    "log_inversion_abs_jacobian",
    "invert_coordinate_plane",
    "invert_sum_plane",
    "invert_unit_ball",
    "distance_to_face_image",
]

#: relative tolerance for "x coincides with the center" and "center lies on the face"
DEGENERACY_TOL = 1e-12


def as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


@dataclass(frozen=True)
class InversionSphere:
    """Sphere ``S_center(radius)`` defining an inversion map."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        r = float(self.radius)
        if not (r > 0 and np.isfinite(r)):
            raise ValueError(f"inversion radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def tol(self) -> float:
        return DEGENERACY_TOL * max(1.0, self.radius)


@dataclass(frozen=True)
class FiniteSphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class FlatPlane:
    """The plane ``{x : x . unit_normal = offset}``."""

    unit_normal: np.ndarray
    offset: float

    def __post_init__(self):
        nrm = as_vector(self.unit_normal)
        if abs(np.linalg.norm(nrm) - 1.0) > 1e-12:
            raise ValueError("plane normal must have unit length")
        object.__setattr__(self, "unit_normal", nrm)
        object.__setattr__(self, "offset", float(self.offset))


FaceImage = Union[FiniteSphere, FlatPlane]


def _offset_from_center(sphere: InversionSphere, x) -> tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=float)
    if x.shape != sphere.center.shape:
        raise ValueError(f"dimension mismatch: point {x.shape} vs sphere {sphere.center.shape}")
    diff = x - sphere.center
    dist2 = float(diff @ diff)
    if dist2 < sphere.tol**2:
        raise CenterCoincidence(f"point {x} coincides with the inversion center")
    return diff, dist2


def invert(sphere: InversionSphere, x) -> np.ndarray:
    """Image of ``x`` under inversion in ``sphere``."""
    diff, dist2 = _offset_from_center(sphere, x)
    return sphere.center + (sphere.radius**2 / dist2) * diff


def log_inversion_abs_jacobian(sphere: InversionSphere, x) -> float:
    """``log |det DT(x)| = 2n log(r / ||x - c||)``."""
    _, dist2 = _offset_from_center(sphere, x)
    return sphere.dim * (2.0 * np.log(sphere.radius) - np.log(dist2))


def inversion_abs_jacobian(sphere: InversionSphere, x) -> float:
    """Absolute Jacobian determinant ``(r / ||x - c||)**(2n)`` of the inversion.

    The determinant itself is negative (inversion reverses orientation);
    only its magnitude enters change-of-variables densities.
    """
    return float(np.exp(log_inversion_abs_jacobian(sphere, x)))


def invert_coordinate_plane(sphere: InversionSphere, axis: int, plane_offset: float = 0.0) -> FaceImage:
    """Image of the plane ``x[axis] = plane_offset``.

    Returns a :class:`FlatPlane` for the same plane when the center lies on it.
    """
    n = sphere.dim
    if not 0 <= axis < n:
        raise IndexError(f"axis {axis} out of range for dimension {n}")
    gap = sphere.center[axis] - plane_offset
    if abs(gap) <= sphere.tol:
        normal = np.zeros(n)
        normal[axis] = 1.0
        return FlatPlane(normal, plane_offset)
    r2 = sphere.radius**2
    center = sphere.center.copy()
    center[axis] -= r2 / (2.0 * gap)
    return FiniteSphere(center, r2 / (2.0 * abs(gap)))


def invert_sum_plane(sphere: InversionSphere) -> FaceImage:
    """Image of the plane ``x_1 + ... + x_n = 1``."""
    n = sphere.dim
    excess = float(np.sum(sphere.center)) - 1.0
    if abs(excess) <= sphere.tol:
        return FlatPlane(np.full(n, 1.0 / np.sqrt(n)), 1.0 / np.sqrt(n))
    rho = sphere.radius**2 / (2.0 * excess)
    return FiniteSphere(sphere.center - rho, np.sqrt(n) * abs(rho))


def invert_unit_ball(sphere: InversionSphere) -> FaceImage:
    """Image of the unit sphere ``||x|| = 1`` centred at the origin.

    When the inversion center lies on the unit sphere the image is the plane
    orthogonal to the center direction through the image of the antipodal point.
    """
    alpha = sphere.center
    lam = float(alpha @ alpha) - 1.0
    r2 = sphere.radius**2
    if abs(lam) <= sphere.tol:
        normal = alpha / np.linalg.norm(alpha)
        foot = invert(sphere, -alpha)
        return FlatPlane(normal, float(normal @ foot))
    return FiniteSphere(alpha * (1.0 - r2 / lam), r2 / abs(lam))


def distance_to_face_image(point, image: FaceImage) -> float:
    """Euclidean distance from ``point`` to the sphere or plane ``image``."""
    p = np.asarray(point, dtype=float)
    if isinstance(image, FiniteSphere):
        return abs(float(np.linalg.norm(p - image.center)) - image.radius)
    if isinstance(image, FlatPlane):
        return abs(float(p @ image.unit_normal) - image.offset)
    raise TypeError(f"unknown face image {image!r}")
