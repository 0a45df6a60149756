"""Constrained regions, their faces, and the inversion sphere attached to a point.

Three convex regions are supported natively:

* :class:`ProjectedSimplex` -- ``{x in R^n : x >= 0, sum(x) <= 1}``, the image of
  the probability simplex in R^(n+1) after one weight is dropped;
* :class:`SphereSector` -- the unit ball intersected with the nonnegative orthant;
* :class:`Hypercube` -- ``[0, a]^n``.

:class:`Simplex` describes the full probability simplex that chain states live
on; proposals that need a full-dimensional region work on its projection.

Indices are zero-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryPoint, DegenerateState, InvalidProjection
from .geometry import (
    DEGENERACY_TOL,
    FaceImage,
    InversionSphere,
    distance_to_face_image,
    invert_coordinate_plane,
    invert_sum_plane,
    invert_unit_ball,
)

__all__ = [
    "CoordinatePlane",
    "SumPlane",
    "UnitSphereSurface",
    "Domain",
    "ProjectedSimplex",
    "SphereSector",
    "Hypercube",
    "Simplex",
    "project_to_face",
    "face_image",
    "eta",
    "eta_from_face_images",
    "inversion_sphere_at",
    "drop_component",
    "restore_component",
    "rescale_complement",
]

BOUNDARY_TOL = 1e-12
SIMPLEX_SUM_TOL = 1e-10


@dataclass(frozen=True)
class CoordinatePlane:
    axis: int
    offset: float = 0.0


@dataclass(frozen=True)
class SumPlane:
    pass


@dataclass(frozen=True)
class UnitSphereSurface:
    pass


Face = CoordinatePlane | SumPlane | UnitSphereSurface


class Domain:
    """A closed convex region bounded by finitely many faces.

    Subclasses provide the face list (in tie-breaking order), signed distances
    to every face (positive inside) and the orthogonal projection onto a face.
    """

    n: int

    def faces(self) -> list[Face]:
        raise NotImplementedError

    def face_distances(self, x) -> np.ndarray:
        raise NotImplementedError

    def project_onto(self, face: Face, x) -> np.ndarray:
        raise NotImplementedError

    def image_distances(self, alpha: np.ndarray, radius: float, delta: np.ndarray) -> np.ndarray:
        """Distances from ``delta`` to the images of every face under inversion
        in the sphere ``(alpha, radius)``, in face order."""
        raise NotImplementedError

    @property
    def enveloping_radius(self) -> float:
        raise NotImplementedError

    @property
    def boundary_tol(self) -> float:
        return BOUNDARY_TOL

    def _check_dim(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim not in (1, 2) or x.shape[-1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}, got shape {x.shape}")
        return x

    def contains(self, x):
        """Closed membership test; row-wise for a 2-D array of points."""
        ok = self.face_distances(x).min(axis=-1) >= 0.0
        return bool(ok) if np.ndim(ok) == 0 else ok

    def is_interior(self, x):
        """Membership with every face farther than ``boundary_tol``; NaN is outside."""
        ok = self.face_distances(x).min(axis=-1) > self.boundary_tol
        return bool(ok) if np.ndim(ok) == 0 else ok


@dataclass(frozen=True)
class ProjectedSimplex(Domain):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")

    def faces(self):
        return [CoordinatePlane(j) for j in range(self.n)] + [SumPlane()]

    def face_distances(self, x):
        x = self._check_dim(x)
        last = (1.0 - x.sum(axis=-1, keepdims=True)) / np.sqrt(self.n)
        return np.concatenate([x, last], axis=-1)

    def project_onto(self, face, x):
        x = np.array(x, dtype=float)
        if isinstance(face, CoordinatePlane):
            x[face.axis] = 0.0
            return x
        # (1/n) ((nI - M) x + 1)
        return x + (1.0 - x.sum()) / self.n

    def image_distances(self, alpha, radius, delta):
        r2 = radius * radius
        dd = delta - alpha
        d2 = float(dd @ dd)
        coord = _coordinate_plane_image_distances(alpha, r2, delta, dd, d2, 0.0)
        excess = float(alpha.sum()) - 1.0
        if abs(excess) <= _tol(radius):
            last = abs(float(delta.sum()) - 1.0) / np.sqrt(self.n)
        else:
            rho = r2 / (2.0 * excess)
            cross = 2.0 * rho * float(dd.sum())
            big = np.sqrt(self.n) * abs(rho)
            last = abs(d2 + cross) / (np.sqrt(max(d2 + cross + big * big, 0.0)) + big)
        return np.append(coord, last)

    @property
    def enveloping_radius(self):
        return float(np.sqrt(2.0))


@dataclass(frozen=True)
class SphereSector(Domain):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")

    def faces(self):
        return [CoordinatePlane(j) for j in range(self.n)] + [UnitSphereSurface()]

    def face_distances(self, x):
        x = self._check_dim(x)
        return np.concatenate([x, 1.0 - np.linalg.norm(x, axis=-1, keepdims=True)], axis=-1)

    def project_onto(self, face, x):
        x = np.array(x, dtype=float)
        if isinstance(face, CoordinatePlane):
            x[face.axis] = 0.0
            return x
        return x / np.linalg.norm(x)

    def image_distances(self, alpha, radius, delta):
        r2 = radius * radius
        dd = delta - alpha
        d2 = float(dd @ dd)
        coord = _coordinate_plane_image_distances(alpha, r2, delta, dd, d2, 0.0)
        aa = float(alpha @ alpha)
        lam = aa - 1.0
        if abs(lam) <= _tol(radius):
            # plane through the image of -alpha, orthogonal to alpha
            normal = alpha / np.sqrt(aa)
            foot = alpha * (1.0 - r2 / (2.0 * aa))
            last = abs(float(normal @ (delta - foot)))
        else:
            s_ = r2 / lam
            num = d2 + 2.0 * s_ * float(alpha @ dd) + r2 * s_
            big = r2 / abs(lam)
            last = abs(num) / (np.sqrt(max(num + big * big, 0.0)) + big)
        return np.append(coord, last)

    @property
    def enveloping_radius(self):
        # two orthogonal unit vectors are sqrt(2) apart
        return float(np.sqrt(2.0))


@dataclass(frozen=True)
class Hypercube(Domain):
    n: int
    edge: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if not self.edge > 0:
            raise ValueError("edge length must be positive")

    def faces(self):
        return [CoordinatePlane(j) for j in range(self.n)] + [
            CoordinatePlane(j, float(self.edge)) for j in range(self.n)
        ]

    def face_distances(self, x):
        x = self._check_dim(x)
        return np.concatenate([x, self.edge - x], axis=-1)

    def project_onto(self, face, x):
        x = np.array(x, dtype=float)
        x[face.axis] = face.offset
        return x

    def image_distances(self, alpha, radius, delta):
        r2 = radius * radius
        dd = delta - alpha
        d2 = float(dd @ dd)
        return np.concatenate(
            [
                _coordinate_plane_image_distances(alpha, r2, delta, dd, d2, 0.0),
                _coordinate_plane_image_distances(alpha, r2, delta, dd, d2, float(self.edge)),
            ]
        )

    @property
    def boundary_tol(self):
        return BOUNDARY_TOL * max(1.0, self.edge)

    @property
    def enveloping_radius(self):
        return float(self.edge * np.sqrt(self.n))


@dataclass(frozen=True)
class Simplex(Domain):
    """Probability simplex in R^k; states are full weight vectors."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("a probability simplex needs at least two weights")

    @property
    def n(self):
        return self.k

    @property
    def projected(self) -> ProjectedSimplex:
        return ProjectedSimplex(self.k - 1)

    def face_distances(self, x):
        return self._check_dim(x)

    def _on_sum_plane(self, x):
        return np.abs(x.sum(axis=-1) - 1.0) <= SIMPLEX_SUM_TOL

    def contains(self, x):
        x = self._check_dim(x)
        ok = (x.min(axis=-1) >= 0.0) & self._on_sum_plane(x)
        return bool(ok) if np.ndim(ok) == 0 else ok

    def is_interior(self, x):
        x = self._check_dim(x)
        ok = (x.min(axis=-1) > BOUNDARY_TOL) & self._on_sum_plane(x)
        return bool(ok) if np.ndim(ok) == 0 else ok


def _tol(radius: float) -> float:
    return DEGENERACY_TOL * max(1.0, radius)


def _coordinate_plane_image_distances(alpha, r2, delta, dd, d2, offset):
    """Distances from ``delta`` to the images of the planes ``x_j = offset``.

    With ``g = alpha_j - offset`` the image is the sphere of radius
    ``R = r^2 / (2|g|)`` centred at ``alpha - (r^2 / 2g) e_j``. The distance is
    evaluated as ``|A - R^2| / (sqrt(A) + R)`` with ``A - R^2`` expanded
    analytically, which stays accurate when ``R`` is huge.
    """
    gap = alpha - offset
    fixed = np.abs(gap) <= _tol(np.sqrt(r2))
    g = np.where(fixed, 1.0, gap)
    big = r2 / (2.0 * np.abs(g))
    num = d2 + r2 * dd / g
    out = np.abs(num) / (np.sqrt(np.maximum(num + big * big, 0.0)) + big)
    if fixed.any():
        out = np.where(fixed, np.abs(delta - offset), out)
    return out


def project_to_face(domain: Domain, x) -> tuple[np.ndarray, Face]:
    """Closest boundary point of ``domain`` to the interior point ``x``.

    Ties between faces go to the face listed later in ``domain.faces()``.
    """
    d = domain.face_distances(x)
    dmin = float(d.min())
    if dmin <= domain.boundary_tol:
        raise BoundaryPoint(f"point {np.asarray(x)} is not interior (boundary distance {dmin:g})")
    # a few ulps of slack so that analytically equal distances count as tied
    idx = int(np.flatnonzero(d <= dmin * (1.0 + 8 * np.finfo(float).eps))[-1])
    face = domain.faces()[idx]
    return domain.project_onto(face, x), face


def inversion_sphere_at(domain: Domain, x) -> tuple[InversionSphere, Face]:
    """Inversion sphere centred at the nearest boundary projection of ``x``."""
    alpha, face = project_to_face(domain, x)
    return InversionSphere(alpha, domain.enveloping_radius), face


def face_image(face: Face, sphere: InversionSphere) -> FaceImage:
    if isinstance(face, CoordinatePlane):
        return invert_coordinate_plane(sphere, face.axis, face.offset)
    if isinstance(face, SumPlane):
        return invert_sum_plane(sphere)
    if isinstance(face, UnitSphereSurface):
        return invert_unit_ball(sphere)
    raise TypeError(f"unknown face {face!r}")


def eta(domain: Domain, sphere: InversionSphere, delta) -> float:
    """Radius of the largest ball about ``delta`` inside the inverted domain."""
    return float(domain.image_distances(sphere.center, sphere.radius, np.asarray(delta, dtype=float)).min())


def eta_from_face_images(domain: Domain, sphere: InversionSphere, delta) -> float:
    """Same as :func:`eta`, built face by face from the explicit image spheres/planes."""
    return min(distance_to_face_image(delta, face_image(f, sphere)) for f in domain.faces())


def drop_component(theta, i: int) -> np.ndarray:
    """Remove weight ``i``; the rest is a point of the projected simplex."""
    return np.delete(np.asarray(theta, dtype=float), i)


def restore_component(theta_minus, i: int) -> np.ndarray:
    """Re-insert weight ``i`` as one minus the sum of the others."""
    theta_minus = np.asarray(theta_minus, dtype=float)
    rest = 1.0 - theta_minus.sum()
    if rest < -SIMPLEX_SUM_TOL:
        raise InvalidProjection(f"weights sum to {theta_minus.sum():.17g} > 1")
    return np.insert(theta_minus, i, max(rest, 0.0))


def rescale_complement(theta, i: int, new_value: float) -> np.ndarray:
    """Set weight ``i`` to ``new_value`` and rescale the others proportionally."""
    theta = np.asarray(theta, dtype=float)
    if theta[i] >= 1.0:
        raise DegenerateState(f"weight {i} equals one; the complement cannot be rescaled")
    out = theta * ((1.0 - new_value) / (1.0 - theta[i]))
    out[i] = new_value
    return out
