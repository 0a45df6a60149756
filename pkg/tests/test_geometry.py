import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spins.errors import CenterCoincidence
from spins.geometry import (
    FiniteSphere,
    FlatPlane,
    InversionSphere,
    distance_to_face_image,
    invert,
    invert_coordinate_plane,
    invert_sum_plane,
    invert_unit_ball,
    inversion_abs_jacobian,
    log_inversion_abs_jacobian,
)

coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def vectors(n):
    return arrays(float, n, elements=coords)


def fd_jacobian(f, x, h=1e-6):
    n = x.size
    jac = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        jac[:, j] = (f(x + e) - f(x - e)) / (2 * h)
    return jac


class TestInvert:
    def test_point_on_sphere_is_fixed(self):
        assert np.allclose(invert(InversionSphere([0, 0], 1.0), [1, 0]), [1, 0])

    def test_radius_sqrt2(self):
        assert np.allclose(invert(InversionSphere([0, 0], math.sqrt(2)), [1, 0]), [2, 0])

    @given(st.integers(1, 5).flatmap(lambda n: st.tuples(vectors(n), vectors(n))), st.floats(0.1, 10))
    def test_involution(self, pair, r):
        c, x = pair
        assume(np.linalg.norm(x - c) > 1e-3)
        s = InversionSphere(c, r)
        back = invert(s, invert(s, x))
        assert np.allclose(back, x, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(x).max()))

    def test_center_raises(self):
        s = InversionSphere([0.2, 0.3], 2.0)
        with pytest.raises(CenterCoincidence):
            invert(s, [0.2, 0.3])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            invert(InversionSphere([0, 0], 1.0), [1, 2, 3])

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_bad_radius(self, bad):
        with pytest.raises(ValueError):
            InversionSphere([0.0], bad)

    def test_non_finite_center(self):
        with pytest.raises(ValueError):
            InversionSphere([0.0, math.nan], 1.0)


class TestJacobian:
    def test_on_unit_circle(self):
        s = InversionSphere([0, 0], 1.0)
        assert inversion_abs_jacobian(s, [math.cos(0.3), math.sin(0.3)]) == pytest.approx(1.0)

    def test_arithmetic(self):
        assert inversion_abs_jacobian(InversionSphere([0, 0], 1.0), [0.5, 0]) == pytest.approx(16.0)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_matches_finite_differences(self, n):
        rng = np.random.default_rng(n)
        for _ in range(20):
            s = InversionSphere(rng.normal(size=n), rng.uniform(0.5, 3))
            x = s.center + rng.normal(size=n)
            fd = abs(np.linalg.det(fd_jacobian(lambda p: invert(s, p), x)))
            assert inversion_abs_jacobian(s, x) == pytest.approx(fd, rel=1e-5)

    @given(st.integers(1, 5).flatmap(lambda n: st.tuples(vectors(n), vectors(n))), st.floats(0.1, 10))
    def test_reciprocal_under_involution(self, pair, r):
        c, x = pair
        assume(np.linalg.norm(x - c) > 1e-2)
        s = InversionSphere(c, r)
        total = log_inversion_abs_jacobian(s, x) + log_inversion_abs_jacobian(s, invert(s, x))
        assert total == pytest.approx(0.0, abs=1e-9)


def random_unit_vectors(rng, count, n):
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def on_image(image, pts):
    return np.array([distance_to_face_image(p, image) for p in pts])


class TestCoordinatePlane:
    def test_examples(self):
        img = invert_coordinate_plane(InversionSphere([1, 0], math.sqrt(2)), 0)
        assert isinstance(img, FiniteSphere)
        assert np.allclose(img.center, [0, 0]) and img.radius == pytest.approx(1)
        img = invert_coordinate_plane(InversionSphere([0.5, 0.3], math.sqrt(2)), 0)
        assert np.allclose(img.center, [-1.5, 0.3]) and img.radius == pytest.approx(2)

    def test_fixed_plane(self):
        img = invert_coordinate_plane(InversionSphere([0, 0.3], math.sqrt(2)), 0)
        assert isinstance(img, FlatPlane)
        assert np.allclose(img.unit_normal, [1, 0]) and img.offset == 0

    @pytest.mark.parametrize("offset", [0.0, 3.0])
    def test_sampling_oracle(self, rng, offset):
        n = 4
        for axis in range(n):
            s = InversionSphere(rng.uniform(0.2, 2.8, n), 3 * math.sqrt(n))
            pts = rng.uniform(-5, 5, (1000, n))
            pts[:, axis] = offset
            images = np.array([invert(s, p) for p in pts])
            assert on_image(invert_coordinate_plane(s, axis, offset), images).max() < 1e-8

    def test_fixed_plane_maps_to_itself(self, rng):
        c = np.array([0.0, 0.4, 0.7])
        s = InversionSphere(c, math.sqrt(2))
        pts = rng.uniform(-2, 2, (200, 3))
        pts[:, 0] = 0.0
        images = np.array([invert(s, p) for p in pts])
        assert np.abs(images[:, 0]).max() < 1e-12

    def test_bad_axis(self):
        with pytest.raises(IndexError):
            invert_coordinate_plane(InversionSphere([0.5, 0.5], 1.0), 2)


class TestSumPlane:
    def test_example(self):
        img = invert_sum_plane(InversionSphere([0.5, 0], math.sqrt(2)))
        assert np.allclose(img.center, [2.5, 2]) and img.radius == pytest.approx(2 * math.sqrt(2))

    def test_fixed(self):
        img = invert_sum_plane(InversionSphere([0.3, 0.7], math.sqrt(2)))
        assert isinstance(img, FlatPlane)
        assert distance_to_face_image([0.5, 0.5], img) == pytest.approx(0)

    def test_sampling_oracle(self, rng):
        n = 3
        for _ in range(5):
            alpha = rng.dirichlet(np.ones(n + 1))[:n] * 0.9
            s = InversionSphere(alpha, math.sqrt(2))
            pts = rng.normal(size=(1000, n)) * 3
            pts += ((1 - pts.sum(axis=1)) / n)[:, None]
            images = np.array([invert(s, p) for p in pts])
            assert on_image(invert_sum_plane(s), images).max() < 1e-8


class TestUnitBall:
    def test_example(self):
        s = InversionSphere([0.5, 0.5], math.sqrt(2))
        img = invert_unit_ball(s)
        assert np.allclose(img.center, [2.5, 2.5]) and img.radius == pytest.approx(4)
        y = invert(s, [1, 0])
        assert np.allclose(y, [2.5, -1.5])
        assert np.linalg.norm(y - img.center) == pytest.approx(4)

    def test_sampling_oracle(self, rng):
        for n in (2, 3, 5):
            s = InversionSphere(rng.uniform(0, 0.5, n), math.sqrt(2))
            images = np.array([invert(s, p) for p in random_unit_vectors(rng, 1000, n)])
            assert on_image(invert_unit_ball(s), images).max() < 1e-8

    def test_center_on_sphere_gives_plane(self, rng):
        s = InversionSphere([1.0, 0.0], math.sqrt(2))
        img = invert_unit_ball(s)
        assert isinstance(img, FlatPlane)
        pts = random_unit_vectors(rng, 500, 2)
        pts = pts[np.linalg.norm(pts - s.center, axis=1) > 1e-3]
        images = np.array([invert(s, p) for p in pts])
        # least-squares hyperplane through the images
        A = np.column_stack([images, np.ones(len(images))])
        _, _, vt = np.linalg.svd(A, full_matrices=False)
        normal = vt[-1, :2] / np.linalg.norm(vt[-1, :2])
        offset = -vt[-1, 2] / np.linalg.norm(vt[-1, :2])
        resid = np.abs(images @ normal - offset)
        assert resid.max() < 1e-8
        assert on_image(img, images).max() < 1e-8

    def test_center_on_sphere_3d(self, rng):
        c = np.array([0.6, 0.0, 0.8])
        s = InversionSphere(c, math.sqrt(2))
        pts = random_unit_vectors(rng, 500, 3)
        pts = pts[np.linalg.norm(pts - c, axis=1) > 1e-3]
        images = np.array([invert(s, p) for p in pts])
        assert on_image(invert_unit_ball(s), images).max() < 1e-8


class TestDistance:
    def test_sphere(self):
        assert distance_to_face_image([6, 0.3], FiniteSphere([-1.5, 0.3], 2)) == pytest.approx(5.5)

    def test_on_sphere(self):
        assert distance_to_face_image([0.5, 0.3], FiniteSphere([-1.5, 0.3], 2)) == pytest.approx(0)

    def test_plane(self):
        assert distance_to_face_image([3, 7], FlatPlane([1, 0], 0)) == pytest.approx(3)

    def test_rejects_unnormalised_plane(self):
        with pytest.raises(ValueError):
            FlatPlane([2.0, 0.0], 0.0)

    def test_rejects_unknown(self):
        with pytest.raises(TypeError):
            distance_to_face_image([0.0], object())
