"""Inversion geometry on the 2-D projected simplex.

Walks through one SPInS joint proposal by hand: project a point onto its
nearest face, invert it about that boundary point, measure the distance to
the nearest face image, then propose in the inverted space and map back.
"""
import numpy as np

from spins import domains, geometry
from spins.proposals import SpinsConfig, spins_joint_draw

dom = domains.ProjectedSimplex(2)
x = np.array([0.30, 0.20])

# The nearest face of {x1, x2 >= 0, x1 + x2 <= 1} is x2 = 0 for this point.
sphere, face = domains.inversion_sphere_at(dom, x)
delta = geometry.invert(sphere, x)
print(f"x = {x}, nearest face {face}, center alpha = {sphere.center}, r = {sphere.radius:.4f}")
print(f"inverted point delta = {delta}")
print(f"|det J| at x = {geometry.inversion_abs_jacobian(sphere, x):.4f}")

# Each face maps to a sphere (or to itself when it passes through alpha).
for f in dom.faces():
    print(f"  image of {f}: {domains.face_image(f, sphere)}")

# eta is the distance from delta to the closest face image; it sets the
# proposal scale eta/d.
e = domains.eta(dom, sphere, delta)
print(f"eta = {e:.4f} (reference route {domains.eta_from_face_images(dom, sphere, delta):.4f})")

# Inversion is an involution, so mapping back recovers x.
print(f"T(T(x)) - x = {geometry.invert(sphere, delta) - x}")

# Draw proposals: Gaussian around delta with sd eta/d, mapped back, and
# rejected when the image falls outside the simplex.
rng = np.random.default_rng(7)
cand, valid = spins_joint_draw(dom, x, SpinsConfig(3.0), rng, 100_000)
print(f"valid fraction at d = 3: {valid.mean():.4f}")
print(f"proposal mean {cand[valid].mean(axis=0)}, sd {cand[valid].std(axis=0)}")

# Near a face the inverted point runs off to infinity, and the proposal
# contracts in proportion, so steps shrink as the chain approaches the face.
for h in (1e-1, 1e-2, 1e-3):
    y = np.array([0.3, h])
    c, v = spins_joint_draw(dom, y, SpinsConfig(3.0), rng, 20_000)
    print(f"x2 = {h:g}: median |step| = {np.median(np.linalg.norm(c[v] - y, axis=1)):.2e}")
