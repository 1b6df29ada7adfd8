"""Geometry of the weighted-metric ball projection.

The projected learner clips its candidate iterate back onto the Euclidean
ball of radius M, but measures distance in the metric of the accumulated
information matrix Q.  With an anisotropic Q the projection is *not* a plain
rescaling: it gives up less accuracy in directions where Q holds more
information.
"""

import numpy as np

from conlearn.algorithms import project_q_ball
from conlearn.numkit import q_norm_sq

x = np.array([2.0, 1.0])
M = 1.0

print(f"candidate x = {x.tolist()}, ball radius M = {M}")
print()

euclid = project_q_ball(x, np.eye(2), M)
print(f"Q = I        -> {np.round(euclid, 6).tolist()}   (plain rescaling of x)")

Q = np.diag([1.0, 9.0])
aniso = project_q_ball(x, Q, M)
print(f"Q = diag(1,9) -> {np.round(aniso, 6).tolist()}   (second coordinate protected)")
print()

# Compare against a dense sweep of the boundary.
theta = np.linspace(0, 2 * np.pi, 200_001)
cands = M * np.stack([np.cos(theta), np.sin(theta)], axis=1)
d2 = np.einsum("ij,jk,ik->i", cands - x, Q, cands - x)
best = cands[np.argmin(d2)]
print(f"boundary sweep best point: {np.round(best, 6).tolist()}")
print(f"projection Q-distance     : {q_norm_sq(x - aniso, Q):.9f}")
print(f"sweep best Q-distance     : {float(d2.min()):.9f}")
print()

inside = np.array([0.4, -0.2])
print(f"interior points pass through untouched: {project_q_ball(inside, Q, M).tolist()}")
w = project_q_ball(x, Q, M)
w2 = project_q_ball(w, Q, M)
print(f"projection is idempotent: second pass moves by {np.max(np.abs(w2 - w)):.2e}")
