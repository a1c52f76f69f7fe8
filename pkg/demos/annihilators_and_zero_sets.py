"""Scalar annihilators from the characteristic function and their zero sets.

Pairing theta with a constant vector gives a scalar multiplier
det(theta(z) V) that kills the model space. It vanishes at every node. At
the boundary point (1, 0) theta is onto, so V can be chosen to make the
determinant tend to 1 there.

The last part compares sampled approximate zero sets. Near a spectral
point the smallest |f| on a shrinking ball goes to zero for every
generator. Away from the spectrum at least one generator stays bounded
below.

Run with ``python3 demos/annihilators_and_zero_sets.py``.
"""

import numpy as np

from quotspec import CharFnDeterminant, annihilator_from_charfn, vanishing_ideal_generators
from quotspec.charfn import normalizing_vectors
from quotspec.harness import GridSpec, Model, az_profiles, fix_b, sphere_points

model = Model.from_spec(fix_b(), "two-point model")
E = model.evaluator
nodes = model.node_points

V = np.eye(E.shape[1])[:, :1]
f = annihilator_from_charfn(E, V, 30)
print(f"degree-30 annihilator has {len(f.terms)} terms; |f| at nodes: {np.abs(f(nodes))}")

W = normalizing_vectors(E, [1, 0])
det = CharFnDeterminant(E, W)
ts = 1 - np.logspace(-1, -4, 4)
for t, v in zip(ts, det(ts[:, None] * np.array([1, 0]))):
    print(f"det(theta({t:.4f}, 0) W) = {v:.6f}")

radii = [0.2, 0.1, 0.05, 0.01]
gens = vanishing_ideal_generators(nodes) + [det]
grid = GridSpec(points_per_sphere=128)
queries = np.array([[0, 0], [0.5, 0], [0.25, 0], [0, 0.5]])
# Small spheres around each query point populate the finest balls.
shells = [q + r * sphere_points(16, 2, seed=1) for q in queries for r in (0.002, 0.008, 0.04, 0.08)]
samples = np.concatenate([grid.points(2), 0.99 * grid.points(2)] + shells)
prof = np.stack([az_profiles(g, queries, radii, samples) for g in gens])
for q, row in zip(queries, np.nanmax(prof, axis=0)):
    print(f"lambda = {q}: max over generators of inf|f| on balls {radii}: {np.round(row, 4)}")
