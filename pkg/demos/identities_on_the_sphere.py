"""Operator identities of the characteristic function, measured numerically.

For the two-point model this script checks

* the dual identity at points of the closed ball,
* that theta is a coisometry on the unit sphere, so its surjectivity
  margin there equals 1,
* the isometry defect of the truncated canonical dilation, which decays
  like r_max^(2N) with r_max = 0.5,
* the range identity M_theta M_theta^* + j j^* = 1 on truncated spaces.

Run with ``python3 demos/identities_on_the_sphere.py``.
"""

import numpy as np

from quotspec import beurling_range_check, canonical_dilation, charfn_eval, dual_identity_residual
from quotspec.harness import Model, fix_b, sphere_points
from quotspec.numerics import opnorm
from quotspec.tuples import purity_defects

model = Model.from_spec(fix_b(), "two-point model")
E = model.evaluator

boundary = sphere_points(256, 2, seed=0)
inside = boundary[:64] * np.linspace(0.05, 0.95, 64)[:, None]
res = max(dual_identity_residual(E, z) for z in np.concatenate([inside, boundary]))
print(f"largest dual identity residual over {len(inside) + len(boundary)} points: {res:.2e}")

coiso = max(opnorm(charfn_eval(E, z) @ charfn_eval(E, z).conj().T - 1) for z in boundary)
print(f"largest ||theta theta^* - 1|| on the sphere: {coiso:.2e}")

# 1 - j_N^* j_N equals P_T^{N+1}(1) exactly; the purity sequence shows the decay.
tail = purity_defects(model.T, 41)
for N in (5, 10, 20, 40):
    J = canonical_dilation(E, N)
    direct = opnorm(J.conj().T @ J - np.eye(model.T.n))
    print(f"N = {N:2d}: ||j*j - 1|| = {direct:.2e}, purity tail {tail[N]:.2e}, 0.25^(N+1) = {0.25 ** (N + 1):.2e}")

for N in (8, 16, 24):
    b = beurling_range_check(E, N, model.quotient)
    print(f"N = {N:2d}: range identity residual {b.residual:.2e}, largest principal angle {b.max_angle:.2e}")
