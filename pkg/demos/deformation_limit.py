"""Watching the group G flatten into its Lie algebra.

The family (x, t) -> exp(t x) rescales the quasi-Poisson bivector of G by t.
As t -> 0 it tends to the linear Poisson structure on the algebra; this
script prints how fast, together with the trivector and the multiplication.
"""

import numpy as np

from qham_forge import config
from qham_forge.deformation import (bivector_limit_norms, family_bivector, loglog_slope,
                                    mult_residuals, trivector_norms)
from qham_forge.lie import make_group_model

rng = np.random.default_rng(42)
grid = config.DEFAULT_T_GRID
su3 = make_group_model("su3")
x, y = rng.standard_normal(8), rng.standard_normal(8)

biv = bivector_limit_norms(su3, x, grid)
tri = trivector_norms(su3, x, grid)
mul = mult_residuals(su3, x, y, grid)

print(f"{'t':>8s} {'|P_t - P_0|':>14s} {'|phi_t|':>12s} {'mult residual':>14s}")
for t, a, b, c in zip(grid, biv, tri, mul):
    print(f"{t:8.0e} {a:14.3e} {b:12.3e} {c:14.3e}")
print(f"slopes: bivector {loglog_slope(grid, biv):.3f}, trivector {loglog_slope(grid, tri):.3f}, "
      f"multiplication {loglog_slope(grid, mul):.3f}")

# the bivector family is even in t, which is why its distance to the limit is O(t^2)
print("P_t(x) - P_-t(x) =", np.abs(family_bivector(su3, x, 0.2) - family_bivector(su3, x, -0.2)).max())
