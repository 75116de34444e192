"""A tour of the quasi-Poisson structure on a compact group.

Run with ``python demos/quasi_poisson_tour.py``.  The script measures the
constant c in [P, P] = c phi on SU(3), shows why SU(2) cannot pin it down,
and then builds the bivector of the double D(G) from its two-form.
"""

import numpy as np

from qham_forge.lie import make_group_model
from qham_forge.multivector import fusion_bivector
from qham_forge.qp import (PG_bundle, calibrate_bracket_constant, double_bundle, candidate_bivector,
                           candidate_invariance_residual, phiG_chart, random_chart_points,
                           sample_regular_point, scan_moment_convention, verify_quasi_poisson)

rng = np.random.default_rng(42)

print("1. The fusion bivector psi on g + g")
for name in ("su2", "su3", "so3"):
    res = fusion_bivector(make_group_model(name)).identity_residual()
    print(f"   {name:5s} |[psi, psi] - (diag phi - phi1 - phi2)| = {res:.1e}")

print("\n2. Calibrating the bracket constant")
su2, su3 = make_group_model("su2"), make_group_model("su3")
x3 = random_chart_points(su3, rng, 1)[0]
print(f"   su3: c = {calibrate_bracket_constant(su3, x3):+.10f}")
x2 = random_chart_points(su2, rng, 1)[0]
print(f"   su2: |phi_G| = {np.abs(phiG_chart(su2, x2)).max():.1e}, so c is undetermined there")

for model in (su2, su3):
    rep = verify_quasi_poisson(PG_bundle(model), random_chart_points(model, rng, 10))
    print(f"   {model.name}: max |[P,P] - c phi| over 10 points = {rep['max_residual']:.1e}")

print("\n3. The double D(G) and its bivector")
D = double_bundle(su2)
p = sample_regular_point(D, rng)
print("   moment axiom residual for each (sign, factor):")
for (sign, factor), r in sorted(scan_moment_convention(D, p).items()):
    print(f"     sign {sign:+.0f}, factor {factor}: {r:.1e}")
P, antisym = candidate_bivector(D, p)
gh = (su2.random_element(rng), su2.random_element(rng))
print(f"   P^# from omega: antisymmetry residual {antisym:.1e}, "
      f"invariance residual {candidate_invariance_residual(D, p, gh):.1e}")
