"""From quivers to surfaces and back.

Builds a few quivers, glues and contracts them, samples the level set of
the fused moment map, and compares everything with the cobordism calculus.
"""

import numpy as np

from qham_forge import cob, quiver
from qham_forge.lie import make_group_model

su2 = make_group_model("su2")
rng = np.random.default_rng(42)

pants, copants = quiver.pants_quiver(), quiver.copants_quiver()
torus = quiver.glue(copants, pants, {"out1": "in1", "out2": "in2"})
inv = quiver.validate(torus)
print("copants glued to pants:", inv.to_dict(su2.dim))
normal, steps = quiver.normalize(torus, return_steps=True)
print(f"normal form after {steps} contraction(s):", normal.to_json_obj())

p = quiver.sample_level_set(torus, su2, rng)
assignment, res = quiver.stabilizer_propagate(torus, su2, p)
print(f"level-set residual {quiver.level_set_residual(torus, su2, p):.1e}, "
      f"stabiliser trivial: {quiver.is_identity_assignment(su2, assignment)}, "
      f"moment rank {quiver.moment_jacobian_rank(torus, su2, p)} (expected {3 * inv.n_interior})")

M = cob.parse_expression("copants ; pants")
rec = cob.n_functor(M, su2)
print("\ncobordism 'copants ; pants':", M.to_dict())
print("functor record:", {k: rec.components[0][k] for k in ("genus", "dim", "quiver_dim_N")})
print("composition log:", rec.composition_log)
print("relations:", [(r["relation"], r["holds"]) for r in cob.verify_relations()["relations"]])
