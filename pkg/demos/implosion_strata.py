"""Faces of the Weyl alcove and the strata of the imploded double.

For SU(2) and SU(3) this prints every alcove face, its stabiliser, the
chamber face it deforms to (or EMPTY), and the dimension of the stratum.
"""

from qham_forge.implosion import face_bijection_report, stabilizer_oracle, stratum_inventory
from qham_forge.lie import make_group_model

for name in ("su2", "su3"):
    model = make_group_model(name)
    print(f"== {name} ==")
    print(f"{'face':12s} {'stabiliser':10s} {'dim G_s':>7s} {'oracle':>8s} {'dim':>4s}  target")
    for s in stratum_inventory(model, "double_implosion"):
        f = s.face
        print(f"{f.id:12s} {f.stabilizer_type:10s} {f.dim_stabilizer:7d} "
              f"{str(stabilizer_oracle(model, f)):>8s} {s.dim:4d}  {s.target}")
    rep = face_bijection_report(model)
    print(f"faces touching the origin map bijectively onto chamber faces: {rep['bijective']}; "
          f"faces that deform to nothing: {rep['B']}\n")
