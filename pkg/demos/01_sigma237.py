"""Correction terms and connected homology of the Brieskorn sphere Σ(2,3,7).

Run with ``python3 demos/01_sigma237.py``.  The complex has two generators in
grading -2 swapped by ι and one generator whose boundary is U times their sum.
"""

import json
from pathlib import Path

from iota_forge import GradedModule, connected_complex, connected_report, dual, involutive_cone
from iota_forge.cli import complex_from_json

HERE = Path(__file__).resolve().parent
C = complex_from_json(json.loads((HERE / "data" / "sigma237.json").read_text()))
print("complex      ", C, [str(g) for g in C.gradings])
print("homology     ", C.homology)

# The mapping cone of Q(1 + ι) has two U-nontorsion towers, which fix d_lower and d_upper.
print("cone homology", involutive_cone(C).homology)

rep = connected_report(C)
print(f"(d_lower, d, d_upper) = ({rep.d_lower}, {rep.d}, {rep.d_upper})")
print("H_conn", GradedModule((), rep.towers), "omega", rep.omega, "certified", rep.certificate)

# Every self-local equivalence of this complex is surjective, so the connected
# complex is the whole complex.
print("connected complex size", connected_complex(C).complex.size)

# Orientation reversal moves the tower to grading 0 and swaps the roles of the bounds.
rd = connected_report(dual(C))
print(f"dual: ({rd.d_lower}, {rd.d}, {rd.d_upper}), H_conn {GradedModule((), rd.towers)}")
