"""From torus-knot staircases to -n surgeries.

The staircase of T(p, q) gives the V-sequence, the truncated mapping cone
gives the homology of -n surgery, and the graded root of M(V, n) realizes it
as an ι-complex whose connected homology is a single tower of length V_0.
"""

from iota_forge import (
    GradedModule,
    connected_report,
    realize,
    surgery_homology,
    surgery_root,
    torus_staircase,
    vs_from_staircase,
)

for p, q in [(2, 3), (2, 5), (2, 9), (2, 13), (3, 4), (3, 5)]:
    st = torus_staircase(p, q)
    V = vs_from_staircase(st)
    print(f"T({p},{q}) steps {st.steps} -> V = {V.values}")

print()
for (p, q), n in [((2, 3), 1), ((2, 3), 2), ((2, 9), 1), ((3, 4), 3)]:
    V = vs_from_staircase(torus_staircase(p, q))
    cone = surgery_homology(V, n)
    rep = connected_report(realize(surgery_root(V, n)))
    print(f"-{n} surgery on T({p},{q}): HF^- = {cone.module} (truncation {cone.truncation})")
    print(f"    d_lower {rep.d_lower}, d {rep.d}, d_upper {rep.d_upper}, H_conn {GradedModule((), rep.towers)}")
