"""Graded roots, their monotone subroots and the parity law.

For a symmetric graded root the connected homology can be read off from the
monotone subroot, and for roots of small depth it also follows the parity rule:
towers appearing an odd number of times survive once.
"""

from collections import Counter

from iota_forge import (
    MonotoneRoot,
    SymmetricGradedRoot,
    VSequence,
    connected_homology,
    hminus,
    m_module,
    monotone_subroot,
    parity_law,
    realize,
    root_connected_homology,
    symmetric_roots,
)

root, H = m_module(VSequence((2, 1, 1)), 1)
print("M(V) for V = (2,1,1):", H)
print("  monotone subroot   ", monotone_subroot(root))
print("  connected homology ", root_connected_homology(root))

M = MonotoneRoot((6, 4, 2), (-4, -2, 0))
print("\nM(6,-4; 4,-2; 2,0):", hminus(M.to_root()))

odd = SymmetricGradedRoot.from_leaves([0, -4, -2, -4, 0], [-8, -6, -6, -8])
print("\na root whose inner pair is shadowed:", monotone_subroot(odd))
print("  from the root    ", root_connected_homology(odd))
print("  from the complex ", connected_homology(realize(odd)))

tally = Counter()
for R in symmetric_roots(max_leaves=6, max_depth=3):
    expected = root_connected_homology(R)
    tally["agree"] += connected_homology(realize(R)) == expected == parity_law(R)
    tally["total"] += 1
print(f"\n{tally['agree']} of {tally['total']} symmetric roots agree on all three computations")
