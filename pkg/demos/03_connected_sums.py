"""Connected sums of the local representatives C_n.

The tensor product of C_{n1}, ..., C_{nm} is locally equivalent to a small
complex with 2m + 1 generators, and its connected homology has one tower per
summand.  We compute it three ways and watch omega stay at max(n_i).
"""

from functools import reduce as fold

from iota_forge import (
    connected_homology,
    connected_report,
    sum_surgeries_complex,
    sum_surgeries_connected,
    surgery_local_rep,
    tensor,
)

for ns in [(1, 1), (2, 1), (3, 2, 1), (3, 2, 2, 1)]:
    closed = sum_surgeries_connected(ns)
    small = connected_homology(sum_surgeries_complex(ns))
    full = fold(tensor, [surgery_local_rep(n) for n in ns])
    rep = connected_report(full)
    print(f"{ns}: closed form {closed}")
    print(f"    small complex agrees: {small == closed}")
    print(f"    {full.size}-generator tensor agrees: {rep.towers == closed.towers}, omega {rep.omega}")
