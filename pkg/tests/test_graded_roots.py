from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iota_forge.connected import connected_homology
from iota_forge.graded_roots import (
    GradedRoot,
    InvalidRoot,
    MonotoneRoot,
    SymmetricGradedRoot,
    hminus,
    monotone_subroot,
    parity_law,
    realize,
    root_connected_homology,
    symmetric_roots,
)
from iota_forge.iota_complex import identity_complex, solve_homotopy
from iota_forge.surgery import VSequence, m_module, surgery_local_rep
from iota_forge.ufu_algebra import GradedModule, MonomialMatrix

ROOTS = list(symmetric_roots())


def T(*pairs, free=()):
    return GradedModule(tuple(Fraction(f) for f in free), tuple((Fraction(a), n) for a, n in pairs))


# -- an oracle read straight off the tree -------------------------------------


def tree_ranks(M: GradedRoot, g, j):
    """Rank of U^j from grading g: the number of distinct vertices reached by walking j edges down."""
    hit = set()
    for v, gv in enumerate(M.gradings):
        if gv != g:
            continue
        w = v
        for _ in range(j):
            if M.down[w] == -1:
                w = ("stem", M.gradings[w] - 2 * j)
                break
            w = M.down[w]
        hit.add(w)
    return len(hit)


def module_ranks(H: GradedModule, g, j):
    r = 0
    for f in H.free:
        r += f >= g
    for a, n in H.towers:
        bottom = a - 2 * (n - 1)
        r += a >= g and g - 2 * j >= bottom
    return r


def check_against_tree(M: GradedRoot):
    H = hminus(M)
    top = max(M.gradings)
    low = min(M.gradings)
    g = top
    while g >= low:
        for j in range(int((top - low) / 2) + 2):
            assert tree_ranks(M, g, j) == module_ranks(H, g, j), (g, j)
        g -= 2


# -- hminus -------------------------------------------------------------------


def test_single_stem():
    M = SymmetricGradedRoot.from_leaves([-2], [])
    assert hminus(M) == T(free=(-2,))
    assert realize(M).same_data(identity_complex().renamed(realize(M).names))
    assert root_connected_homology(M).is_zero()


def test_figure_one_root():
    # V = (2, 1, 1): x_s, x'_s at -s(s+1)-2, the pairs meeting after V_s steps
    root, H = m_module(VSequence((2, 1, 1)), 1)
    assert root.leaf_sequence() == (
        tuple(map(Fraction, (-8, -4, -2, -2, -4, -8))),
        tuple(map(Fraction, (-10, -6, -6, -6, -10))),
    )
    assert hminus(root) == H == T((-2, 2), (-4, 1), (-4, 1), (-8, 1), (-8, 1), free=(-2,))
    check_against_tree(root)
    assert root_connected_homology(root) == T((-1, 2))


def test_monotone_example():
    M = MonotoneRoot((6, 4, 2), (-4, -2, 0)).to_root()
    H = hminus(M)
    assert H == T((6, 5), (4, 4), (4, 3), (2, 2), (2, 1), free=(6,))
    check_against_tree(M)


@pytest.mark.parametrize("M", ROOTS[::7])
def test_hminus_matches_the_tree(M):
    check_against_tree(M)


# -- monotone roots and the subroot -------------------------------------------


def test_monotone_root_rejects_bad_parameters():
    with pytest.raises(InvalidRoot):
        MonotoneRoot((4, 6), (0, 2))
    with pytest.raises(InvalidRoot):
        MonotoneRoot((4, 2), (2, 0))
    with pytest.raises(InvalidRoot):
        MonotoneRoot((2,), (4,))
    with pytest.raises(InvalidRoot):
        MonotoneRoot((4, 1), (0, 1))


@pytest.mark.parametrize(
    "h, r",
    [((-2,), (-2,)), ((-2,), (-6,)), ((6, 4, 2), (-4, -2, 0)), ((0, -2), (-8, -2)), ((4, 2, 0), (-6, -4, 0))],
)
def test_monotone_root_is_its_own_subroot(h, r):
    M = MonotoneRoot(h, r)
    assert monotone_subroot(M.to_root()) == M


@pytest.mark.parametrize("V", [(1,), (2, 1, 1), (3, 2, 1, 1), (2, 2, 1)])
@pytest.mark.parametrize("n", [1, 2])
def test_subroot_of_surgery_root(V, n):
    root, _ = m_module(VSequence(V), n)
    assert monotone_subroot(root) == MonotoneRoot((-2,), (-2 - 2 * V[0],))
    assert root_connected_homology(root) == T((-1, V[0]))


def test_hand_built_root_drops_a_shadowed_pair():
    # a tall outer pair meeting low, a lower inner pair and a fixed middle leaf
    M = SymmetricGradedRoot.from_leaves([0, -4, -2, -4, 0], [-8, -6, -6, -8])
    sub = monotone_subroot(M)
    # the fixed middle leaf tops the stem; the pair at -4 is not above it and is dropped
    assert sub == MonotoneRoot((0, -2), (-8, -2))
    assert root_connected_homology(M) == T((1, 4), (-1, 3))
    assert connected_homology(realize(M)) == T((1, 4), (-1, 3))


def test_subroot_needs_a_symmetric_root():
    with pytest.raises(InvalidRoot):
        monotone_subroot(GradedRoot.from_leaves([-2], []))


@pytest.mark.parametrize("M", ROOTS)
def test_subroot_properties(M):
    sub = monotone_subroot(M)
    again = monotone_subroot(sub.to_root())
    assert again == sub
    # every tower of the subroot appears among the towers of the root
    assert not (Counter(hminus(sub.to_root()).towers) - Counter(hminus(M).towers))


# -- realization --------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_two_leaves_realize_cn(n):
    M = SymmetricGradedRoot.from_leaves([-2, -2], [-2 - 2 * n])
    C = realize(M)
    Cn = surgery_local_rep(n)
    assert C.renamed(Cn.names).same_data(Cn)


def test_surgery_root_for_v1_realizes_sigma237():
    root, _ = m_module(VSequence((1,)), 1)
    C = realize(root)
    C1 = surgery_local_rep(1)
    assert C.renamed(C1.names).same_data(C1)


@pytest.mark.parametrize("M", ROOTS[::5])
def test_realize_induces_the_reflection(M):
    C = realize(M)
    assert C.homology == hminus(M)
    # ι reverses the leaves exactly and J0 reverses the planar order
    k = len(M.leaves)
    for i, v in enumerate(M.leaves):
        assert M.involution[v] == M.leaves[k - 1 - i]
        col = C.iota.column(i)
        assert [j for j, p in enumerate(col) if p] == [k - 1 - i]
    assert solve_homotopy(C.d, C.iota @ C.iota + MonomialMatrix.identity(C.gradings)) is not None


# -- the central cross-check --------------------------------------------------


def test_family_size():
    assert len(ROOTS) == 364
    assert all(len(M.leaves) <= 6 for M in ROOTS)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ROOTS))
def test_root_and_complex_agree(M):
    expected = root_connected_homology(M)
    assert connected_homology(realize(M)) == expected
    assert expected == parity_law(M)


def test_parity_law_examples():
    # T_-2(1) twice cancels, T_-2(2) once survives
    M = SymmetricGradedRoot.from_leaves([-2, -2, -2, -2], [-4, -6, -4])
    assert hminus(M) == T((-2, 1), (-2, 1), (-2, 2), free=(-2,))
    assert parity_law(M) == T((-1, 2))
    assert root_connected_homology(M) == T((-1, 2))
    N = SymmetricGradedRoot.from_leaves([-2, -2, -2], [-4, -4])
    assert parity_law(N).is_zero()
    assert root_connected_homology(N).is_zero()


def test_invalid_roots():
    with pytest.raises(InvalidRoot):
        SymmetricGradedRoot.from_leaves([-2, -4], [-6])
    with pytest.raises(InvalidRoot):
        GradedRoot.from_leaves([-2, -2], [])
    with pytest.raises(InvalidRoot):
        GradedRoot([], [], [], 0)
