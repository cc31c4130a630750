from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iota_forge.connected import connected_homology
from iota_forge.graded_roots import realize
from iota_forge.involutive import correction_terms
from iota_forge.iota_complex import tensor
from iota_forge.surgery import (
    BadResidue,
    InvalidStaircase,
    InvalidVSequence,
    Staircase,
    TruncationUnstable,
    Unsorted,
    VSequence,
    dunder_lower_bound,
    lens_d,
    m_module,
    sum_surgeries_complex,
    sum_surgeries_connected,
    surgery_homology,
    surgery_local_rep,
    surgery_root,
    torus_staircase,
    vs_from_staircase,
)
from iota_forge.ufu_algebra import GradedModule


def T(*pairs, free=()):
    return GradedModule(tuple(Fraction(f) for f in free), tuple((Fraction(a), n) for a, n in pairs))


# -- lens spaces --------------------------------------------------------------


def d_lens_recursive(p, q, i):
    """d(L(p, q), i) by the reciprocity recursion, reducing (p, q) to (q, p mod q)."""
    if p == 1:
        return Fraction(0)
    r, j = p % q, i % q
    return Fraction((2 * i + 1 - p - q) ** 2 - p * q, 4 * p * q) - d_lens_recursive(q, r, j)


def d_plumbing(n, i):
    """Minus the maximum of (K^2 + 1) / 4 over characteristic K on the -n disk bundle, K = 2i - n mod 2n."""
    best = None
    for k in range(2 * i - n - 4 * n, 2 * i - n + 4 * n + 1, 2 * n):
        val = Fraction(n - k * k, 4 * n)
        best = val if best is None else max(best, val)
    return -best


def test_lens_examples():
    assert lens_d(1, 0) == 0
    assert lens_d(2, 0) == Fraction(1, 4)
    assert lens_d(3, 0) == Fraction(1, 2)
    for bad in ((0, 0), (2, 2), (3, -1)):
        with pytest.raises(BadResidue):
            lens_d(*bad)


@pytest.mark.parametrize("n", range(1, 13))
def test_lens_against_oracles(n):
    for i in range(n):
        assert lens_d(n, i) == d_lens_recursive(n, 1, i) == d_plumbing(n, i)


def test_recursion_on_known_lens_spaces():
    # L(p, q) and L(p, q') with q q' = 1 mod p are homeomorphic, so the multisets agree
    for p in range(2, 12):
        for q in range(1, p):
            if gcd(p, q) != 1:
                continue
            q2 = pow(q, -1, p)
            a = sorted(d_lens_recursive(p, q, i) for i in range(p))
            b = sorted(d_lens_recursive(p, q2, i) for i in range(p))
            assert a == b
            assert sum(a) == sum(b)


# -- knot data ----------------------------------------------------------------


def test_vsequence_accessors():
    V = VSequence((2, 1, 1, 0, 0))
    assert V.values == (2, 1, 1)
    assert (V.V0, V.extent) == (2, 2)
    assert [V.V(s) for s in range(-3, 5)] == [3, 3, 2, 2, 1, 1, 0, 0]
    for s in range(-4, 5):
        assert V.H(s) == V.V(s) + s
        assert V.V(s) == V.H(-s)
    assert VSequence(()).extent == 0
    with pytest.raises(InvalidVSequence):
        VSequence((1, 2))
    with pytest.raises(InvalidVSequence):
        VSequence((-1,))


def test_staircase_validation():
    assert Staircase((1, 2, 2, 1)).genus == 3
    for bad in ((1,), (1, 2), (1, 0, 0, 1), (2, -1, -1, 2)):
        with pytest.raises(InvalidStaircase):
            Staircase(bad)
    with pytest.raises(InvalidStaircase):
        torus_staircase(2, 4)


def corner_oracle(st: Staircase) -> VSequence:
    """V_s = min over the corners (i, j) of max(i, j - s)."""
    g = st.genus
    corners = [(0, g)]
    i, j = 0, g
    for k in range(0, len(st.steps), 2):
        i, j = i + st.steps[k], j - st.steps[k + 1]
        corners.append((i, j))
    assert corners[-1] == (g, 0)
    return VSequence(tuple(min(max(a, b - s) for a, b in corners) for s in range(g + 1)))


def semigroup_oracle(p, q) -> VSequence:
    """For torus knots V_s counts the semigroup gaps at or above g + s."""
    g = (p - 1) * (q - 1) // 2
    S = {a * p + b * q for a in range(q + 1) for b in range(p + 1)}
    gaps = [x for x in range(2 * g) if x not in S]
    return VSequence(tuple(sum(1 for x in gaps if x >= g + s) for s in range(g + 1)))


def test_torus_examples():
    assert vs_from_staircase(Staircase(())) == VSequence(())
    assert torus_staircase(2, 9).steps == (1,) * 8
    assert vs_from_staircase(torus_staircase(2, 9)).V0 == 2
    assert vs_from_staircase(torus_staircase(2, 7)) == VSequence((2, 1, 1))
    assert torus_staircase(3, 4).steps == (1, 2, 2, 1)
    assert vs_from_staircase(torus_staircase(3, 4)) == VSequence((1, 1, 1))


@pytest.mark.parametrize(
    "p, q", [(2, 3), (2, 5), (2, 7), (2, 9), (2, 13), (3, 4), (3, 5), (3, 7), (4, 5), (5, 6)]
)
def test_torus_knots_against_oracles(p, q):
    st_ = torus_staircase(p, q)
    assert st_.genus == (p - 1) * (q - 1) // 2
    V = vs_from_staircase(st_)
    assert V == corner_oracle(st_) == semigroup_oracle(p, q)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_v0_of_two_stranded_torus_knots(n):
    assert vs_from_staircase(torus_staircase(2, 4 * n + 1)).V0 == n


@st.composite
def staircases(draw):
    half = draw(st.lists(st.integers(1, 3), min_size=1, max_size=4))
    return Staircase(tuple(half + half[::-1]))


@settings(max_examples=80, deadline=None)
@given(staircases())
def test_staircase_v_matches_corner_oracle(st_):
    assert vs_from_staircase(st_) == corner_oracle(st_)


# -- the module M(V, n) -------------------------------------------------------


def test_m_module_examples():
    root, H = m_module(VSequence((1,)), 1)
    assert H == T((-2, 1), free=(-2,))
    assert root.leaf_sequence() == ((Fraction(-2), Fraction(-2)), (Fraction(-4),))
    root, H = m_module(VSequence((2, 1, 1)), 2)
    # only s with V_2s != 0: x_0 (V_0 = 2) and x_1 at -6 (V_2 = 1)
    leaves, merges = root.leaf_sequence()
    assert leaves == tuple(map(Fraction, (-6, -2, -2, -6)))
    assert merges == tuple(map(Fraction, (-8, -6, -8)))
    assert m_module(VSequence(()), 3)[1] == T(free=(-2,))
    with pytest.raises(BadResidue):
        m_module(VSequence((1,)), 0)


@pytest.mark.parametrize("V", [(1,), (2, 1, 1), (3, 2, 1, 1)])
def test_connected_homology_of_the_surgery_root(V):
    root, _ = m_module(VSequence(V), 1)
    assert connected_homology(realize(root)) == T((-1, V[0]))


# -- the mapping cone ---------------------------------------------------------


@pytest.mark.parametrize("V", [(1,), (2, 1, 1), (3, 2, 1, 1), (2, 2, 2), ()])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_cone_matches_the_module(V, n):
    V = VSequence(V)
    out = surgery_homology(V, n)
    assert out.module == m_module(V, n)[1].shifted(-lens_d(n, 0))
    assert out.truncation == n + V.extent + 1
    # larger truncations agree as well
    assert surgery_homology(V, n, out.truncation + 2).module == out.module


def test_cone_gradings_follow_the_pin():
    out = surgery_homology(VSequence((1,)), 2)
    assert out.module == T((Fraction(-9, 4), 1), free=(Fraction(-9, 4),))
    assert out.j0["b0"] == "b-2" and out.j0["b-2"] == "b0"
    assert all(out.j0[out.j0[k]] == k for k in out.j0)


def test_cone_detects_small_truncation():
    with pytest.raises(TruncationUnstable):
        surgery_homology(VSequence((2, 1, 1)), 1, 1)


def test_surgery_root_is_shifted():
    root = surgery_root(VSequence((1,)), 3)
    assert root.leaf_sequence()[0] == (Fraction(-5, 2), Fraction(-5, 2))


@pytest.mark.parametrize("V", [(1,), (2, 1, 1), (3, 2, 2, 1)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lower_bound_is_attained(V, n):
    C = realize(surgery_root(VSequence(V), n))
    lo, d, hi = correction_terms(C)
    assert lo == dunder_lower_bound(V[0], n)
    assert d == hi == -lens_d(n, 0)


def test_lower_bound_examples():
    assert dunder_lower_bound(1, 1) == -2
    assert dunder_lower_bound(2, 1) == -4
    assert dunder_lower_bound(0, 3) == -lens_d(3, 0)


# -- local representatives and connected sums ---------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_local_rep(n):
    C = surgery_local_rep(n)
    assert correction_terms(C) == (-2 * n, 0, 0)
    assert C.gradings == (Fraction(-2), Fraction(-2), Fraction(-2 * n - 1))
    with pytest.raises(ValueError):
        surgery_local_rep(0)


def test_sum_complex_examples():
    assert sum_surgeries_complex([3]).same_data(surgery_local_rep(3))
    C = sum_surgeries_complex([2, 1])
    assert C.size == 5
    assert C.gradings == tuple(map(Fraction, (-2, -2, -5, -5, -6)))
    with pytest.raises(Unsorted):
        sum_surgeries_complex([1, 2])
    with pytest.raises(Unsorted):
        sum_surgeries_connected([1, 3])


def test_sum_closed_form_examples():
    assert sum_surgeries_connected([1]) == T((-1, 1))
    assert sum_surgeries_connected([2, 1]) == T((-1, 2), (-4, 1))
    assert sum_surgeries_connected([1, 1]) == T((-1, 1), (-2, 1))


@pytest.mark.parametrize("ns", [[1, 1], [2, 1], [2, 2], [3, 1], [3, 2, 1], [3, 2, 2, 1]])
def test_sum_closed_form_matches_the_complex(ns):
    assert connected_homology(sum_surgeries_complex(ns)) == sum_surgeries_connected(ns)


@pytest.mark.parametrize("ns", [[2, 1], [1, 1], [3, 1]])
def test_sum_complex_matches_the_tensor(ns):
    P = surgery_local_rep(ns[0])
    for x in ns[1:]:
        P = tensor(P, surgery_local_rep(x))
    assert connected_homology(P) == sum_surgeries_connected(ns)
    assert correction_terms(P) == correction_terms(sum_surgeries_complex(ns))
