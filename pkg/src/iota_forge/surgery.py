"""Surgery on L-space knots: V-sequences, the modules M(V, n) and the mapping cone.

Knot data enters as a staircase (the step lengths of an L-space knot's
complex) or directly as a V-sequence.  From a V-sequence we build the module
``M(V, n)`` with its involution, the truncated mapping cone computing the
homology of ``-n`` surgery in the ``[0]`` structure, and the local
representatives ``C_n`` together with their connected-sum closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import NamedTuple, Sequence

import numpy as np

from . import _gf2
from .graded_roots import SymmetricGradedRoot
from .iota_complex import IotaComplex
from .ufu_algebra import GradedModule, MonomialMatrix, homology

__all__ = [
    "BadResidue",
    "InvalidStaircase",
    "InvalidVSequence",
    "Unsorted",
    "TruncationUnstable",
    "lens_d",
    "VSequence",
    "Staircase",
    "torus_staircase",
    "vs_from_staircase",
    "m_module",
    "surgery_root",
    "SurgeryHomology",
    "surgery_homology",
    "surgery_local_rep",
    "sum_surgeries_complex",
    "sum_surgeries_connected",
    "dunder_lower_bound",
]


class BadResidue(ValueError):
    pass


class InvalidStaircase(ValueError):
    pass


class InvalidVSequence(ValueError):
    pass


class Unsorted(ValueError):
    """Integers were not given in non-increasing order."""


class TruncationUnstable(RuntimeError):
    """The truncated cone changed between N and N + 1."""


def lens_d(n: int, i: int) -> Fraction:
    """d-invariant of ``L(n, 1)`` in the structure labelled ``i``."""
    if n < 1:
        raise BadResidue(f"n must be positive, got {n}")
    if not 0 <= i < n:
        raise BadResidue(f"residue {i} is not in [0, {n})")
    return Fraction((2 * i - n) ** 2 - n, 4 * n)


# ---------------------------------------------------------------------------
# Knot data


@dataclass(frozen=True)
class VSequence:
    """``V_0 >= V_1 >= ... >= 0``; trailing zeros are dropped."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = [int(v) for v in self.values]
        if any(v < 0 for v in vals):
            raise InvalidVSequence("V values must be non-negative")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise InvalidVSequence("V values must be non-increasing")
        while vals and vals[-1] == 0:
            vals.pop()
        object.__setattr__(self, "values", tuple(vals))

    def V(self, s: int) -> int:
        if s < 0:
            return self.V(-s) - s
        return self.values[s] if s < len(self.values) else 0

    def H(self, s: int) -> int:
        return self.V(s) + s

    @property
    def V0(self) -> int:
        return self.V(0)

    @property
    def extent(self) -> int:
        """Largest s with ``V_s != 0`` (0 if there is none)."""
        return max(len(self.values) - 1, 0)

    def __repr__(self) -> str:
        return f"VSequence{self.values}"


@dataclass(frozen=True)
class Staircase:
    """Alternating horizontal and vertical step lengths, starting horizontal."""

    steps: tuple[int, ...]

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if len(steps) % 2:
            raise InvalidStaircase("a staircase has an even number of steps")
        if any(s <= 0 for s in steps):
            raise InvalidStaircase("step lengths must be positive")
        if steps != steps[::-1]:
            raise InvalidStaircase("staircase steps must be symmetric")

    @property
    def genus(self) -> int:
        return sum(self.steps[0::2])

    def corners(self) -> list[tuple[int, int, int]]:
        """``(A, M, kind)`` for each generator; kind 0 for corners, 1 for the others."""
        A, M = self.genus, 0
        out = [(A, M, 0)]
        for m in range(0, len(self.steps), 2):
            h, v = self.steps[m], self.steps[m + 1]
            out.append((A - h, M - 2 * h + 1, 1))
            A, M = A - h - v, M - 2 * h
            out.append((A, M, 0))
        return out


def torus_staircase(p: int, q: int) -> Staircase:
    """Staircase of ``T(p, q)`` from the runs of the semigroup generated by p and q."""
    if p < 2 or q < 2 or gcd(p, q) != 1:
        raise InvalidStaircase(f"T({p},{q}) is not a nontrivial torus knot")
    conductor = (p - 1) * (q - 1)
    inside = np.zeros(conductor + 1, dtype=bool)
    for a in range(0, conductor + 1, p):
        inside[a::q] = True
    steps: list[int] = []
    for k in range(conductor):
        if k and inside[k] == inside[k - 1]:
            steps[-1] += 1
        else:
            steps.append(1)
    return Staircase(tuple(steps))


def _staircase_complex(st: Staircase, s: int | None):
    """Differential of ``A_s`` (or of ``B`` when ``s`` is None) on the generators of ``st``."""
    gens = st.corners()
    shift = [0 if s is None else max(0, A - s) for A, _, _ in gens]
    grs = [M - 2 * t for (_, M, _), t in zip(gens, shift)]
    sup = np.zeros((len(gens),) * 2, dtype=np.uint8)
    for k in range(1, len(gens), 2):
        sup[k - 1, k] = sup[k + 1, k] = 1
    return MonomialMatrix(grs, grs, -1, sup)


def vs_from_staircase(st: Staircase) -> VSequence:
    """``V_s`` read from the map ``H(A_s) -> H(B)`` induced by inclusion."""
    (top_b,) = homology(_staircase_complex(st, None)).free
    vals = []
    for s in range(st.genus + 1):
        H = homology(_staircase_complex(st, s))
        if H.rank != 1:
            raise InvalidStaircase(f"A_{s} does not have a single tower")
        # inclusion is U^t x_k -> U^t x_k, so it maps the tower onto a tower
        vals.append(int((top_b - H.free[0]) / 2))
    return VSequence(tuple(vals))


# ---------------------------------------------------------------------------
# M(V, n)


def _m_leaves(V: VSequence, n: int, shift: Fraction = Fraction(0)):
    K = 0
    while V.V(n * (K + 1)) > 0:
        K += 1
    if V.V0 == 0:
        return [Fraction(-2) + shift], []
    gr = [Fraction(-n * s * (s + 1) - 2) + shift for s in range(K + 1)]
    join = [gr[s] - 2 * V.V(n * s) for s in range(K + 1)]
    left_leaves = gr[::-1]
    left_merges = [min(join[s], join[s + 1]) if s else join[1] for s in range(K)][::-1]
    centre = gr[0] - 2 * V.V0
    return left_leaves + left_leaves[::-1], left_merges + [centre] + left_merges[::-1]


def m_module(V: VSequence, n: int) -> tuple[SymmetricGradedRoot, GradedModule]:
    """``M(V, n)`` as a symmetric graded root and as a graded module.

    Leaves in planar order are ``x_K, ..., x_0, x'_0, ..., x'_K`` and J0
    exchanges ``x_s`` with ``x'_s``.  With ``V_0 = 0`` the module is a single
    tower at -2.
    """
    from .graded_roots import hminus

    if n < 1:
        raise BadResidue(f"n must be positive, got {n}")
    leaves, merges = _m_leaves(V, n)
    root = SymmetricGradedRoot.from_leaves(leaves, merges)
    return root, hminus(root)


def surgery_root(V: VSequence, n: int) -> SymmetricGradedRoot:
    """The root of ``M(V, n)`` in the gradings of ``-n`` surgery."""
    leaves, merges = _m_leaves(V, n, -lens_d(n, 0))
    return SymmetricGradedRoot.from_leaves(leaves, merges)


# ---------------------------------------------------------------------------
# Truncated mapping cone


class SurgeryHomology(NamedTuple):
    module: GradedModule
    j0: dict[str, str]
    truncation: int


def _cone(V: VSequence, n: int, N: int):
    b_idx = [s for s in range(-N - n, N + 1) if s % n == 0]
    a_idx = [s for s in range(-N, N + 1) if s % n == 0]
    grb = {0: -2 - lens_d(n, 0)}
    for s in range(n, N + 1, n):
        grb[s] = grb[s - n] - 2 * s
    for s in range(0, -N - n, -n):
        grb[s - n] = grb[s] + 2 * s
    gra = {s: grb[s] - 2 * V.V(s) + 1 for s in a_idx}
    names = [f"b{s}" for s in b_idx] + [f"a{s}" for s in a_idx]
    grs = [grb[s] for s in b_idx] + [gra[s] for s in a_idx]
    pos = {s: i for i, s in enumerate(b_idx)}
    sup = np.zeros((len(grs),) * 2, dtype=np.uint8)
    for j, s in enumerate(a_idx):
        c = len(b_idx) + j
        sup[pos[s], c] = sup[pos[s - n], c] = 1
    D = MonomialMatrix(grs, grs, -1, sup)
    for j, s in enumerate(a_idx):
        c = len(b_idx) + j
        if D.exponent(pos[s], c) != V.V(s) or D.exponent(pos[s - n], c) != V.H(s):
            raise AssertionError(f"grading pin disagrees with v_s, h_s at s = {s}")
    return names, D, b_idx, len(a_idx)


def _cone_homology(V: VSequence, n: int, N: int):
    names, D, b_idx, n_a = _cone(V, n, N)
    if _gf2.rank(D.support) != n_a:
        raise AssertionError("D is not injective on the truncated cone")
    j0 = {f"b{s}": f"b{-s - n}" for s in b_idx}
    return homology(D), j0


def surgery_homology(V: VSequence, n: int, N: int | None = None) -> SurgeryHomology:
    """Homology of ``-n`` surgery in ``[0]`` from the truncated mapping cone.

    The cone is ``A_s`` for ``s`` in ``nZ ∩ [-N, N]`` mapping to ``B_s`` for
    ``s`` in ``nZ ∩ [-N-n, N]`` by ``U^{V_s}`` and ``U^{H_s}``.  The answer
    is checked against truncation ``N + 1`` and against ``M(V, n)``.
    ``j0`` pairs ``B_s`` with ``B_{-s-n}``.
    """
    if n < 1:
        raise BadResidue(f"n must be positive, got {n}")
    if N is None:
        N = n + V.extent + 1
    H, j0 = _cone_homology(V, n, N)
    H_next, _ = _cone_homology(V, n, N + 1)
    if H != H_next:
        raise TruncationUnstable(f"cone homology differs between N = {N} and N = {N + 1}")
    expected = m_module(V, n)[1].shifted(-lens_d(n, 0))
    if H != expected:
        raise AssertionError(f"cone homology {H} does not match M(V, n): {expected}")
    return SurgeryHomology(H, j0, N)


# ---------------------------------------------------------------------------
# Local representatives


def surgery_local_rep(V0: int) -> IotaComplex:
    """``C_{V0}``: x1, x2 at -2, y with ``dy = U^{V0}(x1 + x2)``, ι swapping x1 and x2."""
    if V0 < 1:
        raise ValueError("V0 must be positive")
    return IotaComplex.from_maps(
        [("x1", -2), ("x2", -2), ("y", -2 * V0 - 1)],
        d={"y": ["x1", "x2"]},
        iota={"x1": ["x2"], "x2": ["x1"]},
        name=f"C{V0}",
    )


def _check_sorted(ns: Sequence[int]) -> list[int]:
    ns = [int(x) for x in ns]
    if not ns or any(x < 1 for x in ns):
        raise ValueError("need at least one positive integer")
    if any(a < b for a, b in zip(ns, ns[1:])):
        raise Unsorted(f"{ns} is not non-increasing")
    return ns


def sum_surgeries_complex(ns: Sequence[int]) -> IotaComplex:
    """The small complex ``C_{n1,...,nm}`` locally equivalent to ``C_{n1} ⊗ ... ⊗ C_{nm}``."""
    ns = _check_sorted(ns)
    m = len(ns)
    a = [0]
    for x in ns:
        a.append(a[-1] + x)
    gens: list[tuple[str, int]] = []
    d: dict[str, list[str]] = {}
    iota: dict[str, list[str]] = {}
    for j in range(1, m + 1):
        gr = -2 if j == 1 else -2 * a[j - 1] + j - 3
        for i in (1, 2):
            gens.append((f"x{i}_{j}", gr))
            iota[f"x{i}_{j}"] = [f"x{3 - i}_{j}"]
            if j > 1:
                d[f"x{i}_{j}"] = [f"x1_{j - 1}", f"x2_{j - 1}"]
    gens.append(("y", -2 * a[m] + m - 2))
    d["y"] = [f"x1_{m}", f"x2_{m}"]
    return IotaComplex.from_maps(gens, d=d, iota=iota, name="C" + ",".join(map(str, ns)))


def sum_surgeries_connected(ns: Sequence[int]) -> GradedModule:
    """Closed form: a tower of length ``n_i`` with top ``i - 2 - 2 a_{i-1}`` for each i."""
    ns = _check_sorted(ns)
    towers, a = [], 0
    for i, x in enumerate(ns, start=1):
        towers.append((Fraction(i - 2 - 2 * a), x))
        a += x
    return GradedModule((), tuple(towers))


def dunder_lower_bound(V0: int, n: int) -> Fraction:
    """Lower bound ``-2 V0 - d(L(n,1), [0])`` for d̲ of ``-n`` surgery."""
    return -2 * V0 - lens_d(n, 0)
