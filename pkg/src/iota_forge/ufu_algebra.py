"""Graded linear algebra over F2[U] with U in degree -2.

A homogeneous map between free graded F2[U]-modules has at most one monomial
in each entry, and the exponent is fixed by the gradings.  A map is therefore
stored as a 0/1 support matrix together with the row and column gradings;
exponents are recomputed when needed.  Vectors with polynomial entries use
Python ints as coefficient bitmasks (bit ``k`` is the coefficient of ``U^k``).

Gradings are :class:`fractions.Fraction` values.  All gradings of one module
must lie in a single coset of the integers.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _gf2

__all__ = [
    "Grading",
    "to_grading",
    "format_grading",
    "NotAComplex",
    "MixedCoset",
    "TruncationTooSmall",
    "GradedModule",
    "MonomialMatrix",
    "GradedSlices",
    "levels",
    "homology",
    "truncated_homology_oracle",
    "oracle_module",
    "kernel_basis",
    "saturated_basis",
    "submodule_contains",
    "solve_linear",
]

Grading = Fraction


class NotAComplex(ValueError):
    """The square of a differential is not zero."""


class MixedCoset(ValueError):
    """Gradings do not lie in a single coset of the integers."""


class TruncationTooSmall(ValueError):
    """A truncated computation did not stabilise."""


def to_grading(x) -> Fraction:
    """Parse an int, a Fraction or a ``"p/q"`` string.  Floats are rejected."""
    if isinstance(x, bool):
        raise TypeError("booleans are not gradings")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact grading")


def format_grading(g: Fraction) -> str:
    g = Fraction(g)
    return str(g.numerator) if g.denominator == 1 else f"{g.numerator}/{g.denominator}"


def levels(gradings: Sequence[Fraction], base: Fraction | None = None) -> tuple[Fraction, np.ndarray]:
    """Split gradings as ``base + level`` with integer levels.

    Raises :class:`MixedCoset` if the gradings are not congruent mod 1.
    """
    gradings = [to_grading(g) for g in gradings]
    if base is None:
        base = gradings[0] if gradings else Fraction(0)
    out = np.zeros(len(gradings), dtype=np.int64)
    for i, g in enumerate(gradings):
        diff = g - base
        if diff.denominator != 1:
            raise MixedCoset(f"gradings {base} and {g} differ by a non-integer")
        out[i] = diff.numerator
    return base, out


# ---------------------------------------------------------------------------
# Graded modules


@dataclass(frozen=True)
class GradedModule:
    """Isomorphism type of a finitely generated graded F2[U]-module.

    ``free`` lists the gradings of the generators of the free summands;
    ``towers`` lists pairs ``(a, n)`` for summands ``F2[U]/U^n`` generated in
    grading ``a``.  Both are kept in a canonical descending order, so ``==``
    is isomorphism.
    """

    free: tuple[Fraction, ...] = ()
    towers: tuple[tuple[Fraction, int], ...] = ()

    def __post_init__(self):
        free = tuple(sorted((to_grading(g) for g in self.free), reverse=True))
        towers = []
        for a, n in self.towers:
            n = int(n)
            if n <= 0:
                raise ValueError(f"tower length must be positive, got {n}")
            towers.append((to_grading(a), n))
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "towers", tuple(sorted(towers, reverse=True)))

    @property
    def rank(self) -> int:
        return len(self.free)

    def is_zero(self) -> bool:
        return not self.free and not self.towers

    def torsion(self) -> "GradedModule":
        return GradedModule((), self.towers)

    def shifted(self, k) -> "GradedModule":
        """Every grading moved up by ``k``."""
        k = to_grading(k)
        return GradedModule(
            tuple(g + k for g in self.free), tuple((a + k, n) for a, n in self.towers)
        )

    def __add__(self, other: "GradedModule") -> "GradedModule":
        return GradedModule(self.free + other.free, self.towers + other.towers)

    def max_tower_length(self) -> int:
        return max((n for _, n in self.towers), default=0)

    def torsion_dimension(self) -> int:
        return sum(n for _, n in self.towers)

    def dims(self, depth: int | None = None) -> dict[Fraction, int]:
        """F2-dimension in each grading; free summands are cut after ``depth`` steps."""
        if self.free and depth is None:
            raise ValueError("free summands need a finite depth")
        out: Counter = Counter()
        for g in self.free:
            for j in range(depth):
                out[g - 2 * j] += 1
        for a, n in self.towers:
            for j in range(n):
                out[a - 2 * j] += 1
        return dict(out)

    def __repr__(self) -> str:
        parts = [f"F[U]_({format_grading(g)})" for g in self.free]
        parts += [f"T_{format_grading(a)}({n})" for a, n in self.towers]
        return "GradedModule(" + (" + ".join(parts) if parts else "0") + ")"


# ---------------------------------------------------------------------------
# Monomial matrices


class MonomialMatrix:
    """Homogeneous matrix over F2[U] stored as support plus gradings.

    Entry ``(r, c)`` may be nonzero only when
    ``k = (rows[r] - cols[c] - degree) / 2`` is a non-negative integer, in
    which case it is ``U^k``.  ``degree`` is the amount by which the map raises
    grading (``-1`` for a differential, ``+1`` for a homotopy).
    """

    __slots__ = ("rows", "cols", "degree", "support", "_base", "_rlev", "_clev")

    def __init__(self, rows: Sequence, cols: Sequence, degree: int, support=None):
        self.rows = tuple(to_grading(g) for g in rows)
        self.cols = tuple(to_grading(g) for g in cols)
        self.degree = int(degree)
        base, lev = levels(self.rows + self.cols)
        self._base = base
        self._rlev = lev[: len(self.rows)]
        self._clev = lev[len(self.rows):]
        shape = (len(self.rows), len(self.cols))
        if support is None:
            sup = np.zeros(shape, dtype=np.uint8)
        else:
            sup = _gf2.as_bits(support).reshape(shape).copy()
        bad = sup.astype(bool) & ~self.admissible()
        if bad.any():
            r, c = map(int, np.argwhere(bad)[0])
            raise ValueError(
                f"entry ({r},{c}) is not allowed: gradings {self.rows[r]} <- {self.cols[c]}"
                f" do not admit a monomial of degree {self.degree}"
            )
        sup.setflags(write=False)
        self.support = sup

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, rows, cols, degree: int) -> "MonomialMatrix":
        return cls(rows, cols, degree)

    @classmethod
    def identity(cls, gradings) -> "MonomialMatrix":
        return cls(gradings, gradings, 0, np.eye(len(gradings), dtype=np.uint8))

    @classmethod
    def u_power(cls, gradings, k: int) -> "MonomialMatrix":
        """``U^k`` times the identity."""
        return cls(gradings, gradings, -2 * k, np.eye(len(gradings), dtype=np.uint8))

    @classmethod
    def from_entries(cls, rows, cols, degree: int, entries: Iterable[tuple[int, int]]) -> "MonomialMatrix":
        sup = np.zeros((len(rows), len(cols)), dtype=np.uint8)
        for r, c in entries:
            sup[r, c] ^= 1
        return cls(rows, cols, degree, sup)

    # -- structure ----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.support.shape

    @property
    def row_levels(self) -> np.ndarray:
        return self._rlev

    @property
    def col_levels(self) -> np.ndarray:
        return self._clev

    def exponent_table(self) -> np.ndarray:
        """Forced exponent of every position, or -1 where no monomial fits."""
        e = self._rlev[:, None] - self._clev[None, :] - self.degree
        return np.where((e >= 0) & (e % 2 == 0), e // 2, -1)

    def admissible(self) -> np.ndarray:
        return self.exponent_table() >= 0

    def exponent(self, r: int, c: int) -> int:
        k = int(self.exponent_table()[r, c])
        if k < 0:
            raise ValueError(f"position ({r},{c}) admits no monomial")
        return k

    def entries(self) -> list[tuple[int, int, int]]:
        exps = self.exponent_table()
        return [(int(r), int(c), int(exps[r, c])) for r, c in np.argwhere(self.support)]

    def is_zero(self) -> bool:
        return not self.support.any()

    def min_exponent(self) -> int | None:
        if self.is_zero():
            return None
        return int(self.exponent_table()[self.support.astype(bool)].min())

    # -- algebra ------------------------------------------------------------
    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if self.cols != other.rows:
            raise ValueError("gradings do not match for composition")
        sup = _gf2.matmul(self.support, other.support)
        return MonomialMatrix(self.rows, other.cols, self.degree + other.degree, sup)

    def __add__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if (self.rows, self.cols, self.degree) != (other.rows, other.cols, other.degree):
            raise ValueError("cannot add maps of different shape or degree")
        return MonomialMatrix(self.rows, self.cols, self.degree, self.support ^ other.support)

    __sub__ = __add__

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonomialMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.degree == other.degree
            and np.array_equal(self.support, other.support)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.degree, self.support.tobytes()))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "MonomialMatrix":
        rows, cols = list(rows), list(cols)
        return MonomialMatrix(
            [self.rows[i] for i in rows],
            [self.cols[j] for j in cols],
            self.degree,
            self.support[np.ix_(rows, cols)] if rows and cols else np.zeros((len(rows), len(cols))),
        )

    def apply(self, vec: Sequence[int]) -> list[int]:
        """Multiply a column of polynomials (int bitmasks)."""
        if len(vec) != len(self.cols):
            raise ValueError("vector length mismatch")
        out = [0] * len(self.rows)
        for r, c, k in self.entries():
            out[r] ^= vec[c] << k
        return out

    def column(self, c: int) -> list[int]:
        out = [0] * len(self.rows)
        exps = self.exponent_table()
        for r in np.flatnonzero(self.support[:, c]):
            out[r] = 1 << int(exps[r, c])
        return out

    def __repr__(self) -> str:
        return f"MonomialMatrix({self.shape[0]}x{self.shape[1]}, degree={self.degree}, nnz={int(self.support.sum())})"


# ---------------------------------------------------------------------------
# Finite graded pieces


class GradedSlices:
    """Graded pieces of a free module as finite F2-vector spaces.

    The piece at level ``g`` has one basis vector ``U^j x_c`` for each generator
    with ``level(x_c) - 2j == g``; with a truncation ``N`` only ``j < N`` is
    kept, which models the quotient by ``U^N``.
    """

    def __init__(self, lev: np.ndarray, truncation: int | None = None):
        self.lev = np.asarray(lev, dtype=np.int64)
        self.N = truncation

    def basis(self, g: int) -> np.ndarray:
        ok = (self.lev >= g) & ((self.lev - g) % 2 == 0)
        if self.N is not None:
            ok &= (self.lev - g) // 2 < self.N
        return np.flatnonzero(ok)

    def map(self, support: np.ndarray, g: int, degree: int) -> np.ndarray:
        """Matrix of a homogeneous map from the piece at ``g`` to ``g + degree``."""
        src, dst = self.basis(g), self.basis(g + degree)
        if src.size == 0 or dst.size == 0:
            return np.zeros((dst.size, src.size), dtype=np.uint8)
        return np.asarray(support, dtype=np.uint8)[np.ix_(dst, src)]

    def u_map(self, g: int, j: int = 1) -> np.ndarray:
        """Matrix of ``U^j`` from level ``g`` to level ``g - 2j``."""
        src, dst = self.basis(g), self.basis(g - 2 * j)
        return (dst[:, None] == src[None, :]).astype(np.uint8)


# ---------------------------------------------------------------------------
# Homology


def _check_differential(d: MonomialMatrix) -> None:
    if d.rows != d.cols:
        raise ValueError("a differential must be square with equal row and column gradings")
    if d.degree != -1:
        raise ValueError(f"a differential has degree -1, got {d.degree}")
    sq = _gf2.matmul(d.support, d.support)
    if sq.any():
        r, c = map(int, np.argwhere(sq)[0])
        raise NotAComplex(f"d^2 has a nonzero entry at ({r},{c})")


def homology(d: MonomialMatrix) -> GradedModule:
    """Graded isomorphism type of ``ker d / im d``.

    Graded Smith reduction: repeatedly pivot on a nonzero entry of minimal
    exponent (ties broken by ``(row, col)``), clear its row and column, and
    record the pair.  A pivot ``U^k`` with ``k > 0`` contributes a tower of
    length ``k`` whose top is the grading of the pivot row.  The free part has
    the gradings of the surviving columns (a basis of ``ker d``) minus those
    of the pivot rows (a basis of the saturation of ``im d``).
    """
    _check_differential(d)
    n = d.shape[0]
    if n == 0:
        return GradedModule()
    S = d.support.astype(np.uint8).copy()
    exps = d.exponent_table()
    active_r = np.ones(n, dtype=bool)
    active_c = np.ones(n, dtype=bool)
    big = np.iinfo(np.int64).max
    towers = []
    pivot_rows = []
    while True:
        mask = S.astype(bool) & active_r[:, None] & active_c[None, :]
        if not mask.any():
            break
        cand = np.where(mask, exps, big)
        kmin = cand.min()
        r, c = map(int, np.argwhere(cand == kmin)[0])
        others = np.flatnonzero(S[:, c])
        others = others[others != r]
        if others.size:
            S[others] ^= S[r]
        cols = np.flatnonzero(S[r])
        cols = cols[cols != c]
        if cols.size:
            S[:, cols] ^= S[:, [c]]
        active_r[r] = False
        active_c[c] = False
        pivot_rows.append(r)
        if kmin > 0:
            towers.append((d.rows[r], int(kmin)))
    kernel = Counter(d.cols[c] for c in np.flatnonzero(active_c))
    kernel.subtract(Counter(d.rows[r] for r in pivot_rows))
    if any(v < 0 for v in kernel.values()):
        raise AssertionError("grading bookkeeping failed; input is not a complex")
    free = [g for g, m in kernel.items() for _ in range(m)]
    return GradedModule(tuple(free), tuple(towers))


def _homology_ranks(d: MonomialMatrix, N: int):
    """Ranks of ``U^j`` on the homology of ``C / U^N C``, keyed by level."""
    base, lev = levels(d.rows)
    sl = GradedSlices(lev, N)
    top = int(lev.max())
    bottom = int(lev.min()) - 2 * (N - 1)
    gs = range(top, bottom - 1, -1)
    Z, B = {}, {}
    for g in gs:
        src = sl.basis(g)
        if src.size == 0:
            continue
        Dg = sl.map(d.support, g, -1)
        Z[g] = _gf2.nullspace(Dg) if Dg.shape[0] else np.eye(src.size, dtype=np.uint8)
        Din = sl.map(d.support, g + 1, -1)
        B[g] = _gf2.row_basis(Din.T) if Din.size else np.zeros((0, src.size), dtype=np.uint8)
    ranks: dict[tuple[int, int], int] = {}
    for g in Z:
        bdim = B[g].shape[0]
        ranks[(g, 0)] = Z[g].shape[0] - bdim
        j = 1
        while (g + 2 * j) in Z and j < N:
            src = Z[g + 2 * j]
            Uj = sl.u_map(g + 2 * j, j)
            img = _gf2.matmul(src, Uj.T) if src.size else np.zeros((0, Uj.shape[0]), dtype=np.uint8)
            stacked = np.vstack([B[g], img]) if img.size else B[g]
            ranks[(g, j)] = _gf2.rank(stacked) - bdim if stacked.size else 0
            j += 1
    return base, ranks


def truncated_homology_oracle(d: MonomialMatrix, N: int) -> dict[Fraction, int]:
    """F2-dimension of ``H_*(C / U^N C)`` in each grading.

    This is plain row reduction on finite vector spaces and does not use
    :func:`homology`.  Note that the quotient complex carries, besides
    ``H/U^N H``, a copy of every torsion summand ``T_a(n)`` moved down to
    ``T_{a-2N+1}(n)`` (the Tor term of the universal coefficient sequence).
    """
    if N <= 0:
        raise ValueError("truncation must be positive")
    _check_differential(d)
    if d.shape[0] == 0:
        return {}
    base, ranks = _homology_ranks(d, N)
    return {base + g: r for (g, j), r in sorted(ranks.items(), reverse=True) if j == 0 and r}


def _bars(ranks: Mapping[tuple[int, int], int]) -> list[tuple[int, int]]:
    def r(g, j):
        return ranks.get((g, j), 0)

    bars = []
    for (b, _j) in [k for k in ranks if k[1] == 0]:
        ell = 0
        while r(b, ell):
            count = r(b, ell) - r(b, ell + 1) - r(b - 2, ell + 1) + r(b - 2, ell + 2)
            bars += [(b + 2 * ell, ell + 1)] * count
            ell += 1
    return bars


def _reconstruct(d: MonomialMatrix, N: int) -> GradedModule:
    base, ranks = _homology_ranks(d, N)
    pending = Counter(_bars(ranks))
    free, towers = [], []
    for top, length in sorted(pending.elements(), reverse=True):
        if pending[(top, length)] == 0:
            continue
        pending[(top, length)] -= 1
        if length >= N:
            free.append(base + top)
            continue
        partner = (top - 2 * N + 1, length)
        if pending[partner] <= 0:
            raise TruncationTooSmall(f"no Tor partner for a bar of length {length} at U^{N}")
        pending[partner] -= 1
        towers.append((base + top, length))
    return GradedModule(tuple(free), tuple(towers))


def default_truncation(d: MonomialMatrix) -> int:
    """Exceeds every possible tower length and every exponent of ``d``."""
    if d.shape[0] == 0:
        return 1
    _, lev = levels(d.rows)
    return int(lev.max() - lev.min() + 1) // 2 + 2


def oracle_module(d: MonomialMatrix, N: int | None = None) -> GradedModule:
    """Module reconstructed from truncated homology at ``N`` and ``N + 1``.

    Each bar of the U-action on ``H_*(C/U^N)`` of length ``N`` is a free
    summand; shorter bars pair up as a tower and its Tor copy ``2N - 1``
    lower.  Raises :class:`TruncationTooSmall` if the two truncations disagree.
    """
    _check_differential(d)
    if d.shape[0] == 0:
        return GradedModule()
    if N is None:
        N = default_truncation(d)
    a = _reconstruct(d, N)
    b = _reconstruct(d, N + 1)
    if a != b:
        raise TruncationTooSmall(f"reconstruction changed between U^{N} and U^{N + 1}")
    return a


# ---------------------------------------------------------------------------
# Kernels and linear solves


def saturated_basis(gradings: Sequence, vectors: np.ndarray) -> tuple[MonomialMatrix, list[int]]:
    """Echelon basis of the saturated submodule with the given F2 span at ``U = 1``.

    ``vectors`` are rows over the generators.  The span is split by parity
    class of levels; within a class the reduced echelon form is taken with
    pivots ordered by level ascending, then index.  A homogeneous vector has
    the grading of its lowest coordinate, so each output column has
    coefficient 1 on its pivot (its lowest-grading coordinate) and the pivot
    is zero in every other column.  Columns are listed by grading descending,
    then pivot index.  Returns the basis and the pivot of each column.
    """
    gradings = tuple(to_grading(g) for g in gradings)
    _, lev = levels(gradings) if gradings else (Fraction(0), np.zeros(0, np.int64))
    vectors = _gf2.as_bits(vectors).reshape(-1, len(gradings))
    vecs, tops = [], []
    for parity in (0, 1):
        cls = np.flatnonzero(lev % 2 == parity)
        if cls.size == 0:
            continue
        part = vectors[:, cls]
        if not part.any():
            continue
        order = sorted(range(cls.size), key=lambda k: (lev[cls[k]], cls[k]))
        R, piv = _gf2.rref(part, order)
        for i, p in enumerate(piv):
            v = np.zeros(len(gradings), dtype=np.uint8)
            v[cls] = R[i]
            vecs.append(v)
            tops.append(int(cls[p]))
    order = sorted(range(len(vecs)), key=lambda i: (-lev[tops[i]], tops[i]))
    sup = np.array([vecs[i] for i in order], dtype=np.uint8).T.reshape(len(gradings), len(vecs))
    pivots = [tops[i] for i in order]
    return MonomialMatrix(gradings, [gradings[p] for p in pivots], 0, sup), pivots


def kernel_basis(f: MonomialMatrix) -> MonomialMatrix:
    """Echelon basis of ``ker f`` as the columns of a degree-0 matrix.

    The kernel of a homogeneous map is a saturated free submodule, so it is
    determined by the GF(2) null space of the support, taken one parity class
    of levels at a time.  See :func:`saturated_basis` for the normal form.
    """
    lev = f.col_levels
    null = []
    for parity in (0, 1):
        cls = np.flatnonzero(lev % 2 == parity)
        if cls.size == 0:
            continue
        N = _gf2.nullspace(f.support[:, cls]) if f.shape[0] else np.eye(cls.size, dtype=np.uint8)
        for row in N:
            v = np.zeros(f.shape[1], dtype=np.uint8)
            v[cls] = row
            null.append(v)
    vectors = np.array(null, dtype=np.uint8).reshape(len(null), f.shape[1])
    return saturated_basis(f.cols, vectors)[0]


def _homogeneous_parts(gradings: Sequence[Fraction], vec: Sequence[int]) -> dict[Fraction, np.ndarray]:
    parts: dict[Fraction, np.ndarray] = {}
    for r, poly in enumerate(vec):
        k = 0
        while poly:
            if poly & 1:
                g = gradings[r] - 2 * k
                parts.setdefault(g, np.zeros(len(gradings), dtype=np.uint8))[r] ^= 1
            poly >>= 1
            k += 1
    return parts


def solve_linear(A: MonomialMatrix, b: Sequence[int]) -> list[int] | None:
    """Solve ``A x = b`` over F2[U], or return None.

    ``b`` and the result are columns of polynomials.  Each homogeneous
    component of ``b`` is solved separately; pivots are taken in order of
    increasing exponent, ties by lowest index, and free variables are 0.
    """
    if len(b) != A.shape[0]:
        raise ValueError("right-hand side has the wrong length")
    x = [0] * A.shape[1]
    clev = A.col_levels
    for g, beta in _homogeneous_parts(A.rows, b).items():
        target = g - A.degree - A._base
        if target.denominator != 1:
            return None
        t = target.numerator
        cols = [c for c in range(A.shape[1]) if clev[c] >= t and (clev[c] - t) % 2 == 0]
        if not cols:
            return None
        order = sorted(range(len(cols)), key=lambda k: ((clev[cols[k]] - t) // 2, cols[k]))
        sol = _gf2.solve(A.support[:, cols], beta, order)
        if sol is None:
            return None
        for k, c in enumerate(cols):
            if sol[k]:
                x[c] ^= 1 << int((clev[c] - t) // 2)
    return x


def submodule_contains(A: MonomialMatrix, B: MonomialMatrix) -> bool:
    """Whether the span of the columns of ``B`` lies in the span of those of ``A``."""
    if A.rows != B.rows:
        raise ValueError("ambient gradings differ")
    return all(solve_linear(A, B.column(c)) is not None for c in range(B.shape[1]))
