"""ι-complexes: validation, tensor product, dual, reduction and the d invariant."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _gf2
from .ufu_algebra import (
    GradedModule,
    MixedCoset,
    MonomialMatrix,
    NotAComplex,
    homology,
    levels,
    to_grading,
)

__all__ = [
    "InvalidInput",
    "NotLocal",
    "IotaComplex",
    "ValidationReport",
    "validate",
    "tensor",
    "tensor_power",
    "dual",
    "reduce",
    "d_invariant",
    "identity_complex",
    "solve_homotopy",
]


class InvalidInput(ValueError):
    """Malformed or inconsistent ι-complex data."""


class NotLocal(ValueError):
    """Localized homology does not have rank one."""


class IotaComplex:
    """Free graded complex over F2[U] with a chain map ι.

    ``d`` has degree -1 and ``iota`` degree 0, both with row and column
    gradings equal to ``gradings``.  ``h_sq`` is an optional degree +1 map with
    ``ι² + 1 = d h_sq + h_sq d``.
    """

    def __init__(
        self,
        names: Sequence[str],
        gradings: Sequence,
        d: MonomialMatrix,
        iota: MonomialMatrix,
        h_sq: MonomialMatrix | None = None,
        name: str = "",
    ):
        self.names = tuple(str(x) for x in names)
        self.gradings = tuple(to_grading(g) for g in gradings)
        self.name = name
        n = len(self.names)
        if len(self.gradings) != n:
            raise InvalidInput("names and gradings differ in length")
        if len(set(self.names)) != n:
            raise InvalidInput("generator names are not unique")
        for label, m, deg in (("d", d, -1), ("iota", iota, 0), ("h_sq", h_sq, 1)):
            if m is None:
                continue
            if m.rows != self.gradings or m.cols != self.gradings:
                raise InvalidInput(f"{label} does not act on the generators")
            if m.degree != deg:
                raise InvalidInput(f"{label} must have degree {deg}, got {m.degree}")
        if n:
            levels(self.gradings)
        self.d = d
        self.iota = iota
        self.h_sq = h_sq

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_maps(
        cls,
        generators: Sequence[tuple[str, object]],
        d: Mapping[str, Iterable[str]] | None = None,
        iota: Mapping[str, Iterable[str]] | None = None,
        name: str = "",
    ) -> "IotaComplex":
        """Build from images of generators; exponents are filled in from gradings.

        ``d`` maps a generator to the generators appearing in its boundary.
        ``iota`` defaults to the identity; listed generators override it.
        """
        names = [g for g, _ in generators]
        grs = [to_grading(gr) for _, gr in generators]
        index = {g: i for i, g in enumerate(names)}

        def build(images, degree, default_identity):
            sup = np.eye(len(names), dtype=np.uint8) if default_identity else np.zeros((len(names),) * 2, np.uint8)
            for src, tgts in (images or {}).items():
                c = index[src]
                sup[:, c] = 0
                for t in tgts:
                    sup[index[t], c] ^= 1
            return MonomialMatrix(grs, grs, degree, sup)

        try:
            return cls(names, grs, build(d, -1, False), build(iota, 0, True), name=name)
        except (KeyError, ValueError) as exc:
            if isinstance(exc, (InvalidInput, MixedCoset)):
                raise
            raise InvalidInput(str(exc)) from exc

    # -- derived data -------------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.names)

    @cached_property
    def homology(self) -> GradedModule:
        return homology(self.d)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def renamed(self, names: Sequence[str]) -> "IotaComplex":
        return IotaComplex(names, self.gradings, self.d, self.iota, self.h_sq, self.name)

    def with_witness(self) -> "IotaComplex":
        """Copy carrying an ``h_sq`` witness (solved for if absent)."""
        if self.h_sq is not None:
            return self
        h = solve_homotopy(self.d, self.iota @ self.iota + MonomialMatrix.identity(self.gradings))
        if h is None:
            raise InvalidInput("iota squared is not homotopic to the identity")
        return IotaComplex(self.names, self.gradings, self.d, self.iota, h, self.name)

    def same_data(self, other: "IotaComplex") -> bool:
        return (
            self.gradings == other.gradings
            and self.d == other.d
            and self.iota == other.iota
        )

    def __repr__(self) -> str:
        return f"IotaComplex({self.name or 'unnamed'}, {self.size} generators)"


def identity_complex() -> IotaComplex:
    """F[U] on one generator in grading -2 with ι = id."""
    return IotaComplex.from_maps([("1", -2)], name="identity")


# ---------------------------------------------------------------------------
# Linear systems in unknown maps


def positions(rows_lev: np.ndarray, cols_lev: np.ndarray, degree: int) -> np.ndarray:
    """Admissible (row, col) positions for a map of the given degree."""
    e = rows_lev[:, None] - cols_lev[None, :] - degree
    return np.argwhere((e >= 0) & (e % 2 == 0))


def bracket_operator(
    A: np.ndarray, B: np.ndarray, unknowns: np.ndarray, target_index: np.ndarray, n_targets: int
) -> np.ndarray:
    """GF(2) matrix of ``X -> A X + X B`` from admissible unknowns to target slots.

    ``target_index[r, c]`` is the equation number of position ``(r, c)`` or -1
    where no monomial of the target degree fits (those entries vanish).
    """
    M = np.zeros((n_targets, len(unknowns)), dtype=np.uint8)
    A = np.asarray(A, dtype=bool)
    B = np.asarray(B, dtype=bool)
    colsA = [np.flatnonzero(A[:, a]) for a in range(A.shape[1])]
    rowsB = [np.flatnonzero(B[b, :]) for b in range(B.shape[0])]
    for k, (a, b) in enumerate(unknowns):
        for r in colsA[a]:
            t = target_index[r, b]
            if t >= 0:
                M[t, k] ^= 1
        for c in rowsB[b]:
            t = target_index[a, c]
            if t >= 0:
                M[t, k] ^= 1
    return M


def _index_table(pos: np.ndarray, n: int) -> np.ndarray:
    T = -np.ones((n, n), dtype=np.int64)
    if len(pos):
        T[pos[:, 0], pos[:, 1]] = np.arange(len(pos))
    return T


def solve_homotopy(d: MonomialMatrix, rhs: MonomialMatrix) -> MonomialMatrix | None:
    """A degree ``rhs.degree + 1`` map H with ``dH + Hd = rhs``, or None."""
    lev = d.row_levels
    n = len(lev)
    if not rhs.support.any():
        return MonomialMatrix(d.rows, d.cols, rhs.degree + 1)
    unk = positions(lev, lev, rhs.degree + 1)
    tgt = positions(lev, lev, rhs.degree)
    M = bracket_operator(d.support, d.support, unk, _index_table(tgt, n), len(tgt))
    b = rhs.support[tgt[:, 0], tgt[:, 1]]
    x = _gf2.solve(M, b)
    if x is None:
        return None
    H = np.zeros((n, n), dtype=np.uint8)
    sel = unk[x.astype(bool)]
    H[sel[:, 0], sel[:, 1]] = 1
    return MonomialMatrix(d.rows, d.cols, rhs.degree + 1, H)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationReport:
    """Named failures, each with a human-readable witness."""

    failures: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def names(self) -> list[str]:
        return [n for n, _ in self.failures]


def validate(C: IotaComplex) -> ValidationReport:
    failures = []
    d, iota = C.d, C.iota
    n = C.size
    dd = _gf2.matmul(d.support, d.support)
    if dd.any():
        r, c = map(int, np.argwhere(dd)[0])
        failures.append(("d_squared", f"d^2 has a nonzero entry: {C.names[c]} -> {C.names[r]}"))
    comm = _gf2.matmul(iota.support, d.support) ^ _gf2.matmul(d.support, iota.support)
    if comm.any():
        r, c = map(int, np.argwhere(comm)[0])
        failures.append(("iota_chain_map", f"iota d + d iota is nonzero: {C.names[c]} -> {C.names[r]}"))
    defect = iota @ iota + MonomialMatrix.identity(C.gradings)
    if C.h_sq is not None:
        lhs = d @ C.h_sq + C.h_sq @ d
        if lhs != defect:
            r, c = map(int, np.argwhere(lhs.support ^ defect.support)[0])
            failures.append(("iota_squared_homotopic", f"stored witness fails at {C.names[c]} -> {C.names[r]}"))
    elif defect.support.any() and not dd.any():
        if solve_homotopy(d, defect) is None:
            failures.append(("iota_squared_homotopic", "no H solves dH + Hd = iota^2 + 1"))
    if not dd.any():
        rank = C.homology.rank if n else 0
        if rank != 1:
            failures.append(("local", f"localized homology has rank {rank}, expected 1"))
    return ValidationReport(tuple(failures))


def require_valid(C: IotaComplex) -> None:
    rep = validate(C)
    if not rep.ok:
        raise InvalidInput("; ".join(f"{k}: {w}" for k, w in rep.failures))


# ---------------------------------------------------------------------------
# Group operations


def _kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.kron(A.astype(np.uint8), B.astype(np.uint8)).astype(np.uint8)


def tensor(A: IotaComplex, B: IotaComplex) -> IotaComplex:
    """``(A ⊗ B)[-2]`` with ``ι = ι_A ⊗ ι_B``; generators in row-major order."""
    A = A.with_witness()
    B = B.with_witness()
    names = [f"{a}|{b}" for a in A.names for b in B.names]
    grs = [ga + gb + 2 for ga in A.gradings for gb in B.gradings]
    IA = np.eye(A.size, dtype=np.uint8)
    IB = np.eye(B.size, dtype=np.uint8)
    d = _kron(A.d.support, IB) ^ _kron(IA, B.d.support)
    iota = _kron(A.iota.support, B.iota.support)
    iotaB2 = _gf2.matmul(B.iota.support, B.iota.support)
    h = _kron(A.h_sq.support, iotaB2) ^ _kron(IA, B.h_sq.support)
    return IotaComplex(
        names,
        grs,
        MonomialMatrix(grs, grs, -1, d),
        MonomialMatrix(grs, grs, 0, iota),
        MonomialMatrix(grs, grs, 1, h),
        name=f"({A.name or 'A'})#({B.name or 'B'})",
    )


def tensor_power(A: IotaComplex, k: int) -> IotaComplex:
    if k < 1:
        return identity_complex()
    out = A
    for _ in range(k - 1):
        out = tensor(out, A)
    return out


def dual(A: IotaComplex) -> IotaComplex:
    """Dual complex: transpose d and ι, regrade ``x* = -gr(x) - 4``."""
    names = [a + "*" for a in A.names]
    grs = [-g - 4 for g in A.gradings]
    h = None
    if A.h_sq is not None:
        h = MonomialMatrix(grs, grs, 1, A.h_sq.support.T)
    return IotaComplex(
        names,
        grs,
        MonomialMatrix(grs, grs, -1, A.d.support.T),
        MonomialMatrix(grs, grs, 0, A.iota.support.T),
        h,
        name=f"dual({A.name or 'A'})",
    )


def reduce(A: IotaComplex) -> IotaComplex:
    """Cancel every unit entry of d, transporting ι through the cancellations.

    Each step picks the unit entry ``d y = x + ...`` with ``y`` of highest
    grading (then lowest index of ``y``, then of ``x``), removes ``x`` and
    ``y``, and replaces d by ``d + d(-, y) d(x, -)`` on the rest.  The chain
    homotopy equivalences ``f: C -> C'`` and ``g: C' -> C`` of each step are
    composed, and the new involution is ``f ι g``.
    """
    n = A.size
    if n == 0:
        return A
    _, lev = levels(A.gradings)
    S = A.d.support.astype(np.uint8).copy()
    alive = np.ones(n, dtype=bool)
    F = np.eye(n, dtype=np.uint8)  # C -> current, indexed by original generators
    G = np.eye(n, dtype=np.uint8)  # current -> C
    while True:
        unit = S.astype(bool) & (lev[:, None] == lev[None, :] - 1)
        unit &= alive[:, None] & alive[None, :]
        if not unit.any():
            break
        cand = np.argwhere(unit)
        x, y = min(((int(r), int(c)) for r, c in cand), key=lambda rc: (-lev[rc[1]], rc[1], rc[0]))
        col_y = S[:, y].copy()
        row_x = S[x, :].copy()
        col_y[x] = 0
        row_x[y] = 0
        S ^= np.outer(col_y, row_x).astype(np.uint8)
        # f sends x to the rest of d(y) and kills y; g sends z to z + d(x,z) y
        f_x = col_y
        F ^= np.outer(f_x, F[x, :]).astype(np.uint8)
        g_y = row_x
        G ^= np.outer(G[:, y], g_y).astype(np.uint8)
        alive[[x, y]] = False
        S[[x, y], :] = 0
        S[:, [x, y]] = 0
        F[[x, y], :] = 0
        G[:, [x, y]] = 0
    keep = np.flatnonzero(alive)
    if keep.size == n:
        return A
    iota = _gf2.matmul(_gf2.matmul(F, A.iota.support), G)
    grs = [A.gradings[i] for i in keep]
    sub = np.ix_(keep, keep)
    return IotaComplex(
        [A.names[i] for i in keep],
        grs,
        MonomialMatrix(grs, grs, -1, S[sub]),
        MonomialMatrix(grs, grs, 0, iota[sub]),
        name=A.name,
    )


def d_invariant(A: IotaComplex) -> Fraction:
    """Top grading of the free part of homology, plus 2."""
    H = A.homology
    if H.rank != 1:
        raise NotLocal(f"localized homology has rank {H.rank}")
    return H.free[0] + 2
