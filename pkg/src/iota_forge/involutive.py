"""Involutive mapping cone and the correction terms d̲, d, d̄."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _gf2
from .iota_complex import IotaComplex, NotLocal, d_invariant
from .ufu_algebra import GradedModule, GradedSlices, MonomialMatrix, homology, levels

__all__ = [
    "ParityViolation",
    "InvolutiveCone",
    "involutive_cone",
    "correction_terms",
]


class ParityViolation(ValueError):
    """The cone homology does not have the two expected towers."""


@dataclass(frozen=True)
class InvolutiveCone:
    """Cone of ``Q(1 + ι)``.

    Generators are ``x`` in grading ``gr(x) + 1`` (first half) followed by
    ``Qx`` in grading ``gr(x)``.  ``q`` is the action of Q.
    """

    names: tuple[str, ...]
    gradings: tuple[Fraction, ...]
    d: MonomialMatrix
    q: MonomialMatrix

    @property
    def homology(self) -> GradedModule:
        return homology(self.d)


def involutive_cone(A: IotaComplex) -> InvolutiveCone:
    n = A.size
    grs = tuple(g + 1 for g in A.gradings) + A.gradings
    names = A.names + tuple("Q" + x for x in A.names)
    S = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    S[:n, :n] = A.d.support
    S[n:, n:] = A.d.support
    S[n:, :n] = A.iota.support ^ np.eye(n, dtype=np.uint8)
    Q = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    Q[n:, :n] = np.eye(n, dtype=np.uint8)
    return InvolutiveCone(names, grs, MonomialMatrix(grs, grs, -1, S), MonomialMatrix(grs, grs, -1, Q))


def correction_terms(A: IotaComplex, method: str = "parity") -> tuple[Fraction, Fraction, Fraction]:
    """Return ``(d̲, d, d̄)``.

    ``method`` selects how the two infinite towers of the cone are told apart:

    ``"parity"``
        The tower outside the image of Q sits in gradings of parity ``d + 1``
        and the other one in parity ``d``.
    ``"qtest"``
        Decide ``U^n x ∉ Im Q`` for all n, and ``U^m x ∈ Im Q`` for some m,
        directly on graded pieces of the cone.
    ``"fast"``
        Only for complexes whose homology lives in one parity: read the
        towers off ``ker(1 + ι_*)`` and ``coker(1 + ι_*)``.
    """
    d = d_invariant(A)
    if method == "parity":
        lo, hi = _by_parity(A, d)
    elif method == "qtest":
        lo, hi = _by_qtest(A)
    elif method == "fast":
        lo, hi = _by_fast_path(A, d)
    else:
        raise ValueError(f"unknown method {method!r}")
    if (d - lo) % 2 or (hi - d) % 2 or not lo <= d <= hi:
        raise ParityViolation(f"correction terms {lo}, {d}, {hi} violate parity or order")
    return lo, d, hi


def _by_parity(A: IotaComplex, d: Fraction) -> tuple[Fraction, Fraction]:
    H = involutive_cone(A).homology
    if H.rank != 2:
        raise NotLocal(f"cone homology has rank {H.rank}, expected 2")
    low = [g for g in H.free if (g - d - 1) % 2 == 0]
    up = [g for g in H.free if (g - d) % 2 == 0]
    if len(low) != 1 or len(up) != 1:
        raise ParityViolation(f"cone towers at {list(H.free)} do not split by parity around d = {d}")
    return low[0] + 1, up[0] + 2


class _Pieces:
    """Cycles and boundaries of a complex, one graded piece at a time."""

    def __init__(self, S: np.ndarray, lev: np.ndarray):
        self.S = S
        self.sl = GradedSlices(lev)
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def dim(self, g: int) -> int:
        return self.sl.basis(g).size

    def cycles(self, g: int) -> np.ndarray:
        return self._get(g)[0]

    def boundaries(self, g: int) -> np.ndarray:
        return self._get(g)[1]

    def _get(self, g: int):
        if g not in self._cache:
            size = self.dim(g)
            D = self.sl.map(self.S, g, -1)
            Z = _gf2.nullspace(D) if D.shape[0] else np.eye(size, dtype=np.uint8)
            Din = self.sl.map(self.S, g + 1, -1)
            B = _gf2.row_basis(Din.T) if Din.size else np.zeros((0, size), dtype=np.uint8)
            self._cache[g] = (Z, B)
        return self._cache[g]

    def push(self, vecs: np.ndarray, g: int, n: int) -> np.ndarray:
        """Apply ``U^n`` to row vectors in the piece at ``g``."""
        if vecs.shape[0] == 0:
            return np.zeros((0, self.dim(g - 2 * n)), dtype=np.uint8)
        return _gf2.matmul(vecs, self.sl.u_map(g, n).T)


def _span_grows(base: np.ndarray, extra: np.ndarray) -> bool:
    if extra.shape[0] == 0:
        return False
    if base.shape[0] == 0:
        return bool(extra.any())
    return _gf2.rank(np.vstack([base, extra])) > _gf2.rank(base)


def _by_qtest(A: IotaComplex) -> tuple[Fraction, Fraction]:
    cone = involutive_cone(A)
    base, lev = levels(cone.gradings)
    H = cone.homology
    T = H.torsion_dimension() + 1
    bottom = int(lev.min()) - 2 * T - 2
    pieces = _Pieces(cone.d.support, lev)
    qsup = cone.q.support
    sl = pieces.sl

    def im_q(g):
        Zup = pieces.cycles(g + 1)
        Qm = sl.map(qsup, g + 1, -1)
        img = _gf2.matmul(Zup, Qm.T) if Zup.shape[0] and Qm.size else np.zeros((0, pieces.dim(g)), np.uint8)
        stacked = np.vstack([pieces.boundaries(g), img])
        return _gf2.row_basis(stacked) if stacked.size else stacked

    def depth(g):
        n = (g - bottom) // 2 + 1
        return max(n, 0)

    top = int(lev.max())
    lower = upper = None
    for g in range(top, bottom - 1, -1):
        Z = pieces.cycles(g)
        if Z.shape[0] == 0:
            continue
        n = depth(g)
        h = g - 2 * n
        pushed = pieces.push(Z, g, n)
        if lower is None and _span_grows(im_q(h), pushed):
            lower = base + g + 1
        if upper is None:
            # cycles whose deep U-power lies in Im Q, tested for being non-torsion
            Iq = im_q(h)
            coords = _quotient_coords(Iq, pushed) if Iq.shape[0] else pushed
            K = _gf2.matmul(_gf2.nullspace(coords.T), Z)
            if _span_grows(pieces.boundaries(h), pieces.push(K, g, n)):
                upper = base + g + 2
        if lower is not None and upper is not None:
            break
    if lower is None or upper is None:
        raise NotLocal("cone has fewer than two infinite towers")
    return lower, upper


def _quotient_coords(sub: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Coordinates of ``vecs`` in ``V / span(sub)`` (rows)."""
    R, piv = _gf2.rref(sub)
    reduced = vecs.copy()
    for i, p in enumerate(piv):
        hit = reduced[:, p].astype(bool)
        reduced[hit] ^= R[i]
    free = [c for c in range(sub.shape[1]) if c not in set(piv)]
    return reduced[:, free]


def _by_fast_path(A: IotaComplex, d: Fraction) -> tuple[Fraction, Fraction]:
    base, lev = levels(A.gradings)
    H = A.homology
    parities = {(g - d) % 2 for g in H.free} | {(a - d) % 2 for a, _ in H.towers}
    if parities != {0}:
        raise ParityViolation("homology is not supported in a single parity")
    pieces = _Pieces(A.d.support, lev)
    one = (np.eye(A.size, dtype=np.uint8) ^ A.iota.support)
    w = _free_functional(A)
    top = int(lev.max())
    bottom = int((d - 2 - base).numerator) - 2 * H.torsion_dimension() - 2
    for g in range(top, bottom - 1, -1):
        if (base + g - d) % 2:
            continue
        Z = pieces.cycles(g)
        if Z.shape[0] == 0:
            continue
        basis = pieces.sl.basis(g)
        img = _gf2.matmul(Z, pieces.sl.map(one, g, 0).T)
        # z with (1 + ι) z a boundary
        B = pieces.boundaries(g)
        coords = _quotient_coords(B, img) if B.shape[0] else img
        K = _gf2.nullspace(coords.T)
        if K.shape[0] == 0:
            continue
        cand = _gf2.matmul(K, Z)
        if (cand.astype(np.int64) @ w[basis] % 2).any():
            return base + g + 2, d
    raise NotLocal("no non-torsion class is fixed by the involution")


def _free_functional(A: IotaComplex) -> np.ndarray:
    """Cocycle at ``U = 1`` pairing nontrivially with the non-torsion class."""
    S = A.d.support
    Z = _gf2.nullspace(S)
    W = _gf2.nullspace(S.T)
    for w in W:
        if (Z.astype(np.int64) @ w % 2).any():
            return w
    raise NotLocal("complex at U = 1 has no homology")
