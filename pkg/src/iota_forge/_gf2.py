"""Dense GF(2) linear algebra on numpy arrays.

Rows are packed eight columns per byte so that a row operation is a single
vectorised XOR.  Everything here is exact; matrices are ``uint8`` 0/1 arrays
on the way in and out.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "as_bits",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "inverse",
    "matmul",
    "row_basis",
    "in_span",
]


def as_bits(M) -> np.ndarray:
    return (np.asarray(M, dtype=np.uint8) & 1).astype(np.uint8)


def matmul(A, B) -> np.ndarray:
    """Product over GF(2).  Uses float BLAS; exact while the inner size < 2**24."""
    A = np.asarray(A, dtype=np.float32)
    B = np.asarray(B, dtype=np.float32)
    return (np.rint(A @ B).astype(np.int64) & 1).astype(np.uint8)


def _pack(M: np.ndarray) -> np.ndarray:
    return np.packbits(M.astype(np.uint8), axis=1)


def _bit(P: np.ndarray, c: int) -> np.ndarray:
    return (P[:, c >> 3] >> (7 - (c & 7))) & 1


def rref(M, order: Sequence[int] | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    ``order`` is the sequence in which columns are tried as pivots (default
    left to right).  Returns the reduced matrix (nonzero rows first) and the
    pivot column of each of those rows.
    """
    M = as_bits(M)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    nrows, ncols = M.shape
    if nrows == 0 or ncols == 0:
        return M.copy(), []
    P = _pack(M)
    cols = range(ncols) if order is None else order
    pivots: list[int] = []
    r = 0
    for c in cols:
        if r == nrows:
            break
        col = _bit(P, c)
        below = np.flatnonzero(col[r:])
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            P[[r, p]] = P[[p, r]]
            col[[r, p]] = col[[p, r]]
        hit = np.flatnonzero(col)
        hit = hit[hit != r]
        if hit.size:
            P[hit] ^= P[r]
        pivots.append(int(c))
        r += 1
    out = np.unpackbits(P, axis=1, count=ncols)
    return out, pivots


def rank(M) -> int:
    return len(rref(M)[1])


def row_basis(M, order: Sequence[int] | None = None) -> np.ndarray:
    R, piv = rref(M, order)
    return R[: len(piv)]


def nullspace(M) -> np.ndarray:
    """Basis (as rows) of {x : M x = 0}."""
    M = as_bits(M)
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols, dtype=np.uint8)
    R, piv = rref(M)
    free = [c for c in range(ncols) if c not in set(piv)]
    N = np.zeros((len(free), ncols), dtype=np.uint8)
    for k, f in enumerate(free):
        N[k, f] = 1
        for i, p in enumerate(piv):
            if R[i, f]:
                N[k, p] = 1
    return N


def solve(M, b, order: Sequence[int] | None = None) -> np.ndarray | None:
    """One solution of ``M x = b`` with free variables set to zero, or None.

    Pivot columns are chosen following ``order``.
    """
    M = as_bits(M)
    b = as_bits(b).reshape(-1, 1)
    nrows, ncols = M.shape
    if ncols == 0:
        return np.zeros(0, dtype=np.uint8) if not b.any() else None
    aug = np.hstack([M, b])
    cols = list(range(ncols)) if order is None else list(order)
    R, piv = rref(aug, cols + [ncols])
    if ncols in piv:
        return None
    x = np.zeros(ncols, dtype=np.uint8)
    for i, p in enumerate(piv):
        x[p] = R[i, ncols]
    return x


def inverse(M) -> np.ndarray:
    M = as_bits(M)
    n = M.shape[0]
    R, piv = rref(np.hstack([M, np.eye(n, dtype=np.uint8)]), range(n))
    if piv != list(range(n)):
        raise np.linalg.LinAlgError("singular over GF(2)")
    return R[:, n:]


def in_span(rows, v) -> bool:
    rows = as_bits(rows)
    if rows.shape[0] == 0:
        return not as_bits(v).any()
    return rank(np.vstack([rows, as_bits(v).reshape(1, -1)])) == rank(rows)
