"""Self-local equivalences, the connected complex and its invariants.

All maps here are grading-preserving, so a map is its GF(2) support and
composition is the GF(2) product of supports.  The F[U]-rank of such a map is
the GF(2) rank of its support, and its kernel is the saturated submodule with
the GF(2) null space of the support.

The self-local equivalences form ``1 + J`` where ``J`` is an ideal of the
algebra ``W`` of chain maps commuting with ι up to homotopy, namely the kernel
of the character ``φ: W -> F2`` recording the action on localized homology.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from . import _gf2
from .involutive import _free_functional, correction_terms
from .iota_complex import (
    IotaComplex,
    InvalidInput,
    _index_table,
    bracket_operator,
    d_invariant,
    positions,
    reduce,
    require_valid,
    solve_homotopy,
    validate,
)
from .ufu_algebra import GradedModule, MonomialMatrix, homology, kernel_basis, levels, saturated_basis

__all__ = [
    "SearchCapExceeded",
    "AdmissibleSpace",
    "SelfLocalEquivalence",
    "ConnectedComplex",
    "ConnectedReport",
    "admissible_space",
    "maximal_self_local_equivalence",
    "connected_complex",
    "connected_homology",
    "omega",
    "filtration_member",
    "infinite_order_certificate",
    "Verdict",
    "connected_report",
    "DEFAULT_CAP",
    "DEFAULT_RESTARTS",
]

DEFAULT_CAP = 20
DEFAULT_RESTARTS = 64
_CHUNK = 1 << 14


class SearchCapExceeded(RuntimeError):
    """No certified maximal self-local equivalence was found."""


# ---------------------------------------------------------------------------
# The admissible space


@dataclass(frozen=True, eq=False)
class AdmissibleSpace:
    """Self-local equivalences of ``C`` as the affine space ``id + span(directions)``.

    ``directions`` are n x n GF(2) supports spanning ``J``; ``W`` is spanned
    by the identity together with ``J``.
    """

    complex: IotaComplex
    directions: np.ndarray  # (m, n, n)

    @property
    def dim(self) -> int:
        return int(self.directions.shape[0])

    @property
    def basepoint(self) -> np.ndarray:
        return np.eye(self.complex.size, dtype=np.uint8)

    def member(self, coeffs: Iterable[int]) -> np.ndarray:
        f = self.basepoint.copy()
        for c, J in zip(coeffs, self.directions):
            if c:
                f ^= J
        return f

    def members(self) -> Iterator[np.ndarray]:
        if self.dim > DEFAULT_CAP:
            raise SearchCapExceeded(f"space of dimension {self.dim} is too large to list")
        for i in range(1 << self.dim):
            yield self.member((i >> k) & 1 for k in range(self.dim))

    def as_map(self, support: np.ndarray) -> MonomialMatrix:
        g = self.complex.gradings
        return MonomialMatrix(g, g, 0, support)


def admissible_space(A: IotaComplex) -> AdmissibleSpace:
    """Solve ``fd + df = 0`` and ``fι + ιf = dH + Hd`` jointly and project to f.

    The unknowns are the admissible entries of H (eliminated first) and of f.
    Equations whose leading unknown is an entry of f constrain f alone; their
    solutions form ``W``.  ``J`` is the part of ``W`` acting by zero on
    localized homology.
    """
    n = A.size
    _, lev = levels(A.gradings)
    d, iota = A.d.support, A.iota.support
    P0 = positions(lev, lev, 0)
    P1 = positions(lev, lev, 1)
    Tm1 = positions(lev, lev, -1)
    T0 = P0
    k0, k1 = len(P0), len(P1)
    top = bracket_operator(d, d, P0, _index_table(Tm1, n), len(Tm1))
    mid_f = bracket_operator(iota, iota, P0, _index_table(T0, n), len(T0))
    mid_h = bracket_operator(d, d, P1, _index_table(T0, n), len(T0))
    M = np.zeros((len(Tm1) + len(T0), k1 + k0), dtype=np.uint8)
    M[: len(Tm1), k1:] = top
    M[len(Tm1):, :k1] = mid_h
    M[len(Tm1):, k1:] = mid_f
    R, piv = _gf2.rref(M)
    rows = [i for i, p in enumerate(piv) if p >= k1]
    cons = R[rows, k1:] if rows else np.zeros((0, k0), dtype=np.uint8)
    Wvecs = _gf2.nullspace(cons) if cons.shape[0] else np.eye(k0, dtype=np.uint8)
    # character: coefficient of the localized generator in f(z0), read by w
    w = _free_functional(A)
    z0 = _localized_cycle(A, w)
    phi_pos = (w[P0[:, 0]] & z0[P0[:, 1]]).astype(np.uint8)
    phi = (Wvecs.astype(np.int64) @ phi_pos) % 2
    ident = np.zeros(k0, dtype=np.uint8)
    diag = P0[:, 0] == P0[:, 1]
    ident[diag] = 1
    # J = ker φ inside W; fix up the basis so every vector has φ = 0
    J = []
    for v, p in zip(Wvecs, phi):
        J.append(v ^ ident if p else v)
    J = _gf2.row_basis(np.array(J, dtype=np.uint8)) if J else np.zeros((0, k0), np.uint8)
    mats = np.zeros((J.shape[0], n, n), dtype=np.uint8)
    for i, v in enumerate(J):
        sel = P0[v.astype(bool)]
        mats[i, sel[:, 0], sel[:, 1]] = 1
    return AdmissibleSpace(A, mats)


def _localized_cycle(A: IotaComplex, w: np.ndarray) -> np.ndarray:
    Z = _gf2.nullspace(A.d.support)
    for z in Z:
        if int(z.astype(np.int64) @ w) % 2:
            return z
    raise InvalidInput("complex at U = 1 has no homology")


# ---------------------------------------------------------------------------
# Batched rank over GF(2)


def _batched_rref(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ranks and row-reduced forms of a stack of square 0/1 matrices."""
    B, n, _ = mats.shape
    R = np.packbits(mats, axis=2)
    used = np.zeros((B, n), dtype=bool)
    rank = np.zeros(B, dtype=np.int64)
    ar = np.arange(B)
    for c in range(n):
        bit = ((R[:, :, c >> 3] >> (7 - (c & 7))) & 1).astype(bool)
        cand = bit & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        p = cand.argmax(axis=1)
        prow = R[ar, p]
        elim = bit & has[:, None]
        elim[ar, p] = False
        R ^= np.where(elim[:, :, None], prow[:, None, :], 0).astype(np.uint8)
        used[ar[has], p[has]] = True
        rank += has
    return rank, R


def _row_space_keys(R: np.ndarray) -> list[bytes]:
    """Canonical byte keys of reduced row spaces (rows sorted)."""
    B, n, nb = R.shape
    if nb <= 8:
        pad = np.zeros((B, n, 8), dtype=np.uint8)
        pad[:, :, :nb] = R
        vals = pad.view(">u8").reshape(B, n)
        vals = np.sort(vals, axis=1)
        return [row.tobytes() for row in vals]
    return [b"".join(sorted(bytes(r) for r in mat)) for mat in R]


def _threads() -> int:
    env = os.environ.get("IOTA_FORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Maximal self-local equivalences


@dataclass(frozen=True, eq=False)
class SelfLocalEquivalence:
    """A self-local equivalence with its homotopy witness and kernel basis."""

    f: MonomialMatrix
    homotopy: MonomialMatrix
    certificate: bool
    mode: str

    @cached_property
    def kernel(self) -> MonomialMatrix:
        return kernel_basis(self.f)

    @property
    def rank(self) -> int:
        return _gf2.rank(self.f.support)


def _kernel_key(f: np.ndarray, gradings) -> tuple:
    K = kernel_basis(MonomialMatrix(gradings, gradings, 0, f))
    return tuple(tuple(int(x) for x in col) for col in K.support.T)


def _exhaustive(space: AdmissibleSpace) -> np.ndarray:
    m, n = space.dim, space.complex.size
    flat = space.directions.reshape(m, n * n).astype(np.float32)
    ident = np.eye(n, dtype=np.uint8).reshape(-1)
    total = 1 << m
    shifts = np.arange(m, dtype=np.int64)

    def run(start: int):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.float32)
        sup = (np.rint(bits @ flat).astype(np.int64) & 1).astype(np.uint8) ^ ident
        ranks, R = _batched_rref(sup.reshape(-1, n, n))
        low = ranks.min()
        sel = np.flatnonzero(ranks == low)
        keys = _row_space_keys(R[sel])
        first: dict[bytes, int] = {}
        for k, i in zip(keys, idx[sel]):
            first.setdefault(k, int(i))
        return int(low), first

    starts = range(0, total, _CHUNK)
    workers = _threads()
    if workers > 1 and total > _CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    best = min(r for r, _ in results)
    merged: dict[bytes, int] = {}
    for r, first in results:
        if r != best:
            continue
        for k, i in first.items():
            if k not in merged or i < merged[k]:
                merged[k] = i
    gradings = space.complex.gradings
    candidates = []
    for i in merged.values():
        f = space.member((i >> k) & 1 for k in range(m))
        candidates.append((_kernel_key(f, gradings), i, f))
    candidates.sort(key=lambda t: (t[0], t[1]))
    return candidates[0][2]


def _is_nilpotent_algebra(basis: list[np.ndarray], V: np.ndarray) -> bool:
    """Whether the span of ``basis`` acts nilpotently on the column space ``V``."""
    n = V.shape[0]
    seen = V.shape[1] + 1
    while V.shape[1]:
        imgs = np.hstack([_gf2.matmul(x, V) for x in basis]) if basis else np.zeros((n, 0), np.uint8)
        V = _gf2.row_basis(imgs.T).T if imgs.size else np.zeros((n, 0), np.uint8)
        if V.shape[1] >= seen:
            return False
        seen = V.shape[1]
    return True


def _fitting_idempotent(x: np.ndarray) -> np.ndarray | None:
    """Projection onto the stable image of ``x`` along its stable kernel.

    It is a power of ``x``: on the stable image ``x`` is invertible of finite
    order, so a high enough power that is a multiple of that order is the
    identity there and zero on the stable kernel.
    """
    n = x.shape[0]
    p = x.copy()
    for _ in range(n):
        p = _gf2.matmul(p, x)
    if not p.any():
        return None
    e = p
    for _ in range(1 << min(n, 20)):
        sq = _gf2.matmul(e, e)
        if np.array_equal(sq, e):
            return e
        e = _gf2.matmul(e, p)
    raise AssertionError("failed to find an idempotent power")


def _algebraic(space: AdmissibleSpace, seed: int, restarts: int) -> tuple[np.ndarray, bool]:
    """Shrink an idempotent self-local equivalence until ``eJe`` is nilpotent.

    Starting from ``e = id``: if the algebra ``eJe`` acts nilpotently on
    ``im e`` then every self-local equivalence ``g`` has ``e g e`` invertible
    on ``im e``, so ``rank g >= rank e`` and ``e`` is maximal.  Otherwise a
    non-nilpotent ``x`` in ``eJe`` gives a Fitting idempotent ``ε`` in ``J``
    and ``e + ε`` is a self-local equivalence of smaller rank.
    """
    n = space.complex.size
    rng = np.random.default_rng(seed)
    e = np.eye(n, dtype=np.uint8)
    dirs = list(space.directions)
    while True:
        sandwich = [_gf2.matmul(_gf2.matmul(e, J), e) for J in dirs]
        sandwich = [x for x in sandwich if x.any()]
        if sandwich:
            flat = _gf2.row_basis(np.array([x.reshape(-1) for x in sandwich]))
            basis = [v.reshape(n, n) for v in flat]
        else:
            basis = []
        V = _gf2.row_basis(e.T).T
        if _is_nilpotent_algebra(basis, V):
            return e, True
        eps = None
        for x in _candidates(basis, rng, restarts):
            eps = _fitting_idempotent(x)
            if eps is not None:
                break
        if eps is None:
            return e, False
        e = e ^ eps


def _candidates(basis: list[np.ndarray], rng: np.random.Generator, budget: int) -> Iterator[np.ndarray]:
    pool = list(basis)
    pool += [_gf2.matmul(a, b) for a in basis[:8] for b in basis[:8]]
    tried = 0
    for x in basis:
        if tried >= budget:
            return
        tried += 1
        yield x
    while tried < budget and pool:
        coeffs = rng.integers(0, 2, size=len(pool))
        if not coeffs.any():
            continue
        x = np.zeros_like(pool[0])
        for c, p in zip(coeffs, pool):
            if c:
                x ^= p
        tried += 1
        yield x


def maximal_self_local_equivalence(
    A: IotaComplex,
    mode: str = "exhaustive",
    seed: int = 0,
    cap: int = DEFAULT_CAP,
    restarts: int = DEFAULT_RESTARTS,
    require_certificate: bool = False,
    space: AdmissibleSpace | None = None,
) -> SelfLocalEquivalence:
    """A self-local equivalence of minimal rank, i.e. with maximal kernel.

    ``exhaustive`` lists ``1 + J`` when ``dim J <= cap`` and keeps the
    minimal rank, breaking ties by the smallest echelon kernel basis; above
    the cap it falls back to the algebraic search.  ``greedy`` always uses
    the algebraic search.  Minimal rank is the same as maximality: if ``f``
    is maximal and ``g`` arbitrary then ``ker(f g f) = ker f``, so
    ``rank f <= rank g``.
    """
    if mode not in ("exhaustive", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    if space is None:
        space = admissible_space(A)
    if mode == "exhaustive" and space.dim <= cap:
        f, cert, used = _exhaustive(space), True, "exhaustive"
    else:
        (f, cert), used = _algebraic(space, seed, restarts), "greedy"
    if require_certificate and not cert:
        raise SearchCapExceeded("could not certify maximality")
    F = space.as_map(f)
    H = solve_homotopy(A.d, F @ A.iota + A.iota @ F)
    if H is None:
        raise AssertionError("member of the admissible space lacks a homotopy witness")
    return SelfLocalEquivalence(F, H, cert, used)


# ---------------------------------------------------------------------------
# Connected complex


@dataclass(frozen=True, eq=False)
class ConnectedComplex:
    complex: IotaComplex
    equivalence: SelfLocalEquivalence

    @property
    def certificate(self) -> bool:
        return self.equivalence.certificate


def _image_complex(A: IotaComplex, f: np.ndarray) -> IotaComplex:
    basis, piv = saturated_basis(A.gradings, f.T)
    Bm = basis.support
    r = Bm.shape[1]
    coords = lambda M: M[piv, :]  # noqa: E731  (pivot rows are coordinates)
    fB = _gf2.matmul(f, Bm)
    if not np.array_equal(_gf2.matmul(Bm, coords(fB)), fB):
        raise AssertionError("image basis does not span f(C)")
    Mf = coords(fB)
    try:
        Minv = _gf2.inverse(Mf)
    except np.linalg.LinAlgError:
        raise InvalidInput("f is not injective on its image; it is not maximal") from None
    dB = _gf2.matmul(A.d.support, Bm)
    iB = _gf2.matmul(f, _gf2.matmul(A.iota.support, Bm))
    for label, M in (("d", dB), ("iota", iB)):
        if not np.array_equal(_gf2.matmul(Bm, coords(M)), M):
            raise AssertionError(f"{label} does not preserve the image of f")
    grs = basis.cols
    names = [A.names[p] for p in piv]
    d_new = MonomialMatrix(grs, grs, -1, coords(dB))
    iota_new = MonomialMatrix(grs, grs, 0, _gf2.matmul(coords(iB), Minv))
    if r == 0:
        raise InvalidInput("image of f is zero")
    return IotaComplex(names, grs, d_new, iota_new, name=f"conn({A.name})" if A.name else "conn")


def connected_complex(A: IotaComplex, mode: str = "exhaustive", seed: int = 0, **kw) -> ConnectedComplex:
    """``(im f, f ι (f|im f)^{-1})`` for a maximal self-local equivalence f."""
    eq = maximal_self_local_equivalence(A, mode=mode, seed=seed, **kw)
    C = _image_complex(A, eq.f.support)
    rep = validate(C)
    if not rep.ok:
        raise AssertionError(f"connected complex is not an ι-complex: {rep.failures}")
    return ConnectedComplex(C, eq)


def connected_homology(A: IotaComplex, mode: str = "exhaustive", seed: int = 0, **kw) -> GradedModule:
    """Torsion of the homology of the connected complex, moved up by one."""
    return connected_complex(A, mode, seed, **kw).complex.homology.torsion().shifted(1)


def omega(A: IotaComplex, **kw) -> int:
    return connected_homology(A, **kw).max_tower_length()


def filtration_member(A: IotaComplex, P: set[int] | frozenset[int] | None, **kw) -> bool:
    """Whether every tower length of the connected homology lies in ``P``.

    ``None`` stands for all positive integers.
    """
    if P is None:
        return True
    return all(n in P for _, n in connected_homology(A, **kw).towers)


@dataclass(frozen=True)
class Verdict:
    kind: str  # "rank_one_case", "d_negative_case" or "inconclusive"
    d_negative: bool
    rank_one_shape: str | None = None


def infinite_order_certificate(A: IotaComplex, **kw) -> Verdict:
    """Sufficient conditions for infinite order in the local equivalence group."""
    lo, d, hi = correction_terms(A)
    Hc = connected_homology(A, **kw)
    d_neg = all(a < d for a, _ in A.homology.towers) and lo < d
    if Hc.torsion_dimension() == 1:
        (a, _), = Hc.towers
        if a == d - 1 and d == hi and lo == d - 2:
            shape = "d=dbar=dlow+2"
        elif lo == d and hi == d + 2:
            shape = "dlow=d=dbar-2"
        else:
            shape = "unexpected"
        return Verdict("rank_one_case", d_neg, shape)
    if d_neg:
        return Verdict("d_negative_case", True)
    return Verdict("inconclusive", False)


# ---------------------------------------------------------------------------
# Report


@dataclass(frozen=True)
class ConnectedReport:
    d_lower: Fraction
    d: Fraction
    d_upper: Fraction
    omega: int
    towers: tuple[tuple[Fraction, int], ...]
    certificate: bool
    timings: dict = field(default_factory=dict, compare=False)


def connected_report(
    A: IotaComplex,
    mode: str = "exhaustive",
    seed: int = 0,
    cap: int = DEFAULT_CAP,
    restarts: int = DEFAULT_RESTARTS,
    clock=None,
) -> ConnectedReport:
    """Validate, reduce, then compute correction terms and connected homology."""
    timings: dict[str, float] = {}

    def tick(label, t0):
        if clock is not None:
            timings[label] = clock() - t0

    t = clock() if clock else 0.0
    require_valid(A)
    tick("validate", t)
    t = clock() if clock else 0.0
    R = reduce(A)
    tick("reduce", t)
    t = clock() if clock else 0.0
    lo, d, hi = correction_terms(R)
    tick("correction_terms", t)
    t = clock() if clock else 0.0
    cc = connected_complex(R, mode=mode, seed=seed, cap=cap, restarts=restarts)
    Hc = cc.complex.homology.torsion().shifted(1)
    tick("connected", t)
    return ConnectedReport(lo, d, hi, Hc.max_tower_length(), Hc.towers, cc.certificate, timings)
