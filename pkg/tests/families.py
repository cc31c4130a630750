"""Random and enumerated ι-complexes shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from iota_forge.iota_complex import IotaComplex, dual, validate
from iota_forge.ufu_algebra import MonomialMatrix


def _admissible(grs, degree):
    g = np.asarray(grs)
    diff = g[:, None] - g[None, :] - degree
    return (diff >= 0) & (diff % 2 == 0)


def random_differential(rng: np.random.Generator, max_gens: int = 10, max_exp: int = 4, tries: int = 200):
    """A degree -1 map with d^2 = 0, built from random entries with exponents at most ``max_exp``."""
    for _ in range(tries):
        n = int(rng.integers(1, max_gens + 1))
        grs = sorted((int(x) for x in rng.integers(-2 * max_exp - 2, 1, size=n)), reverse=True)
        ok = _admissible(grs, -1)
        diff = np.asarray(grs)[:, None] - np.asarray(grs)[None, :] + 1
        ok &= diff <= 2 * max_exp
        S = np.zeros((n, n), dtype=np.uint8)
        cols = list(range(n))
        rng.shuffle(cols)
        for c in cols:
            for r in np.flatnonzero(ok[:, c]):
                if rng.random() < 0.35:
                    S[r, c] = 1
                    if (S.astype(np.int64) @ S % 2).any():
                        S[r, c] = 0
        if S.any() or rng.random() < 0.2:
            return MonomialMatrix(grs, grs, -1, S)
    raise RuntimeError("no differential found")


def random_iota_complex(rng: np.random.Generator, max_gens: int = 6, tries: int = 20000) -> IotaComplex:
    """Rejection-sample a valid ι-complex on at most ``max_gens`` generators.

    An odd number of generators is needed for rank one at ``U = 1``.  ι is a
    grading-preserving transposition pattern plus random extra entries; about
    a third of the samples are dualized so that d̄ > d occurs as often as d̲ < d.
    """
    sizes = [k for k in (1, 3, 5) if k <= max_gens]
    n = int(rng.choice(sizes, p=_size_weights(sizes)))
    for _ in range(tries):
        grs = sorted([-2] + [-2 - int(x) for x in rng.integers(0, 7, size=n - 1)], reverse=True)
        okd = _admissible(grs, -1)
        oki = _admissible(grs, 0) & ~np.eye(n, dtype=bool)
        d = (rng.random((n, n)) < 0.5).astype(np.uint8) * okd
        if (d.astype(np.int64) @ d % 2).any():
            continue
        perm = np.arange(n)
        for g in set(grs):
            idx = [i for i in range(n) if grs[i] == g]
            if len(idx) >= 2 and rng.random() < 0.8:
                a, b = rng.choice(idx, size=2, replace=False)
                perm[a], perm[b] = perm[b], perm[a]
        iota = np.eye(n, dtype=np.uint8)[perm] ^ ((rng.random((n, n)) < 0.3) & oki).astype(np.uint8)
        try:
            C = IotaComplex([f"g{i}" for i in range(n)], grs, MonomialMatrix(grs, grs, -1, d), MonomialMatrix(grs, grs, 0, iota))
        except ValueError:
            continue
        if validate(C).ok:
            return dual(C).renamed(C.names) if rng.random() < 1 / 3 else C
    raise RuntimeError("no valid complex found")


def _size_weights(sizes):
    w = np.array([{1: 1, 3: 4, 5: 5}[k] for k in sizes], dtype=float)
    return w / w.sum()


def _grading_involutions(grs):
    """Involutive permutations of the generators that preserve gradings."""
    n = len(grs)

    def extend(perm, i):
        if i == n:
            yield tuple(perm)
            return
        if perm[i] != -1:
            yield from extend(perm, i + 1)
            return
        perm[i] = i
        yield from extend(perm, i + 1)
        perm[i] = -1
        for j in range(i + 1, n):
            if perm[j] == -1 and grs[j] == grs[i]:
                perm[i], perm[j] = j, i
                yield from extend(perm, i + 1)
                perm[i] = perm[j] = -1

    yield from extend([-1] * n, 0)


def enumerate_family(max_gens: int = 5, grading_choices=(-2, -3, -4)):
    """Exhaustive family: top generator at -2, all differentials, and ι a
    grading-preserving involutive permutation plus at most one extra entry."""
    for n in range(1, max_gens + 1, 2):
        for rest in itertools.combinations_with_replacement(grading_choices, n - 1):
            grs = [-2] + sorted(rest, reverse=True)
            okd = np.argwhere(_admissible(grs, -1))
            oki = [tuple(p) for p in np.argwhere(_admissible(grs, 0) & ~np.eye(n, dtype=bool))]
            for dbits in itertools.product((0, 1), repeat=len(okd)):
                d = np.zeros((n, n), dtype=np.uint8)
                for (r, c), b in zip(okd, dbits):
                    d[r, c] = b
                di = d.astype(np.int64)
                if (di @ di % 2).any() or n - 2 * _rank(d) != 1:
                    continue
                for perm in _grading_involutions(grs):
                    for extra in [None] + oki:
                        iota = np.eye(n, dtype=np.uint8)[list(perm)]
                        if extra is not None:
                            iota[extra] ^= 1
                        ii = iota.astype(np.int64)
                        if ((ii @ di + di @ ii) % 2).any():
                            continue
                        C = IotaComplex(
                            [f"g{i}" for i in range(n)], grs,
                            MonomialMatrix(grs, grs, -1, d), MonomialMatrix(grs, grs, 0, iota),
                        )
                        if validate(C).ok:
                            yield C


def _rank(M):
    from iota_forge import _gf2

    return _gf2.rank(M) if M.any() else 0
