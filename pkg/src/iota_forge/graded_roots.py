"""Graded roots, symmetric and monotone roots, the monotone subroot, and realization.

Vertex gradings are module gradings: an edge joins vertices two apart and
``U`` moves one step down.  A root is stored as a finite tree whose unique
vertex without a lower neighbour (``stem_bottom``) continues downward forever.
The order of the vertex list fixes the planar order of the leaves.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .iota_complex import IotaComplex
from .ufu_algebra import GradedModule, MixedCoset, MonomialMatrix, levels, to_grading

__all__ = [
    "InvalidRoot",
    "GradedRoot",
    "SymmetricGradedRoot",
    "MonotoneRoot",
    "hminus",
    "monotone_subroot",
    "realize",
    "root_connected_homology",
    "parity_law",
    "symmetric_roots",
]


class InvalidRoot(ValueError):
    """Root data violates the graded-root axioms."""


class GradedRoot:
    """Planar graded root.

    ``edges`` are index pairs in either orientation.  The constructor checks
    the tree axioms and derives ``down`` (lower neighbour or -1), ``up``
    (higher neighbours) and ``leaves`` in planar order.
    """

    def __init__(self, ids: Sequence[str], gradings: Sequence, edges: Sequence[tuple[int, int]], stem_bottom: int):
        self.ids = tuple(str(v) for v in ids)
        self.gradings = tuple(to_grading(g) for g in gradings)
        self.edges = tuple((int(a), int(b)) for a, b in edges)
        self.stem_bottom = int(stem_bottom)
        self._check()

    def _check(self) -> None:
        n = len(self.ids)
        if n == 0:
            raise InvalidRoot("a root needs at least one vertex")
        if len(set(self.ids)) != n or len(self.gradings) != n:
            raise InvalidRoot("vertex ids must be unique, one grading each")
        try:
            levels(self.gradings)
        except MixedCoset as exc:
            raise InvalidRoot(str(exc)) from None
        if not 0 <= self.stem_bottom < n:
            raise InvalidRoot("stem_bottom is not a vertex")
        if len(self.edges) != n - 1:
            raise InvalidRoot(f"a tree on {n} vertices has {n - 1} edges, got {len(self.edges)}")
        down = [-1] * n
        up: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise InvalidRoot(f"bad edge ({a}, {b})")
            ga, gb = self.gradings[a], self.gradings[b]
            if abs(ga - gb) != 2:
                raise InvalidRoot(f"edge {self.ids[a]}-{self.ids[b]} does not join adjacent gradings")
            lo, hi = (a, b) if ga < gb else (b, a)
            if down[hi] != -1:
                raise InvalidRoot(f"vertex {self.ids[hi]} has two lower neighbours")
            down[hi] = lo
            up[lo].append(hi)
        bottoms = [v for v in range(n) if down[v] == -1]
        if bottoms != [self.stem_bottom]:
            raise InvalidRoot("stem_bottom must be the only vertex without a lower neighbour")
        for v in range(n):
            seen, w = 0, v
            while down[w] != -1:
                w = down[w]
                seen += 1
                if seen > n:
                    raise InvalidRoot("edges contain a cycle")
        self.down = tuple(down)
        self.up = tuple(tuple(u) for u in up)
        self.leaves = tuple(v for v in range(n) if not up[v])
        # planar order: the leaves above any vertex form an interval
        pos = {leaf: i for i, leaf in enumerate(self.leaves)}
        spans: dict[int, list[int]] = defaultdict(list)
        for leaf in self.leaves:
            w = leaf
            while w != -1:
                spans[w].append(pos[leaf])
                w = down[w]
        for v, ps in spans.items():
            if max(ps) - min(ps) + 1 != len(ps):
                raise InvalidRoot(f"leaves above {self.ids[v]} are not contiguous in planar order")

    # -- leaf-sequence form -------------------------------------------------
    def path(self, v: int) -> list[int]:
        out = []
        while v != -1:
            out.append(v)
            v = self.down[v]
        return out

    def leaf_sequence(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        """Leaf gradings in planar order and the grading where each adjacent pair meets."""
        grs = tuple(self.gradings[v] for v in self.leaves)
        merges = []
        for a, b in zip(self.leaves, self.leaves[1:]):
            pa = set(self.path(a))
            meet = next(w for w in self.path(b) if w in pa)
            merges.append(self.gradings[meet])
        return grs, tuple(merges)

    @staticmethod
    def _build_from_leaves(leaf_grs, merges):
        leaf_grs = [to_grading(g) for g in leaf_grs]
        merges = [to_grading(m) for m in merges]
        k = len(leaf_grs)
        if k == 0 or len(merges) != k - 1:
            raise InvalidRoot("need k leaves and k - 1 merge gradings")
        for i, m in enumerate(merges):
            if m >= min(leaf_grs[i], leaf_grs[i + 1]) or (leaf_grs[i] - m) % 2 or (leaf_grs[i + 1] - m) % 2:
                raise InvalidRoot(f"merge {m} is not strictly below both neighbouring leaves by an even amount")
        floor = min(merges) if merges else leaf_grs[0]
        grs: list[Fraction] = []
        edges: list[tuple[int, int]] = []
        paths: list[dict[Fraction, int]] = []
        for i, h in enumerate(leaf_grs):
            stop = merges[i - 1] if i else floor - 2
            path: dict[Fraction, int] = {}
            g, prev = h, None
            while g > stop:
                grs.append(g)
                v = len(grs) - 1
                path[g] = v
                if prev is not None:
                    edges.append((prev, v))
                prev = v
                g -= 2
            if i:
                below = paths[i - 1]
                for gg, w in below.items():
                    if gg <= stop:
                        path[gg] = w
                edges.append((prev, below[stop]))
            paths.append(path)
        stem_bottom = paths[0][floor]
        return grs, edges, stem_bottom, paths

    @classmethod
    def from_leaves(cls, leaf_grs: Sequence, merges: Sequence) -> "GradedRoot":
        grs, edges, bottom, _ = cls._build_from_leaves(leaf_grs, merges)
        return GradedRoot([f"v{i}" for i in range(len(grs))], grs, edges, bottom)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self.ids)} vertices, {len(self.leaves)} leaves)"


class SymmetricGradedRoot(GradedRoot):
    """Graded root with a reflection ``J0`` given as an index permutation."""

    def __init__(self, ids, gradings, edges, stem_bottom, involution: Sequence[int]):
        super().__init__(ids, gradings, edges, stem_bottom)
        self.involution = tuple(int(j) for j in involution)
        self._check_symmetry()

    def _check_symmetry(self) -> None:
        J = self.involution
        n = len(self.ids)
        if sorted(J) != list(range(n)) or any(J[J[v]] != v for v in range(n)):
            raise InvalidRoot("J0 is not an involution of the vertex set")
        if any(self.gradings[J[v]] != self.gradings[v] for v in range(n)):
            raise InvalidRoot("J0 does not preserve gradings")
        if any(self.down[J[v]] != (J[self.down[v]] if self.down[v] != -1 else -1) for v in range(n)):
            raise InvalidRoot("J0 does not map edges to edges")
        fixed = [self.gradings[v] for v in range(n) if J[v] == v]
        if len(fixed) != len(set(fixed)):
            raise InvalidRoot("J0 fixes two vertices of the same grading")
        if tuple(J[v] for v in self.leaves) != self.leaves[::-1]:
            raise InvalidRoot("J0 must reverse the planar order of the leaves")

    @classmethod
    def from_leaves(cls, leaf_grs: Sequence, merges: Sequence) -> "SymmetricGradedRoot":
        """Symmetric root with J0 the left-right reflection of a palindromic leaf sequence."""
        leaf_grs = [to_grading(g) for g in leaf_grs]
        merges = [to_grading(m) for m in merges]
        if leaf_grs != leaf_grs[::-1] or merges != merges[::-1]:
            raise InvalidRoot("leaf and merge sequences must be palindromes")
        grs, edges, bottom, paths = cls._build_from_leaves(leaf_grs, merges)
        k = len(leaf_grs)
        J = [-1] * len(grs)
        for i, path in enumerate(paths):
            mirror = paths[k - 1 - i]
            for g, v in path.items():
                J[v] = mirror[g]
        return cls([f"v{i}" for i in range(len(grs))], grs, edges, bottom, J)

    @property
    def stem(self) -> tuple[int, ...]:
        """Vertices fixed by J0, from the top down."""
        fixed = [v for v in range(len(self.ids)) if self.involution[v] == v]
        return tuple(sorted(fixed, key=lambda v: -self.gradings[v]))


# ---------------------------------------------------------------------------
# Monotone roots


@dataclass(frozen=True)
class MonotoneRoot:
    """``M(h1, r1; ...; hn, rn)`` with h decreasing, r increasing and ``hn >= rn``."""

    h: tuple[Fraction, ...]
    r: tuple[Fraction, ...]

    def __post_init__(self):
        h = tuple(to_grading(x) for x in self.h)
        r = tuple(to_grading(x) for x in self.r)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "r", r)
        if not h or len(h) != len(r):
            raise InvalidRoot("monotone root needs equally many h and r values, at least one")
        if any(a <= b for a, b in zip(h, h[1:])):
            raise InvalidRoot("h must be strictly decreasing")
        if any(a >= b for a, b in zip(r, r[1:])):
            raise InvalidRoot("r must be strictly increasing")
        if h[-1] < r[-1]:
            raise InvalidRoot("need h_n >= r_n")
        if any((x - h[0]) % 2 for x in h + r):
            raise InvalidRoot("all parameters must be congruent mod 2")

    def to_root(self) -> SymmetricGradedRoot:
        h, r = self.h, self.r
        if h[-1] == r[-1]:
            leaves = list(h[:-1]) + [h[-1]] + list(h[:-1])[::-1]
            merges = list(r[:-1]) + list(r[:-1])[::-1]
        else:
            leaves = list(h) + list(h)[::-1]
            merges = list(r) + list(r[:-1])[::-1]
        return SymmetricGradedRoot.from_leaves(leaves, merges)


# ---------------------------------------------------------------------------
# Operations


def hminus(M: GradedRoot) -> GradedModule:
    """The module with one generator per vertex and ``U v = w`` along edges.

    Read off by the elder rule: scanning down, when branches meet the one
    born highest survives and every other branch born at ``b`` becomes a
    tower of length ``(b - g) / 2`` where ``g`` is the meeting grading.  The
    last survivor is the free summand.
    """
    order = sorted(range(len(M.ids)), key=lambda v: (-M.gradings[v], v))
    birth: dict[int, Fraction] = {}
    towers = []
    for v in order:
        if not M.up[v]:
            birth[v] = M.gradings[v]
            continue
        born = sorted((birth.pop(u) for u in M.up[v]), reverse=True)
        birth[v] = born[0]
        g = M.gradings[v]
        towers += [(b, int((b - g) / 2)) for b in born[1:]]
    return GradedModule((birth[M.stem_bottom],), tuple(towers))


def monotone_subroot(M: SymmetricGradedRoot) -> MonotoneRoot:
    """Monotone subroot by the cluster and tips scan.

    Every vertex has a base, the grading where its downward path first meets
    the stem; vertices sharing a base form a cluster.  A nontrivial cluster's
    tips are a J0-swapped pair of maximal grading.  The scan starts at the top
    of the stem and then visits nontrivial clusters with decreasing base,
    keeping tips that lie above everything kept so far.
    """
    if not isinstance(M, SymmetricGradedRoot):
        raise InvalidRoot("monotone_subroot needs a symmetric root")
    stem = set(M.stem)
    base: dict[int, Fraction] = {}
    for v in range(len(M.ids)):
        w = v
        while w not in stem:
            w = M.down[w]
        base[v] = M.gradings[w]
    clusters: dict[Fraction, list[int]] = defaultdict(list)
    for v, b in base.items():
        clusters[b].append(v)

    def tips(b):
        members = [v for v in clusters[b] if v not in stem]
        top = max(M.gradings[v] for v in members)
        leftmost = min((v for v in members if M.gradings[v] == top), key=lambda v: (_planar_rank(M, v), v))
        return leftmost, M.involution[leftmost]

    top_fixed = M.stem[0]
    r_top = M.gradings[top_fixed]
    pairs: list[tuple[Fraction, Fraction]] = []
    single = None
    if len(clusters[r_top]) == 1:
        single = r_top
        highest = r_top
    else:
        a, _ = tips(r_top)
        pairs.append((M.gradings[a], r_top))
        highest = M.gradings[a]
    for b in sorted((b for b in clusters if b < r_top and len(clusters[b]) > 1), reverse=True):
        a, _ = tips(b)
        if M.gradings[a] > highest:
            pairs.append((M.gradings[a], b))
            highest = M.gradings[a]
    entries = pairs[::-1]
    if single is not None:
        entries.append((single, single))
    return MonotoneRoot(tuple(h for h, _ in entries), tuple(r for _, r in entries))


def _planar_rank(M: GradedRoot, v: int) -> int:
    """Position of the leftmost leaf above ``v``."""
    best = len(M.leaves)
    for i, leaf in enumerate(M.leaves):
        if v in M.path(leaf):
            best = min(best, i)
    return best


def realize(M: SymmetricGradedRoot) -> IotaComplex:
    """ι-complex with homology ``hminus(M)`` and ι inducing J0.

    One generator per leaf and one per adjacent pair of leaves, sitting one
    above their meeting grading, whose boundary is the difference of the two
    leaves pushed down to that grading.  ι reflects the planar order.
    """
    leaf_grs, merges = M.leaf_sequence()
    k = len(leaf_grs)
    names = [M.ids[v] for v in M.leaves] + [f"rel{i}" for i in range(k - 1)]
    grs = list(leaf_grs) + [m + 1 for m in merges]
    n = len(names)
    d = np.zeros((n, n), dtype=np.uint8)
    for i in range(k - 1):
        d[i, k + i] = 1
        d[i + 1, k + i] = 1
    iota = np.zeros((n, n), dtype=np.uint8)
    for i in range(k):
        iota[k - 1 - i, i] = 1
    for i in range(k - 1):
        iota[k + (k - 2 - i), k + i] = 1
    C = IotaComplex(names, grs, MonomialMatrix(grs, grs, -1, d), MonomialMatrix(grs, grs, 0, iota), name="root")
    if C.homology != hminus(M):
        raise AssertionError("realized complex does not reproduce the root module")
    return C


def root_connected_homology(M: SymmetricGradedRoot) -> GradedModule:
    """Torsion of the module of the monotone subroot, moved up by one."""
    return hminus(monotone_subroot(M).to_root()).torsion().shifted(1)


def parity_law(M: GradedRoot) -> GradedModule:
    """Each tower of ``hminus(M)`` kept once if it occurs an odd number of times, then moved up by one."""
    counts: dict[tuple[Fraction, int], int] = defaultdict(int)
    for t in hminus(M).towers:
        counts[t] += 1
    return GradedModule((), tuple(t for t, c in counts.items() if c % 2)).shifted(1)


def symmetric_roots(max_leaves: int = 6, max_depth: int = 3, top: int = -2):
    """All symmetric roots with a palindromic leaf sequence, up to translation.

    Adjacent leaves ``i, i+1`` drop ``a_i`` and ``b_i`` steps (each in
    ``1..max_depth``) to meet; the first leaf sits at ``top``.
    """
    from itertools import product

    depths = range(1, max_depth + 1)
    for k in range(1, max_leaves + 1):
        m = k - 1
        half = m // 2
        mids = [None] if m % 2 == 0 else [(a, a) for a in depths]
        for left in product(product(depths, depths), repeat=half):
            for mid in mids:
                steps = list(left) + ([mid] if mid else []) + [(b, a) for a, b in reversed(left)]
                leaves = [Fraction(top)]
                merges = []
                for a, b in steps:
                    merge = leaves[-1] - 2 * a
                    merges.append(merge)
                    leaves.append(merge + 2 * b)
                yield SymmetricGradedRoot.from_leaves(leaves, merges)
