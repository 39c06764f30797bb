"""Sphere decomposition diagnostics for free products and their split products.

In a free product with the union generating set, the normal form of ``g``
is the unique geodesic coset itinerary: every geodesic from 1 to ``g`` runs
through the same peripheral cosets in the same order, one syllable per
coset. Peripheral neighbourhoods are taken to be the cosets themselves, so
deep and transition points reduce to positions inside or at the ends of
syllables.

Free groups and the infinite dihedral group are accepted as the degenerate
case with no peripheral structure: every letter is its own syllable and
every point of every geodesic is a transition point.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable

from .groups import (
    Element,
    Free,
    FreeProduct,
    GroupError,
    GroupSpec,
    InfiniteDihedral,
    SplitDirectProduct,
    as_spec,
)
from .spheres import SphereDataset, bfs_counts, sphere_counts, syllable_tables

DEFAULT_T = 0.7
# D_1 and |F| = |B(1, 2 D_1)| have no effective value; they are reported as these proxies
F_PROXY = 1
D1_PROXY = 0


class UnsupportedGroup(GroupError):
    pass


@dataclass(frozen=True)
class Syllable:
    side: int | None      # None: no peripheral structure
    element: Element
    length: int


@dataclass(frozen=True)
class SyllablePath:
    element: Element
    syllables: tuple[Syllable, ...]
    offsets: tuple[int, ...]   # start offset of each syllable, then the total length

    @property
    def total(self) -> int:
        return self.offsets[-1]

    def syllable_at(self, position: int) -> int | None:
        """Index of the syllable whose interior contains ``position``, else None."""
        j = bisect_right(self.offsets, position) - 1
        if j < 0 or j >= len(self.syllables) or self.offsets[j] == position:
            return None
        return j


def tree_like(spec: GroupSpec) -> bool:
    return isinstance(spec, (FreeProduct, Free, InfiniteDihedral))


def syllable_decompose(spec: GroupSpec | str, g: Element) -> SyllablePath:
    spec = as_spec(spec)
    spec.check(g)
    if isinstance(spec, FreeProduct):
        syls = tuple(Syllable(side, h, spec.factors[side].word_length(h)) for side, h in g)
    elif isinstance(spec, (Free, InfiniteDihedral)):
        syls = tuple(Syllable(None, (c,), 1) for c in g)
    else:
        raise UnsupportedGroup(f"{spec} is not a free product")
    offsets = [0]
    for s in syls:
        offsets.append(offsets[-1] + s.length)
    return SyllablePath(g, syls, tuple(offsets))


@dataclass(frozen=True)
class PointClass:
    position: int
    kind: str                     # "deep" or "transition"
    R: int
    syllable: int | None = None
    coset: tuple | None = None    # (normal form of the coset representative, side)

    @property
    def deep(self) -> bool:
        return self.kind == "deep"


def classify_point(path: SyllablePath, position: int, R: int) -> PointClass:
    """Deep iff ``position`` is at least ``R`` from both ends of a peripheral syllable."""
    if R < 1:
        raise ValueError("R must be >= 1")
    if not 0 <= position <= path.total:
        raise ValueError(f"position {position} outside [0, {path.total}]")
    j = path.syllable_at(position)
    if j is not None:
        syl = path.syllables[j]
        start, end = path.offsets[j], path.offsets[j + 1]
        if syl.side is not None and position - start >= R and end - position >= R:
            rep = path.element[:j] if isinstance(path.element, tuple) else ()
            return PointClass(position, "deep", R, j, (rep, syl.side))
    return PointClass(position, "transition", R)


def split_position(rho: float, n: int) -> int:
    """``rho * n`` rounded half up."""
    return math.floor(rho * n + 0.5)


def annulus_start(t: float, n: int) -> int:
    """Smallest integer ``j >= t * n``, tolerant of float noise in ``t * n``."""
    return math.ceil(t * n - 1e-9)


def entry_bucket(path: SyllablePath, p: int, R: int) -> int:
    """0 for ``C_R``; otherwise ``i`` with ``R + i`` the distance from ``p`` back to the coset entry.

    Transition points are the syllable endpoints; ``g`` is in ``C_R`` iff one
    of them lies within ``R`` of ``p``.
    """
    j = path.syllable_at(p)
    if j is None or path.syllables[j].side is None:
        return 0
    start, end = path.offsets[j], path.offsets[j + 1]
    if min(p - start, end - p) <= R:
        return 0
    return p - start - R


@dataclass(frozen=True)
class DecompositionProfile:
    spec: GroupSpec
    n: int
    rho: float
    R: int
    position: int                 # rounded rho * n
    counts: tuple[int, ...]       # counts[i] = |C_{R+i}|, i = 0 .. position - R
    sphere_size: int              # |S_n|
    population: int               # |S_n|, or |A_{tn,n}| for direct products
    crux_ratio: float             # sum_{i>=1} |C_{R+i}| / |S_n|
    theta: float
    t: float | None = None
    F_proxy: int = F_PROXY
    D_proxy: int = 0

    @property
    def partition_ok(self) -> bool:
        return sum(self.counts) == self.population


def _check_params(n: int, rho: float, R: int) -> int:
    if not 0 < rho < 0.5:
        raise ValueError(f"rho must lie in (0, 1/2), got {rho}")
    if R < 1:
        raise ValueError("R must be >= 1")
    p = split_position(rho, n)
    if p < R:
        raise ValueError(f"rho*n = {p} is smaller than R = {R}")
    return p


def decompose_sphere(spec: GroupSpec | str, dataset: SphereDataset, rho: float, R: int,
                     t: float = DEFAULT_T) -> DecompositionProfile:
    """Partition ``S_n`` into ``C_R, C_{R+1}, ...`` around the waypoint at ``rho * n``.

    For a direct product ``G x H`` with ``G`` a free product, only the
    annulus ``A_{tn,n}`` of pairs ``(g, h)`` with ``|g| >= t n`` is partitioned,
    classifying along the geodesic of ``g``.
    """
    spec = as_spec(spec)
    if dataset.spec != spec:
        raise ValueError(f"dataset is for {dataset.spec}, not {spec}")
    if dataset.counts_only:
        raise ValueError("decompose_sphere needs a dataset with elements")
    n = dataset.radius
    p = _check_params(n, rho, R)
    counts = [0] * (p - R + 1)

    if isinstance(spec, SplitDirectProduct):
        g_spec = spec.left
        if not tree_like(g_spec):
            raise UnsupportedGroup(f"left factor of {spec} is not a free product or free group")
        if not 0 < t <= 1 or t * n <= p:
            raise ValueError(f"need rho*n < t*n <= n, got t = {t}")
        lo = annulus_start(t, n)
        population = 0
        for g, _ in dataset.elements:
            if g_spec.word_length(g) < lo:
                continue
            population += 1
            counts[entry_bucket(syllable_decompose(g_spec, g), p, R)] += 1
        cg = sphere_counts(g_spec, n)
        ch = sphere_counts(spec.right, n)

        def weight(m):
            return sum(cg[j - p + m] * ch[n - j] for j in range(lo, n + 1))
        d_proxy = 2 * (lo - p - R - D1_PROXY)
    else:
        if not tree_like(spec):
            raise UnsupportedGroup(f"diagnostics need a free product, got {spec}")
        population = dataset.count
        for g in dataset.elements:
            counts[entry_bucket(syllable_decompose(spec, g), p, R)] += 1
        cs = sphere_counts(spec, n)

        def weight(m):
            return cs[n - p + m]
        d_proxy = 2 * (n - p - R - D1_PROXY)
        t = None

    return _profile(spec, n, rho, R, p, counts, dataset.count, population, weight, d_proxy, t)


def _profile(spec, n, rho, R, p, counts, size, population, weight, d_proxy, t):
    crux = sum(counts[1:]) / size
    theta = sum(F_PROXY * c * weight(R + i) for i, c in enumerate(counts)) / (size * size)
    return DecompositionProfile(spec, n, rho, R, p, tuple(counts), size, population,
                                crux, theta, t, F_PROXY, d_proxy)


def _bucket_counts(spec: GroupSpec, length: int, p: int, R: int) -> list[int]:
    """``|C_{R+i}|`` among the elements of length ``length`` of a tree-like group, by counting.

    An element lands in ``C_{R+i}``, ``i >= 1``, iff it has a syllable on side
    ``s`` starting at ``p - R - i`` and ending after ``p + R``; the prefix before
    it ends on the other side and the suffix after it starts on the other side.
    Reversal shows that prefixes ending on a side are counted like suffixes
    starting on it.
    """
    counts = [0] * (p - R + 1)
    total = sphere_counts(spec, length)[length]
    if isinstance(spec, FreeProduct):
        first = syllable_tables(spec, length)
        factor = (sphere_counts(spec.left, length), sphere_counts(spec.right, length))
        for i in range(1, p - R + 1):
            start = p - R - i
            for side in (0, 1):
                other = first[1 - side]
                pre = 1 if start == 0 else other[start]
                if not pre:
                    continue
                for ell in range(2 * R + i + 1, length - start + 1):
                    rest = length - start - ell
                    counts[i] += pre * factor[side][ell] * (1 if rest == 0 else other[rest])
    counts[0] = total - sum(counts[1:])
    return counts


def decompose_counts(spec: GroupSpec | str, n: int, rho: float, R: int,
                     t: float = DEFAULT_T) -> DecompositionProfile:
    """Same profile as :func:`decompose_sphere`, counted from syllable tables without enumeration."""
    spec = as_spec(spec)
    p = _check_params(n, rho, R)
    if isinstance(spec, SplitDirectProduct):
        g_spec = spec.left
        if not tree_like(g_spec):
            raise UnsupportedGroup(f"left factor of {spec} is not a free product or free group")
        if not 0 < t <= 1 or t * n <= p:
            raise ValueError(f"need rho*n < t*n <= n, got t = {t}")
        cg = sphere_counts(g_spec, n)
        ch = sphere_counts(spec.right, n)
        lo = annulus_start(t, n)
        counts = [0] * (p - R + 1)
        for j in range(lo, n + 1):
            for i, c in enumerate(_bucket_counts(g_spec, j, p, R)):
                counts[i] += c * ch[n - j]
        population = sum(cg[j] * ch[n - j] for j in range(lo, n + 1))

        def weight(m):
            return sum(cg[j - p + m] * ch[n - j] for j in range(lo, n + 1))
        d_proxy = 2 * (lo - p - R - D1_PROXY)
    else:
        if not tree_like(spec):
            raise UnsupportedGroup(f"diagnostics need a free product, got {spec}")
        counts = _bucket_counts(spec, n, p, R)
        population = sum(counts)
        cs = sphere_counts(spec, n)

        def weight(m):
            return cs[n - p + m]
        d_proxy = 2 * (n - p - R - D1_PROXY)
        t = None
    size = sphere_counts(spec, n)[n]
    return _profile(spec, n, rho, R, p, counts, size, population, weight, d_proxy, t)


def profile_rows(profile: DecompositionProfile) -> Iterable[list]:
    """Rows ``spec, n, rho, R, i, count, ratio`` followed by a summary row."""
    size = profile.sphere_size
    base = [str(profile.spec), profile.n, profile.rho, profile.R]
    for i, c in enumerate(profile.counts):
        yield base + [i, c, repr(c / size), "", "", "", ""]
    yield base + ["sum", profile.population, repr(profile.crux_ratio), repr(profile.theta),
                  profile.F_proxy, profile.D_proxy, int(profile.partition_ok)]


PROFILE_COLUMNS = ("spec", "n", "rho", "R", "i", "count", "ratio",
                   "theta", "F_proxy", "D_proxy", "partition_ok")


# -- Poincare series --------------------------------------------------------

@dataclass(frozen=True)
class PoincareSeriesReport:
    spec: GroupSpec
    factor: int
    s: float
    counts: tuple[int, ...]            # |S_n(P)|, n = 0 .. N_max
    partial_sums: tuple[float, ...]    # A_N, N = 0 .. N_max
    tail_flatness: float               # A_{N_max} - A_{N_max // 2}

    def tail(self, N: int) -> float:
        """``A_{2N} - A_N``."""
        return self.partial_sums[2 * N] - self.partial_sums[N]


def poincare_partial(spec: GroupSpec | str, factor: str | int, s: float, N_max: int) -> PoincareSeriesReport:
    """Partial sums ``A_N = sum_{n <= N} exp(-s n) |S_n(P)|`` over a peripheral factor ``P``."""
    spec = as_spec(spec)
    if not isinstance(spec, FreeProduct):
        raise UnsupportedGroup(f"{spec} is not a free product")
    if s < 0:
        raise ValueError("s must be >= 0")
    if N_max < 4:
        raise ValueError("N_max must be >= 4")
    side = 0 if factor in (0, "left") else 1 if factor in (1, "right") else None
    if side is None:
        raise ValueError(f"factor must be 'left' or 'right', got {factor!r}")
    counts = bfs_counts(spec.factors[side], N_max)
    terms = [c * math.exp(-s * k) for k, c in enumerate(counts)]
    partial, acc = [], []
    for term in terms:
        acc.append(term)
        partial.append(math.fsum(acc))
    return PoincareSeriesReport(spec, side, s, counts, tuple(partial),
                                partial[N_max] - partial[N_max // 2])


POINCARE_COLUMNS = ("spec", "factor", "s", "N", "count", "A_N")


def poincare_rows(report: PoincareSeriesReport) -> Iterable[list]:
    name = "left" if report.factor == 0 else "right"
    for N, (c, a) in enumerate(zip(report.counts, report.partial_sums)):
        yield [str(report.spec), name, repr(report.s), N, c, repr(a)]
    yield [str(report.spec), name, repr(report.s), "tail", "", repr(report.tail_flatness)]
