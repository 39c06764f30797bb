"""Sphere enumeration, sphere counts, growth estimates and uniform samplers."""
from __future__ import annotations

import hashlib
import math
import random
from bisect import bisect_right
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import accumulate
from typing import Sequence

from .groups import (
    Cyclic,
    Element,
    Free,
    FreeAbelian,
    FreeProduct,
    GroupError,
    GroupSpec,
    InfiniteDihedral,
    SplitDirectProduct,
    as_spec,
    write_varint,
)

DEFAULT_ELEMENT_CAP = 50_000_000
# total elements kept across memoized layer lists
LAYER_MEMO_BUDGET = 4_000_000


class BudgetExceeded(RuntimeError):
    pass


class NoSampler(RuntimeError):
    pass


# -- datasets ---------------------------------------------------------------

def dataset_checksum(radius: int, count: int, encodings: Sequence[bytes] | None) -> int:
    h = hashlib.blake2b(digest_size=8)
    head = bytearray()
    write_varint(head, radius)
    write_varint(head, count)
    h.update(bytes(head))
    if encodings is not None:
        for enc in encodings:
            size = bytearray()
            write_varint(size, len(enc))
            h.update(bytes(size))
            h.update(enc)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class SphereDataset:
    """The sphere ``S_n`` of a group, or only its size in counts-only mode.

    Elements are sorted by their canonical byte encoding.
    """

    spec: GroupSpec
    radius: int
    count: int
    elements: tuple | None = None
    checksum: int = field(default=0, compare=False)

    @property
    def counts_only(self) -> bool:
        return self.elements is None

    def encodings(self) -> list[bytes]:
        if self.elements is None:
            raise ValueError("counts-only dataset has no elements")
        return [self.spec.encode(x) for x in self.elements]

    @classmethod
    def build(cls, spec: GroupSpec, radius: int, elements=None, count: int | None = None):
        if elements is None:
            if count is None:
                raise ValueError("need elements or a count")
            return cls(spec, radius, count, None, dataset_checksum(radius, count, None))
        keyed = sorted((spec.encode(x), x) for x in elements) if elements else []
        encs = [k for k, _ in keyed]
        elems = tuple(x for _, x in keyed)
        return cls(spec, radius, len(elems), elems,
                   dataset_checksum(radius, len(elems), encs))


# -- BFS layers -------------------------------------------------------------

def _expand_chunk(spec: GroupSpec, chunk, prev, cur) -> set:
    out = set()
    for x in chunk:
        for y in spec.neighbors(x):
            if y not in cur and y not in prev:
                out.add(y)
    return out


def _next_layer(spec, prev, cur, threads: int) -> set:
    # neighbours of S_k lie in S_{k-1} u S_k u S_{k+1}
    if threads <= 1 or len(cur) < 2048:
        return _expand_chunk(spec, cur, prev, cur)
    items = list(cur)
    step = -(-len(items) // threads)
    chunks = [items[i:i + step] for i in range(0, len(items), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: _expand_chunk(spec, c, prev, cur), chunks))
    out = set()
    for p in parts:
        out |= p
    return out


class _LayerMemo:
    """Keeps the BFS layers of recently used groups, bounded by element count."""

    def __init__(self, budget: int):
        self.budget = budget
        self.store: OrderedDict[GroupSpec, list[frozenset]] = OrderedDict()

    def layers(self, spec: GroupSpec, n: int, cap: int, threads: int) -> list[frozenset]:
        layers = self.store.pop(spec, None) or [frozenset([spec.identity()])]
        prev = layers[-2] if len(layers) > 1 else frozenset()
        while len(layers) <= n:
            cur = layers[-1]
            nxt = _next_layer(spec, prev, cur, threads)
            if len(nxt) > cap:
                self.store[spec] = layers
                raise BudgetExceeded(f"|S_{len(layers)}| of {spec} exceeds element cap {cap}")
            prev = cur
            layers.append(frozenset(nxt))
        self.store[spec] = layers
        self._evict(keep=spec)
        return layers

    def _evict(self, keep):
        total = sum(sum(map(len, ls)) for ls in self.store.values())
        while total > self.budget and len(self.store) > 1:
            key = next(iter(self.store))
            if key == keep:
                self.store.move_to_end(key)
                continue
            total -= sum(map(len, self.store.pop(key)))

    def clear(self):
        self.store.clear()


_memo = _LayerMemo(LAYER_MEMO_BUDGET)


@lru_cache(maxsize=64)
def bfs_counts(spec: GroupSpec, n_max: int, cap: int = DEFAULT_ELEMENT_CAP) -> tuple[int, ...]:
    """``(|S_0|, ..., |S_n_max|)`` by layered BFS keeping only two frontiers."""
    counts = [1]
    prev: set = set()
    cur = {spec.identity()}
    for _ in range(n_max):
        nxt = _expand_chunk(spec, cur, prev, cur)
        if len(nxt) > cap:
            raise BudgetExceeded(f"sphere of {spec} exceeds element cap {cap}")
        counts.append(len(nxt))
        prev, cur = cur, nxt
    return tuple(counts)


def enumerate_sphere(spec: GroupSpec | str, n: int, mode: str = "full",
                     element_cap: int = DEFAULT_ELEMENT_CAP, threads: int = 1) -> SphereDataset:
    """Exact ``S_n`` by layered BFS with canonical-form dedup.

    ``mode="counts_only"`` keeps just the previous two frontiers and returns
    a dataset without elements. Direct products are assembled from their
    factor spheres, ``S_n = U_i S_i(G) x S_{n-i}(H)``.

    For a finite group, radii past the diameter give an empty sphere.
    """
    spec = as_spec(spec)
    if n < 0:
        raise ValueError("radius must be nonnegative")
    if mode not in ("full", "counts_only"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(spec, SplitDirectProduct):
        return _direct_sphere(spec, n, mode, element_cap, threads)
    if mode == "counts_only":
        return SphereDataset.build(spec, n, count=bfs_counts(spec, n, element_cap)[n])
    layers = _memo.layers(spec, n, element_cap, threads)
    return SphereDataset.build(spec, n, layers[n])


def _direct_sphere(spec, n, mode, cap, threads):
    cg = sphere_counts(spec.left, n)
    ch = sphere_counts(spec.right, n)
    count = sum(cg[i] * ch[n - i] for i in range(n + 1))
    if mode == "counts_only":
        return SphereDataset.build(spec, n, count=count)
    if count > cap:
        raise BudgetExceeded(f"|S_{n}| = {count} of {spec} exceeds element cap {cap}")
    elems = []
    for i in range(n + 1):
        if cg[i] == 0 or ch[n - i] == 0:
            continue
        gs = enumerate_sphere(spec.left, i, "full", cap, threads).elements
        hs = enumerate_sphere(spec.right, n - i, "full", cap, threads).elements
        elems.extend((g, h) for g in gs for h in hs)
    return SphereDataset.build(spec, n, elems)


def clear_memo() -> None:
    _memo.clear()
    bfs_counts.cache_clear()
    sphere_counts.cache_clear()


# -- exact counts -----------------------------------------------------------

@lru_cache(maxsize=256)
def sphere_counts(spec: GroupSpec, n_max: int) -> tuple[int, ...]:
    """``(|S_0|, ..., |S_n_max|)`` from growth recursions where one is known.

    Free, free abelian, cyclic and dihedral groups use closed forms; free
    products use the syllable recursion over factor counts; direct products
    use convolution. Anything else falls back to BFS.
    """
    n_max = int(n_max)
    if isinstance(spec, Free):
        q = 2 * spec.rank
        return (1,) + tuple(q * (q - 1) ** (k - 1) for k in range(1, n_max + 1))
    if isinstance(spec, FreeAbelian):
        return tuple(_lattice_sphere(spec.dim, k) for k in range(n_max + 1))
    if isinstance(spec, Cyclic):
        m = spec.order
        return tuple(1 if k == 0 else (0 if 2 * k > m else (1 if 2 * k == m else 2))
                     for k in range(n_max + 1))
    if isinstance(spec, InfiniteDihedral):
        return (1,) + (2,) * n_max
    if isinstance(spec, FreeProduct):
        fa, fb = syllable_tables(spec, n_max)
        return (1,) + tuple(fa[k] + fb[k] for k in range(1, n_max + 1))
    if isinstance(spec, SplitDirectProduct):
        cg = sphere_counts(spec.left, n_max)
        ch = sphere_counts(spec.right, n_max)
        return tuple(sum(cg[i] * ch[k - i] for i in range(k + 1)) for k in range(n_max + 1))
    return bfs_counts(spec, n_max)


@lru_cache(maxsize=None)
def _lattice_sphere(d: int, k: int) -> int:
    if k == 0:
        return 1
    return sum(2 ** j * math.comb(d, j) * math.comb(k - 1, j - 1) for j in range(1, min(d, k) + 1))


def syllable_tables(spec: FreeProduct, n_max: int) -> tuple[list[int], list[int]]:
    """``F[s][m]``: number of normal forms of length ``m`` whose first syllable is on side ``s``."""
    ca = sphere_counts(spec.left, n_max)
    cb = sphere_counts(spec.right, n_max)
    c = (ca, cb)
    tables = ([0] * (n_max + 1), [0] * (n_max + 1))
    for m in range(1, n_max + 1):
        for s in (0, 1):
            other = tables[1 - s]
            tables[s][m] = sum(c[s][k] * (other[m - k] if m > k else 1) for k in range(1, m + 1))
    return tables


def subgroup_sphere_count(spec: GroupSpec | str, factor: str | int, n: int) -> int:
    """``|S_n(P)|`` for a free-product factor ``P``, by BFS on the factor alone.

    The factor embeds isometrically since the generating set is the union of
    the factor generating sets.
    """
    spec = as_spec(spec)
    if not isinstance(spec, FreeProduct):
        raise GroupError(f"{spec} is not a free product")
    side = _side(factor)
    return bfs_counts(spec.factors[side], n)[n]


def _side(factor: str | int) -> int:
    if factor in (0, "left"):
        return 0
    if factor in (1, "right"):
        return 1
    raise ValueError(f"factor must be 'left' or 'right', got {factor!r}")


# -- growth -----------------------------------------------------------------

@dataclass(frozen=True)
class GrowthReport:
    spec: GroupSpec
    radii: tuple[int, ...]
    counts: tuple[int, ...]
    nu_log: tuple[float, ...]     # log|S_n| / n
    nu_ratio: tuple[float, ...]   # log(|S_{n+1}| / |S_n|)
    nu_hat: float
    sandwich: tuple[float, ...]   # |S_n| / exp(n * nu_hat)

    def rows(self):
        for i, n in enumerate(self.radii):
            yield n, self.counts[i], self.nu_log[i], self.nu_ratio[i], self.sandwich[i]


def _ratio_estimate(a: int, b: int) -> float:
    if a <= 0 or b <= 0:
        return 0.0
    return max(0.0, math.log(b) - math.log(a))


def growth_report(spec: GroupSpec | str, n_max: int) -> GrowthReport:
    """Growth-rate estimates over ``n = 0..n_max``.

    The reported ``nu_hat`` is the ratio estimator at ``n_max``, which needs
    ``|S_{n_max+1}|``.
    """
    spec = as_spec(spec)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    counts = sphere_counts(spec, n_max + 1)
    radii = tuple(range(n_max + 1))
    nu_log = tuple(0.0 if n == 0 or counts[n] <= 0 else max(0.0, math.log(counts[n]) / n)
                   for n in radii)
    nu_ratio = tuple(_ratio_estimate(counts[n], counts[n + 1]) for n in radii)
    nu_hat = nu_ratio[n_max]
    sandwich = tuple(counts[n] / math.exp(n * nu_hat) for n in radii)
    return GrowthReport(spec, radii, counts[: n_max + 1], nu_log, nu_ratio, nu_hat, sandwich)


# -- uniform samplers -------------------------------------------------------
#
# Samplers draw from a ``random.Random``, whose ``randrange`` is exact for the
# very large sphere sizes of exponential-growth groups.

# factor spheres at most this large are sampled from an enumerated list
SMALL_SPHERE = 4096
ENUMERATION_SAMPLER_CAP = 2_000_000


class _Weighted:
    """Exact categorical distribution over ``options`` with integer weights."""

    __slots__ = ("options", "cum", "total")

    def __init__(self, options: list, weights: list[int]):
        self.options = options
        self.cum = list(accumulate(weights))
        self.total = self.cum[-1] if self.cum else 0

    def pick(self, rng: random.Random):
        return self.options[bisect_right(self.cum, rng.randrange(self.total))]


class SphereSampler:
    """Uniform sampler for ``S_n``; ``draw(rng)`` returns one element."""

    def __init__(self, spec: GroupSpec, n: int, count: int):
        self.spec, self.n, self.count = spec, n, count

    def draw(self, rng: random.Random) -> Element:
        raise NotImplementedError

    def draw_many(self, rng: random.Random, k: int) -> list:
        return [self.draw(rng) for _ in range(k)]


class _ListSampler(SphereSampler):
    def __init__(self, spec, n, elements):
        super().__init__(spec, n, len(elements))
        self.elements = tuple(elements)

    def draw(self, rng):
        return self.elements[rng.randrange(len(self.elements))]


class _FreeSampler(SphereSampler):
    def __init__(self, spec: Free, n):
        super().__init__(spec, n, sphere_counts(spec, n)[n])
        q = 2 * spec.rank
        self.letters = [c for g in spec.generators for c in g]
        # successors[i]: letters allowed after letter i (anything but its inverse)
        self.successors = [[self.letters[j] for j in range(q) if j != i ^ 1] for i in range(q)]
        self.index = {c: i for i, c in enumerate(self.letters)}

    def draw(self, rng):
        if self.n == 0:
            return ()
        c = self.letters[rng.randrange(len(self.letters))]
        word = [c]
        for _ in range(self.n - 1):
            nxt = self.successors[self.index[c]]
            c = nxt[rng.randrange(len(nxt))]
            word.append(c)
        return tuple(word)


class _LatticeSampler(SphereSampler):
    """Coordinate-by-coordinate draw weighted by lower-dimensional sphere sizes."""

    def __init__(self, spec: FreeAbelian, n):
        super().__init__(spec, n, _lattice_sphere(spec.dim, n))
        self.tables: dict[tuple[int, int], _Weighted] = {}

    def _table(self, rem: int, k: int) -> _Weighted:
        key = (rem, k)
        if key not in self.tables:
            values = list(range(-k, k + 1))
            weights = [(1 if k == abs(v) else 0) if rem == 0 else _lattice_sphere(rem, k - abs(v))
                       for v in values]
            self.tables[key] = _Weighted(values, weights)
        return self.tables[key]

    def draw(self, rng):
        d, k = self.spec.dim, self.n
        out = []
        for i in range(d):
            v = self._table(d - i - 1, k).pick(rng)
            out.append(v)
            k -= abs(v)
        return tuple(out)


class _FreeProductSampler(SphereSampler):
    """Syllable-by-syllable draw: pick (side, length) by the number of completions."""

    def __init__(self, spec: FreeProduct, n, factor_sampler):
        fa, fb = syllable_tables(spec, n)
        super().__init__(spec, n, 1 if n == 0 else fa[n] + fb[n])
        self.tables = (fa, fb)
        self.counts = (sphere_counts(spec.left, n), sphere_counts(spec.right, n))
        self.factor_sampler = factor_sampler
        self.steps: dict[tuple, _Weighted] = {}

    def _step(self, prev_side, m) -> _Weighted:
        key = (prev_side, m)
        if key not in self.steps:
            options, weights = [], []
            for s in ((0, 1) if prev_side is None else (1 - prev_side,)):
                c = self.counts[s]
                for k in range(1, m + 1):
                    w = c[k] * (1 if k == m else self.tables[1 - s][m - k])
                    if w:
                        options.append((s, k))
                        weights.append(w)
            self.steps[key] = _Weighted(options, weights)
        return self.steps[key]

    def draw(self, rng):
        out, m, side = [], self.n, None
        factors = self.spec.factors
        while m > 0:
            side, k = self._step(side, m).pick(rng)
            out.append((side, self.factor_sampler(factors[side], k).draw(rng)))
            m -= k
        return tuple(out)


class _DirectSampler(SphereSampler):
    """Split index ``i`` with probability ``|S_i(G)||S_{n-i}(H)|/|S_n|``, then each factor."""

    def __init__(self, spec: SplitDirectProduct, n, factor_sampler):
        cg = sphere_counts(spec.left, n)
        ch = sphere_counts(spec.right, n)
        self.split = _Weighted(list(range(n + 1)), [cg[i] * ch[n - i] for i in range(n + 1)])
        super().__init__(spec, n, self.split.total)
        self.factor_sampler = factor_sampler

    def split_index(self, rng) -> int:
        return self.split.pick(rng)

    def draw(self, rng):
        i = self.split_index(rng)
        g = self.factor_sampler(self.spec.left, i).draw(rng)
        h = self.factor_sampler(self.spec.right, self.n - i).draw(rng)
        return (g, h)


def make_sampler(spec: GroupSpec | str, n: int, dataset: SphereDataset | None = None,
                 enumerate_cap: int = ENUMERATION_SAMPLER_CAP) -> SphereSampler:
    """Uniform sampler for ``S_n``.

    Free and free abelian groups, free products and direct products have
    direct samplers built from exact sphere counts. Other groups need the
    enumerated sphere, either passed in or enumerated here when its size is
    at most ``enumerate_cap``.
    """
    spec = as_spec(spec)
    if n < 0:
        raise ValueError("radius must be nonnegative")
    cache: dict = {}

    def factor_sampler(s, k):
        key = (s, k)
        if key not in cache:
            built = _build(s, k, inner=True)
            if built is None:
                built = _ListSampler(s, k, enumerate_sphere(s, k).elements)
            cache[key] = built
        return cache[key]

    def _build(s, k, inner=False):
        if inner and sphere_counts(s, k)[k] <= SMALL_SPHERE:
            return _ListSampler(s, k, enumerate_sphere(s, k).elements)
        if isinstance(s, Free):
            return _FreeSampler(s, k)
        if isinstance(s, FreeAbelian):
            return _LatticeSampler(s, k)
        if isinstance(s, FreeProduct):
            return _FreeProductSampler(s, k, factor_sampler)
        if isinstance(s, SplitDirectProduct):
            return _DirectSampler(s, k, factor_sampler)
        if isinstance(s, InfiniteDihedral):
            elems = [()] if k == 0 else [tuple((j + b) % 2 for j in range(k)) for b in (0, 1)]
            return _ListSampler(s, k, elems)
        if isinstance(s, Cyclic):
            return _ListSampler(s, k, enumerate_sphere(s, k).elements)
        return None

    if dataset is not None:
        if dataset.spec != spec or dataset.radius != n:
            raise ValueError("dataset does not match the requested sphere")
        if not dataset.counts_only:
            if dataset.count == 0:
                raise NoSampler(f"S_{n} of {spec} is empty")
            return _ListSampler(spec, n, dataset.elements)
    sampler = _build(spec, n)
    if sampler is None:
        if sphere_counts(spec, n)[n] > enumerate_cap:
            raise NoSampler(f"no direct sampler for {spec} and S_{n} is too large to enumerate")
        sampler = _ListSampler(spec, n, enumerate_sphere(spec, n).elements)
    if sampler.count == 0:
        raise NoSampler(f"S_{n} of {spec} is empty")
    return sampler


def sample_sphere(spec: GroupSpec | str, n: int, k: int, seed: int,
                  dataset: SphereDataset | None = None) -> list:
    """``k`` independent uniform draws from ``S_n``; deterministic in ``seed``."""
    if k < 1:
        raise ValueError("k must be positive")
    sampler = make_sampler(spec, n, dataset)
    return sampler.draw_many(random.Random(seed), k)
