"""Exact all-pairs distance sums, dispatched to the compiled or numpy kernels.

The compiled extension ``stathyp._kernels`` is used when it imports; set
``STATHYP_KERNELS=python`` to force the numpy fallback.
"""
from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from types import ModuleType
from typing import Sequence

import numpy as np

from . import _kernels_py
from .groups import (
    Free,
    FreeAbelian,
    FreeProduct,
    GroupSpec,
    InfiniteDihedral,
    SplitDirectProduct,
)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

# largest syllable alphabet for which a dense factor-distance table is built
DMAT_CAP = 4096
ROW_BLOCK = 256
_INT64_SAFE = 2 ** 62


def available_backends() -> list[str]:
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    name = name or os.environ.get("STATHYP_KERNELS", "auto")
    if name == "python":
        return _kernels_py
    if name in ("cython", "compiled"):
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    if name != "auto":
        raise ValueError(f"unknown kernel backend {name!r}")
    return _compiled if _compiled is not None else _kernels_py


def _blocks(n: int):
    return [(s, min(n, s + ROW_BLOCK)) for s in range(0, n, ROW_BLOCK)]


def _run_rows(fn, args, n: int, threads: int) -> int:
    blocks = _blocks(n)
    if threads <= 1 or len(blocks) <= 1:
        return sum(fn(*args, s, e) for s, e in blocks)
    # integer partial sums, so the total does not depend on scheduling
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(lambda b: fn(*args, *b), blocks))


# -- array builders ---------------------------------------------------------

def tree_arrays(spec: GroupSpec, elements: Sequence):
    """Syllable-id arrays for free groups, the dihedral group and free products.

    Returns ``(ids, nsyl, total, side, length, dmat)`` or ``None`` when the
    syllable alphabet is too large for a dense factor-distance table.
    """
    index: dict = {}
    sides: list[int] = []
    lengths: list[int] = []
    rows: list[list[int]] = []
    if isinstance(spec, (Free, InfiniteDihedral)):
        for x in elements:
            row = []
            for c in x:
                if c not in index:
                    index[c] = len(sides)
                    sides.append(len(sides))  # letters never merge
                    lengths.append(1)
                row.append(index[c])
            rows.append(row)
        dmat = np.zeros((1, 1), dtype=np.int32)
    elif isinstance(spec, FreeProduct):
        values: list = []
        for x in elements:
            row = []
            for syl in x:
                if syl not in index:
                    index[syl] = len(sides)
                    sides.append(syl[0])
                    lengths.append(spec.factors[syl[0]].word_length(syl[1]))
                    values.append(syl)
                row.append(index[syl])
            rows.append(row)
        v = len(values)
        if v > DMAT_CAP:
            return None
        dmat = np.zeros((max(v, 1), max(v, 1)), dtype=np.int32)
        by_side: dict[int, list[int]] = {0: [], 1: []}
        for i, (s, _) in enumerate(values):
            by_side[s].append(i)
        for s, members in by_side.items():
            f = spec.factors[s]
            for a in members:
                for b in members:
                    if a < b:
                        dmat[a, b] = dmat[b, a] = f.distance(values[a][1], values[b][1])
    else:
        raise TypeError(f"{spec} is not tree-like")
    width = max((len(r) for r in rows), default=0)
    ids = np.full((len(rows), max(width, 1)), -1, dtype=np.int32)
    for i, r in enumerate(rows):
        ids[i, : len(r)] = r
    nsyl = np.array([len(r) for r in rows], dtype=np.int32)
    length = np.array(lengths or [0], dtype=np.int32)
    side = np.array(sides or [0], dtype=np.int32)
    total = np.array([spec.word_length(x) for x in elements], dtype=np.int64)
    return ids, nsyl, total, side, length, dmat


# -- pair sums --------------------------------------------------------------

def pair_distance_sum(spec: GroupSpec, elements: Sequence, weights: Sequence[int] | None = None,
                      threads: int = 1, backend: str | None = None) -> int:
    """Exact ``sum_{x, y} w_x w_y d(x, y)`` over all ordered pairs, diagonal included."""
    elements = list(elements)
    if weights is None:
        weights = [1] * len(elements)
    weights = [int(w) for w in weights]
    if len(weights) != len(elements):
        raise ValueError("weights and elements differ in length")
    if not elements:
        return 0
    kern = get_backend(backend)

    if isinstance(spec, SplitDirectProduct):
        # split generating set: d = d_G + d_H, so the sum separates by coordinate
        wg: Counter = Counter()
        wh: Counter = Counter()
        for (g, h), w in zip(elements, weights):
            wg[g] += w
            wh[h] += w
        return (pair_distance_sum(spec.left, list(wg), list(wg.values()), threads, backend)
                + pair_distance_sum(spec.right, list(wh), list(wh.values()), threads, backend))

    wsum = sum(weights)
    diam = 2 * max(spec.word_length(x) for x in elements)
    overflow = wsum * wsum * max(diam, 1) >= _INT64_SAFE
    w = np.array(weights, dtype=np.int64) if not overflow else None

    if not overflow and isinstance(spec, FreeAbelian):
        vecs = np.array(elements, dtype=np.int64).reshape(len(elements), spec.dim)
        return _run_rows(kern.l1_pair_sum, (vecs, w), len(elements), threads)
    if not overflow and isinstance(spec, (Free, InfiniteDihedral, FreeProduct)):
        arrays = tree_arrays(spec, elements)
        if arrays is not None:
            return _run_rows(kern.tree_pair_sum, (*arrays, w), len(elements), threads)
    return generic_pair_sum(spec, elements, weights)


def generic_pair_sum(spec: GroupSpec, elements: Sequence, weights: Sequence[int]) -> int:
    """Python double loop over unordered pairs using ``spec.distance``."""
    acc = 0
    for i, x in enumerate(elements):
        wx = weights[i]
        for j in range(i + 1, len(elements)):
            acc += wx * weights[j] * spec.distance(x, elements[j])
    return 2 * acc
