"""The sphere-average distance statistic ``E_n = (1/(n |S_n|^2)) sum_{x,y in S_n} d(x, y)``."""
from __future__ import annotations

import csv
import io
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, Iterable, Sequence

from .groups import GroupSpec, as_spec
from .kernels import pair_distance_sum
from .spheres import (
    DEFAULT_ELEMENT_CAP,
    BudgetExceeded,
    SphereDataset,
    enumerate_sphere,
    make_sampler,
    sphere_counts,
)

DEFAULT_PAIR_BUDGET = 100_000_000
DEFAULT_SAMPLES = 100_000
MIN_SAMPLES = 100
# pairs per independent random stream; fixed so results do not depend on threads
SAMPLE_BLOCK = 4096
Z95 = NormalDist().inv_cdf(0.975)

CSV_COLUMNS = ("spec", "n", "method", "E_n", "pairs", "stderr", "ci95", "seed")


class MissingSeed(ValueError):
    pass


@dataclass(frozen=True)
class EstimateRecord:
    spec: str
    n: int
    method: str            # "exact" or "sampled"
    value: float
    pairs: int
    stderr: float | None = None
    ci95: float | None = None
    seed: int | None = None
    exact: Fraction | None = field(default=None, compare=False)

    def row(self) -> list[str]:
        def num(v):
            return "" if v is None else repr(float(v))
        return [self.spec, str(self.n), self.method, num(self.value), str(self.pairs),
                num(self.stderr), num(self.ci95), "" if self.seed is None else str(self.seed)]

    @property
    def ci(self) -> tuple[float, float]:
        half = self.ci95 or 0.0
        return self.value - half, self.value + half


def exact_E(spec: GroupSpec | str, dataset: SphereDataset, n: int | None = None,
            pair_budget: int = DEFAULT_PAIR_BUDGET, threads: int = 1,
            backend: str | None = None) -> EstimateRecord:
    """All-pairs ``E_n`` with the diagonal included, accumulated in integers."""
    spec = as_spec(spec)
    n = dataset.radius if n is None else n
    if dataset.spec != spec or dataset.radius != n:
        raise ValueError(f"dataset holds S_{dataset.radius} of {dataset.spec}, not S_{n} of {spec}")
    if n < 1:
        raise ValueError("E_n is defined for n >= 1")
    if dataset.counts_only:
        raise ValueError("exact_E needs a dataset with elements")
    size = dataset.count
    if size == 0:
        raise ValueError(f"S_{n} of {spec} is empty")
    pairs = size * size
    if pairs > pair_budget:
        raise BudgetExceeded(f"{pairs} pairs exceed the pair budget {pair_budget}")
    total = pair_distance_sum(spec, dataset.elements, threads=threads, backend=backend)
    value = Fraction(total, n * pairs)
    return EstimateRecord(str(spec), n, "exact", float(value), pairs, exact=value)


def _sample_block(sampler, spec, seed: int, block: int, m: int) -> tuple[int, int]:
    rng = random.Random(f"{seed}:{block}")
    xs = sampler.draw_many(rng, m)
    ys = sampler.draw_many(rng, m)
    dist = spec.distance
    s = q = 0
    for x, y in zip(xs, ys):
        d = dist(x, y)
        s += d
        q += d * d
    return s, q


def sampled_E(spec: GroupSpec | str, n: int, k: int = DEFAULT_SAMPLES, seed: int | None = None,
              threads: int = 1, dataset: SphereDataset | None = None) -> EstimateRecord:
    """Monte Carlo ``E_n`` from ``k`` independent uniform pairs of ``S_n``.

    Pairs are drawn in fixed blocks of ``SAMPLE_BLOCK``, block ``b`` seeded
    by ``(seed, b)``, so the record is identical for any thread count.
    """
    spec = as_spec(spec)
    if seed is None:
        raise MissingSeed("sampled estimates need a seed")
    if n < 1:
        raise ValueError("E_n is defined for n >= 1")
    if k < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} pairs, got {k}")
    sampler = make_sampler(spec, n, dataset)
    sizes = [min(SAMPLE_BLOCK, k - s) for s in range(0, k, SAMPLE_BLOCK)]
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _sample_block(sampler, spec, seed, *j), jobs))
    else:
        parts = [_sample_block(sampler, spec, seed, b, m) for b, m in jobs]
    s = sum(p[0] for p in parts)
    q = sum(p[1] for p in parts)
    mean = Fraction(s, k * n)
    var = Fraction(q * k - s * s, k * (k - 1) * n * n)
    stderr = math.sqrt(var / k)
    return EstimateRecord(str(spec), n, "sampled", float(mean), k, stderr, Z95 * stderr, seed)


# -- convergence series -----------------------------------------------------

TREND_FINAL = 1.85
PLATEAU_SPREAD = 0.02
PLATEAU_FINAL = 1.7


@dataclass(frozen=True)
class ConvergenceSeries:
    """``E_n`` records over increasing radii with a heuristic trend tag.

    The verdict is a reporting aid only: ``trending-to-2`` when the last three
    values increase and the final one exceeds 1.85, ``bounded-away`` when
    the last three lie within 0.02 of each other and the final one is below
    1.7, ``inconclusive`` otherwise.
    """

    records: tuple[EstimateRecord, ...]
    verdict: str

    @property
    def mixed(self) -> bool:
        return len({r.method for r in self.records}) > 1

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.records]


def verdict_for(values: Sequence[float]) -> str:
    if len(values) < 3:
        return "inconclusive"
    a, b, c = values[-3:]
    if a < b < c and c > TREND_FINAL:
        return "trending-to-2"
    if max(a, b, c) - min(a, b, c) <= PLATEAU_SPREAD and c < PLATEAU_FINAL:
        return "bounded-away"
    return "inconclusive"


def choose_method(spec: GroupSpec, n: int, policy: str, pair_budget: int,
                  element_cap: int = DEFAULT_ELEMENT_CAP) -> str:
    if policy in ("exact", "sampled"):
        return policy
    if policy != "auto":
        raise ValueError(f"unknown policy {policy!r}")
    size = sphere_counts(spec, n)[n]
    return "exact" if size * size <= pair_budget and size <= element_cap else "sampled"


def convergence_series(spec: GroupSpec | str, radii: Iterable[int], policy: str = "auto",
                       pair_budget: int = DEFAULT_PAIR_BUDGET, samples: int = DEFAULT_SAMPLES,
                       seed: int | None = None, threads: int = 1,
                       load_dataset: Callable[[GroupSpec, int], SphereDataset] | None = None,
                       ) -> ConvergenceSeries:
    """``E_n`` over ``radii``: exact below the pair budget, sampled above it under ``policy="auto"``."""
    spec = as_spec(spec)
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    methods = [choose_method(spec, n, policy, pair_budget) for n in radii]
    if "sampled" in methods and seed is None:
        raise MissingSeed("a seed is required when any radius is sampled")
    load = load_dataset or (lambda s, n: enumerate_sphere(s, n, threads=threads))
    records = []
    for n, method in zip(radii, methods):
        if method == "exact":
            records.append(exact_E(spec, load(spec, n), n, pair_budget, threads))
        else:
            records.append(sampled_E(spec, n, samples, seed, threads))
    return ConvergenceSeries(tuple(records), verdict_for([r.value for r in records]))


def records_to_csv(records: Iterable[EstimateRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def series_to_dat(series: ConvergenceSeries) -> str:
    """Two-column ``n E_n`` text for gnuplot."""
    lines = [f"# {series.records[0].spec if series.records else ''} verdict={series.verdict}"]
    lines += [f"{r.n} {float(r.value)!r}" for r in series.records]
    return "\n".join(lines) + "\n"
