"""Acceptance criteria 1-10.

Each criterion is a function returning ``(passed, detail)``. Under pytest a
test per criterion asserts it and the terminal summary prints one line per
criterion; ``python tests/test_acceptance.py`` prints the same lines.
"""
from __future__ import annotations

import math
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import dihedral_E, lattice_poincare  # noqa: E402
from stathyp.cli import main as cli_main  # noqa: E402
from stathyp.estat import exact_E, sampled_E  # noqa: E402
from stathyp.groups import bfs_distance, bfs_layers, parse_group  # noqa: E402
from stathyp.kernels import get_backend  # noqa: E402
from stathyp.relhyp import decompose_counts, poincare_partial  # noqa: E402
from stathyp.spheres import bfs_counts, enumerate_sphere, growth_report, sphere_counts  # noqa: E402

ZZ2 = "free_product(abelian(2),free(1))"
SAMPLES = 100_000
SEEDS = (1, 2, 3)
SAMPLED_RADII = (40, 60)

RESULTS: dict[int, tuple[bool, str]] = {}


def _metric_oracle():
    plan = {"free(2)": 8, "abelian(2)": 8, "free_product(free(1),free(1))": 8, "free(3)": 6,
            "abelian(3)": 6, "cyclic(5)": 6, "dihedral_inf": 6, "lamplighter(2)": 6,
            "lamplighter(3)": 6, ZZ2: 6, "direct(free(2),cyclic(3))": 6}
    checked = bad = 0
    for text, radius in plan.items():
        spec = parse_group(text)
        e = spec.identity()
        for layer in bfs_layers(spec, radius):
            for x in layer:
                checked += 1
                bad += spec.word_length(x) != bfs_distance(spec, e, x, cap=radius)
    return bad == 0, f"{checked} ball elements over {len(plan)} groups, {bad} mismatches"


def _sphere_exactness():
    f2 = sphere_counts(parse_group("free(2)"), 10)
    z2 = sphere_counts(parse_group("abelian(2)"), 50)
    direct = parse_group("direct(free(2),cyclic(3))")
    ok_f = all(f2[n] == 4 * 3 ** (n - 1) for n in range(1, 11))
    ok_z = all(z2[n] == 4 * n for n in range(1, 51))
    ok_d = sphere_counts(direct, 6) == bfs_counts(direct, 6)
    return ok_f and ok_z and ok_d, f"free(2) {ok_f}, abelian(2) {ok_z}, direct convolution vs BFS {ok_d}"


def _exact(text, n, budget=10 ** 11):
    spec = parse_group(text)
    return exact_E(spec, enumerate_sphere(spec, n), pair_budget=budget).exact


def _elementary_baseline():
    z = [_exact("abelian(1)", n) for n in range(1, 21)]
    d = [(_exact("dihedral_inf", n), dihedral_E(n)) for n in range(1, 13)]
    ok_z = all(v == 1 for v in z)
    ok_d = all(a == b for a, b in d)
    return ok_z and ok_d, f"Z: E_n == 1 for n=1..20 {ok_z}; D_inf n<=12 vs brute force {ok_d}"


def _sampled_ok(text):
    lines, ok = [], True
    for n in SAMPLED_RADII:
        for seed in SEEDS:
            rec = sampled_E(text, n, SAMPLES, seed)
            lo, hi = rec.ci
            good = rec.value > 1.8 and lo > 1.7
            ok &= good
            lines.append(f"n={n} seed={seed} E={rec.value:.4f} CI=[{lo:.4f},{hi:.4f}]")
    return ok, lines


def _trend_free_products():
    top = 8 if get_backend().IMPLEMENTATION == "cython" else 7
    detail, ok = [], True
    for text, radii in (("free(2)", range(2, 7)), (ZZ2, range(2, top + 1))):
        vals = [_exact(text, n) for n in radii]
        inc = all(b > a for a, b in zip(vals, vals[1:]))
        ok &= inc
        detail.append(f"{text} exact n={radii.start}..{radii.stop - 1} increasing={inc} "
                      f"({', '.join(f'{float(v):.4f}' for v in vals)})")
        s_ok, s_lines = _sampled_ok(text)
        ok &= s_ok
        detail += s_lines
    return ok, "; ".join(detail)


def _lattice_plateau():
    e = {n: _exact("abelian(2)", n) for n in (10, 20, 40)}
    ok = abs(e[40] - e[20]) < Fraction(1, 50) and e[40] < Fraction(17, 10)
    return ok, "abelian(2) E_10, E_20, E_40 = " + ", ".join(f"{v} ({float(v):.6f})" for v in e.values())


def _direct_trend():
    ok, lines = _sampled_ok("direct(free(2),cyclic(3))")
    return ok, "; ".join(lines)


def _decomposition():
    partition = crux = theta = True
    detail = []
    for n in (10, 12):
        profiles = [decompose_counts(ZZ2, n, 0.4, R) for R in range(2, math.floor(0.4 * n) + 1)]
        partition &= all(sum(p.counts) == p.sphere_size for p in profiles)
        cr = [p.crux_ratio for p in profiles]
        th = [p.theta for p in profiles]
        crux &= all(b <= a for a, b in zip(cr, cr[1:]))
        theta &= all(b <= a for a, b in zip(th, th[1:]))
        detail.append(f"n={n} R=2..{profiles[-1].R} crux=[{', '.join(f'{v:.3g}' for v in cr)}] "
                      f"theta=[{', '.join(f'{v:.3g}' for v in th)}]")
    head = f"partition {partition}, crux nonincreasing {crux}, theta nonincreasing {theta}"
    return partition and crux and theta, head + "; " + "; ".join(detail)


def _poincare():
    s = growth_report(ZZ2, 20).nu_hat
    rep = poincare_partial(ZZ2, "left", s, 400)
    q = math.exp(-s)
    err = max(abs(rep.partial_sums[N] - lattice_poincare(q, N)) for N in range(401))
    tail = rep.tail(200)
    return tail < 1e-3 and err < 1e-9, f"s={s:.6f} A_400-A_200={tail:.3e} max closed-form error={err:.1e}"


def _sandwich():
    detail, ok = [], True
    for text in ("free(2)", "free_product(free(1),free(1))"):
        rep = growth_report(text, 10)
        vals = rep.sandwich[2:11]
        ok &= all(1 <= v <= 4 for v in vals)
        detail.append(f"{text} nu_hat={rep.nu_hat:.6f} ratios in [{min(vals):.4f}, {max(vals):.4f}]")
    return ok, "; ".join(detail)


def _determinism():
    runs = [("direct(free(2),cyclic(3))", "2,3,4,20,30"), (ZZ2, "3,4,5,25,35")]
    with tempfile.TemporaryDirectory() as tmp:
        ok = True
        for text, radii in runs:
            blobs = []
            for threads in (1, 2, 4):
                out = Path(tmp) / f"run{threads}.csv"
                code = cli_main(["estimate", "--group", text, "--radii", radii, "--samples", "20000",
                                 "--seed", "99", "--threads", str(threads), "--out", str(out)])
                ok &= code == 0
                blobs.append(out.read_bytes())
            ok &= len(set(blobs)) == 1
    return ok, f"{len(runs)} estimate runs, threads 1/2/4, byte-identical={ok}"


CRITERIA = {
    1: ("metric oracle suite", _metric_oracle),
    2: ("sphere exactness", _sphere_exactness),
    3: ("elementary baseline", _elementary_baseline),
    4: ("free product trend", _trend_free_products),
    5: ("non-example plateau", _lattice_plateau),
    6: ("direct product trend", _direct_trend),
    7: ("decomposition identities", _decomposition),
    8: ("Poincare convergence", _poincare),
    9: ("growth sandwich", _sandwich),
    10: ("determinism", _determinism),
}


def run_criterion(number: int) -> tuple[bool, str]:
    name, fn = CRITERIA[number]
    ok, detail = fn()
    RESULTS[number] = (bool(ok), detail)
    return bool(ok), detail


def summary_lines() -> list[str]:
    return [f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA[k][0]}: {detail}"
            for k, (ok, detail) in sorted(RESULTS.items())]


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = run_criterion(number)
    print(f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        run_criterion(k)
        print(summary_lines()[-1], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
