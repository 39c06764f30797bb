from fractions import Fraction

import pytest

from oracles import dihedral_E, free_E, lattice_E
from stathyp.estat import (
    CSV_COLUMNS,
    MissingSeed,
    choose_method,
    convergence_series,
    exact_E,
    records_to_csv,
    sampled_E,
    series_to_dat,
    verdict_for,
)
from stathyp.groups import parse_group
from stathyp.spheres import BudgetExceeded, enumerate_sphere


def exact(text, n, **kw):
    spec = parse_group(text)
    return exact_E(spec, enumerate_sphere(spec, n), **kw)


def test_integers_give_one():
    for n in range(1, 21):
        rec = exact("abelian(1)", n)
        assert rec.exact == 1 and rec.pairs == 4


def test_free_group_small_values():
    assert exact("free(2)", 1).exact == Fraction(3, 2)
    assert exact("free(2)", 2).exact == Fraction(5, 3)
    for n in range(1, 5):
        assert exact("free(2)", n).exact == free_E(2, n)
    assert exact("free(3)", 3).exact == free_E(3, 3)


def test_against_brute_force_oracles():
    for n in range(1, 13):
        assert exact("dihedral_inf", n).exact == dihedral_E(n)
    for n in (1, 2, 5, 9):
        assert exact("abelian(2)", n).exact == lattice_E(2, n)
    assert exact("abelian(3)", 4).exact == lattice_E(3, 4)


def test_isometric_groups_agree():
    for n in range(1, 6):
        assert exact("free_product(free(1),free(1))", n).exact == exact("free(2)", n).exact


def test_backends_agree():
    a = exact("free_product(abelian(2),free(1))", 5, backend="python")
    b = exact("free_product(abelian(2),free(1))", 5)
    assert a.exact == b.exact


def test_exact_guards():
    spec = parse_group("free(2)")
    with pytest.raises(BudgetExceeded):
        exact_E(spec, enumerate_sphere(spec, 5), pair_budget=1000)
    with pytest.raises(ValueError):
        exact_E(spec, enumerate_sphere(spec, 4), 5)
    with pytest.raises(ValueError):
        exact_E(spec, enumerate_sphere(spec, 4, mode="counts_only"))
    with pytest.raises(ValueError):
        exact_E(spec, enumerate_sphere(spec, 0))


@pytest.mark.parametrize("text,n", [("free(2)", 5), ("free_product(abelian(2),free(1))", 4),
                                    ("direct(free(2),cyclic(3))", 4), ("abelian(2)", 8)])
def test_sampled_within_five_sigma_of_exact(text, n):
    truth = float(exact(text, n).exact)
    rec = sampled_E(text, n, 20_000, seed=4)
    assert abs(rec.value - truth) < 5 * rec.stderr
    assert rec.ci95 == pytest.approx(1.959963984540054 * rec.stderr)
    lo, hi = rec.ci
    assert lo < rec.value < hi


def test_sampled_is_thread_invariant():
    a = sampled_E("free_product(abelian(2),free(1))", 20, 10_000, seed=7, threads=1)
    b = sampled_E("free_product(abelian(2),free(1))", 20, 10_000, seed=7, threads=4)
    assert a == b and a.row() == b.row()


def test_sampled_needs_seed_and_samples():
    with pytest.raises(MissingSeed):
        sampled_E("free(2)", 5, 1000)
    with pytest.raises(ValueError):
        sampled_E("free(2)", 5, 10, seed=1)


def test_choose_method():
    spec = parse_group("free(2)")
    assert choose_method(spec, 6, "auto", 10 ** 6) == "exact"
    assert choose_method(spec, 12, "auto", 10 ** 6) == "sampled"
    assert choose_method(spec, 12, "exact", 10) == "exact"
    with pytest.raises(ValueError):
        choose_method(spec, 3, "guess", 10)


def test_verdicts():
    assert verdict_for([1.5, 1.9]) == "inconclusive"
    assert verdict_for([1.80, 1.88, 1.93]) == "trending-to-2"
    assert verdict_for([1.80, 1.84, 1.845]) == "inconclusive"
    assert verdict_for([1.50, 1.51, 1.505]) == "bounded-away"
    assert verdict_for([1.50, 1.55, 1.60]) == "inconclusive"


def test_series_and_outputs():
    series = convergence_series("free(2)", [2, 3, 4, 9], pair_budget=10 ** 5, samples=2000, seed=3)
    assert [r.method for r in series.records] == ["exact", "exact", "exact", "sampled"]
    assert series.mixed
    text = records_to_csv(series.records)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "free(2),2,exact," + repr(5 / 3) + ",144,,,"
    dat = series_to_dat(series).splitlines()
    assert dat[0].startswith("#") and dat[1] == f"2 {5 / 3!r}"
    with pytest.raises(MissingSeed):
        convergence_series("free(2)", [2, 12], pair_budget=10 ** 5)
    with pytest.raises(ValueError):
        convergence_series("free(2)", [3, 2])


def test_square_lattice_closed_form():
    # E_n(Z^2) = 4/3 + 1/(6 n^2), checked against the point-list oracle at small n
    for n in (1, 2, 3, 4, 6):
        assert lattice_E(2, n) == Fraction(4, 3) + Fraction(1, 6 * n * n)
    for n in (10, 20, 40):
        assert exact("abelian(2)", n).exact == Fraction(4, 3) + Fraction(1, 6 * n * n)
