import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import FAMILIES, elements
from oracles import affine_of_word, affine_lengths, free_distance, free_reduce
from stathyp.groups import (
    Cyclic,
    ElementError,
    Free,
    FreeAbelian,
    FreeProduct,
    GroupError,
    InfiniteDihedral,
    Lamplighter,
    ParseError,
    bfs_distance,
    bfs_layers,
    parse_group,
    read_varint,
    validate_lamplighter_formula,
    write_varint,
)

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@pytest.mark.parametrize("text", FAMILIES)
def test_group_string_round_trips(text):
    spec = parse_group(text)
    assert str(spec) == text
    assert parse_group(str(spec)) == spec
    assert parse_group(text.replace(",", " , ").replace("(", " ( ")) == spec


@pytest.mark.parametrize("bad", ["free(0)", "free(", "cyclic(1)", "torus(2)", "free(2) x",
                                 "direct(free(2))", "", "abelian(-1)", "lamplighter(1)"])
def test_parse_rejects(bad):
    with pytest.raises(GroupError):
        parse_group(bad)


@pytest.mark.parametrize("text", FAMILIES)
def test_metric_axioms(text):
    spec = parse_group(text)

    @SETTINGS
    @given(elements(spec), elements(spec), elements(spec))
    def check(x, y, z):
        d = spec.distance
        assert d(x, x) == 0
        assert d(x, y) == d(y, x) >= 0
        assert (d(x, y) == 0) == (x == y)
        assert d(x, z) <= d(x, y) + d(y, z)
        # left invariance
        assert d(spec.multiply(z, x), spec.multiply(z, y)) == d(x, y)
        assert spec.word_length(x) == d(spec.identity(), x)
        assert spec.multiply(x, spec.inverse(x)) == spec.identity()
        assert spec.decode(spec.encode(x)) == x

    check()


@pytest.mark.parametrize("text", FAMILIES)
def test_word_length_matches_bfs_on_ball(text):
    spec = parse_group(text)
    for depth, layer in enumerate(bfs_layers(spec, 5)):
        for x in layer:
            assert spec.word_length(x) == depth


@pytest.mark.parametrize("text", ["free(2)", "free_product(abelian(2),free(1))", "lamplighter(2)",
                                  "direct(free(2),cyclic(3))"])
def test_bfs_distance_between_pairs(text):
    spec = parse_group(text)

    @settings(max_examples=25, deadline=None)
    @given(elements(spec, 5), elements(spec, 5))
    def check(x, y):
        assert bfs_distance(spec, x, y, cap=10) == spec.distance(x, y)

    check()


def test_bfs_distance_cap():
    f2 = Free(2)
    ab, ba = (1, 2), (2, 1)
    assert bfs_distance(f2, ab, ba, cap=10) == 4
    assert bfs_distance(f2, ab, ba, cap=2) is None
    assert bfs_distance(f2, ab, ab, cap=0) == 0


@SETTINGS
@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=15),
       st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=15))
def test_free_against_reduction_oracle(u, v):
    f3 = Free(3)
    x, y = free_reduce(u), free_reduce(v)
    assert f3.distance(x, y) == free_distance(x, y)
    assert f3.multiply(x, y) == free_reduce(x + y)


def test_dihedral_against_affine_model():
    d = InfiniteDihedral()
    lengths = affine_lengths(9)
    for depth, layer in enumerate(bfs_layers(d, 8)):
        for x in layer:
            assert lengths[affine_of_word(x)] == depth == d.word_length(x)


def test_free_product_of_two_lines_is_isometric_to_free_group():
    zz = parse_group("free_product(free(1),free(1))")
    f2 = Free(2)

    # x in Z*Z has syllables (side, (k,)) with k an integer power
    def flatten(x):
        word = []
        for side, g in x:
            for c in g:
                word.append((side + 1) * (1 if c > 0 else -1))
        return tuple(word)

    layers = list(bfs_layers(zz, 4))
    ball = [x for layer in layers for x in layer]
    for x in ball[::7]:
        for y in ball[::5]:
            assert zz.distance(x, y) == f2.distance(flatten(x), flatten(y))


def test_cyclic_and_abelian_lengths():
    assert Cyclic(7).word_length(3) == 3
    assert Cyclic(7).word_length(5) == 2
    assert len(Cyclic(2).generators) == 1
    assert FreeAbelian(3).word_length((1, -2, 3)) == 6


def test_free_product_syllables_merge():
    g = parse_group("free_product(abelian(2),free(1))")
    x = ((0, (1, 0)), (1, (1,)))
    y = ((1, (-1,)), (0, (-1, 2)))
    assert g.multiply(x, y) == ((0, (0, 2)),)
    assert g.word_length(x) == 2
    with pytest.raises(ElementError):
        g.check(((0, (1, 0)), (0, (0, 1))))
    with pytest.raises(ElementError):
        g.check(((0, (0, 0)),))


def test_lamplighter_examples():
    L = Lamplighter(2)
    assert L.inverse((((0, 1),), 1)) == (((-1, 1),), -1)
    # light lamps at 0 and 3, return to 0: 2 toggles + 6 moves
    assert L.word_length((((0, 1), (3, 1)), 0)) == 8
    # lamps at -2 and 2, head ends at 2: go left first
    assert L.word_length((((-2, 1), (2, 1)), 2)) == 2 + 2 + 4
    for m in (2, 3, 4):
        assert validate_lamplighter_formula(m, radius=7)


@pytest.mark.parametrize("u", [0, 1, 127, 128, 300, 2 ** 40])
def test_varint_round_trip(u):
    buf = bytearray()
    write_varint(buf, u)
    assert read_varint(bytes(buf), 0) == (u, len(buf))


def test_invalid_elements_rejected(spec):
    with pytest.raises(GroupError):
        spec.check("not an element")
    assert not spec.is_element(object())
