"""Group families with standard symmetric generating sets.

Every element is an immutable, hashable canonical form (plain tuples and
ints), so equality of forms is equality of group elements:

=====================  ==============================================
family                 canonical form
=====================  ==============================================
``free(r)``            reduced word, tuple of nonzero ints in ``±1..±r``
``abelian(d)``         integer vector, tuple of ``d`` ints
``cyclic(m)``          residue in ``[0, m)``
``dihedral_inf``       alternating word over ``0`` (a) and ``1`` (b)
``free_product(A,B)``  tuple of ``(side, factor_element)`` syllables
``direct(G,H)``        pair ``(g, h)``
``lamplighter(m)``     ``(((pos, val), ...), head)`` with ``val != 0``
=====================  ==============================================
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Hashable, Iterator, Sequence

Element = Hashable


class GroupError(ValueError):
    """Base error for malformed groups and elements."""


class ParseError(GroupError):
    pass


class ElementError(GroupError):
    """Element does not belong to the group variant it was used with."""


# -- byte encodings ---------------------------------------------------------

def _zigzag(v: int) -> int:
    return v * 2 if v >= 0 else -v * 2 - 1


def _unzigzag(u: int) -> int:
    return u // 2 if u % 2 == 0 else -(u + 1) // 2


def write_varint(out: bytearray, u: int) -> None:
    while True:
        b = u & 0x7F
        u >>= 7
        if u:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    shift = result = 0
    while True:
        if pos >= len(buf):
            raise GroupError("truncated varint")
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7


def _encode_ints(values: Sequence[int]) -> bytes:
    out = bytearray()
    for v in values:
        write_varint(out, _zigzag(v))
    return bytes(out)


def _decode_ints(buf: bytes) -> list[int]:
    pos, values = 0, []
    while pos < len(buf):
        u, pos = read_varint(buf, pos)
        values.append(_unzigzag(u))
    return values


# -- base class -------------------------------------------------------------

class GroupSpec:
    """A group together with its fixed standard generating set.

    Subclasses are frozen dataclasses; ``str(spec)`` is the config grammar
    string and round-trips through :func:`parse_group`.
    """

    finite: bool = False

    # group law -------------------------------------------------------------
    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, x: Element, y: Element) -> Element:
        raise NotImplementedError

    def inverse(self, x: Element) -> Element:
        raise NotImplementedError

    def word_length(self, x: Element) -> int:
        raise NotImplementedError

    def check(self, x: Element) -> None:
        """Raise :class:`ElementError` unless ``x`` is a canonical element."""
        raise NotImplementedError

    def encode(self, x: Element) -> bytes:
        raise NotImplementedError

    def decode(self, buf: bytes) -> Element:
        raise NotImplementedError

    def _generators(self) -> tuple[Element, ...]:
        raise NotImplementedError

    # shared machinery ------------------------------------------------------
    @cached_property
    def generators(self) -> tuple[Element, ...]:
        return self._generators()

    @cached_property
    def inverse_index(self) -> tuple[int, ...]:
        gens = self.generators
        pos = {g: i for i, g in enumerate(gens)}
        return tuple(pos[self.inverse(g)] for g in gens)

    def distance(self, x: Element, y: Element) -> int:
        return self.word_length(self.multiply(self.inverse(x), y))

    def canonicalize(self, x: Element) -> Element:
        self.check(x)
        return x

    def is_element(self, x: Element) -> bool:
        try:
            self.check(x)
        except (ElementError, TypeError):
            return False
        return True

    def neighbors(self, x: Element) -> Iterator[Element]:
        mul = self.multiply
        for s in self.generators:
            yield mul(x, s)

    def __str__(self) -> str:
        raise NotImplementedError


def _expect(cond: bool, spec: GroupSpec, x: Any) -> None:
    if not cond:
        raise ElementError(f"{x!r} is not a canonical element of {spec}")


# -- free groups ------------------------------------------------------------

@dataclass(frozen=True)
class Free(GroupSpec):
    rank: int

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise GroupError(f"free group rank must be >= 1, got {self.rank!r}")

    def __str__(self):
        return f"free({self.rank})"

    def _generators(self):
        return tuple((s * i,) for i in range(1, self.rank + 1) for s in (1, -1))

    def identity(self):
        return ()

    def check(self, x):
        _expect(isinstance(x, tuple), self, x)
        prev = 0
        for c in x:
            _expect(type(c) is int and c != 0 and abs(c) <= self.rank and c != -prev, self, x)
            prev = c

    def multiply(self, x, y):
        i, m = len(x), min(len(x), len(y))
        k = 0
        while k < m and x[i - 1 - k] == -y[k]:
            k += 1
        return x[: i - k] + y[k:]

    def inverse(self, x):
        return tuple(-c for c in reversed(x))

    def word_length(self, x):
        return len(x)

    def distance(self, x, y):
        m = min(len(x), len(y))
        k = 0
        while k < m and x[k] == y[k]:
            k += 1
        return len(x) + len(y) - 2 * k

    def encode(self, x):
        return _encode_ints(x)

    def decode(self, buf):
        x = tuple(_decode_ints(buf))
        self.check(x)
        return x


@dataclass(frozen=True)
class FreeAbelian(GroupSpec):
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise GroupError(f"abelian dimension must be >= 1, got {self.dim!r}")

    def __str__(self):
        return f"abelian({self.dim})"

    def _generators(self):
        gens = []
        for i in range(self.dim):
            for s in (1, -1):
                v = [0] * self.dim
                v[i] = s
                gens.append(tuple(v))
        return tuple(gens)

    def identity(self):
        return (0,) * self.dim

    def check(self, x):
        _expect(isinstance(x, tuple) and len(x) == self.dim
                and all(type(c) is int for c in x), self, x)

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inverse(self, x):
        return tuple(-a for a in x)

    def word_length(self, x):
        return sum(abs(a) for a in x)

    def distance(self, x, y):
        return sum(abs(a - b) for a, b in zip(x, y))

    def encode(self, x):
        return _encode_ints(x)

    def decode(self, buf):
        x = tuple(_decode_ints(buf))
        self.check(x)
        return x


@dataclass(frozen=True)
class Cyclic(GroupSpec):
    order: int
    finite = True

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 2:
            raise GroupError(f"cyclic order must be >= 2, got {self.order!r}")

    def __str__(self):
        return f"cyclic({self.order})"

    def _generators(self):
        # order 2: the generator is an involution, listed once
        return (1,) if self.order == 2 else (1, self.order - 1)

    def identity(self):
        return 0

    def check(self, x):
        _expect(type(x) is int and 0 <= x < self.order, self, x)

    def multiply(self, x, y):
        return (x + y) % self.order

    def inverse(self, x):
        return (-x) % self.order

    def word_length(self, x):
        return min(x, self.order - x)

    def encode(self, x):
        out = bytearray()
        write_varint(out, x)
        return bytes(out)

    def decode(self, buf):
        x, pos = read_varint(buf, 0)
        if pos != len(buf):
            raise GroupError("trailing bytes in cyclic encoding")
        self.check(x)
        return x


@dataclass(frozen=True)
class InfiniteDihedral(GroupSpec):
    """``<a, b | a^2 = b^2 = 1>``; letters ``0`` (a) and ``1`` (b)."""

    def __str__(self):
        return "dihedral_inf"

    def _generators(self):
        return ((0,), (1,))

    def identity(self):
        return ()

    def check(self, x):
        _expect(isinstance(x, tuple), self, x)
        for i, c in enumerate(x):
            _expect(c in (0, 1) and type(c) is int and (i == 0 or c != x[i - 1]), self, x)

    def multiply(self, x, y):
        i, m = len(x), min(len(x), len(y))
        k = 0
        while k < m and x[i - 1 - k] == y[k]:
            k += 1
        return x[: i - k] + y[k:]

    def inverse(self, x):
        return tuple(reversed(x))

    def word_length(self, x):
        return len(x)

    def distance(self, x, y):
        return len(self.multiply(self.inverse(x), y))

    def encode(self, x):
        return bytes(x)

    def decode(self, buf):
        x = tuple(buf)
        self.check(x)
        return x


# -- products ---------------------------------------------------------------

@dataclass(frozen=True)
class FreeProduct(GroupSpec):
    """Free product ``left * right``; generating set is the disjoint union.

    Elements are alternating syllable tuples ``((side, g), ...)`` where side
    0 is the left factor and no ``g`` is the factor identity.
    """

    left: GroupSpec
    right: GroupSpec

    def __post_init__(self):
        for f in (self.left, self.right):
            if not isinstance(f, GroupSpec):
                raise GroupError(f"free product factor {f!r} is not a GroupSpec")

    def __str__(self):
        return f"free_product({self.left},{self.right})"

    @property
    def factors(self) -> tuple[GroupSpec, GroupSpec]:
        return (self.left, self.right)

    def _generators(self):
        return tuple(((0, g),) for g in self.left.generators) + tuple(
            ((1, h),) for h in self.right.generators)

    def identity(self):
        return ()

    def check(self, x):
        _expect(isinstance(x, tuple), self, x)
        prev = None
        for syl in x:
            _expect(isinstance(syl, tuple) and len(syl) == 2 and syl[0] in (0, 1)
                    and syl[0] != prev, self, x)
            side, g = syl
            f = self.factors[side]
            f.check(g)
            _expect(g != f.identity(), self, x)
            prev = side

    def multiply(self, x, y):
        out = list(x)
        factors = self.factors
        for side, g in y:
            if out and out[-1][0] == side:
                f = factors[side]
                merged = f.multiply(out.pop()[1], g)
                if merged != f.identity():
                    out.append((side, merged))
            else:
                out.append((side, g))
        return tuple(out)

    def inverse(self, x):
        factors = self.factors
        return tuple((side, factors[side].inverse(g)) for side, g in reversed(x))

    def word_length(self, x):
        factors = self.factors
        return sum(factors[side].word_length(g) for side, g in x)

    def distance(self, x, y):
        m = min(len(x), len(y))
        k = 0
        while k < m and x[k] == y[k]:
            k += 1
        factors = self.factors
        d = sum(factors[s].word_length(g) for s, g in x[k:])
        d += sum(factors[s].word_length(g) for s, g in y[k:])
        if k < len(x) and k < len(y) and x[k][0] == y[k][0]:
            f = factors[x[k][0]]
            u, v = x[k][1], y[k][1]
            d += f.distance(u, v) - f.word_length(u) - f.word_length(v)
        return d

    def encode(self, x):
        out = bytearray()
        for side, g in x:
            enc = self.factors[side].encode(g)
            out.append(side)
            write_varint(out, len(enc))
            out += enc
        return bytes(out)

    def decode(self, buf):
        pos, syls = 0, []
        while pos < len(buf):
            side = buf[pos]
            if side not in (0, 1):
                raise GroupError("bad syllable side in free product encoding")
            size, pos = read_varint(buf, pos + 1)
            syls.append((side, self.factors[side].decode(bytes(buf[pos:pos + size]))))
            pos += size
        x = tuple(syls)
        self.check(x)
        return x


@dataclass(frozen=True)
class SplitDirectProduct(GroupSpec):
    """Direct product with a split generating set (each generator in one factor)."""

    left: GroupSpec
    right: GroupSpec

    def __post_init__(self):
        for f in (self.left, self.right):
            if not isinstance(f, GroupSpec):
                raise GroupError(f"direct product factor {f!r} is not a GroupSpec")

    @property
    def finite(self):  # type: ignore[override]
        return self.left.finite and self.right.finite

    def __str__(self):
        return f"direct({self.left},{self.right})"

    @property
    def factors(self) -> tuple[GroupSpec, GroupSpec]:
        return (self.left, self.right)

    def _generators(self):
        eg, eh = self.left.identity(), self.right.identity()
        return tuple((g, eh) for g in self.left.generators) + tuple(
            (eg, h) for h in self.right.generators)

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def check(self, x):
        _expect(isinstance(x, tuple) and len(x) == 2, self, x)
        self.left.check(x[0])
        self.right.check(x[1])

    def multiply(self, x, y):
        return (self.left.multiply(x[0], y[0]), self.right.multiply(x[1], y[1]))

    def inverse(self, x):
        return (self.left.inverse(x[0]), self.right.inverse(x[1]))

    def word_length(self, x):
        # additive because the generating set is split
        return self.left.word_length(x[0]) + self.right.word_length(x[1])

    def distance(self, x, y):
        return self.left.distance(x[0], y[0]) + self.right.distance(x[1], y[1])

    def encode(self, x):
        enc = self.left.encode(x[0])
        out = bytearray()
        write_varint(out, len(enc))
        return bytes(out) + enc + self.right.encode(x[1])

    def decode(self, buf):
        size, pos = read_varint(buf, 0)
        g = self.left.decode(bytes(buf[pos:pos + size]))
        h = self.right.decode(bytes(buf[pos + size:]))
        return (g, h)


# -- lamplighter ------------------------------------------------------------

@dataclass(frozen=True)
class Lamplighter(GroupSpec):
    """``Z_m wr Z`` with generators ``a`` (toggle lamp at head) and ``t`` (step right).

    Right multiplication ``(f, h)(g, k) = (f + g(. - h), h + k)``.
    """

    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 2:
            raise GroupError(f"lamp modulus must be >= 2, got {self.modulus!r}")

    def __str__(self):
        return f"lamplighter({self.modulus})"

    def _generators(self):
        m = self.modulus
        gens = [(((0, 1),), 0)]
        if m > 2:
            gens.append((((0, m - 1),), 0))
        gens += [((), 1), ((), -1)]
        return tuple(gens)

    def identity(self):
        return ((), 0)

    def check(self, x):
        _expect(isinstance(x, tuple) and len(x) == 2 and type(x[1]) is int
                and isinstance(x[0], tuple), self, x)
        prev = None
        for item in x[0]:
            _expect(isinstance(item, tuple) and len(item) == 2, self, x)
            pos, val = item
            _expect(type(pos) is int and type(val) is int and 0 < val < self.modulus
                    and (prev is None or pos > prev), self, x)
            prev = pos

    def multiply(self, x, y):
        lamps, head = x
        if not y[0]:
            return (lamps, head + y[1])
        m = self.modulus
        conf = dict(lamps)
        for pos, val in y[0]:
            p = pos + head
            v = (conf.get(p, 0) + val) % m
            if v:
                conf[p] = v
            else:
                conf.pop(p, None)
        return (tuple(sorted(conf.items())), head + y[1])

    def inverse(self, x):
        lamps, head = x
        m = self.modulus
        return (tuple((pos - head, (-val) % m) for pos, val in lamps), -head)

    def closed_form_length(self, x) -> int:
        lamps, head = x
        m = self.modulus
        cost = sum(min(v, m - v) for _, v in lamps)
        lo = min(0, head, lamps[0][0]) if lamps else min(0, head)
        hi = max(0, head, lamps[-1][0]) if lamps else max(0, head)
        # left sweep first vs right sweep first, ending at the head position
        tour = min(-lo + (hi - lo) + (hi - head), hi + (hi - lo) + (head - lo))
        return cost + tour

    def word_length(self, x):
        if _lamplighter_formula_ok(self.modulus):
            return self.closed_form_length(x)
        return bfs_distance(self, self.identity(), x, cap=None)

    def encode(self, x):
        flat = [x[1]]
        for pos, val in x[0]:
            flat += [pos, val]
        return _encode_ints(flat)

    def decode(self, buf):
        flat = _decode_ints(buf)
        if not flat or len(flat) % 2 != 1:
            raise GroupError("malformed lamplighter encoding")
        x = (tuple(zip(flat[1::2], flat[2::2])), flat[0])
        self.check(x)
        return x


LAMPLIGHTER_VALIDATION_RADIUS = 10
LAMPLIGHTER_VALIDATION_BUDGET = 400_000
_lamplighter_validated: dict[int, bool] = {}


def validate_lamplighter_formula(modulus: int, radius: int = LAMPLIGHTER_VALIDATION_RADIUS,
                                 budget: int = LAMPLIGHTER_VALIDATION_BUDGET) -> int:
    """Compare the closed-form lamplighter length against BFS on a ball.

    The ball is grown layer by layer up to ``radius`` or until it would exceed
    ``budget`` elements. Returns the radius actually checked; raises
    ``AssertionError`` on the first mismatch.
    """
    spec = Lamplighter(modulus)
    checked = -1
    for k, layer in enumerate(bfs_layers(spec, radius, budget=budget)):
        for x in layer:
            if spec.closed_form_length(x) != k:
                raise AssertionError(f"lamplighter({modulus}) formula wrong at {x!r}: "
                                     f"{spec.closed_form_length(x)} != {k}")
        checked = k
    return checked


def _lamplighter_formula_ok(modulus: int) -> bool:
    ok = _lamplighter_validated.get(modulus)
    if ok is None:
        try:
            validate_lamplighter_formula(modulus)
            ok = True
        except AssertionError:
            ok = False
        _lamplighter_validated[modulus] = ok
    return ok


# -- BFS oracles ------------------------------------------------------------

def bfs_layers(spec: GroupSpec, radius: int, budget: int | None = None) -> Iterator[set]:
    """Yield the spheres ``S_0, S_1, ...`` by plain BFS using only the group law.

    Stops after ``radius`` or before the ball would exceed ``budget`` elements.
    """
    prev: set = set()
    cur = {spec.identity()}
    total = 1
    yield cur
    for _ in range(radius):
        nxt = set()
        for x in cur:
            for y in spec.neighbors(x):
                if y not in cur and y not in prev:
                    nxt.add(y)
        if not nxt:
            return
        total += len(nxt)
        if budget is not None and total > budget:
            return
        prev, cur = cur, nxt
        yield cur


def bfs_ball(spec: GroupSpec, radius: int) -> dict:
    """Map every element of the ball of ``radius`` to its graph distance from 1."""
    ball = {}
    for k, layer in enumerate(bfs_layers(spec, radius)):
        for x in layer:
            ball[x] = k
    return ball


def bfs_distance(spec: GroupSpec, x: Element, y: Element, cap: int | None = 12) -> int | None:
    """Graph distance in the Cayley graph by bidirectional BFS.

    Only the group law and generators are used, so this is independent of
    every closed-form ``word_length``. Returns ``None`` when the distance
    exceeds ``cap``.
    """
    spec.check(x)
    spec.check(y)
    if x == y:
        return 0
    if cap is not None and cap <= 0:
        return None
    # right multiplication by generators is the edge relation
    dist_a, dist_b = {x: 0}, {y: 0}
    front_a, front_b = deque([x]), deque([y])
    depth_a = depth_b = 0
    while front_a and front_b:
        if len(front_a) <= len(front_b):
            depth_a += 1
            found = _expand(spec, front_a, dist_a, dist_b, depth_a)
        else:
            depth_b += 1
            found = _expand(spec, front_b, dist_b, dist_a, depth_b)
        if found is not None:
            return found if cap is None or found <= cap else None
        if cap is not None and depth_a + depth_b >= cap:
            return None
    return None


def _expand(spec, front, mine, other, depth):
    best = None
    for _ in range(len(front)):
        u = front.popleft()
        for v in spec.neighbors(u):
            if v in mine:
                continue
            mine[v] = depth
            if v in other:
                d = depth + other[v]
                if best is None or d < best:
                    best = d
            front.append(v)
    return best


# -- config grammar ---------------------------------------------------------

_ATOMS = {
    "free": Free,
    "abelian": FreeAbelian,
    "cyclic": Cyclic,
    "lamplighter": Lamplighter,
}
_BINARY = {
    "free_product": FreeProduct,
    "direct": SplitDirectProduct,
}


def parse_group(text: str) -> GroupSpec:
    """Parse the group grammar, e.g. ``"direct(free(2),cyclic(3))"``.

    ::

        group := "free(" int ")" | "abelian(" int ")" | "cyclic(" int ")"
               | "dihedral_inf" | "lamplighter(" int ")"
               | "free_product(" group "," group ")" | "direct(" group "," group ")"

    Whitespace is ignored.
    """
    src = "".join(str(text).split())
    spec, pos = _parse(src, 0)
    if pos != len(src):
        raise ParseError(f"unexpected trailing input at {pos} in {text!r}")
    return spec


def _parse(src: str, pos: int) -> tuple[GroupSpec, int]:
    end = pos
    while end < len(src) and (src[end].isalpha() or src[end] == "_"):
        end += 1
    name = src[pos:end]
    if not name:
        raise ParseError(f"expected a group name at {pos} in {src!r}")
    if name == "dihedral_inf":
        return InfiniteDihedral(), end
    if end >= len(src) or src[end] != "(":
        raise ParseError(f"expected '(' after {name!r} in {src!r}")
    pos = end + 1
    if name in _ATOMS:
        close = src.find(")", pos)
        if close < 0:
            raise ParseError(f"unclosed '(' in {src!r}")
        arg = src[pos:close]
        if not arg.isdigit():
            raise ParseError(f"{name} needs a positive integer argument, got {arg!r}")
        try:
            return _ATOMS[name](int(arg)), close + 1
        except GroupError as exc:
            raise ParseError(str(exc)) from exc
    if name in _BINARY:
        left, pos = _parse(src, pos)
        if pos >= len(src) or src[pos] != ",":
            raise ParseError(f"expected ',' at {pos} in {src!r}")
        right, pos = _parse(src, pos + 1)
        if pos >= len(src) or src[pos] != ")":
            raise ParseError(f"expected ')' at {pos} in {src!r}")
        return _BINARY[name](left, right), pos + 1
    raise ParseError(f"unknown group family {name!r}")


def as_spec(spec: GroupSpec | str) -> GroupSpec:
    return parse_group(spec) if isinstance(spec, str) else spec
