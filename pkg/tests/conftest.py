import sys
from functools import reduce
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from stathyp.groups import parse_group  # noqa: E402

FAMILIES = [
    "free(2)",
    "free(3)",
    "abelian(2)",
    "abelian(3)",
    "cyclic(5)",
    "cyclic(2)",
    "dihedral_inf",
    "lamplighter(2)",
    "lamplighter(3)",
    "free_product(free(1),free(1))",
    "free_product(abelian(2),free(1))",
    "free_product(cyclic(2),cyclic(3))",
    "direct(free(2),cyclic(3))",
    "direct(abelian(1),free(1))",
]


@pytest.fixture(params=FAMILIES)
def spec(request):
    return parse_group(request.param)


def elements(spec, max_word=12):
    """Group elements as products of random generator words."""
    gens = spec.generators
    return st.lists(st.sampled_from(gens), max_size=max_word).map(
        lambda w: reduce(spec.multiply, w, spec.identity()))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
