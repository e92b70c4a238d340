from importlib.resources import files

import pytest

from mcfglearn.grammar import parse_grammar
from mcfglearn.monoid import parse_dfa, parse_monoid, transition_monoid
from mcfglearn.refinement import build_trimmed_refinement
from mcfglearn.sampler import characteristic_sample

DATA = files("mcfglearn") / "data"


def data_path(name: str) -> str:
    return str(DATA / name)


def read(name: str) -> str:
    return (DATA / name).read_text()


@pytest.fixture(scope="session")
def z2():
    """Two-element group with a -> s, b -> e."""
    return parse_monoid(read("z2.monoid"))[1]


@pytest.fixture(scope="session")
def z2_abc():
    return parse_monoid(read("z2_abc.monoid"))[1]


@pytest.fixture(scope="session")
def l3_dfa():
    return parse_dfa(read("l3.dfa"))


@pytest.fixture(scope="session")
def h_l3(l3_dfa):
    return transition_monoid(l3_dfa)[1]


@pytest.fixture(scope="session")
def l3(h_l3):
    return parse_grammar(read("l3.grammar"), tuple(h_l3.alphabet))


@pytest.fixture(scope="session")
def swap(z2_abc):
    return parse_grammar(read("swap.grammar"), tuple(z2_abc.alphabet))


@pytest.fixture(scope="session")
def tg_l3(l3, h_l3):
    return build_trimmed_refinement(l3, h_l3, 2)


@pytest.fixture(scope="session")
def tg_swap(swap, z2_abc):
    return build_trimmed_refinement(swap, z2_abc, 2)


@pytest.fixture(scope="session")
def cs_l3(tg_l3):
    return characteristic_sample(tg_l3)


@pytest.fixture(scope="session")
def cs_swap(tg_swap):
    return characteristic_sample(tg_swap)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s[6:8])):
            terminalreporter.write_line(line)
