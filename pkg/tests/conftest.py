import sys

import pytest

from rftfl import Instance, all_pairs_distances, generate_corpus, parse_instance

P3_TEXT = "3 2\n1 1 1\n2 1 1\n3 1 1\n1 2 1\n2 3 1\n"
K2_TEXT = "2 1\n1 1 1\n2 1 1\n1 2 1\n"


@pytest.fixture
def p3():
    inst = parse_instance(P3_TEXT)
    return inst, all_pairs_distances(inst)


@pytest.fixture
def k2():
    inst = parse_instance(K2_TEXT)
    return inst, all_pairs_distances(inst)


@pytest.fixture
def star():
    """K_{1,3}: centre 1, leaves 2..4, unit lengths, demands and costs."""
    inst = Instance(4, ((1, 2, 1), (1, 3, 1), (1, 4, 1)), (1, 1, 1, 1), (1, 1, 1, 1))
    return inst, all_pairs_distances(inst)


@pytest.fixture(scope="session")
def small_corpus():
    """40 random connected instances, n in [4, 7], for the unit-level property tests."""
    return [(inst, all_pairs_distances(inst)) for inst in generate_corpus(40, seed=11, n_min=4, n_max=7)]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
