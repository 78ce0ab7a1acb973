import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rftfl import (
    Instance,
    InstanceFormatError,
    all_pairs_distances,
    generate_random_instance,
    generate_tree_instance,
    parse_instance,
    serialize_instance,
)
from rftfl.graph import TREE_FAMILIES

from . import naive


def test_parse_k2():
    inst = parse_instance("2 1\n1 1 1\n2 1 1\n1 2 1")
    assert inst.n == 2
    assert inst.demand == (1.0, 1.0)
    assert inst.opening_cost == (1.0, 1.0)
    assert inst.edges == ((1, 2, 1.0),)


def test_parse_ignores_comments_and_blank_lines():
    text = "# a comment\n2 1   # header\n\n1 0 4\n2 2.5 0\n1 2 3  # edge\n"
    inst = parse_instance(text)
    assert inst.demand == (0.0, 2.5)
    assert inst.edges == ((1, 2, 3.0),)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("3 1\n1 1 1\n2 1 1\n1 2 1", "header announces 3 nodes"),
        ("2 1\n1 1 1\n2 1 1\n1 2 0", "nonpositive edge length"),
        ("2 1\n1 1 1\n2 1 1\n1 2 -3", "nonpositive edge length"),
        ("2 1\n1 -1 1\n2 1 1\n1 2 1", "negative demand"),
        ("2 1\n1 1 -2\n2 1 1\n1 2 1", "negative opening cost"),
        ("2 1\n1 1 1\n2 1 1\n1 3 1", "out of range"),
        ("2 1\n1 1 1\n5 1 1\n1 2 1", "out of range"),
        ("2 1\n1 1 1\n2 1 1\n2 2 1", "self-loop"),
        ("2 1\n1 x 1\n2 1 1\n1 2 1", "cannot parse"),
        ("", "empty"),
    ],
)
def test_parse_rejects(text, fragment):
    with pytest.raises(InstanceFormatError, match=fragment):
        parse_instance(text)


def test_parse_error_carries_line_number():
    with pytest.raises(InstanceFormatError) as err:
        parse_instance("2 1\n1 1 1\n2 1 1\n1 2 0")
    assert err.value.line == 4


def test_instance_rejects_bad_data():
    with pytest.raises(ValueError):
        Instance(2, ((1, 2, 0.0),), (1, 1), (1, 1))
    with pytest.raises(ValueError):
        Instance(2, ((1, 1, 1.0),), (1, 1), (1, 1))
    with pytest.raises(ValueError):
        Instance(2, ((1, 2, 1.0),), (1, -1), (1, 1))


def test_distances_p3(p3):
    _, d = p3
    assert d(1, 3) == 2
    assert d(1, 2) == 1
    assert d(2, 2) == 0


def test_distances_k2(k2):
    _, d = k2
    assert d(1, 2) == 1
    assert d(1, 1) == 0


def test_distances_disconnected():
    d = all_pairs_distances(Instance(2, (), (1, 1), (1, 1)))
    assert d(1, 2) == math.inf
    assert d.to_set(1, ()) == math.inf


def test_parallel_edges_keep_shortest():
    d = all_pairs_distances(Instance(2, ((1, 2, 5), (2, 1, 2)), (1, 1), (1, 1)))
    assert d(1, 2) == 2


def _check_metric(inst, d):
    D = d.d
    n = inst.n
    assert np.all(np.diag(D) == 0)
    assert np.array_equal(D, D.T)
    for v in range(n):
        # d(u, w) <= d(u, v) + d(v, w)
        assert np.all(D <= D[:, [v]] + D[[v], :])
    ref = naive.floyd_warshall(inst)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            assert d(u, v) == ref[u, v]


@pytest.mark.parametrize("seed", range(25))
def test_random_instance_metric_invariants(seed):
    n = 5 + seed % 20
    inst = generate_random_instance(n, 0.3, 10, 10, 10, seed)
    d = all_pairs_distances(inst)
    assert np.all(np.isfinite(d.d))
    _check_metric(inst, d)


def test_metric_invariants_up_to_50_nodes():
    inst = generate_random_instance(50, 0.1, 20, 5, 5, seed=99)
    _check_metric(inst, all_pairs_distances(inst))


def test_random_instance_deterministic():
    a = generate_random_instance(5, 0.5, 10, 10, 10, seed=7)
    b = generate_random_instance(5, 0.5, 10, 10, 10, seed=7)
    assert a == b
    assert serialize_instance(a) == serialize_instance(b)
    assert a != generate_random_instance(5, 0.5, 10, 10, 10, seed=8)


def test_random_instance_density_one_is_complete():
    inst = generate_random_instance(10, 1.0, 10, 10, 10, seed=3)
    assert len(inst.edges) == 45
    assert len({(u, v) for u, v, _ in inst.edges}) == 45


def test_random_instance_integer_data():
    inst = generate_random_instance(8, 0.5, 7, 4, 9, seed=1)
    values = [l for _, _, l in inst.edges] + list(inst.demand) + list(inst.opening_cost)
    assert all(float(x).is_integer() for x in values)
    assert all(1 <= l <= 7 for _, _, l in inst.edges)
    assert all(0 <= x <= 4 for x in inst.demand)
    assert all(0 <= x <= 9 for x in inst.opening_cost)


def test_generators_reject_small_n():
    with pytest.raises(ValueError):
        generate_random_instance(1, 0.5, 1, 1, 1, seed=0)
    with pytest.raises(ValueError):
        generate_tree_instance(TREE_FAMILIES[0], 1, 9, seed=0)
    with pytest.raises(ValueError):
        generate_tree_instance("bushes", 4, 9, seed=0)


def test_tree_family_unit_length():
    inst = generate_tree_instance("unit_length_variable_demand", 4, 9, seed=1)
    assert all(l == 1 for _, _, l in inst.edges)
    assert inst.opening_cost == (1.0,) * 4
    assert all(0 <= x <= 9 for x in inst.demand)


def test_tree_family_unit_demand():
    inst = generate_tree_instance("unit_demand_variable_length", 4, 9, seed=1)
    assert inst.demand == (1.0,) * 4
    assert inst.opening_cost == (1.0,) * 4
    assert all(1 <= l <= 9 for _, _, l in inst.edges)


@pytest.mark.parametrize("family", TREE_FAMILIES)
@pytest.mark.parametrize("n", [2, 3, 6, 15])
def test_tree_shape(family, n):
    inst = generate_tree_instance(family, n, 5, seed=n)
    assert len(inst.edges) == n - 1
    assert np.all(np.isfinite(all_pairs_distances(inst).d))


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 12),
    density=st.floats(0.05, 1.0),
    seed=st.integers(0, 2**63 - 1),
)
def test_serialize_roundtrip(n, density, seed):
    inst = generate_random_instance(n, density, 9, 9, 9, seed)
    assert parse_instance(serialize_instance(inst)) == inst


def test_serialize_roundtrip_fractional():
    inst = Instance(3, ((1, 2, 0.1), (2, 3, 2.5)), (0.3, 1, 0), (1e-3, 7, 2.25))
    assert parse_instance(serialize_instance(inst)) == inst


def test_relabel_preserves_distances():
    inst = generate_random_instance(6, 0.5, 9, 9, 9, seed=4)
    perm = [3, 1, 6, 2, 5, 4]
    d = all_pairs_distances(inst)
    e = all_pairs_distances(inst.relabel(perm))
    for u in inst.nodes:
        for v in inst.nodes:
            assert d(u, v) == e(perm[u - 1], perm[v - 1])
