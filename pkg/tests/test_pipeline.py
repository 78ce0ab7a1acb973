import math
import random

import pytest

from rftfl import (
    Instance,
    Stage1Solver,
    all_pairs_distances,
    cost_alpha_rftfl,
    cost_rftfl,
    cost_ufl,
    exact_alpha_rftfl,
    exact_rftfl,
    exact_ufl,
    generate_random_instance,
    solve_alpha_rftfl,
    solve_rftfl,
    transform_instance,
    ufl_exact,
    ufl_local_search,
)
from rftfl.pipeline import alpha_failure_bound, single_failure_bound

from . import naive


def test_ufl_exact_p3(p3):
    inst, d = p3
    ref = naive.floyd_warshall(inst)
    assert naive.brute_min(naive.subsets(inst.nodes, 1), lambda R: naive.ufl(inst, ref, R)) == (3.0, (2,))
    assert ufl_exact(inst, d) == (2,)


def test_ufl_exact_k2_prefers_fewer(k2):
    assert ufl_exact(*k2) == (1,)


def test_ufl_exact_single_node():
    inst = Instance(1, (), (1,), (5,))
    d = all_pairs_distances(inst)
    assert ufl_exact(inst, d) == (1,)
    assert cost_ufl(inst, d, (1,)).total == 5


def test_ufl_exact_limit(p3):
    with pytest.raises(ValueError):
        ufl_exact(*p3, limit=2)


def test_local_search_p3(p3):
    inst, d = p3
    R = ufl_local_search(inst, d, seed=0)
    assert cost_ufl(inst, d, R).total == 3.0


def test_local_search_is_local_optimum(small_corpus):
    for inst, d in small_corpus:
        R = ufl_local_search(inst, d, seed=1)
        cost = cost_ufl(inst, d, R).total
        assert cost >= exact_ufl(inst, d).best_cost
        assert cost <= 3 * exact_ufl(inst, d).best_cost
        inside, outside = set(R), set(inst.nodes) - set(R)
        neighbours = [inside | {v} for v in outside]
        neighbours += [inside - {r} for r in inside if len(inside) > 1]
        neighbours += [(inside - {r}) | {v} for r in inside for v in outside]
        for S in neighbours:
            assert cost_ufl(inst, d, tuple(S)).total >= cost * (1 - 1e-9) - 1e-9


def test_local_search_deterministic():
    inst = generate_random_instance(12, 0.3, 9, 9, 9, seed=21)
    d = all_pairs_distances(inst)
    assert ufl_local_search(inst, d, seed=4) == ufl_local_search(inst, d, seed=4)


def test_transform_p3(p3):
    inst, d = p3
    bi = transform_instance(inst, d, (2,))
    assert bi.base.demand == (0.0, 3.0, 0.0)
    assert bi.base.opening_cost == (1.0, 0.0, 1.0)
    bi = transform_instance(inst, d, (1, 3))
    assert bi.base.demand == (2.0, 0.0, 1.0)
    assert bi.base.opening_cost == (0.0, 1.0, 0.0)


def test_transform_conserves_demand(small_corpus):
    for inst, d in small_corpus:
        for R1 in naive.subsets(inst.nodes, 1):
            bi = transform_instance(inst, d, R1)
            assert sum(bi.base.demand) == sum(inst.demand)
            assert all(bi.base.demand[v - 1] == 0 for v in inst.nodes if v not in R1)


def test_transform_rejects_empty(p3):
    with pytest.raises(ValueError):
        transform_instance(*p3, ())


def test_solve_p3(p3):
    inst, d = p3
    rep = solve_rftfl(inst, d, Stage1Solver("exact_bruteforce"))
    assert (rep.r1, rep.r2, rep.final) == ((2,), (1,), (1, 2))
    assert rep.cost.total == 5.0
    assert exact_rftfl(inst, d).best_cost == 4.0
    assert rep.certified_ratio == 5.0
    assert rep.cost.total / 4.0 == 1.25


def test_solve_k2(k2):
    inst, d = k2
    rep = solve_rftfl(inst, d)
    assert rep.r1 == (1,)
    assert rep.r2 == (2,)
    assert rep.final == (1, 2)
    assert rep.cost.total == cost_rftfl(inst, d, (1, 2)).total == 3.0
    assert rep.backup_cost == 3.0


def test_solve_single_node_rejected():
    inst = Instance(1, (), (1,), (1,))
    with pytest.raises(ValueError):
        solve_rftfl(inst, all_pairs_distances(inst))


def test_solve_alpha_star(star):
    inst, d = star
    rep = solve_alpha_rftfl(inst, d, Stage1Solver(), alpha=2)
    opt = exact_alpha_rftfl(inst, d, 2).best_cost
    assert len(rep.final) >= 3
    assert opt <= rep.cost.total <= 13 * opt
    assert rep.certified_ratio == 13


def test_solve_alpha_too_small(p3):
    with pytest.raises(ValueError):
        solve_alpha_rftfl(*p3, alpha=3)


def test_zero_demand_is_padded():
    inst = generate_random_instance(5, 0.5, 9, 0, 9, seed=2)
    d = all_pairs_distances(inst)
    for alpha in (1, 2):
        rep = solve_alpha_rftfl(inst, d, alpha=alpha)
        assert rep.feasible
        assert len(rep.final) == alpha + 1
        assert rep.cost.total == exact_alpha_rftfl(inst, d, alpha).best_cost


def test_bounds():
    assert single_failure_bound(1.5) == 6.5
    assert alpha_failure_bound(1.5, 3) == 1.5 + 7.5 * 3
    assert alpha_failure_bound(1.0, 2) == 13


def test_stage1_solver_kinds():
    assert Stage1Solver("exact").kind == "exact_bruteforce"
    assert Stage1Solver("exact").ratio == 1
    assert Stage1Solver("local_search").ratio == 3
    with pytest.raises(ValueError):
        Stage1Solver("lp")


def test_exact_stage1_limit():
    inst = generate_random_instance(8, 0.3, 9, 9, 9, seed=1)
    with pytest.raises(ValueError):
        solve_rftfl(inst, all_pairs_distances(inst), Stage1Solver("exact", exact_limit=6))


def test_reported_cost_is_recomputed(small_corpus):
    for inst, d in small_corpus:
        for s1 in (Stage1Solver("exact"), Stage1Solver("local_search", seed=2)):
            rep = solve_rftfl(inst, d, s1)
            assert rep.final == tuple(sorted(set(rep.r1) | set(rep.r2)))
            assert rep.cost == cost_rftfl(inst, d, rep.final)
            assert rep.stage1_cost == cost_ufl(inst, d, rep.r1).total


def test_end_to_end_bounds_small(small_corpus):
    for inst, d in small_corpus:
        for s1 in (Stage1Solver("exact"), Stage1Solver("local_search", seed=0)):
            opt_ufl = exact_ufl(inst, d).best_cost
            rep = solve_rftfl(inst, d, s1)
            opt = exact_rftfl(inst, d).best_cost
            assert rep.stage1_cost <= s1.ratio * opt_ufl <= s1.ratio * opt
            assert rep.cost.total <= single_failure_bound(s1.ratio) * opt
            for alpha in (2,):
                rep = solve_alpha_rftfl(inst, d, s1, alpha)
                assert rep.cost.total <= alpha_failure_bound(s1.ratio, alpha) * exact_alpha_rftfl(inst, d, alpha).best_cost


def test_solver_deterministic(small_corpus):
    for inst, d in small_corpus[:5]:
        a = solve_alpha_rftfl(inst, d, Stage1Solver("local_search", seed=9), 2)
        b = solve_alpha_rftfl(inst, d, Stage1Solver("local_search", seed=9), 2)
        assert a == b


def test_local_search_scales():
    inst = generate_random_instance(40, 0.1, 20, 10, 40, seed=5)
    d = all_pairs_distances(inst)
    rep = solve_rftfl(inst, d, Stage1Solver("local_search"))
    assert rep.feasible
    assert math.isfinite(rep.cost.total)
