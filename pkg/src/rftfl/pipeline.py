"""Three-stage solvers: UFL first, relocate demands onto the chosen servers,
then buy backups with the concentrated backup sweep."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .backup import BackupInstance, algorithm_conc_bu
from .backup_alpha import DEFAULT_CANDIDATE_CAP, algorithm_conc_alpha_bu
from .costs import CostBreakdown, FacilitySet, as_facility_set, assign, cost_alpha_rftfl, cost_ufl
from .graph import DistanceMatrix, Instance
from .oracle import exact_ufl

EXACT_UFL_LIMIT = 18
LOCAL_SEARCH_TOL = 1e-9

STAGE1_KINDS = ("exact_bruteforce", "local_search")
_ALIASES = {"exact": "exact_bruteforce", "local": "local_search"}


@dataclass(frozen=True)
class Stage1Solver:
    """UFL subroutine for stage 1 and the approximation factor it certifies."""

    kind: str = "exact_bruteforce"
    seed: int = 0
    exact_limit: int = EXACT_UFL_LIMIT

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in STAGE1_KINDS:
            raise ValueError(f"unknown stage-1 solver {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def ratio(self) -> float:
        return 1.0 if self.kind == "exact_bruteforce" else 3.0

    def solve(self, inst: Instance, dist: DistanceMatrix) -> FacilitySet:
        if self.kind == "exact_bruteforce":
            if inst.n > self.exact_limit:
                raise ValueError(f"exact stage 1 limited to n <= {self.exact_limit}, got {inst.n}")
            return ufl_exact(inst, dist, self.exact_limit)
        return ufl_local_search(inst, dist, self.seed)


@dataclass(frozen=True)
class SolveReport:
    alpha: int
    r1: FacilitySet
    r2: FacilitySet
    final: FacilitySet
    cost: CostBreakdown
    stage1_cost: float
    backup_cost: float
    certified_ratio: float
    heuristic: bool = False
    padded: FacilitySet = ()
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def feasible(self) -> bool:
        return self.cost.feasible


def single_failure_bound(rho: float) -> float:
    return 3 * rho + 2


def alpha_failure_bound(rho: float, alpha: int) -> float:
    return rho + 3 * alpha * (1 + rho)


def ufl_exact(inst: Instance, dist: DistanceMatrix, limit: int = EXACT_UFL_LIMIT) -> FacilitySet:
    """Optimal UFL set by enumeration (ties: fewer facilities, then lexicographic)."""
    if inst.n > limit:
        raise ValueError(f"exact UFL limited to n <= {limit}, got {inst.n}")
    return exact_ufl(inst, dist, max_n=limit).best_set


def _ufl_totals(inst: Instance, dist: DistanceMatrix, masks: np.ndarray) -> np.ndarray:
    return masks.astype(np.float64) @ inst.costs + kernels.ship_costs(dist.d, inst.weights, masks)


def ufl_local_search(inst: Instance, dist: DistanceMatrix, seed: int = 0) -> FacilitySet:
    """Add/drop/swap local search for metric UFL.

    Starts from the best single facility and applies the best improving move
    until none gains more than a relative 1e-9. Equal-gain moves are broken
    by an rng seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    n = inst.n
    single = np.eye(n, dtype=np.bool_)
    totals = _ufl_totals(inst, dist, single)
    current = single[int(np.argmin(totals))].copy()
    cost = float(totals.min())
    while True:
        inside = np.flatnonzero(current)
        outside = np.flatnonzero(~current)
        moves = [current.copy() for _ in range(outside.size)]
        for mv, v in zip(moves, outside):
            mv[v] = True
        if inside.size > 1:
            for r in inside:
                mv = current.copy()
                mv[r] = False
                moves.append(mv)
        for r in inside:
            for v in outside:
                mv = current.copy()
                mv[r] = False
                mv[v] = True
                moves.append(mv)
        if not moves:
            break
        cand = np.array(moves)
        values = _ufl_totals(inst, dist, cand)
        best = values.min()
        if not best < cost - LOCAL_SEARCH_TOL * max(abs(cost), 1.0):
            break
        ties = np.flatnonzero(values == best)
        current = cand[int(ties[rng.integers(ties.size)]) if ties.size > 1 else int(ties[0])]
        cost = float(best)
    return tuple(int(v) + 1 for v in np.flatnonzero(current))


def transform_instance(inst: Instance, dist: DistanceMatrix, r1) -> BackupInstance:
    """Move every client's demand onto its stage-1 server and make servers free."""
    r1 = as_facility_set(r1, inst.n)
    if not r1:
        raise ValueError("stage-1 set must be nonempty")
    served = assign(dist, r1)
    demand = [0.0] * inst.n
    for v, r in served.server_of.items():
        demand[r - 1] += inst.demand[v - 1]
    cost = list(inst.opening_cost)
    for r in r1:
        cost[r - 1] = 0.0
    return BackupInstance(inst.with_data(demand, cost), r1)


def _pad(inst: Instance, final: FacilitySet, size: int) -> tuple[FacilitySet, FacilitySet]:
    # only reachable when all demand is zero: no backup is ever required, but a
    # robust solution still needs survivors, so add the cheapest nodes
    spare = sorted((v for v in inst.nodes if v not in final), key=lambda v: (inst.opening_cost[v - 1], v))
    extra = tuple(sorted(spare[: max(0, size - len(final))]))
    return as_facility_set(final + extra), extra


def _solve(inst, dist, s1, alpha, candidate_cap) -> SolveReport:
    if inst.n < alpha + 1:
        raise ValueError(f"need at least {alpha + 1} nodes to survive {alpha} failure(s), got n = {inst.n}")
    timings = {}
    t0 = time.perf_counter()
    r1 = s1.solve(inst, dist)
    stage1_cost = cost_ufl(inst, dist, r1).total
    t1 = time.perf_counter()
    bi = transform_instance(inst, dist, r1)
    t2 = time.perf_counter()
    if alpha == 1:
        sol = algorithm_conc_bu(bi, dist)
        ratio = single_failure_bound(s1.ratio)
    else:
        sol = algorithm_conc_alpha_bu(bi, dist, alpha, candidate_cap)
        ratio = alpha_failure_bound(s1.ratio, alpha)
    t3 = time.perf_counter()
    timings.update(stage1=t1 - t0, transform=t2 - t1, backup=t3 - t2)

    r2 = sol.r2 if sol.feasible else ()
    final = as_facility_set(r1 + r2)
    padded: FacilitySet = ()
    if sol.feasible and len(final) <= alpha:
        final, padded = _pad(inst, final, alpha + 1)
    cost = cost_alpha_rftfl(inst, dist, final, alpha)
    timings["total"] = time.perf_counter() - t0
    if sol.feasible and not padded:
        # composition bound: robust cost <= UFL cost of R1 + concentrated backup cost
        bound = stage1_cost + sol.cost
        if not cost.total <= bound + 1e-9 * max(1.0, abs(bound)):
            raise AssertionError(f"robust cost {cost.total} exceeds stage-1 + backup bound {bound}")
    return SolveReport(
        alpha=alpha,
        r1=r1,
        r2=r2,
        final=final,
        cost=cost,
        stage1_cost=stage1_cost,
        backup_cost=sol.cost,
        certified_ratio=ratio,
        heuristic=sol.heuristic,
        padded=padded,
        timings=timings,
    )


def solve_rftfl(inst: Instance, dist: DistanceMatrix, s1: Stage1Solver | None = None) -> SolveReport:
    """Single-failure solver; certified within 3 * rho + 2 of the optimum."""
    return _solve(inst, dist, s1 or Stage1Solver(), 1, DEFAULT_CANDIDATE_CAP)


def solve_alpha_rftfl(
    inst: Instance,
    dist: DistanceMatrix,
    s1: Stage1Solver | None = None,
    alpha: int = 2,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> SolveReport:
    """alpha-failure solver; certified within rho + 3 * alpha * (1 + rho)."""
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    return _solve(inst, dist, s1 or Stage1Solver(), alpha, candidate_cap)


def solve_ufl(inst: Instance, dist: DistanceMatrix, s1: Stage1Solver | None = None) -> SolveReport:
    """Plain UFL through the stage-1 solver alone (no fault tolerance)."""
    s1 = s1 or Stage1Solver()
    t0 = time.perf_counter()
    r1 = s1.solve(inst, dist)
    cost = cost_ufl(inst, dist, r1)
    return SolveReport(
        alpha=0,
        r1=r1,
        r2=(),
        final=r1,
        cost=cost,
        stage1_cost=cost.total,
        backup_cost=0.0,
        certified_ratio=s1.ratio,
        timings={"stage1": time.perf_counter() - t0, "total": time.perf_counter() - t0},
    )
