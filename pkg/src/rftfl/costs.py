"""Cost functions for UFL, single-failure RFTFL and alpha-failure RFTFL.

Facility sets are sorted tuples of 1-based node ids. An infeasible robust
solution (a failure that leaves no survivor) is reported as a breakdown
with ``total = inf`` rather than an exception, so searches can compare it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .graph import DistanceMatrix, Instance

FacilitySet = tuple[int, ...]


def as_facility_set(members, n: int | None = None) -> FacilitySet:
    out = tuple(sorted({int(r) for r in members}))
    if n is not None and out and not (1 <= out[0] and out[-1] <= n):
        raise ValueError(f"facility ids must lie in 1..{n}: {out}")
    return out


def set_mask(members, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=np.bool_)
    mask[[r - 1 for r in members]] = True
    return mask


@dataclass(frozen=True)
class Assignment:
    """Nearest-facility map; equidistant facilities resolve to the lowest id."""

    server_of: dict[int, int]

    def clients_of(self, r: int) -> tuple[int, ...]:
        return tuple(v for v, s in sorted(self.server_of.items()) if s == r)


@dataclass(frozen=True)
class CostBreakdown:
    facility: float
    ship: float
    backup: float
    total: float
    worst_failure: FacilitySet = ()

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.total)

    def as_dict(self) -> dict:
        return {
            "facility": self.facility,
            "ship": self.ship,
            "backup": self.backup,
            "total": self.total,
            "worst_failure": list(self.worst_failure),
        }


def _infeasible(facility: float, ship: float) -> CostBreakdown:
    return CostBreakdown(facility, ship, math.inf, math.inf, ())


def assign(dist: DistanceMatrix, R) -> Assignment:
    R = as_facility_set(R, dist.n)
    if not R:
        raise ValueError("cannot assign clients to an empty facility set")
    cols = dist.d[:, [r - 1 for r in R]]
    # argmin returns the first minimum, and R is sorted, so ties go to the lowest id
    nearest = np.argmin(cols, axis=1)
    return Assignment({v: R[int(nearest[v - 1])] for v in range(1, dist.n + 1)})


def facility_cost(inst: Instance, R) -> float:
    return float(sum(inst.opening_cost[r - 1] for r in R))


def ship_cost(inst: Instance, dist: DistanceMatrix, R) -> float:
    """sum_v demand(v) * d(v, R); zero-demand nodes contribute nothing."""
    return float(kernels.ship_costs(dist.d, inst.weights, set_mask(R, inst.n))[0])


def cost_ufl(inst: Instance, dist: DistanceMatrix, R) -> CostBreakdown:
    R = as_facility_set(R, inst.n)
    if not R:
        raise ValueError("UFL cost needs a nonempty facility set")
    facility = facility_cost(inst, R)
    ship = ship_cost(inst, dist, R)
    return CostBreakdown(facility, ship, 0.0, facility + ship, ())


def failure_masks(R: FacilitySet, n: int, alpha: int) -> tuple[np.ndarray, list[FacilitySet]]:
    """One mask row per failure set F subset of R with |F| = alpha, rows = R minus F."""
    failures = list(combinations(R, alpha))
    masks = np.zeros((len(failures), n), dtype=np.bool_)
    masks[:, [r - 1 for r in R]] = True
    for row, F in enumerate(failures):
        masks[row, [r - 1 for r in F]] = False
    return masks, failures


def cost_alpha_rftfl(inst: Instance, dist: DistanceMatrix, R, alpha: int) -> CostBreakdown:
    """Opening cost plus the worst shipping cost after up to ``alpha`` failures.

    Only failure sets of size exactly ``alpha`` are enumerated: removing one
    more facility never shortens any d(v, R \\ F), so the maximum sits there.
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    R = as_facility_set(R, inst.n)
    facility = facility_cost(inst, R)
    ship = ship_cost(inst, dist, R) if R else math.inf
    if len(R) <= alpha:
        return _infeasible(facility, ship)
    masks, failures = failure_masks(R, inst.n, alpha)
    after = kernels.ship_costs(dist.d, inst.weights, masks)
    # argmax takes the first maximum: failures are in lexicographic order
    worst = int(np.argmax(after))
    total = facility + float(after[worst])
    return CostBreakdown(facility, ship, total - facility - ship, total, failures[worst])


def cost_rftfl(inst: Instance, dist: DistanceMatrix, R) -> CostBreakdown:
    """Single-failure robust cost in its max-over-failures form."""
    return cost_alpha_rftfl(inst, dist, R, 1)


def cost_rftfl_assignment_form(inst: Instance, dist: DistanceMatrix, R) -> CostBreakdown:
    """Same cost, evaluated as facility + ship + worst per-facility reroute surcharge.

    The surcharge of facility r sums demand(v) * (d(v, R - r) - d(v, r)) over
    the clients assigned to r. Kept as a cross-check of :func:`cost_rftfl`.
    """
    R = as_facility_set(R, inst.n)
    facility = facility_cost(inst, R)
    if not R:
        return _infeasible(facility, math.inf)
    ship = ship_cost(inst, dist, R)
    if len(R) < 2:
        return _infeasible(facility, ship)
    served = assign(dist, R)
    best_r, best = None, -math.inf
    for r in R:
        rest = [s for s in R if s != r]
        extra = 0.0
        for v in served.clients_of(r):
            w = inst.demand[v - 1]
            if w > 0:
                extra += w * (dist.to_set(v, rest) - dist(v, r))
        if extra > best:
            best_r, best = r, extra
    return CostBreakdown(facility, ship, best, facility + ship + best, (best_r,))


def robust_totals(inst: Instance, dist: DistanceMatrix, sets: list[FacilitySet], alpha: int) -> np.ndarray:
    """Batch version of ``cost_alpha_rftfl(...).total`` (``alpha = 0`` gives UFL cost).

    All failure masks of all sets go through one kernel call.
    """
    n = inst.n
    f = inst.costs
    totals = np.full(len(sets), math.inf)
    rows, owners = [], []
    for k, R in enumerate(sets):
        if len(R) <= alpha:
            continue
        if alpha == 0:
            rows.append(set_mask(R, n)[None, :])
        else:
            rows.append(failure_masks(R, n, alpha)[0])
        owners.append(k)
    if not rows:
        return totals
    counts = np.array([r.shape[0] for r in rows])
    values = kernels.ship_costs(dist.d, inst.weights, np.concatenate(rows))
    worst = np.maximum.reduceat(values, np.concatenate(([0], np.cumsum(counts)[:-1])))
    for k, value in zip(owners, worst):
        totals[k] = facility_cost(inst, sets[k]) + value
    return totals
