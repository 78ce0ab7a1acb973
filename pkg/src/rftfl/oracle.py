"""Exhaustive solvers used as ground truth on small instances.

Every search enumerates its whole space and picks the minimum cost, then
the fewest facilities, then the lexicographically smallest set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .backup import BackupInstance
from .costs import FacilitySet, robust_totals
from .graph import DistanceMatrix, Instance

RFTFL_MAX_N = 16
ALPHA_RFTFL_MAX_N = 14
ALPHA_MAX = 3
BACKUP_MAX_N = 14


@dataclass(frozen=True)
class OracleResult:
    best_set: FacilitySet | None
    best_cost: float
    sets_examined: int

    @property
    def feasible(self) -> bool:
        return self.best_set is not None


def subset_masks(nodes: list[int], n: int, base: list[int] = ()) -> tuple[np.ndarray, list[FacilitySet]]:
    """Every subset of ``nodes`` (1-based), each joined with ``base``, as masks plus tuples."""
    m = len(nodes)
    bits = ((np.arange(1 << m)[:, None] >> np.arange(m)[None, :]) & 1).astype(np.bool_)
    masks = np.zeros((1 << m, n), dtype=np.bool_)
    masks[:, [v - 1 for v in nodes]] = bits
    sets = [tuple(nodes[i] for i in np.flatnonzero(row)) for row in bits]
    if base:
        masks[:, [v - 1 for v in base]] = True
    return masks, sets


def pick_best(sets: list[FacilitySet], costs) -> OracleResult:
    costs = np.asarray(costs, dtype=np.float64)
    finite = np.isfinite(costs)
    if not finite.any():
        return OracleResult(None, math.inf, len(sets))
    low = costs[finite].min()
    tied = [sets[i] for i in np.flatnonzero(costs == low)]
    return OracleResult(min(tied, key=lambda s: (len(s), s)), float(low), len(sets))


def _check_n(n: int, lo: int, hi: int, what: str) -> None:
    if not lo <= n <= hi:
        raise ValueError(f"{what} supports {lo} <= n <= {hi}, got n = {n}")


def exact_ufl(inst: Instance, dist: DistanceMatrix, max_n: int = 18) -> OracleResult:
    _check_n(inst.n, 1, max_n, "exact UFL")
    masks, sets = subset_masks(list(inst.nodes), inst.n)
    masks, sets = masks[1:], sets[1:]
    costs = masks.astype(np.float64) @ inst.costs + kernels.ship_costs(dist.d, inst.weights, masks)
    return pick_best(sets, costs)


def exact_alpha_rftfl(inst: Instance, dist: DistanceMatrix, alpha: int, max_n: int = ALPHA_RFTFL_MAX_N) -> OracleResult:
    if not 1 <= alpha <= ALPHA_MAX:
        raise ValueError(f"alpha must lie in 1..{ALPHA_MAX}")
    _check_n(inst.n, alpha + 1, max_n, "exact alpha-RFTFL")
    sets = [R for k in range(alpha + 1, inst.n + 1) for R in combinations(inst.nodes, k)]
    return pick_best(sets, robust_totals(inst, dist, sets, alpha))


def exact_rftfl(inst: Instance, dist: DistanceMatrix, max_n: int = RFTFL_MAX_N) -> OracleResult:
    return exact_alpha_rftfl(inst, dist, 1, max_n=max_n)


# ---------------------------------------------------------------------------
# concentrated backup: every R2 inside V \ R1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BackupTable:
    """Per-candidate costs for every R2 subset of the non-server nodes."""

    sets: list[FacilitySet]
    facility: np.ndarray
    backup: np.ndarray
    light: np.ndarray | None = None


def backup_table(bi: BackupInstance, dist: DistanceMatrix, alpha: int = 1) -> BackupTable:
    """``backup`` is the single-failure backup cost when ``alpha == 1`` and the
    maximum alpha-backup cost otherwise; ``light`` is filled for ``alpha > 1``."""
    _check_n(bi.n, 1, BACKUP_MAX_N, "backup oracle")
    free = [v for v in bi.base.nodes if v not in bi.servers]
    masks, sets = subset_masks(free, bi.n, base=list(bi.servers))
    facility = masks[:, [v - 1 for v in free]].astype(np.float64) @ bi.base.costs[[v - 1 for v in free]]
    servers = np.array(bi.servers, dtype=np.int64) - 1
    w = bi.base.weights
    if alpha == 1:
        single = kernels.kth_backup_values(dist.d, w, servers, masks, 1)
        return BackupTable(sets, facility, single, single)
    is_server = np.zeros(bi.n, dtype=np.bool_)
    is_server[servers] = True
    worst = kernels.alpha_backup_values(dist.d, w, is_server, masks, alpha)
    light = kernels.kth_backup_values(dist.d, w, servers, masks, alpha)
    return BackupTable(sets, facility, worst, light)


def exact_conc_bu(bi: BackupInstance, dist: DistanceMatrix, table: BackupTable | None = None) -> OracleResult:
    table = table or backup_table(bi, dist)
    return pick_best(table.sets, table.facility + table.backup)


def exact_conc_alpha_bu(bi: BackupInstance, dist: DistanceMatrix, alpha: int, table: BackupTable | None = None) -> OracleResult:
    table = table or backup_table(bi, dist, alpha)
    return pick_best(table.sets, table.facility + table.backup)


def exact_bb(bi: BackupInstance, dist: DistanceMatrix, M: float, table: BackupTable | None = None) -> OracleResult:
    """Cheapest R2 whose single-failure backup cost is finite and at most ``M`` (no relaxation)."""
    table = table or backup_table(bi, dist)
    return pick_best(table.sets, np.where(np.isfinite(table.backup) & (table.backup <= M), table.facility, math.inf))


def exact_alpha_bb(
    bi: BackupInstance, dist: DistanceMatrix, M: float, alpha: int, table: BackupTable | None = None
) -> OracleResult:
    """Cheapest R2 whose light alpha-backup cost is finite and at most ``M`` (no relaxation)."""
    table = table or backup_table(bi, dist, alpha)
    return pick_best(table.sets, np.where(np.isfinite(table.light) & (table.light <= M), table.facility, math.inf))
