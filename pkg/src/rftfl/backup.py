"""Concentrated backup with one failure: backup cost, the bounded-backup
threshold relaxation and the threshold sweep on top of it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .costs import FacilitySet, as_facility_set, facility_cost, set_mask
from .graph import DistanceMatrix, Instance


@dataclass(frozen=True)
class BackupInstance:
    """``base`` carries the relocated demands; ``servers`` are the already open facilities."""

    base: Instance
    servers: FacilitySet

    def __post_init__(self):
        object.__setattr__(self, "servers", as_facility_set(self.servers, self.base.n))

    @property
    def n(self) -> int:
        return self.base.n

    def pool_mask(self, r2) -> np.ndarray:
        return set_mask(self.servers + tuple(r2), self.n)


@dataclass(frozen=True)
class BbResult:
    opened: FacilitySet | None
    phases_opened: tuple[tuple[int, int], ...] = ()

    @property
    def feasible(self) -> bool:
        return self.opened is not None


class BackupSolution(NamedTuple):
    r2: FacilitySet | None
    cost: float
    threshold: float | None = None
    heuristic: bool = False

    @property
    def feasible(self) -> bool:
        return self.r2 is not None


def cost_bu(bi: BackupInstance, dist: DistanceMatrix, r2) -> float:
    """Worst reroute cost demand(r) * d(r, (R1 + R2) - r) over servers r."""
    r2 = as_facility_set(r2, bi.n)
    servers = np.array(bi.servers, dtype=np.int64) - 1
    return float(kernels.kth_backup_values(dist.d, bi.base.weights, servers, bi.pool_mask(r2), 1)[0])


def conc_bu_cost(bi: BackupInstance, dist: DistanceMatrix, r2) -> float:
    return facility_cost(bi.base, r2) + cost_bu(bi, dist, r2)


def candidate_values(inst: Instance, dist: DistanceMatrix) -> list[float]:
    """Distinct finite shipping costs demand(u) * d(u, v), sorted; always contains 0."""
    w = inst.weights
    d = dist.d
    with np.errstate(invalid="ignore"):
        sc = w[:, None] * d
    sc = sc[np.isfinite(sc)]
    return sorted(set(sc.tolist()) | {0.0})


def _within(bi: BackupInstance, dist: DistanceMatrix, r: int, bound: float) -> np.ndarray:
    """Boolean mask of nodes v != r with demand(r) * d(v, r) <= bound."""
    w = bi.base.demand[r - 1]
    row = dist.d[r - 1]
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(row) & (w * row <= bound)
    ok[r - 1] = False
    return ok


def algorithm_bb(bi: BackupInstance, dist: DistanceMatrix, M: float) -> BbResult:
    """Cheapest-node relaxation for the bounded backup problem with threshold ``M``.

    Servers are visited in ascending id order. A server that already sees a
    server or opened node within reroute cost 2M is skipped; otherwise the
    cheapest node within 2M is opened. Zero-demand servers carry no
    constraint and are skipped. The result reroutes every server within 2M
    and opens no more than the optimum under the strict bound M.
    """
    f = bi.base.opening_cost
    open_mask = bi.pool_mask(())
    opened: list[int] = []
    phases: list[tuple[int, int]] = []
    tight: list[np.ndarray] = []
    for phase, r in enumerate(bi.servers, start=1):
        if bi.base.demand[r - 1] <= 0:
            continue
        relaxed = _within(bi, dist, r, 2 * M)
        if (relaxed & open_mask).any():
            continue
        choices = np.flatnonzero(relaxed) + 1
        if choices.size == 0:
            return BbResult(None, tuple(phases))
        q = int(min(choices, key=lambda v: (f[v - 1], v)))
        opened.append(q)
        open_mask[q - 1] = True
        phases.append((phase, q))
        tight.append(_within(bi, dist, r, M))
    # the strict neighbourhoods of opening phases never overlap
    if tight:
        assert int(np.sum(tight, axis=0).max()) <= 1, "opening phases share a strict backup candidate"
    return BbResult(tuple(sorted(opened)), tuple(phases))


def algorithm_conc_bu(bi: BackupInstance, dist: DistanceMatrix) -> BackupSolution:
    """Sweep every candidate threshold and keep the cheapest concentrated backup.

    Within a factor 2 of the optimum. Ties go to the smaller threshold.
    """
    best = BackupSolution(None, math.inf)
    seen: dict[FacilitySet, float] = {}
    for M in candidate_values(bi.base, dist):
        res = algorithm_bb(bi, dist, M)
        if not res.feasible:
            continue
        if res.opened not in seen:
            seen[res.opened] = conc_bu_cost(bi, dist, res.opened)
        cost = seen[res.opened]
        if cost < best.cost:
            best = BackupSolution(res.opened, cost, M)
    return best
