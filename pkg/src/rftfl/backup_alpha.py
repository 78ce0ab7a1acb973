"""Concentrated backup against up to alpha simultaneous failures."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .backup import BackupInstance, BackupSolution, _within, candidate_values
from .costs import FacilitySet, as_facility_set, facility_cost
from .graph import DistanceMatrix

log = logging.getLogger(__name__)

DEFAULT_CANDIDATE_CAP = 200_000


@dataclass(frozen=True)
class AlphaBbResult:
    opened: FacilitySet | None
    anchors: FacilitySet = ()
    phases_opened: tuple[tuple[int, tuple[int, ...]], ...] = ()

    @property
    def feasible(self) -> bool:
        return self.opened is not None


def _server_mask(bi: BackupInstance) -> np.ndarray:
    mask = np.zeros(bi.n, dtype=np.bool_)
    mask[[r - 1 for r in bi.servers]] = True
    return mask


def cost_alpha_bu(bi: BackupInstance, dist: DistanceMatrix, r2, alpha: int) -> float:
    """Worst total reroute cost of the failed servers over failure sets of size <= alpha.

    Failure sets range over the open facilities R1 + R2.
    """
    r2 = as_facility_set(r2, bi.n)
    values = kernels.alpha_backup_values(dist.d, bi.base.weights, _server_mask(bi), bi.pool_mask(r2), alpha)
    return float(values[0])


def cost_light_alpha_bu(bi: BackupInstance, dist: DistanceMatrix, r2, alpha: int) -> float:
    """max over servers r of demand(r) times the alpha-th smallest distance from r
    to the other open facilities (+inf when fewer than alpha exist).

    For a fixed server the worst failure set is r itself plus its alpha - 1
    nearest peers, which is where the order statistic comes from.
    """
    r2 = as_facility_set(r2, bi.n)
    servers = np.array(bi.servers, dtype=np.int64) - 1
    return float(kernels.kth_backup_values(dist.d, bi.base.weights, servers, bi.pool_mask(r2), alpha)[0])


def conc_alpha_bu_cost(bi: BackupInstance, dist: DistanceMatrix, r2, alpha: int) -> float:
    return facility_cost(bi.base, r2) + cost_alpha_bu(bi, dist, r2, alpha)


def algorithm_alpha_bb(bi: BackupInstance, dist: DistanceMatrix, M: float, alpha: int) -> AlphaBbResult:
    """Relaxation for the alpha-bounded backup problem.

    Servers go in nonincreasing demand order (ties by id). A server becomes
    an anchor when no earlier anchor lies within reroute cost 2M; an anchor
    tops up its strict neighbourhood (cost <= M) to alpha open nodes with the
    cheapest unopened ones. Zero-demand servers are unconstrained and skipped.
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    base = bi.base
    f = base.opening_cost
    order = sorted(bi.servers, key=lambda r: (-base.demand[r - 1], r))
    open_mask = bi.pool_mask(())
    anchor_mask = np.zeros(bi.n, dtype=np.bool_)
    anchors: list[int] = []
    opened: list[int] = []
    phases: list[tuple[int, tuple[int, ...]]] = []
    tight: list[np.ndarray] = []
    for phase, r in enumerate(order, start=1):
        if base.demand[r - 1] <= 0:
            continue
        if (_within(bi, dist, r, 2 * M) & anchor_mask).any():
            continue
        near = _within(bi, dist, r, M)
        need = alpha - int((near & open_mask).sum())
        picks: list[int] = []
        if need > 0:
            free = np.flatnonzero(near & ~open_mask) + 1
            if free.size < need:
                return AlphaBbResult(None, tuple(sorted(anchors)), tuple(phases))
            picks = sorted(free.tolist(), key=lambda v: (f[v - 1], v))[:need]
        for q in picks:
            open_mask[q - 1] = True
        opened.extend(picks)
        anchors.append(r)
        anchor_mask[r - 1] = True
        phases.append((phase, tuple(sorted(picks))))
        tight.append(near)
    if tight:
        assert int(np.sum(tight, axis=0).max()) <= 1, "anchor phases share a strict backup candidate"
    return AlphaBbResult(tuple(sorted(opened)), tuple(sorted(anchors)), tuple(phases))


def _subsets_lex(values: list[float], max_size: int):
    """Subsets of ``values`` with at most ``max_size`` elements, lexicographic order."""
    stack: list[tuple[tuple[float, ...], int]] = [((), 0)]
    while stack:
        prefix, start = stack.pop()
        yield prefix
        if len(prefix) == max_size:
            continue
        for i in range(len(values) - 1, start - 1, -1):
            stack.append((prefix + (values[i],), i + 1))


def threshold_subsets(values: list[float], alpha: int, cap: int) -> tuple[list[tuple[float, ...]], bool]:
    """Threshold subsets to sweep, plus a flag telling whether ``cap`` forced a reduced sweep.

    A reduced sweep keeps the empty set, every singleton, and the larger
    subsets drawn from the largest values that still fit under the cap.
    """
    m = len(values)
    full = sum(comb(m, j) for j in range(alpha + 1))
    if full <= cap:
        return list(_subsets_lex(values, alpha)), False
    keep = 0
    while keep < m and 1 + m + sum(comb(keep + 1, j) for j in range(2, alpha + 1)) <= cap:
        keep += 1
    top = values[m - keep :]
    subsets = [()] + [(v,) for v in values]
    subsets += [T for T in _subsets_lex(top, alpha) if len(T) >= 2]
    log.warning(
        "threshold sweep capped: %d subsets exceed cap %d, sweeping %d (top %d values)",
        full,
        cap,
        len(subsets),
        keep,
    )
    return subsets, True


def algorithm_conc_alpha_bu(
    bi: BackupInstance,
    dist: DistanceMatrix,
    alpha: int,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> BackupSolution:
    """Run the alpha-bounded relaxation at every threshold M(T) = sum(T) for
    subsets T of distinct shipping costs with |T| <= alpha, and keep the
    cheapest result. Within a factor 3 * alpha of the optimum unless the
    sweep was capped (``heuristic`` set).
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    subsets, heuristic = threshold_subsets(candidate_values(bi.base, dist), alpha, candidate_cap)
    by_threshold: dict[float, FacilitySet | None] = {}
    by_set: dict[FacilitySet, float] = {}
    best = BackupSolution(None, math.inf, None, heuristic)
    for T in subsets:
        M = float(sum(T))
        if M not in by_threshold:
            by_threshold[M] = algorithm_alpha_bb(bi, dist, M, alpha).opened
        r2 = by_threshold[M]
        if r2 is None:
            continue
        if r2 not in by_set:
            by_set[r2] = conc_alpha_bu_cost(bi, dist, r2, alpha)
        if by_set[r2] < best.cost:
            best = BackupSolution(r2, by_set[r2], M, heuristic)
    return best
