"""Instances, the shortest-path metric, the text format and instance generators.

Nodes are 1-based throughout the public API; arrays indexed by node use
position ``v - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

TREE_FAMILIES = ("unit_length_variable_demand", "unit_demand_variable_length")


class InstanceFormatError(ValueError):
    """Raised for malformed instance text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Instance:
    """A facility location instance: graph, edge lengths, demands and opening costs.

    ``demand[v - 1]`` and ``opening_cost[v - 1]`` belong to node ``v``.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    demand: tuple[float, ...]
    opening_cost: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v), float(l)) for u, v, l in self.edges))
        object.__setattr__(self, "demand", tuple(float(x) for x in self.demand))
        object.__setattr__(self, "opening_cost", tuple(float(x) for x in self.opening_cost))
        if self.n < 1:
            raise ValueError("instance needs at least one node")
        if len(self.demand) != self.n or len(self.opening_cost) != self.n:
            raise ValueError("demand and opening_cost must have one entry per node")
        for u, v, length in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u}, {v}) references a node outside 1..{self.n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not length > 0 or not math.isfinite(length):
                raise ValueError(f"nonpositive edge length {length} on ({u}, {v})")
        for name, values in (("demand", self.demand), ("opening cost", self.opening_cost)):
            for v, x in enumerate(values, start=1):
                if not x >= 0 or not math.isfinite(x):
                    raise ValueError(f"negative {name} {x} at node {v}")

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.array(self.demand, dtype=np.float64)
        w.setflags(write=False)
        return w

    @cached_property
    def costs(self) -> np.ndarray:
        f = np.array(self.opening_cost, dtype=np.float64)
        f.setflags(write=False)
        return f

    def with_data(self, demand=None, opening_cost=None) -> "Instance":
        """Copy of this instance on the same graph with replaced node data."""
        return Instance(
            self.n,
            self.edges,
            self.demand if demand is None else demand,
            self.opening_cost if opening_cost is None else opening_cost,
        )

    def relabel(self, perm) -> "Instance":
        """Rename node ``v`` to ``perm[v - 1]`` (perm is a permutation of 1..n)."""
        perm = [int(p) for p in perm]
        demand = [0.0] * self.n
        cost = [0.0] * self.n
        for v in self.nodes:
            demand[perm[v - 1] - 1] = self.demand[v - 1]
            cost[perm[v - 1] - 1] = self.opening_cost[v - 1]
        edges = sorted((min(perm[u - 1], perm[v - 1]), max(perm[u - 1], perm[v - 1]), l) for u, v, l in self.edges)
        return Instance(self.n, tuple(edges), tuple(demand), tuple(cost))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """All-pairs shortest-path distances; ``dist(u, v)`` takes 1-based ids."""

    d: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.array(self.d, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __call__(self, u: int, v: int) -> float:
        return float(self.d[u - 1, v - 1])

    def to_set(self, v: int, members) -> float:
        """Distance from ``v`` to the nearest member; +inf for an empty set."""
        idx = [r - 1 for r in members]
        if not idx:
            return math.inf
        return float(self.d[v - 1, idx].min())


def all_pairs_distances(inst: Instance) -> DistanceMatrix:
    """Dijkstra from every node; disconnected pairs get +inf."""
    n = inst.n
    best: dict[tuple[int, int], float] = {}
    for u, v, length in inst.edges:
        key = (min(u, v) - 1, max(u, v) - 1)
        if length < best.get(key, math.inf):
            best[key] = length
    if best:
        rows, cols = zip(*best)
        graph = coo_matrix((list(best.values()), (rows, cols)), shape=(n, n)).tocsr()
    else:
        graph = coo_matrix((n, n)).tocsr()
    return DistanceMatrix(dijkstra(graph, directed=False))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def serialize_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {len(inst.edges)}"]
    for v in inst.nodes:
        lines.append(f"{v} {_fmt(inst.demand[v - 1])} {_fmt(inst.opening_cost[v - 1])}")
    for u, v, length in inst.edges:
        lines.append(f"{u} {v} {_fmt(length)}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    """Parse the line-oriented instance format ('#' starts a comment)."""
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            rows.append((lineno, body.split()))
    if not rows:
        raise InstanceFormatError("empty instance")

    def numbers(lineno, tokens, count, kinds):
        if len(tokens) != count:
            raise InstanceFormatError(f"expected {count} fields, got {len(tokens)}", lineno)
        try:
            return [kind(tok) for kind, tok in zip(kinds, tokens)]
        except ValueError:
            raise InstanceFormatError(f"cannot parse {' '.join(tokens)!r}", lineno) from None

    lineno, tokens = rows[0]
    n, m = numbers(lineno, tokens, 2, (int, int))
    if n < 1 or m < 0:
        raise InstanceFormatError("header needs n >= 1 and m >= 0", lineno)
    if len(rows) != 1 + n + m:
        last = rows[-1][0]
        raise InstanceFormatError(f"header announces {n} nodes and {m} edges, found {len(rows) - 1} data lines", last)

    demand = [0.0] * n
    cost = [0.0] * n
    seen = set()
    for lineno, tokens in rows[1 : 1 + n]:
        v, dem, fc = numbers(lineno, tokens, 3, (int, float, float))
        if not 1 <= v <= n:
            raise InstanceFormatError(f"node id {v} out of range 1..{n}", lineno)
        if v in seen:
            raise InstanceFormatError(f"duplicate node {v}", lineno)
        if not (dem >= 0 and math.isfinite(dem)):
            raise InstanceFormatError(f"negative demand {dem}", lineno)
        if not (fc >= 0 and math.isfinite(fc)):
            raise InstanceFormatError(f"negative opening cost {fc}", lineno)
        seen.add(v)
        demand[v - 1] = dem
        cost[v - 1] = fc

    edges = []
    for lineno, tokens in rows[1 + n :]:
        u, v, length = numbers(lineno, tokens, 3, (int, int, float))
        if not (1 <= u <= n and 1 <= v <= n):
            raise InstanceFormatError(f"edge ({u}, {v}) has a node id out of range 1..{n}", lineno)
        if u == v:
            raise InstanceFormatError(f"self-loop at node {u}", lineno)
        if not (length > 0 and math.isfinite(length)):
            raise InstanceFormatError("nonpositive edge length", lineno)
        edges.append((u, v, length))
    return Instance(n, tuple(edges), tuple(demand), tuple(cost))


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(inst))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _random_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    # attach each node of a random order to a uniformly chosen earlier node
    order = rng.permutation(n) + 1
    pairs = []
    for i in range(1, n):
        parent = order[rng.integers(0, i)]
        child = order[i]
        pairs.append((int(min(parent, child)), int(max(parent, child))))
    return pairs


def generate_random_instance(
    n: int,
    edge_density: float,
    max_length: int,
    max_demand: int,
    max_cost: int,
    seed: int,
) -> Instance:
    """Connected random instance with integer data.

    A random spanning tree is always present; every other pair becomes an
    edge with probability ``edge_density``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < edge_density <= 1:
        raise ValueError("edge_density must lie in (0, 1]")
    if max_length < 1 or max_demand < 0 or max_cost < 0:
        raise ValueError("max_length must be positive, max_demand and max_cost nonnegative")
    rng = np.random.default_rng(seed)
    pairs = set(_random_tree(rng, n))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in pairs and rng.random() < edge_density:
                pairs.add((u, v))
    pairs = sorted(pairs)
    lengths = rng.integers(1, max_length, size=len(pairs), endpoint=True)
    demand = rng.integers(0, max_demand, size=n, endpoint=True)
    cost = rng.integers(0, max_cost, size=n, endpoint=True)
    edges = tuple((u, v, float(l)) for (u, v), l in zip(pairs, lengths))
    return Instance(n, edges, tuple(demand.tolist()), tuple(cost.tolist()))


def generate_tree_instance(family: str, n: int, value_range: int, seed: int) -> Instance:
    """Random tree from one of the two hardness families.

    ``unit_length_variable_demand``: unit lengths and costs, demands in [0, value_range].
    ``unit_demand_variable_length``: unit demands and costs, lengths in [1, value_range].
    """
    if family not in TREE_FAMILIES:
        raise ValueError(f"unknown tree family {family!r}; expected one of {TREE_FAMILIES}")
    if n < 2:
        raise ValueError("n must be at least 2")
    if value_range < 1:
        raise ValueError("value_range must be positive")
    rng = np.random.default_rng(seed)
    pairs = sorted(_random_tree(rng, n))
    ones = (1.0,) * n
    if family == "unit_length_variable_demand":
        edges = tuple((u, v, 1.0) for u, v in pairs)
        demand = tuple(rng.integers(0, value_range, size=n, endpoint=True).tolist())
    else:
        lengths = rng.integers(1, value_range, size=n - 1, endpoint=True)
        edges = tuple((u, v, float(l)) for (u, v), l in zip(pairs, lengths))
        demand = ones
    return Instance(n, edges, demand, ones)


def generate_corpus(count: int, seed: int, n_min: int = 4, n_max: int = 8) -> list[Instance]:
    """Seeded corpus of small random connected instances used by the test harness."""
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(count):
        n = int(rng.integers(n_min, n_max, endpoint=True))
        density = float(rng.choice([0.2, 0.4, 0.6, 0.9]))
        corpus.append(
            generate_random_instance(
                n,
                density,
                max_length=int(rng.choice([3, 10])),
                max_demand=int(rng.choice([3, 10])),
                max_cost=int(rng.choice([5, 20, 60])),
                seed=seed * 1_000_003 + i,
            )
        )
    return corpus
