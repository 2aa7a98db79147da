"""Chip coupling graphs and the qubit partitions used by the test patterns."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]

CHAIN_ATTEMPT_BUDGET = 10_000


class TopologyError(ValueError):
    """Invalid coupling graph or impossible partition request."""


class ParseError(ValueError):
    """Malformed device document. Carries the offending line and/or field."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class NotBipartiteError(TopologyError):
    def __init__(self, cycle: list[int]):
        super().__init__(f"graph is not bipartite; odd cycle {cycle}")
        self.cycle = cycle


def _norm_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class ChipTopology:
    num_qubits: int
    edges: frozenset[Edge]
    coords: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise TopologyError("num_qubits must be >= 1")
        for i, j in self.edges:
            if i == j:
                raise TopologyError(f"self-loop on qubit {i}")
            if not (0 <= i < self.num_qubits and 0 <= j < self.num_qubits):
                raise TopologyError(f"edge ({i}, {j}) out of range for {self.num_qubits} qubits")
            if i > j:
                raise TopologyError(f"edge ({i}, {j}) not normalized; use ChipTopology.build")
        if self.coords and len(self.coords) != self.num_qubits:
            raise TopologyError(f"expected {self.num_qubits} coordinates, got {len(self.coords)}")

    @classmethod
    def build(cls, num_qubits: int, edges: Iterable[Sequence[int]],
              coords: Iterable[Sequence[float]] | None = None) -> "ChipTopology":
        """Validate raw edge pairs (rejecting duplicates in either orientation)."""
        seen: set[Edge] = set()
        for pair in edges:
            if len(pair) != 2:
                raise TopologyError(f"edge {pair!r} must have two endpoints")
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise TopologyError(f"self-loop on qubit {i}")
            e = _norm_edge(i, j)
            if e in seen:
                raise TopologyError(f"duplicate edge {e}")
            seen.add(e)
        if coords is None:
            # Fallback layout: a single row.
            xy = tuple((float(q), 0.0) for q in range(num_qubits))
        else:
            xy = tuple((float(c[0]), float(c[1])) for c in coords)
        return cls(int(num_qubits), frozenset(seen), xy)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(n)) for n in nbrs)

    def neighbors(self, q: int) -> tuple[int, ...]:
        return self.adjacency[q]

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "edges": [list(e) for e in self.sorted_edges()],
            "coords": [list(c) for c in self.coords],
        }


@dataclass(frozen=True)
class Bipartition:
    group_a: frozenset[int]
    group_b: frozenset[int]

    def side(self, name: str) -> tuple[frozenset[int], frozenset[int]]:
        """(targets, spectators) for checkerboard side 'A' or 'B'."""
        if name.upper() == "A":
            return self.group_a, self.group_b
        if name.upper() == "B":
            return self.group_b, self.group_a
        raise ValueError(f"unknown checkerboard side {name!r}")


@dataclass(frozen=True)
class Triplet:
    a: int  # X-excited neighbour of the control
    b: int  # CNOT control
    c: int  # CNOT target

    @property
    def members(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class TripletCover:
    triplets: tuple[Triplet, ...]
    idle: frozenset[int] = field(default_factory=frozenset)


def load_topology(text: str) -> ChipTopology:
    """Parse the graph part of a JSON device document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("device document must be a JSON object")
    return topology_from_dict(doc)


def topology_from_dict(doc: dict) -> ChipTopology:
    for key in ("num_qubits", "edges"):
        if key not in doc:
            raise ParseError("missing required field", field=key)
    n = doc["num_qubits"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError("must be an integer", field="num_qubits")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise ParseError("must be a list of [i, j] pairs", field="edges")
    for k, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise ParseError("must be a pair of integer qubit ids", field=f"edges[{k}]")
    coords = doc.get("coords")
    if coords is not None:
        if not isinstance(coords, list):
            raise ParseError("must be a list of [x, y]", field="coords")
        for k, c in enumerate(coords):
            if not (isinstance(c, list) and len(c) == 2
                    and all(isinstance(v, (int, float)) for v in c)):
                raise ParseError("must be an [x, y] pair", field=f"coords[{k}]")
    return ChipTopology.build(n, edges, coords)


def bipartition(topo: ChipTopology) -> Bipartition:
    """Two-colour the graph by breadth-first parity from the smallest id of each component."""
    color = [-1] * topo.num_qubits
    parent = [-1] * topo.num_qubits
    for root in range(topo.num_qubits):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in topo.neighbors(u):
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    parent[v] = u
                    queue.append(v)
                elif color[v] == color[u]:
                    raise NotBipartiteError(_odd_cycle(parent, u, v))
    a = frozenset(q for q in range(topo.num_qubits) if color[q] == 0)
    return Bipartition(a, frozenset(range(topo.num_qubits)) - a)


def _odd_cycle(parent: list[int], u: int, v: int) -> list[int]:
    def path_to_root(x):
        out = [x]
        while parent[x] != -1:
            x = parent[x]
            out.append(x)
        return out

    pu, pv = path_to_root(u), path_to_root(v)
    on_pv = set(pv)
    lca = next(x for x in pu if x in on_pv)
    left = pu[: pu.index(lca) + 1]
    right = pv[: pv.index(lca)]
    return left + right[::-1]


def chains(topo: ChipTopology) -> list[Triplet]:
    """Every directed chain a-b-c (a != c), ordered by (b, a, c)."""
    out = []
    for b in range(topo.num_qubits):
        nb = topo.neighbors(b)
        for a in nb:
            for c in nb:
                if a != c:
                    out.append(Triplet(a, b, c))
    return out


def is_chain(topo: ChipTopology, t: Triplet) -> bool:
    return t.a != t.c and topo.has_edge(t.a, t.b) and topo.has_edge(t.b, t.c)


def triplet_cover(topo: ChipTopology, priority: Iterable[Triplet] = ()) -> TripletCover:
    """Greedy set of mutually separated chains.

    Candidates in `priority` are tried first (in the given order), then every
    chain in ascending (b, a, c) order. A chain is accepted when none of its
    qubits is used or adjacent to a qubit of an accepted chain.
    """
    chosen: list[Triplet] = []
    blocked: set[int] = set()  # used qubits and their neighbours
    priority = list(priority)
    for t in priority:
        if not is_chain(topo, t):
            raise TopologyError(f"{t} is not a chain in this topology")
    for t in priority + chains(topo):
        if any(q in blocked for q in t.members):
            continue
        chosen.append(t)
        for q in t.members:
            blocked.add(q)
            blocked.update(topo.neighbors(q))
    used = {q for t in chosen for q in t.members}
    return TripletCover(tuple(chosen), frozenset(range(topo.num_qubits)) - used)


def pair_cover(topo: ChipTopology, spaced: bool = False) -> list[Edge]:
    """Greedy edge matching in ascending edge order.

    With ``spaced`` the pairs are additionally kept non-adjacent, so every pair
    is surrounded by idle qubits.
    """
    pairs: list[Edge] = []
    used: set[int] = set()
    blocked: set[int] = set()
    for i, j in topo.sorted_edges():
        if spaced:
            if i in blocked or j in blocked:
                continue
        elif i in used or j in used:
            continue
        pairs.append((i, j))
        used.update((i, j))
        blocked.update((i, j))
        blocked.update(topo.neighbors(i))
        blocked.update(topo.neighbors(j))
    return pairs


def random_chains(topo: ChipTopology, length: int, samples: int, seed: int) -> list[list[int]]:
    """Sample simple connected paths with restarting self-avoiding walks."""
    if length < 2:
        raise TopologyError("chain length must be >= 2")
    if length > topo.num_qubits:
        raise TopologyError(f"no simple path of length {length} in a {topo.num_qubits}-qubit graph")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(samples):
        for _attempt in range(CHAIN_ATTEMPT_BUDGET):
            path = [int(rng.integers(topo.num_qubits))]
            seen = {path[0]}
            while len(path) < length:
                options = [v for v in topo.neighbors(path[-1]) if v not in seen]
                if not options:
                    break
                nxt = int(options[rng.integers(len(options))])
                path.append(nxt)
                seen.add(nxt)
            if len(path) == length:
                out.append(path)
                break
        else:
            raise TopologyError(
                f"no path of length {length} found in {CHAIN_ATTEMPT_BUDGET} attempts")
    return out
