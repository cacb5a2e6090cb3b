"""Graph specifications, graph-state construction and local complementation.

A graph state is built by applying a controlled-phase gate along every edge
to qubits initialized in |+>.  The canonical five-qubit resource has the
dealer on vertex 0 linked to all four players, and the players arranged in
a square with adjacent pairs (1,3), (1,4), (2,3), (2,4) and opposite pairs
(1,2), (3,4).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    PauliString,
    StateVector,
    apply_single_qubit,
    cz,
)

CANONICAL_EDGES = ((0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4))

# Single-qubit unitaries realizing local complementation on states:
# sqrt(-iX) on the complemented vertex, sqrt(iZ) on each of its neighbours.
SQRT_MINUS_IX = (np.eye(2) - 1j * np.array([[0, 1], [1, 0]])) / np.sqrt(2)
SQRT_IZ = np.diag([np.exp(1j * np.pi / 4), np.exp(-1j * np.pi / 4)])


def _normalize_edges(edges) -> frozenset:
    out = set()
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        out.add((min(u, v), max(u, v)))
    return frozenset(out)


@dataclass(frozen=True)
class GraphSpec:
    """Vertex set with dealer/player roles and an undirected edge set."""

    n: int
    edges: frozenset = field(default_factory=frozenset)
    dealer: int = 0
    players: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", _normalize_edges(self.edges))
        players = tuple(self.players) if self.players else tuple(
            v for v in range(self.n) if v != self.dealer
        )
        object.__setattr__(self, "players", players)
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range")
        if self.dealer in self.players:
            raise ValueError("dealer cannot also be a player")
        if set(self.players) | {self.dealer} != set(range(self.n)):
            raise ValueError("dealer and players must cover all vertices")

    def neighbors(self, v: int) -> tuple:
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range")
        return tuple(sorted(w for e in self.edges for w in e if v in e and w != v))

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "edges": sorted(map(list, self.edges)), "dealer": self.dealer}
        )

    @staticmethod
    def from_json(text: str) -> "GraphSpec":
        data = json.loads(text)
        return GraphSpec(n=data["n"], edges=[tuple(e) for e in data["edges"]], dealer=data["dealer"])


@dataclass(frozen=True)
class LocalComplementationRecord:
    """Result of complementing a graph at one vertex.

    `local_unitaries` maps each affected qubit to the 2x2 matrix that, applied
    to the old graph state, yields the new one up to global phase.
    """

    vertex: int
    new_graph: GraphSpec
    local_unitaries: dict


def build_graph_state(g: GraphSpec) -> StateVector:
    """CZ-circuit construction: product of edge CZ gates on |+>^n."""
    amps = np.full(2**g.n, 2 ** (-g.n / 2), dtype=complex)
    for u, v in sorted(g.edges):
        amps = cz(amps, u, v, g.n)
    return StateVector(amps)


def stabilizer_generators(g: GraphSpec) -> list:
    """Generators K_v = X_v prod_{w in N(v)} Z_w, one per vertex."""
    gens = []
    for v in range(g.n):
        factors = ["I"] * g.n
        factors[v] = "X"
        for w in g.neighbors(v):
            factors[w] = "Z"
        gens.append(PauliString("".join(factors)))
    return gens


def stabilizer_group(g: GraphSpec) -> list:
    """All 2^n signed stabilizer elements, products of the generators.

    Element k multiplies the generators selected by the bits of k, so the
    identity comes first.  Signs are tracked exactly through Pauli algebra.
    """
    gens = stabilizer_generators(g)
    group = []
    for mask in range(2**g.n):
        elem = PauliString("I" * g.n)
        for i, gen in enumerate(gens):
            if (mask >> i) & 1:
                elem = elem * gen
        group.append(elem)
    return group


def local_complement(g: GraphSpec, v: int) -> LocalComplementationRecord:
    """Toggle the edges among N(v); record the state-level local unitaries."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    nbrs = g.neighbors(v)
    edges = set(g.edges)
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            e = (min(a, b), max(a, b))
            if e in edges:
                edges.remove(e)
            else:
                edges.add(e)
    new_graph = GraphSpec(g.n, frozenset(edges), g.dealer, g.players)
    unitaries = {v: SQRT_MINUS_IX}
    for w in nbrs:
        unitaries[w] = SQRT_IZ
    return LocalComplementationRecord(v, new_graph, unitaries)


def apply_local_unitaries(state: StateVector, unitaries: dict) -> StateVector:
    amps = state.amplitudes
    for qubit, u in unitaries.items():
        amps = apply_single_qubit(amps, u, qubit, state.n)
    return StateVector(amps)


def canonical_graph() -> GraphSpec:
    return GraphSpec(n=5, edges=CANONICAL_EDGES, dealer=0, players=(1, 2, 3, 4))


def canonical_resource() -> tuple:
    """The five-qubit resource: dealer hub plus the player square."""
    g = canonical_graph()
    return g, build_graph_state(g)


def square_graph_state() -> StateVector:
    """Four-qubit square graph state on the players (qubits 1..4 -> 0..3).

    Equals (|++00> + |++11> + |--01> + |--10>) / 2; it is the dealer's
    |0> branch of the canonical resource.
    """
    g = GraphSpec(n=4, edges=((0, 2), (0, 3), (1, 2), (1, 3)), dealer=0, players=(1, 2, 3))
    return build_graph_state(g)
