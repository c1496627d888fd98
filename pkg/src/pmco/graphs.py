"""Node-fixed directed graphs, Laplacians and the grouped directed topology.

Adjacency follows the row convention: ``adjacency[k, j] == 1`` means agent
``k`` receives information from agent ``j``, so the neighbour set of ``k``
is ``{j : adjacency[k, j] == 1}`` and the degree matrix holds row sums.
With this convention ``sum_{j in N_k} (y_j - y_k) == -(L @ Y)[k]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Digraph",
    "GdsSchedule",
    "degree_matrix",
    "laplacian",
    "is_strongly_connected",
    "gds_topology",
    "random_digraph",
    "laplacian_spectrum_sign_check",
    "INTRA_GROUP_EDGE_PROB",
]

# extra intra-group edges on top of the random Hamiltonian cycle
INTRA_GROUP_EDGE_PROB = 0.3


@dataclass(frozen=True)
class Digraph:
    """Directed graph snapshot with a 0/1 adjacency and no self loops.

    Parameters
    ----------
    adjacency : ndarray of shape (q, q)
        Integer matrix with entries in {0, 1} and a zero diagonal.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if a.shape[0] < 2:
            raise ValueError("a digraph needs at least two nodes")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a) != 0):
            raise ValueError("self loops are not allowed")
        a = a.astype(np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def q(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, k: int) -> np.ndarray:
        """Zero-based indices ``j`` with ``adjacency[k, j] == 1``."""
        return np.flatnonzero(self.adjacency[k])

    def edges(self) -> list[tuple[int, int]]:
        """Edge list with one-based node ids, row-major order."""
        rows, cols = np.nonzero(self.adjacency)
        return [(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)]

    def subgraph(self, nodes) -> "Digraph":
        idx = np.asarray(sorted(nodes), dtype=int)
        return Digraph(self.adjacency[np.ix_(idx, idx)])

    @classmethod
    def empty(cls, q: int) -> "Digraph":
        return cls(np.zeros((q, q), dtype=int))

    @classmethod
    def complete(cls, q: int) -> "Digraph":
        return cls(np.ones((q, q), dtype=int) - np.eye(q, dtype=int))

    @classmethod
    def cycle(cls, q: int) -> "Digraph":
        """Directed cycle ``1 -> 2 -> ... -> q -> 1`` (node k hears node k+1)."""
        a = np.zeros((q, q), dtype=int)
        for k in range(q):
            a[k, (k + 1) % q] = 1
        return cls(a)

    @classmethod
    def from_edges(cls, q: int, edges) -> "Digraph":
        a = np.zeros((q, q), dtype=int)
        for i, j in edges:
            if not (1 <= i <= q and 1 <= j <= q):
                raise ValueError(f"edge ({i}, {j}) out of range for q={q}")
            a[i - 1, j - 1] = 1
        return cls(a)

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "edges": [list(e) for e in self.edges()]})

    @classmethod
    def from_json(cls, text_or_obj) -> "Digraph":
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        return cls.from_edges(int(obj["q"]), obj["edges"])


@dataclass(frozen=True)
class GdsSchedule:
    """Two-group topology description.

    Parameters
    ----------
    q : int
        Number of agents.
    all_info_group : tuple of int
        One-based ids of agents that hear every agent of the other group.
    regenerate_every : int
        Iterations between topology redraws.
    """

    q: int
    all_info_group: tuple
    regenerate_every: int = 1

    def __post_init__(self):
        group = tuple(sorted(int(i) for i in self.all_info_group))
        object.__setattr__(self, "all_info_group", group)
        if self.q < 2:
            raise ValueError("q must be at least 2")
        if len(set(group)) != len(group) or not all(1 <= i <= self.q for i in group):
            raise ValueError("all_info_group must hold distinct ids in 1..q")
        if not 0 < len(group) < self.q:
            raise ValueError("both groups must be nonempty")
        if self.regenerate_every < 1:
            raise ValueError("regenerate_every must be positive")

    @property
    def half_info_group(self) -> tuple:
        return tuple(i for i in range(1, self.q + 1) if i not in self.all_info_group)

    @classmethod
    def default(cls, q: int, regenerate_every: int = 1) -> "GdsSchedule":
        """First third of the agents (at least one) form the all-info group."""
        size = max(1, q // 3)
        return cls(q, tuple(range(1, size + 1)), regenerate_every)


def degree_matrix(g: Digraph) -> np.ndarray:
    """Diagonal matrix of row sums (number of agents each node hears)."""
    return np.diag(g.adjacency.sum(axis=1))


def laplacian(g: Digraph) -> np.ndarray:
    """``degree_matrix(g) - adjacency``; every row sums to zero."""
    return degree_matrix(g) - g.adjacency


def _reachable(adj, start):
    seen = {start}
    stack = [start]
    while stack:
        k = stack.pop()
        for j in np.flatnonzero(adj[k]):
            if j not in seen:
                seen.add(int(j))
                stack.append(int(j))
    return seen


def is_strongly_connected(g: Digraph) -> bool:
    """Every node reaches every other along directed edges.

    Reachability from node 0 is checked in the graph and in its transpose,
    which is enough for strong connectivity.
    """
    a = g.adjacency
    return len(_reachable(a, 0)) == g.q and len(_reachable(a.T, 0)) == g.q


def _wire_group(adj, nodes, rng):
    nodes = list(nodes)
    if len(nodes) < 2:
        return
    order = [nodes[i] for i in rng.permutation(len(nodes))]
    for a, b in zip(order, order[1:] + order[:1]):
        adj[a, b] = 1
    for a in nodes:
        for b in nodes:
            if a != b and adj[a, b] == 0 and rng.random() < INTRA_GROUP_EDGE_PROB:
                adj[a, b] = 1


def gds_topology(schedule: GdsSchedule, rng: np.random.Generator) -> Digraph:
    """Draw one grouped directed topology.

    Each group is wired as a random directed Hamiltonian cycle plus extra
    intra-group edges with probability ``INTRA_GROUP_EDGE_PROB``.  Every
    all-info agent hears every half-info agent; no half-info agent hears
    an all-info agent.

    Parameters
    ----------
    schedule : GdsSchedule
    rng : numpy.random.Generator

    Returns
    -------
    Digraph
    """
    q = schedule.q
    full = [i - 1 for i in schedule.all_info_group]
    half = [i - 1 for i in schedule.half_info_group]
    adj = np.zeros((q, q), dtype=int)
    _wire_group(adj, full, rng)
    _wire_group(adj, half, rng)
    for i in full:
        adj[i, half] = 1
    return Digraph(adj)


def random_digraph(q: int, edge_prob: float, rng: np.random.Generator) -> Digraph:
    """Erdos-Renyi style digraph: each ordered pair is an edge with ``edge_prob``."""
    a = (rng.random((q, q)) < edge_prob).astype(int)
    np.fill_diagonal(a, 0)
    return Digraph(a)


def laplacian_spectrum_sign_check(l, tol: float = 1e-10) -> bool:
    """Every eigenvalue of ``-l`` has real part at most ``tol`` (relative to ``||l||``)."""
    l = np.asarray(l, dtype=float)
    scale = max(1.0, np.linalg.norm(l, 2))
    return bool(np.all(np.linalg.eigvals(-l).real <= tol * scale))
