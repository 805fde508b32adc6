"""Weighted graphs: cluster graphs, TMS graphs, two-coloring and the JSON format.

Node indices are 0-based inside the library. Every external surface (JSON
files, error certificates, CLI reports) uses 1-based labels.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import FormatError, InvalidParam, NotBipartite, NotSymmetric, PartitionMismatch

SYMMETRY_TOL = 1e-12


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ClusterGraph:
    """Weighted adjacency matrix of a CV cluster graph.

    The matrix must be exactly symmetric with a zero diagonal. An entry is
    an edge iff it is nonzero; there is no topology tolerance.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        a = _frozen(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidParam(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidParam("adjacency contains non-finite weights")
        if not np.array_equal(a, a.T):
            raise NotSymmetric("cluster adjacency matrix is not symmetric")
        if np.any(np.diag(a) != 0):
            raise InvalidParam("cluster graphs cannot carry self-loops")
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adjacency[i])]

    def edges(self) -> list[tuple[int, int, float]]:
        """All edges ``(i, j, w)`` with ``i < j``, in row-major order."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(i), int(j), float(self.adjacency[i, j])) for i, j in zip(rows, cols)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterGraph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TMSGraph:
    """Symmetric coupling matrix of a multimode squeezing Hamiltonian.

    Diagonal entries (single-mode squeezing) are allowed. Input that is
    symmetric up to ``SYMMETRY_TOL`` relative is symmetrized on
    construction; anything worse raises :class:`NotSymmetric`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(as_symmetric(self.matrix, "TMS matrix")))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def is_full_rank(self, rank_tol: float = 1e-10) -> bool:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return bool(s[-1] > rank_tol * s[0])

    def entries(self) -> list[tuple[int, int, float]]:
        rows, cols = np.nonzero(np.triu(self.matrix))
        return [(int(i), int(j), float(self.matrix[i, j])) for i, j in zip(rows, cols)]

    def permuted(self, perm) -> TMSGraph:
        """Relabel modes so that old mode ``i`` becomes ``perm[i]``."""
        order = np.argsort(np.asarray(perm))
        return TMSGraph(self.matrix[np.ix_(order, order)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TMSGraph):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def as_symmetric(matrix, what: str = "matrix") -> np.ndarray:
    """Return ``matrix`` as a float array, symmetrized, or raise NotSymmetric."""
    if isinstance(matrix, TMSGraph):
        return matrix.matrix
    if isinstance(matrix, ClusterGraph):
        return matrix.adjacency
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"{what} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotSymmetric(f"{what} contains non-finite entries")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"{what} is not symmetric")
    return (m + m.T) / 2


@dataclass(frozen=True, eq=False)
class BipartitePartition:
    """Two-coloring of a cluster graph plus its canonical relabeling.

    Attributes:
        plus_set: nodes of the "+" color, ascending.
        minus_set: nodes of the "-" color, ascending.
        perm: ``perm[i]`` is the canonical position of original node ``i``.
        A0: the ``L x (n - L)`` off-diagonal block of the relabeled adjacency.
    """

    plus_set: tuple[int, ...]
    minus_set: tuple[int, ...]
    perm: tuple[int, ...]
    A0: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return len(self.plus_set)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def order(self) -> tuple[int, ...]:
        """Original node at each canonical position (inverse of ``perm``)."""
        return self.plus_set + self.minus_set

    def plus_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.plus_set)] = True
        return mask

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "L": self.L,
            "plus_set": [i + 1 for i in self.plus_set],
            "minus_set": [i + 1 for i in self.minus_set],
            "perm": [p + 1 for p in self.perm],
            "A0": self.A0.tolist(),
        }


def _partition_from_sets(g: ClusterGraph, plus: list[int], minus: list[int]) -> BipartitePartition:
    order = plus + minus
    perm = [0] * g.n
    for pos, node in enumerate(order):
        perm[node] = pos
    A0 = g.adjacency[np.ix_(plus, minus)]
    return BipartitePartition(tuple(plus), tuple(minus), tuple(perm), _frozen(A0.reshape(len(plus), len(minus))))


def partition_from_plus_set(g: ClusterGraph, plus_set) -> BipartitePartition:
    """Build a partition with a caller-chosen "+" set, validating it against ``g``."""
    plus = sorted({int(i) for i in plus_set})
    if any(i < 0 or i >= g.n for i in plus):
        raise PartitionMismatch("plus_set contains out-of-range nodes")
    minus = [i for i in range(g.n) if i not in set(plus)]
    p = _partition_from_sets(g, plus, minus)
    _check_partition(g, p)
    return p


def bipartite_partition(g: ClusterGraph) -> BipartitePartition:
    """Two-color ``g`` by breadth-first search.

    The lowest-indexed node of every connected component is colored "+".
    Neighbors are visited in ascending order, so the result is deterministic.

    Raises:
        NotBipartite: with one odd cycle (1-based) as the certificate.
    """
    n = g.n
    color = [0] * n  # +1 / -1, 0 = unvisited
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        color[root] = 1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if not color[v]:
                    color[v] = -color[u]
                    parent[v] = u
                    queue.append(v)
                elif color[v] == color[u]:
                    raise NotBipartite([i + 1 for i in _odd_cycle(parent, u, v)])
    plus = [i for i in range(n) if color[i] == 1]
    minus = [i for i in range(n) if color[i] == -1]
    return _partition_from_sets(g, plus, minus)


def _odd_cycle(parent: list[int], u: int, v: int) -> list[int]:
    # u and v share a color and an edge; close the cycle through their BFS tree.
    path_u = [u]
    while parent[path_u[-1]] != -1:
        path_u.append(parent[path_u[-1]])
    path_v = [v]
    while parent[path_v[-1]] != -1:
        path_v.append(parent[path_v[-1]])
    ancestors_u = set(path_u)
    lca = next(x for x in path_v if x in ancestors_u)
    head = path_u[: path_u.index(lca) + 1][::-1]
    tail = path_v[: path_v.index(lca)]
    return head + tail


def _check_partition(g: ClusterGraph, p: BipartitePartition) -> None:
    n = g.n
    if p.n != n or sorted(p.perm) != list(range(n)):
        raise PartitionMismatch(f"partition covers {p.n} nodes, graph has {n}")
    if sorted(p.plus_set + p.minus_set) != list(range(n)):
        raise PartitionMismatch("plus_set and minus_set must split the nodes disjointly")
    if any(p.perm[node] != pos for pos, node in enumerate(p.order)):
        raise PartitionMismatch("perm does not list plus_set then minus_set")
    plus = p.plus_mask()
    same = np.equal.outer(plus, plus)
    if np.any(g.adjacency[same] != 0):
        raise PartitionMismatch("an edge joins two nodes of the same color")
    if not np.array_equal(p.A0, g.adjacency[np.ix_(list(p.plus_set), list(p.minus_set))]):
        raise PartitionMismatch("A0 block does not match the graph")


def canonical_permute(g: ClusterGraph, p: BipartitePartition) -> tuple[ClusterGraph, np.ndarray]:
    """Relabel ``g`` so its adjacency reads ``[[0, A0], [A0^T, 0]]``."""
    _check_partition(g, p)
    order = list(p.order)
    return ClusterGraph(g.adjacency[np.ix_(order, order)]), p.A0


def block_adjacency(A0) -> np.ndarray:
    """Assemble ``[[0, A0], [A0^T, 0]]``."""
    A0 = np.atleast_2d(np.asarray(A0, dtype=float))
    L, m = A0.shape
    out = np.zeros((L + m, L + m))
    out[:L, L:] = A0
    out[L:, :L] = A0.T
    return out


# --- generators -----------------------------------------------------------


def _check_size(name: str, value: int, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidParam(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _check_weight(weight: float) -> float:
    weight = float(weight)
    if not math.isfinite(weight) or weight == 0:
        raise InvalidParam(f"edge weight must be finite and nonzero, got {weight!r}")
    return weight


def _from_edges(n: int, edges, weight: float) -> ClusterGraph:
    a = np.zeros((n, n))
    for i, j in edges:
        a[i, j] = a[j, i] = weight
    return ClusterGraph(a)


def chain(n: int, weight: float = 1.0) -> ClusterGraph:
    n, weight = _check_size("n", n), _check_weight(weight)
    return _from_edges(n, [(i, i + 1) for i in range(n - 1)], weight)


def cycle(n: int, weight: float = 1.0) -> ClusterGraph:
    # A simple cycle needs three nodes; smaller sizes would be a path.
    n, weight = _check_size("n", n, minimum=3), _check_weight(weight)
    return _from_edges(n, [(i, (i + 1) % n) for i in range(n)], weight)


def star(n: int, weight: float = 1.0) -> ClusterGraph:
    """Star with node 1 (index 0) at the center."""
    n, weight = _check_size("n", n), _check_weight(weight)
    return _from_edges(n, [(0, j) for j in range(1, n)], weight)


def complete(n: int, weight: float = 1.0) -> ClusterGraph:
    n, weight = _check_size("n", n), _check_weight(weight)
    return _from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], weight)


def square_lattice(rows: int, cols: int, weight: float = 1.0) -> ClusterGraph:
    """Rectangular grid, nodes numbered row-major."""
    rows, cols = _check_size("rows", rows), _check_size("cols", cols)
    weight = _check_weight(weight)
    edges = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                edges.append((k, k + 1))
            if r + 1 < rows:
                edges.append((k, k + cols))
    return _from_edges(rows * cols, edges, weight)


GENERATORS = {
    "chain": chain,
    "cycle": cycle,
    "star": star,
    "complete": complete,
    "square_lattice": square_lattice,
}


def generate(kind: str, *args, **kwargs) -> ClusterGraph:
    """Dispatch to a named generator, e.g. ``generate("star", 4, weight=2.0)``."""
    try:
        factory = GENERATORS[kind]
    except KeyError:
        raise InvalidParam(f"unknown graph kind {kind!r}; choose from {sorted(GENERATORS)}") from None
    try:
        return factory(*args, **kwargs)
    except TypeError as exc:
        raise InvalidParam(str(exc)) from None


# --- JSON format ------------------------------------------------------------


def _load_object(text: str, key: str) -> tuple[int, list]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise FormatError("top level must be an object")
    n = data.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise FormatError(f"'n' must be a positive integer, got {n!r}")
    items = data.get(key, [])
    if not isinstance(items, list):
        raise FormatError(f"'{key}' must be a list")
    return n, items


def _read_entry(item: Any, n: int, allow_diagonal: bool) -> tuple[int, int, float]:
    if not isinstance(item, dict) or not {"i", "j", "w"} <= item.keys():
        raise FormatError(f"entry must be an object with i, j, w: {item!r}")
    i, j, w = item["i"], item["j"], item["w"]
    for name, v in (("i", i), ("j", j)):
        if isinstance(v, bool) or not isinstance(v, int):
            raise FormatError(f"index {name} must be an integer: {item!r}")
        if not 1 <= v <= n:
            raise FormatError(f"index {name}={v} out of range 1..{n}")
    if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w) or w == 0:
        raise FormatError(f"weight must be a finite nonzero number: {item!r}")
    if i == j and not allow_diagonal:
        raise FormatError(f"self-loop on node {i} is not allowed in a cluster graph")
    if i > j:
        raise FormatError(f"entries must satisfy i {'<=' if allow_diagonal else '<'} j: {item!r}")
    return i - 1, j - 1, float(w)


def _fill(n: int, items: list, allow_diagonal: bool) -> np.ndarray:
    a = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for item in items:
        i, j, w = _read_entry(item, n, allow_diagonal)
        if (i, j) in seen:
            raise FormatError(f"pair ({i + 1}, {j + 1}) listed more than once")
        seen.add((i, j))
        a[i, j] = a[j, i] = w
    return a


def parse_graph(text: str) -> ClusterGraph:
    n, items = _load_object(text, "edges")
    return ClusterGraph(_fill(n, items, allow_diagonal=False))


def serialize_graph(g: ClusterGraph) -> str:
    edges = [{"i": i + 1, "j": j + 1, "w": w} for i, j, w in g.edges()]
    return json.dumps({"n": g.n, "edges": edges})


def parse_tms(text: str) -> TMSGraph:
    n, items = _load_object(text, "entries")
    return TMSGraph(_fill(n, items, allow_diagonal=True))


def serialize_tms(G: TMSGraph) -> str:
    entries = [{"i": i + 1, "j": j + 1, "w": w} for i, j, w in G.entries()]
    return json.dumps({"n": G.n, "entries": entries})
