"""Graph core: distances, geodesic intervals, convexity, and small oracles.

Graphs are simple, undirected, connected, with dense integer node ids
``0..n-1``.  Graph, DistanceTable and IntervalTable are immutable after
construction and safe to share across worker processes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DisconnectedError,
    DuplicateEdgeError,
    EmptyGraphError,
    InvalidEdgeError,
    NotChordalError,
    SelfLoopError,
    SizeLimitError,
)

MIN_FLIPS_MAX_NODES = 15


class NodeSet:
    """Bit-packed node set of fixed width ``n`` (bit ``v`` = membership of ``v``)."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: int = 0):
        self.n = n
        self.mask = mask & ((1 << n) - 1)

    @classmethod
    def from_nodes(cls, n: int, nodes) -> "NodeSet":
        mask = 0
        for v in nodes:
            if not 0 <= v < n:
                raise ValueError(f"node {v} outside 0..{n - 1}")
            mask |= 1 << v
        return cls(n, mask)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and (self.mask >> v) & 1 == 1

    def __iter__(self):
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NodeSet)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self):
        return hash((self.n, self.mask))

    def __or__(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(self.n, self.mask | other.mask)

    def __and__(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(self.n, self.mask & other.mask)

    def __sub__(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(self.n, self.mask & ~other.mask)

    def complement(self) -> "NodeSet":
        return NodeSet(self.n, ~self.mask)

    def to_list(self) -> list[int]:
        return list(self)

    def __repr__(self):
        return f"NodeSet({self.n}, {{{', '.join(map(str, self))}}})"


class Graph:
    """Immutable simple connected graph; build via :func:`build_graph`."""

    __slots__ = ("n", "m", "_adj", "_edges")

    def __init__(self, n: int, adj: tuple, edges: tuple):
        self.n = n
        self.m = len(edges)
        self._adj = adj
        self._edges = edges

    def neighbors(self, u: int) -> tuple:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    @property
    def edges(self) -> tuple:
        return self._edges

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.bool_)
        for u, v in self._edges:
            a[u, v] = True
            a[v, u] = True
        return a

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(n: int, edges) -> Graph:
    """Validate and build a graph.

    Raises a distinct error for each rejected input: :class:`EmptyGraphError`,
    :class:`InvalidEdgeError`, :class:`SelfLoopError`,
    :class:`DuplicateEdgeError`, :class:`DisconnectedError`.
    """
    if n <= 0:
        raise EmptyGraphError("graph must have at least one node")
    seen = set()
    norm = []
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidEdgeError(f"edge ({u}, {v}) outside 0..{n - 1}")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key}")
        seen.add(key)
        norm.append(key)
    norm.sort()
    adj_lists: list[list[int]] = [[] for _ in range(n)]
    for u, v in norm:
        adj_lists[u].append(v)
        adj_lists[v].append(u)
    adj = tuple(tuple(sorted(nb)) for nb in adj_lists)
    # connectivity: one BFS from node 0 must reach everything
    seen_n = 1
    visited = bytearray(n)
    visited[0] = 1
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if not visited[w]:
                visited[w] = 1
                seen_n += 1
                queue.append(w)
    if seen_n != n:
        raise DisconnectedError(f"only {seen_n} of {n} nodes reachable from node 0")
    return Graph(n, adj, tuple(norm))


class DistanceTable:
    """All-pairs hop distances as an ``(n, n)`` int16 matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix

    def __getitem__(self, uv) -> int:
        u, v = uv
        return int(self.matrix[u, v])

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def all_pairs_distances(g: Graph) -> DistanceTable:
    """Exact hop distances, one frontier-vectorized BFS per source."""
    n = g.n
    adj = g.adjacency_matrix()
    dist = np.full((n, n), -1, dtype=np.int16)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        frontier = np.zeros(n, dtype=np.bool_)
        frontier[s] = True
        level = 0
        while frontier.any():
            level += 1
            nxt = adj[frontier].any(axis=0) & (row < 0)
            row[nxt] = level
            frontier = nxt
    return DistanceTable(dist)


def interval(g: Graph, dt: DistanceTable, u: int, v: int) -> NodeSet:
    """Geodesic interval: all nodes on at least one shortest u-v path."""
    d = dt.matrix
    on = d[u] + d[v] == d[u, v]
    mask = 0
    for x in np.nonzero(on)[0]:
        mask |= 1 << int(x)
    return NodeSet(g.n, mask)


class IntervalTable:
    """Bit-packed geodesic intervals for every node pair.

    ``packed[u, v]`` is a little-endian uint64 word vector whose bit ``x``
    marks ``x`` on a shortest u-v path; ``packed[u, u]`` is the singleton.
    """

    __slots__ = ("n", "words", "packed")

    def __init__(self, n: int, packed: np.ndarray):
        self.n = n
        self.words = packed.shape[2]
        self.packed = packed

    def mask(self, u: int, v: int) -> int:
        return int.from_bytes(self.packed[u, v].tobytes(), "little")

    def interval(self, u: int, v: int) -> NodeSet:
        return NodeSet(self.n, self.mask(u, v))

    def contains(self, u: int, v: int, x: int) -> bool:
        return bool((self.packed[u, v, x >> 6] >> np.uint64(x & 63)) & np.uint64(1))

    def single_word(self) -> np.ndarray:
        if self.n > 64:
            raise SizeLimitError("single-word view needs n <= 64")
        return self.packed[:, :, 0]


def interval_table(g: Graph, dt: DistanceTable) -> IntervalTable:
    n = g.n
    d = dt.matrix.astype(np.int32)
    on = d[:, None, :] + d[None, :, :] == d[:, :, None]
    words = max(1, (n + 63) >> 6)
    bits = np.packbits(
        on.reshape(n * n, n), axis=1, bitorder="little"
    )
    padded = np.zeros((n * n, words * 8), dtype=np.uint8)
    padded[:, : bits.shape[1]] = bits
    packed = padded.view(np.uint64).reshape(n, n, words)
    return IntervalTable(n, np.ascontiguousarray(packed))


def is_convex_set(it: IntervalTable, nodes) -> bool:
    """True iff every same-set pair's interval stays inside the set."""
    if isinstance(nodes, NodeSet):
        members = nodes.to_list()
        mask = nodes.mask
    else:
        members = sorted(set(nodes))
        mask = 0
        for v in members:
            mask |= 1 << v
    if len(members) <= 1:
        return True
    outside = ~mask
    for u, v in combinations(members, 2):
        if it.mask(u, v) & outside:
            return False
    return True


@dataclass(frozen=True)
class Labeling:
    """Total assignment of class ids ``0..k-1`` to nodes ``0..n-1``."""

    labels: tuple
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for y in self.labels:
            if not 0 <= y < self.k:
                raise ValueError(f"label {y} outside 0..{self.k - 1}")

    @classmethod
    def from_list(cls, labels, k: int | None = None) -> "Labeling":
        labels = tuple(int(y) for y in labels)
        if k is None:
            k = max(labels) + 1 if labels else 1
        return cls(labels, k)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def binary(self) -> bool:
        return self.k == 2

    def cluster(self, i: int) -> NodeSet:
        mask = 0
        for v, y in enumerate(self.labels):
            if y == i:
                mask |= 1 << v
        return NodeSet(self.n, mask)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    def as_mask(self) -> int:
        """Binary labeling encoded as an int (bit v = label of v)."""
        if self.k != 2:
            raise ValueError("mask encoding needs k=2")
        return self.cluster(1).mask

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "Labeling":
        return cls(tuple((mask >> v) & 1 for v in range(n)), 2)


def is_convex_labeling(it: IntervalTable, y: Labeling) -> bool:
    """True iff every cluster of ``y`` is a convex set."""
    n = it.n
    arr = y.as_array()
    packed = it.packed
    for i in range(y.k):
        members = np.nonzero(arr == i)[0]
        if len(members) <= 1:
            continue
        cl_mask = np.zeros(it.words, dtype=np.uint64)
        for v in members:
            cl_mask[v >> 6] |= np.uint64(1) << np.uint64(int(v) & 63)
        sub = packed[np.ix_(members, members)]
        if np.any(sub & ~cl_mask):
            return False
    return True


def convex_hull(it: IntervalTable, nodes) -> NodeSet:
    """Smallest convex superset, by interval closure to a fixpoint."""
    n = it.n
    if isinstance(nodes, NodeSet):
        current = np.zeros(n, dtype=np.bool_)
        for v in nodes:
            current[v] = True
    else:
        current = np.zeros(n, dtype=np.bool_)
        for v in nodes:
            current[v] = True
    if current.sum() == 0:
        return NodeSet(n, 0)
    packed = it.packed
    while True:
        members = np.nonzero(current)[0]
        sub = packed[np.ix_(members, members)].reshape(-1, it.words)
        union = np.bitwise_or.reduce(sub, axis=0)
        closure = np.unpackbits(
            union.view(np.uint8), bitorder="little", count=n
        ).astype(np.bool_)
        if (closure == current).all():
            break
        current = closure
    mask = 0
    for v in np.nonzero(current)[0]:
        mask |= 1 << int(v)
    return NodeSet(n, mask)


def cut_border(g: Graph, y: Labeling) -> NodeSet:
    """All nodes incident to an edge whose endpoints carry different labels."""
    mask = 0
    labels = y.labels
    for u, v in g.edges:
        if labels[u] != labels[v]:
            mask |= (1 << u) | (1 << v)
    return NodeSet(g.n, mask)


def clique_number_chordal(g: Graph) -> int:
    """Clique number of a chordal graph via maximum cardinality search.

    The MCS visit order, reversed, is a perfect elimination ordering exactly
    when the graph is chordal; non-chordal inputs raise
    :class:`NotChordalError`.  For chordal graphs this value also equals the
    largest clique-minor order.
    """
    n = g.n
    weight = [0] * n
    order = []
    numbered = [False] * n
    for _ in range(n):
        best, best_w = -1, -1
        for v in range(n):
            if not numbered[v] and weight[v] > best_w:
                best, best_w = v, weight[v]
        numbered[best] = True
        order.append(best)
        for w in g.neighbors(best):
            if not numbered[w]:
                weight[w] += 1
    # order reversed = elimination order; verify PEO and read off omega
    pos = {v: i for i, v in enumerate(order)}
    neighbor_masks = [0] * n
    for u, v in g.edges:
        neighbor_masks[u] |= 1 << v
        neighbor_masks[v] |= 1 << u
    omega = 1
    for idx in range(n - 1, -1, -1):
        v = order[idx]
        earlier = [w for w in g.neighbors(v) if pos[w] < idx]
        omega = max(omega, len(earlier) + 1)
        if len(earlier) <= 1:
            continue
        anchor = max(earlier, key=lambda w: pos[w])
        rest_mask = 0
        for w in earlier:
            if w != anchor:
                rest_mask |= 1 << w
        if rest_mask & ~neighbor_masks[anchor]:
            raise NotChordalError(
                f"vertex {v}: earlier neighbors do not form a clique"
            )
    return omega


def min_flips_to_convex(
    it: IntervalTable, y: Labeling, budget: int
) -> int | None:
    """Smallest number of label flips making a binary labeling convex.

    Exhaustive over flip subsets in increasing size; ``None`` when no
    solution exists within ``budget``.  Hard-capped at
    ``MIN_FLIPS_MAX_NODES`` nodes.
    """
    n = it.n
    if n > MIN_FLIPS_MAX_NODES:
        raise SizeLimitError(
            f"min_flips_to_convex is capped at n <= {MIN_FLIPS_MAX_NODES}"
        )
    if y.k != 2:
        raise ValueError("min_flips_to_convex needs a binary labeling")
    base = y.as_mask()
    masks = it.single_word() if n <= 64 else None
    full = (1 << n) - 1

    def convex_mask(s: int) -> bool:
        for sel in (s, s ^ full):
            rem = sel
            while rem:
                low = rem & -rem
                u = low.bit_length() - 1
                rem ^= low
                r2 = rem
                while r2:
                    low2 = r2 & -r2
                    v = low2.bit_length() - 1
                    r2 ^= low2
                    if int(masks[u, v]) & ~sel & full:
                        return False
        return True

    for size in range(0, min(budget, n) + 1):
        for subset in combinations(range(n), size):
            flip = 0
            for v in subset:
                flip |= 1 << v
            if convex_mask(base ^ flip):
                return size
    return None
