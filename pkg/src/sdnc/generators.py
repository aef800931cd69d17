"""Graph-family and labeling generators with known structural parameters.

Each family carries a certificate ``w``: the instance is guaranteed free of
clique minors of order ``w`` by construction, so mistake bounds that need
the largest-clique-minor order can be evaluated without computing it.
Labeling generators self-verify their declared invariant (convexity, flip
count, border size) before returning.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from itertools import combinations

from .baselines import build_gridspec, enumerate_convex_bipartitions
from .errors import GeneratorError
from .graphs import (
    Graph,
    IntervalTable,
    Labeling,
    all_pairs_distances,
    build_graph,
    convex_hull,
    cut_border,
    interval_table,
    is_convex_labeling,
    is_convex_set,
)

FAMILIES = (
    "path",
    "cycle",
    "tree",
    "grid",
    "k_tree",
    "clique_plus_path",
    "complete",
)


@dataclass(frozen=True)
class FamilyInstance:
    """A generated graph plus its declared excluded-minor order ``w``."""

    graph: Graph
    family: str
    w: int
    params: dict

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class Provenance:
    kind: str  # convex | flipped | homophilic | permuted_strips
    m_flips: int = 0
    border_target: int | None = None
    k: int = 2

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "k": self.k}
        if self.kind == "flipped":
            out["m_flips"] = self.m_flips
        if self.kind == "homophilic":
            out["border_target"] = self.border_target
        return out


@dataclass(frozen=True)
class LabeledInstance:
    instance: FamilyInstance
    labeling: Labeling
    provenance: Provenance


def _prufer_tree(n: int, rng) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    # standard decode: repeatedly join the smallest leaf to the next code entry
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def gen_graph(family: str, rng, **params) -> FamilyInstance:
    """Generate one instance of a named family.

    Families and their size parameters: ``path(n)``, ``cycle(n)``,
    ``tree(n)`` (uniform via random code sequences), ``grid(rows, cols)``,
    ``k_tree(k, n)`` (random incremental clique attachment),
    ``clique_plus_path(h, n)``, ``complete(n)``.
    """
    if family == "path":
        n = params["n"]
        if n < 1:
            raise ValueError("path needs n >= 1")
        g = build_graph(n, [(i, i + 1) for i in range(n - 1)])
        return FamilyInstance(g, family, 3, {"n": n})
    if family == "cycle":
        n = params["n"]
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
        return FamilyInstance(build_graph(n, edges), family, 4, {"n": n})
    if family == "tree":
        n = params["n"]
        if n < 1:
            raise ValueError("tree needs n >= 1")
        g = build_graph(n, _prufer_tree(n, rng))
        return FamilyInstance(g, family, 3, {"n": n})
    if family == "grid":
        rows, cols = params["rows"], params["cols"]
        g = build_gridspec(rows, cols).to_graph()
        return FamilyInstance(g, family, 5, {"rows": rows, "cols": cols})
    if family == "k_tree":
        k, n = params["k"], params["n"]
        if n < k + 1:
            raise ValueError("k-tree needs n >= k + 1")
        edges = [(u, v) for u in range(k + 1) for v in range(u + 1, k + 1)]
        cliques = [tuple(c) for c in combinations(range(k + 1), k)]
        for v in range(k + 1, n):
            base = cliques[int(rng.integers(0, len(cliques)))]
            for u in base:
                edges.append((u, v))
            for drop in base:
                grown = tuple(sorted((set(base) - {drop}) | {v}))
                cliques.append(grown)
        g = build_graph(n, edges)
        return FamilyInstance(g, family, k + 2, {"k": k, "n": n})
    if family == "clique_plus_path":
        h, n = params["h"], params["n"]
        if h < 2 or n <= h:
            raise ValueError("need h >= 2 and n > h")
        edges = [(u, v) for u in range(h) for v in range(u + 1, h)]
        edges.append((0, h))
        edges.extend((v, v + 1) for v in range(h, n - 1))
        g = build_graph(n, edges)
        return FamilyInstance(g, family, h + 1, {"h": h, "n": n})
    if family == "complete":
        n = params["n"]
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
        g = build_graph(n, edges)
        return FamilyInstance(g, family, n + 1, {"n": n})
    raise ValueError(f"unknown family {family!r}")


def _component_labels(g: Graph, removed_edge) -> Labeling:
    """Label the two components of a tree minus one edge (0 on the u-side)."""
    u, v = removed_edge
    side = bytearray(g.n)
    side[v] = 1
    queue = deque([v])
    seen = {v}
    while queue:
        x = queue.popleft()
        for w in g.neighbors(x):
            if (x, w) in ((u, v), (v, u)):
                continue
            if w not in seen:
                seen.add(w)
                side[w] = 1
                queue.append(w)
    return Labeling(tuple(int(b) for b in side), 2)


def gen_convex_bipartition(
    instance: FamilyInstance, rng, tables=None
) -> Labeling:
    """Family-specific convex bipartition; self-verified before returning."""
    g = instance.graph
    n = g.n
    fam = instance.family
    labeling = None
    if fam in ("tree", "path"):
        u, v = g.edges[int(rng.integers(0, g.m))]
        labeling = _component_labels(g, (u, v))
    elif fam == "grid":
        rows, cols = instance.params["rows"], instance.params["cols"]
        if rng.integers(0, 2) == 0 and cols > 1:
            cut = int(rng.integers(1, cols))
            labels = [1 if (i % cols) >= cut else 0 for i in range(n)]
        elif rows > 1:
            cut = int(rng.integers(1, rows))
            labels = [1 if (i // cols) >= cut else 0 for i in range(n)]
        else:
            cut = int(rng.integers(1, cols))
            labels = [1 if (i % cols) >= cut else 0 for i in range(n)]
        labeling = Labeling(tuple(labels), 2)
    elif fam == "cycle":
        # two complementary arcs, each at most half the cycle
        lengths = [
            ln for ln in range(1, n) if 2 * ln <= n + 1 and 2 * (n - ln) <= n + 1
        ]
        ln = int(rng.choice(lengths))
        start = int(rng.integers(0, n))
        labels = [0] * n
        for off in range(ln):
            labels[(start + off) % n] = 1
        labeling = Labeling(tuple(labels), 2)
    elif fam == "complete":
        mask = int(rng.integers(0, 2**n)) if n < 62 else None
        if mask is None:
            bits = rng.integers(0, 2, size=n)
            labeling = Labeling(tuple(int(b) for b in bits), 2)
        else:
            labeling = Labeling.from_mask(n, mask)
    elif fam == "clique_plus_path":
        h = instance.params["h"]
        if rng.integers(0, 2) == 0 and h > 1:
            ones = [v for v in range(1, h) if rng.integers(0, 2)]
            labels = [0] * n
            for v in ones:
                labels[v] = 1
            labeling = Labeling(tuple(labels), 2)
        else:
            start = int(rng.integers(h, n))
            labels = [1 if v >= start else 0 for v in range(n)]
            labeling = Labeling(tuple(labels), 2)
    else:
        labeling = _hull_grown_bipartition(instance, rng, tables)
    it = _tables_interval(instance, tables)
    if not is_convex_labeling(it, labeling):
        raise GeneratorError(
            f"{fam} bipartition generator emitted a non-convex labeling"
        )
    return labeling


def _tables_interval(instance, tables) -> IntervalTable:
    if tables is not None:
        return tables[1]
    dt = all_pairs_distances(instance.graph)
    return interval_table(instance.graph, dt)


def _hull_grown_bipartition(instance, rng, tables, retries: int = 64):
    g = instance.graph
    n = g.n
    if n <= 20:
        vs = enumerate_convex_bipartitions(g, tables=tables)
        mask = int(vs.masks[int(rng.integers(0, vs.size))])
        return Labeling.from_mask(n, mask)
    it = _tables_interval(instance, tables)
    for _ in range(retries):
        u, v = [int(x) for x in rng.choice(n, size=2, replace=False)]
        hull = convex_hull(it, [u, v])
        if len(hull) >= n:
            continue
        comp = hull.complement()
        if is_convex_set(it, comp):
            labels = [1 if x in hull else 0 for x in range(n)]
            return Labeling(tuple(labels), 2)
    # guaranteed fallback: a single simplicial node of a chordal family is
    # never interior to another pair's interval
    v = n - 1
    labels = [0] * n
    labels[v] = 1
    labeling = Labeling(tuple(labels), 2)
    if is_convex_labeling(it, labeling):
        return labeling
    raise GeneratorError("hull-grown bipartition retries exhausted")


def flip_labels(y: Labeling, m_flips: int, rng) -> Labeling:
    """Flip exactly ``m_flips`` distinct uniformly chosen node labels."""
    if y.k != 2:
        raise ValueError("flip_labels needs a binary labeling")
    if not 0 <= m_flips <= y.n:
        raise ValueError("flip count outside 0..n")
    labels = list(y.labels)
    for v in rng.choice(y.n, size=m_flips, replace=False):
        labels[int(v)] = 1 - labels[int(v)]
    return Labeling(tuple(labels), 2)


def gen_homophilic(g: Graph, border_target: int, rng) -> Labeling:
    """Grow a breadth-first ball until the cut-border is small.

    Stops at the first ball whose cut-border size is at most the target,
    otherwise returns the best labeling seen (border size is measured, not
    assumed, by callers).  ``border_target=0`` yields a constant labeling.
    """
    n = g.n
    if border_target <= 0:
        return Labeling((0,) * n, 2)
    root = int(rng.integers(0, n))
    order = []
    seen = bytearray(n)
    seen[root] = 1
    queue = deque([root])
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in g.neighbors(u):
            if not seen[w]:
                seen[w] = 1
                queue.append(w)
    inside = bytearray(n)
    cut_nodes = 0  # incremental |cut-border|
    is_cut = bytearray(n)
    best_labels = None
    best_border = None
    for idx, v in enumerate(order):
        inside[v] = 1
        for x in [v, *g.neighbors(v)]:
            now_cut = any(inside[x] != inside[w] for w in g.neighbors(x))
            if now_cut and not is_cut[x]:
                is_cut[x] = 1
                cut_nodes += 1
            elif not now_cut and is_cut[x]:
                is_cut[x] = 0
                cut_nodes -= 1
        if idx == n - 1:
            break
        if best_border is None or cut_nodes < best_border:
            best_border = cut_nodes
            best_labels = bytes(inside)
        if cut_nodes <= border_target:
            break
    if best_labels is None:
        return Labeling((0,) * n, 2)
    return Labeling(tuple(int(b) for b in best_labels), 2)


@dataclass(frozen=True)
class StripPartition:
    """Contiguous column bands of a grid, one convex cluster each."""

    rows: int
    cols: int
    bands: tuple  # (col_lo, col_hi) inclusive, per cluster

    @property
    def k(self) -> int:
        return len(self.bands)

    def cluster_of(self, node: int) -> int:
        c = node % self.cols
        for i, (lo, hi) in enumerate(self.bands):
            if lo <= c <= hi:
                return i
        raise ValueError(f"column {c} outside all bands")

    def nodes_of(self, i: int) -> list[int]:
        lo, hi = self.bands[i]
        return [
            r * self.cols + c for r in range(self.rows) for c in range(lo, hi + 1)
        ]


def gen_strip_partition(
    instance: FamilyInstance, k: int, rng
) -> tuple[StripPartition, Labeling]:
    """Split a grid into ``k`` near-equal column bands and label them with a
    uniformly random permutation of the ``k`` classes."""
    if instance.family != "grid":
        raise ValueError("strip partitions need a grid instance")
    rows, cols = instance.params["rows"], instance.params["cols"]
    if not 1 <= k <= cols:
        raise ValueError("need 1 <= k <= cols")
    base, extra = divmod(cols, k)
    bands = []
    lo = 0
    for i in range(k):
        width = base + (1 if i < extra else 0)
        bands.append((lo, lo + width - 1))
        lo += width
    part = StripPartition(rows, cols, tuple(bands))
    perm = [int(x) for x in rng.permutation(k)]
    labels = [0] * instance.n
    for i in range(k):
        for v in part.nodes_of(i):
            labels[v] = perm[i]
    return part, Labeling(tuple(labels), max(k, 2))


def measured_border(g: Graph, y: Labeling) -> int:
    return len(cut_border(g, y))
