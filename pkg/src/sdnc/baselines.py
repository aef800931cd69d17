"""Comparison learners: traversal, bipartite distance rule, grid corner
walking, and version-space halving."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import FormatError, NotBipartiteError, SdncError, SizeLimitError
from .graphs import Graph, Labeling, build_graph, interval_table, all_pairs_distances
from .protocol import Learner, Transcript, run_session

HALVING_MAX_NODES = 20


def _bfs_dist(g: Graph, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


class ConstantLearner(Learner):
    """Predicts one fixed label for every node, in ascending id order."""

    name = "constant_baseline"

    def __init__(self, label: int = 0):
        self._label = label

    def _run(self, g: Graph):
        for v in range(g.n):
            yield (v, self._label)


class TraverseLearner(Learner):
    """Graph traversal: predict each newly reached node with the observed
    label of the neighbor it was discovered from.

    Only the traversal root and cut-nodes can be mispredicted, so the
    mistake count is at most the cut-border size plus one, in O(n + m)
    total time for any labeling.
    """

    name = "traverse"

    def __init__(self, root: int = 0, default_label: int = 0):
        self._root = root
        self._default = default_label

    def _run(self, g: Graph):
        root = self._root
        obs = yield (root, self._default)
        labels = {root: obs}
        queue = deque([root])
        seen = bytearray(g.n)
        seen[root] = 1
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if not seen[w]:
                    seen[w] = 1
                    obs = yield (w, labels[u])
                    labels[w] = obs
                    queue.append(w)


def run_traverse(g: Graph, source, root: int = 0) -> Transcript:
    return run_session(g, TraverseLearner(root=root), source)


class BipartiteLearner(Learner):
    """Two-phase learner for convex bipartitions of bipartite graphs.

    Phase 1 predicts along a BFS tree until the first non-root mistake,
    which pins down a cut-edge ``{u, v}``.  Phase 2 predicts every other
    node by whichever endpoint is closer; on bipartite graphs the two
    distances never tie (a tie would close an odd cycle), and on a convex
    bipartition the closer endpoint's side is the node's own.  At most two
    mistakes total, in linear time.

    Non-bipartite graphs are rejected.  If the labeling turns out not to be
    a convex bipartition the session still completes, but ``bound_void`` is
    set and the 2-mistake guarantee is off.
    """

    name = "bipartite"

    def __init__(self, root: int = 0, default_label: int = 0):
        self._root = root
        self._default = default_label
        self.bound_void = False

    def _run(self, g: Graph):
        color = [-1] * g.n
        color[0] = 0
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    raise NotBipartiteError("graph contains an odd cycle")
        self.bound_void = False
        root = self._root
        obs = yield (root, self._default)
        labels = {root: obs}
        cut = None
        queue = deque([root])
        seen = bytearray(g.n)
        seen[root] = 1
        bfs_pairs = []
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if not seen[w]:
                    seen[w] = 1
                    bfs_pairs.append((u, w))
                    queue.append(w)
        idx = 0
        while idx < len(bfs_pairs):
            u, w = bfs_pairs[idx]
            idx += 1
            pred = labels[u]
            obs = yield (w, pred)
            labels[w] = obs
            if obs != pred:
                cut = (u, w)
                break
        if cut is None:
            return
        u, v = cut
        du = _bfs_dist(g, u)
        dv = _bfs_dist(g, v)
        for x in range(g.n):
            if x in labels:
                continue
            if du[x] == dv[x]:
                raise SdncError(
                    "distance tie across a cut-edge: graph is not bipartite"
                )
            pred = labels[u] if du[x] < dv[x] else labels[v]
            obs = yield (x, pred)
            labels[x] = obs
            if obs != pred:
                self.bound_void = True


def run_bipartite(g: Graph, source) -> Transcript:
    learner = BipartiteLearner()
    transcript = run_session(g, learner, source)
    transcript.extras["bound_void"] = learner.bound_void
    return transcript


# ---------------------------------------------------------------------------
# Grid walking
# ---------------------------------------------------------------------------

# neighbor columns in clockwise order starting from the top
UP, RIGHT, DOWN, LEFT = 0, 1, 2, 3


@dataclass(frozen=True)
class GridSpec:
    """Grid graph as an ``n x 4`` clockwise neighbor matrix.

    Row ``i`` lists the neighbors of node ``i + 1`` in order top, right,
    bottom, left; ids are 1-indexed inside the matrix so that 0 can mark a
    missing neighbor.  External node ids stay 0-indexed row-major;
    conversion happens only at this boundary.
    """

    rows: int
    cols: int
    matrix: np.ndarray

    def __post_init__(self):
        expect = _grid_matrix(self.rows, self.cols)
        if self.matrix.shape != expect.shape or not np.array_equal(
            self.matrix, expect
        ):
            raise FormatError("neighbor matrix is not a clockwise grid matrix")

    @property
    def n(self) -> int:
        return self.rows * self.cols

    def neighbor(self, v: int, direction: int) -> int | None:
        w = int(self.matrix[v, direction])
        return w - 1 if w else None

    def to_graph(self) -> Graph:
        edges = set()
        for v in range(self.n):
            for d in range(4):
                w = self.neighbor(v, d)
                if w is not None:
                    edges.add((min(v, w), max(v, w)))
        return build_graph(self.n, sorted(edges))


def _grid_matrix(rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("grid needs rows >= 1 and cols >= 1")
    n = rows * cols
    m = np.zeros((n, 4), dtype=np.int32)
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if r > 0:
                m[v, UP] = v - cols + 1
            if c < cols - 1:
                m[v, RIGHT] = v + 1 + 1
            if r < rows - 1:
                m[v, DOWN] = v + cols + 1
            if c > 0:
                m[v, LEFT] = v - 1 + 1
    return m


def build_gridspec(rows: int, cols: int) -> GridSpec:
    return GridSpec(rows, cols, _grid_matrix(rows, cols))


class GridWalkerLearner(Learner):
    """Corner-walking learner for convex partitions of grid graphs.

    From each discovered cluster border node it walks three axis-aligned
    legs (along the entry wall, across, and back along the far wall), each
    ending at the grid border or one step past the cluster, locating two
    opposite corners.  Convex grid clusters are exactly the axis-aligned
    sub-rectangles, so the corners determine every remaining label of the
    cluster for free; the foreign nodes met by the legs seed the discovery
    queue.  At most three cut-edge crossings per cluster, hence at most
    ``3k`` mistakes on a convex ``k``-partition, in linear time.
    """

    name = "gridwalker"

    def __init__(self, spec: GridSpec, default_label: int = 0):
        self.spec = spec
        self._default = default_label

    def _run(self, g: Graph):
        spec = self.spec
        if g.n != spec.n:
            raise SdncError("graph does not match the grid spec")
        cols = spec.cols
        observed: dict[int, int] = {}
        inferred: dict[int, int] = {}
        covered = bytearray(spec.n)
        queue: deque = deque()

        def query(v, pred):
            obs = yield (v, pred)
            observed[v] = obs
            return obs

        def walk(start, d, ell):
            cur = start
            while True:
                nxt = spec.neighbor(cur, d)
                if nxt is None:
                    return cur, None
                lab = observed.get(nxt)
                if lab is None:
                    lab = inferred.get(nxt)
                if lab is None:
                    lab = yield from query(nxt, ell)
                if lab == ell:
                    cur = nxt
                else:
                    return cur, nxt

        def process(entry, d_in):
            ell = observed[entry]
            d1 = (d_in + 1) % 4
            p1, f1 = yield from walk(entry, d1, ell)
            p2, f2 = yield from walk(p1, d_in, ell)
            p3, f3 = yield from walk(p2, (d1 + 2) % 4, ell)
            for f, fd in ((f1, d1), (f2, d_in), (f3, (d1 + 2) % 4)):
                if f is not None and not covered[f]:
                    queue.append((f, fd))
            r1, c1 = divmod(p1, cols)
            r3, c3 = divmod(p3, cols)
            for r in range(min(r1, r3), max(r1, r3) + 1):
                for c in range(min(c1, c3), max(c1, c3) + 1):
                    v = r * cols + c
                    covered[v] = 1
                    if v not in observed:
                        inferred[v] = ell

        yield from query(0, self._default)
        yield from process(0, RIGHT)
        remaining = spec.n - int(sum(covered))
        while remaining or queue:
            if queue:
                v, d = queue.popleft()
                if covered[v]:
                    continue
                yield from process(v, d)
            else:
                # coverage gap: restart from any uncovered node touching
                # resolved territory
                found = False
                for v in range(spec.n):
                    if covered[v] or v in observed:
                        continue
                    for d in range(4):
                        w = spec.neighbor(v, d)
                        if w is None:
                            continue
                        lw = observed.get(w, inferred.get(w))
                        if lw is not None and covered[w]:
                            pred = 0 if lw != 0 else 1
                            yield from query(v, pred)
                            yield from process(v, (d + 2) % 4)
                            found = True
                            break
                    if found:
                        break
                if not found:
                    break
            remaining = spec.n - int(sum(covered))
        for v in range(spec.n):
            if v not in observed:
                yield from query(v, inferred.get(v, self._default))


def run_gridwalker(spec: GridSpec, source) -> Transcript:
    g = spec.to_graph()
    return run_session(g, GridWalkerLearner(spec), source)


# ---------------------------------------------------------------------------
# Halving over the enumerated version space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VersionSpace:
    """All convex bipartitions of one graph, as bitwise label masks."""

    n: int
    masks: np.ndarray

    @property
    def size(self) -> int:
        return len(self.masks)

    def labelings(self) -> list[Labeling]:
        return [Labeling.from_mask(self.n, int(m)) for m in self.masks]

    def __contains__(self, y: Labeling) -> bool:
        return int(y.as_mask()) in set(int(m) for m in self.masks)


def enumerate_convex_bipartitions(g: Graph, tables=None) -> VersionSpace:
    """Filter all ``2^n`` labelings down to the convex bipartitions.

    Constant labelings are vacuously convex and included.  Capped at
    ``HALVING_MAX_NODES`` nodes.
    """
    if g.n > HALVING_MAX_NODES:
        raise SizeLimitError(
            f"version-space enumeration is capped at n <= {HALVING_MAX_NODES}"
        )
    if tables is None:
        dt = all_pairs_distances(g)
        it = interval_table(g, dt)
    else:
        it = tables[1]
    masks = _kernels.enum_bipartition_masks(it.single_word(), g.n)
    return VersionSpace(g.n, np.sort(masks))


class HalvingLearner(Learner):
    """Majority vote over the surviving convex bipartitions.

    Selects the lowest-id unlabeled node, predicts the version-space
    majority (ties toward 0), and drops inconsistent hypotheses after each
    observation, so every mistake at least halves the space.  If the true
    labeling is outside the space the learner falls back to constant 0 and
    flags the session non-realizable.
    """

    name = "halving"

    def __init__(self, version_space: VersionSpace | None = None, tables=None):
        self._vs = version_space
        self._tables = tables
        self.non_realizable = False
        self.size_history: list[tuple[int, int, bool]] = []

    def _run(self, g: Graph):
        vs = self._vs or enumerate_convex_bipartitions(g, tables=self._tables)
        masks = vs.masks.astype(np.uint64)
        self.non_realizable = False
        self.size_history = []
        for v in range(g.n):
            before = len(masks)
            if before:
                bits = (masks >> np.uint64(v)) & np.uint64(1)
                ones = int(bits.sum())
                pred = 1 if ones > before - ones else 0
            else:
                pred = 0
            obs = yield (v, pred)
            if before:
                masks = masks[bits == obs]
                if len(masks) == 0:
                    self.non_realizable = True
            self.size_history.append((before, len(masks), pred != obs))


def run_halving(g: Graph, source, version_space=None) -> Transcript:
    learner = HalvingLearner(version_space=version_space)
    transcript = run_session(g, learner, source)
    transcript.extras["non_realizable"] = learner.non_realizable
    return transcript
