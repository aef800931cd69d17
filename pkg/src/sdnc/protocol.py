"""Self-directed session loop, transcripts, label sources, and adversaries.

One session covers every node exactly once: the learner selects a node,
commits to a prediction, and only then observes the true label.  Sessions
are strictly sequential; independent sessions may run concurrently since
all shared inputs are immutable and adversary state is per-session.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import ProtocolViolationError, SdncError
from .graphs import Graph, Labeling, NodeSet, build_graph

NOT_FOUND = -1


@dataclass(frozen=True)
class Step:
    node: int
    predicted: int
    observed: int


class Transcript:
    """Ordered record of one full session over all ``n`` nodes."""

    __slots__ = ("n", "steps", "learner", "source", "extras")

    def __init__(self, n, steps, learner="?", source="?", extras=None):
        self.n = n
        self.steps = steps
        self.learner = learner
        self.source = source
        self.extras = extras or {}

    @property
    def mistakes(self) -> int:
        return sum(1 for s in self.steps if s.predicted != s.observed)

    def observed_labeling(self, k: int | None = None) -> Labeling:
        labels = [0] * self.n
        for s in self.steps:
            labels[s.node] = s.observed
        if k is None:
            k = max(labels) + 1 if labels else 1
        return Labeling(tuple(labels), max(k, 2))

    def validate(self):
        """Protocol integrity: exactly n steps, each node exactly once."""
        if len(self.steps) != self.n:
            raise ProtocolViolationError(
                f"{len(self.steps)} steps for {self.n} nodes"
            )
        seen = set()
        for s in self.steps:
            if s.node in seen or not 0 <= s.node < self.n:
                raise ProtocolViolationError(f"bad step node {s.node}")
            seen.add(s.node)

    def to_dict(self) -> dict:
        out = {
            "steps": [
                {"node": s.node, "predicted": s.predicted, "observed": s.observed}
                for s in self.steps
            ],
            "summary": {
                "mistakes": self.mistakes,
                "learner": self.learner,
                "source": self.source,
            },
        }
        out.update(self.extras)
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, n: int | None = None) -> "Transcript":
        steps = [
            Step(d["node"], d["predicted"], d["observed"]) for d in data["steps"]
        ]
        if n is None:
            n = len(steps)
        extras = {
            k: v for k, v in data.items() if k not in ("steps", "summary")
        }
        return cls(
            n,
            steps,
            data["summary"]["learner"],
            data["summary"]["source"],
            extras,
        )


class Learner:
    """Select/predict/observe learner driven by an internal generator.

    Subclasses implement ``_run(g)``, a generator that yields
    ``(node, prediction)`` and receives the observed label back at the
    yield point.
    """

    name = "learner"

    def start(self, g: Graph):
        self._gen = self._run(g)
        try:
            self._pending = next(self._gen)
        except StopIteration:
            self._pending = None

    def select(self) -> int:
        if self._pending is None:
            raise ProtocolViolationError(f"{self.name}: no further queries")
        return self._pending[0]

    def predict(self, node: int) -> int:
        return self._pending[1]

    def observe(self, node: int, label: int):
        try:
            self._pending = self._gen.send(label)
        except StopIteration:
            self._pending = None

    def _run(self, g: Graph):
        raise NotImplementedError


class LabelSource:
    """Answers label queries; adaptive subclasses may watch predictions."""

    name = "source"

    def answer(self, node: int, predicted: int) -> int:
        raise NotImplementedError


class FixedSource(LabelSource):
    """Oracle for a fixed labeling."""

    name = "fixed"

    def __init__(self, labeling: Labeling, name: str | None = None):
        self.labeling = labeling
        if name:
            self.name = name

    def answer(self, node: int, predicted: int) -> int:
        return self.labeling.labels[node]


def run_session(g: Graph, learner: Learner, source: LabelSource) -> Transcript:
    """Drive one complete session and return its transcript.

    Enforces select-from-unqueried and predict-before-observe ordering;
    a learner that reselects a node raises :class:`ProtocolViolationError`.
    """
    learner.start(g)
    n = g.n
    queried = bytearray(n)
    steps = []
    append = steps.append
    for _ in range(n):
        v = learner.select()
        if not 0 <= v < n or queried[v]:
            raise ProtocolViolationError(f"{learner.name} reselected node {v}")
        pred = learner.predict(v)
        obs = source.answer(v, pred)
        queried[v] = 1
        learner.observe(v, obs)
        append(Step(v, pred, obs))
    return Transcript(n, steps, learner.name, source.name)


# ---------------------------------------------------------------------------
# Adversaries
# ---------------------------------------------------------------------------

class CliquePathSource(LabelSource):
    """Adaptive adversary on a clique with a pendant path.

    The path and the attachment node are pinned to label 0 (any fixed
    choice keeps both clusters convex); every other clique node is answered
    with the flip of the learner's prediction, forcing a mistake on each of
    the ``h - 1`` free clique nodes.  The answered labeling is always a
    convex bipartition.
    """

    name = "clique_path"

    def __init__(self, h: int, n: int, attach: int = 0):
        self.h = h
        self.n = n
        self.attach = attach
        self.answers: dict[int, int] = {}

    def answer(self, node: int, predicted: int) -> int:
        if node >= self.h or node == self.attach:
            label = 0
        else:
            label = 1 - predicted
        self.answers[node] = label
        return label

    def final_labeling(self) -> Labeling:
        if len(self.answers) != self.n:
            raise SdncError("session incomplete: not all nodes answered")
        return Labeling(tuple(self.answers[v] for v in range(self.n)), 2)


def clique_path_adversary(h: int, n: int) -> tuple[Graph, CliquePathSource]:
    """Clique on ``h`` nodes plus a pendant path of ``n - h`` nodes.

    Forces at least ``h - 1`` mistakes on any learner while staying
    consistent with a convex bipartition.
    """
    if h < 2:
        raise ValueError("clique size must be >= 2")
    if n <= h:
        raise ValueError("need at least one path node (n > h)")
    edges = [(u, v) for u in range(h) for v in range(u + 1, h)]
    edges.append((0, h))
    edges.extend((v, v + 1) for v in range(h, n - 1))
    return build_graph(n, edges), CliquePathSource(h, n, attach=0)


class MergingDegreeSource(LabelSource):
    """Adaptive adversary pinning a connected core and flipping the rest.

    The core is the first ``n - c`` nodes in BFS order from node 0 (the
    construction allows any connected core), answered 0; each of the ``c``
    remaining nodes is answered with the flip of the prediction.  The final
    labeling always has merging degree at most ``2c``.
    """

    name = "merging_degree"

    def __init__(self, g: Graph, c: int):
        if not 0 <= c < g.n:
            raise ValueError("need 0 <= c < n")
        self.c = c
        self.n = g.n
        order = []
        seen = bytearray(g.n)
        seen[0] = 1
        queue = deque([0])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in g.neighbors(u):
                if not seen[w]:
                    seen[w] = 1
                    queue.append(w)
        self.core = frozenset(order[: g.n - c])
        self.answers: dict[int, int] = {}

    def answer(self, node: int, predicted: int) -> int:
        label = 0 if node in self.core else 1 - predicted
        self.answers[node] = label
        return label

    def final_labeling(self) -> Labeling:
        if len(self.answers) != self.n:
            raise SdncError("session incomplete: not all nodes answered")
        return Labeling(tuple(self.answers[v] for v in range(self.n)), 2)


def merging_degree_adversary(g: Graph, c: int) -> MergingDegreeSource:
    return MergingDegreeSource(g, c)


def merging_degree(g: Graph, y: Labeling) -> int:
    """Sum over maximal uniformly-labeled connected clusters of
    min(inner border, outer border)."""
    n = g.n
    labels = y.labels
    cluster_id = [-1] * n
    clusters: list[list[int]] = []
    for s in range(n):
        if cluster_id[s] >= 0:
            continue
        cid = len(clusters)
        comp = [s]
        cluster_id[s] = cid
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if cluster_id[w] < 0 and labels[w] == labels[s]:
                    cluster_id[w] = cid
                    comp.append(w)
                    queue.append(w)
        clusters.append(comp)
    total = 0
    for cid, comp in enumerate(clusters):
        inner = [
            v for v in comp if any(cluster_id[w] != cid for w in g.neighbors(v))
        ]
        outer = set()
        for v in inner:
            for w in g.neighbors(v):
                if cluster_id[w] != cid:
                    outer.add(w)
        total += min(len(inner), len(outer))
    return total


@dataclass
class GridPermutationSource(FixedSource):
    """Fixed source whose labeling permutes the classes of a convex grid
    partition; built by the generators module."""


def grid_permutation_source(labeling: Labeling) -> FixedSource:
    return FixedSource(labeling, name="grid_permutation")
