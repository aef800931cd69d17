"""Good-quadruple learners: the binary round algorithm, the multiclass
recursion, and their closed-form mistake bounds.

The binary learner repeatedly anchors a node participating in the largest
number of good quadruples, then walks candidate partners in decreasing
frozen-count order, exploiting that a good quadruple cannot have both its
pairs in opposite convex clusters.  Per round it either reveals an
``epsilon`` fraction of the unknown set with at most three mistakes or
eliminates a convexity-violating quadruple with at most four, which yields
mistake bounds logarithmic in ``n`` for (near-)convex bipartitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import _kernels
from .graphs import (
    Graph,
    IntervalTable,
    all_pairs_distances,
    interval_table,
)
from .protocol import NOT_FOUND, Learner, Transcript, run_session

__all__ = [
    "RoundTrace",
    "BoundReport",
    "bounds",
    "Good4Learner",
    "MulticlassGood4Learner",
    "run_good4",
    "run_good4_nearconvex",
    "run_multiclass_good4",
    "find_distinct_label",
    "FdlState",
    "round_ledger_violations",
    "witness_violations",
    "build_tables",
]


def build_tables(g: Graph) -> tuple:
    dt = all_pairs_distances(g)
    return dt, interval_table(g, dt)


@dataclass
class RoundTrace:
    """Per-round accounting of one anchor cycle of the binary learner."""

    index: int
    u_size: int
    epsilon: Fraction
    a: int
    a_step: tuple  # (node, predicted, observed)
    b_steps: list = field(default_factory=list)
    c_steps: list = field(default_factory=list)
    d_steps: list = field(default_factory=list)
    witness_ok: bool = True
    witness_have: int = 0
    witness_needed: int = 0

    @property
    def revealed(self) -> int:
        return 1 + len(self.b_steps) + len(self.c_steps) + len(self.d_steps)

    @property
    def mistakes(self) -> int:
        steps = [self.a_step, *self.b_steps, *self.c_steps, *self.d_steps]
        return sum(1 for _, p, o in steps if p != o)

    @property
    def step4_mistake(self) -> bool:
        return any(p != o for _, p, o in self.d_steps)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "u_size": self.u_size,
            "epsilon": f"{self.epsilon.numerator}/{self.epsilon.denominator}",
            "a": self.a,
            "a_step": list(self.a_step),
            "b_steps": [list(s) for s in self.b_steps],
            "c_steps": [list(s) for s in self.c_steps],
            "d_steps": [list(s) for s in self.d_steps],
            "witness_ok": self.witness_ok,
            "witness_have": self.witness_have,
            "witness_needed": self.witness_needed,
            "revealed": self.revealed,
            "mistakes": self.mistakes,
        }


@dataclass(frozen=True)
class BoundReport:
    """Closed-form mistake bounds for a ``K_w``-minor-free instance.

    ``w`` is the smallest excluded clique-minor order (largest clique minor
    plus one); ``M`` the flip budget to convexity; ``k`` the class count.
    """

    n: float
    w: int
    M: int
    k: int
    binary_bound: float
    near_convex_bound: float
    multiclass_bound: int

    def check(self, mistakes: int, kind: str = "binary") -> bool:
        return mistakes <= getattr(self, f"{kind}_bound")


def bounds(n, w: int, M: int = 0, k: int = 2) -> BoundReport:
    """Evaluate the three mistake-bound formulas.

    binary: ``3 w^4 ln n``; near-convex: ``4M`` more; multiclass:
    ``2^k ceil(w^{4k} ln n) + (w^4 + 3)^k`` (the explicit constants of the
    round/remainder accounting, no hidden big-O factor).
    """
    if w < 1 or M < 0 or k < 1:
        raise ValueError("need w >= 1, M >= 0, k >= 1")
    log_n = math.log(n)
    binary = 3.0 * w**4 * log_n
    multiclass = 2**k * math.ceil(w ** (4 * k) * log_n) + (w**4 + 3) ** k
    return BoundReport(n, w, M, k, binary, 4 * M + binary, multiclass)


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


class Good4Learner(Learner):
    """Binary learner over good quadruples.

    Every argmax is tie-broken toward the lowest node id by default
    (``tie_break="random"`` with an ``rng`` gives a seeded shuffle instead);
    the protocol's free predictions default to label 0.  After a session,
    ``rounds`` holds one :class:`RoundTrace` per anchor cycle.
    """

    name = "good4"

    def __init__(self, tables=None, tie_break="lowest", rng=None, default_label=0):
        if tie_break not in ("lowest", "random"):
            raise ValueError("tie_break must be 'lowest' or 'random'")
        if tie_break == "random" and rng is None:
            rng = np.random.default_rng()
        self._tables = tables
        self._tie_break = tie_break
        self._rng = rng
        self._default = default_label
        self.rounds: list[RoundTrace] = []

    def _rank(self, n: int):
        if self._tie_break == "lowest":
            return list(range(n))
        perm = self._rng.permutation(n)
        rank = [0] * n
        for r, v in enumerate(perm):
            rank[int(v)] = r
        return rank

    def _run(self, g: Graph):
        it = (self._tables or build_tables(g))[1]
        packed = it.packed
        n = g.n
        rank = self._rank(n)
        U = list(range(n))
        self.rounds = []
        round_index = 0
        while len(U) >= 4:
            f, per_node, q_good = _kernels.round_pair_stats(
                packed, np.asarray(U)
            )
            if q_good == 0:
                break
            sigma = len(U)
            eps = Fraction(q_good, 8 * total_q(sigma))
            # Step 1: anchor the node in the most good quadruples.
            best = max(range(sigma), key=lambda i: (per_node[i], -rank[U[i]]))
            a = U[best]
            pair_count = {
                U[j]: int(f[_kernels.pair_index(best, j, sigma)])
                for j in range(sigma)
                if j != best
            }
            thr_pairs = _ceil(4 * eps * comb(sigma - 2, 2))
            have = sum(1 for c in pair_count.values() if c >= thr_pairs)
            needed = _ceil(4 * eps * (sigma - 1))
            obs_a = yield (a, self._default)
            y_tilde = obs_a
            U.remove(a)
            trace = RoundTrace(
                index=round_index,
                u_size=sigma,
                epsilon=eps,
                a=a,
                a_step=(a, self._default, obs_a),
                witness_ok=have >= needed,
                witness_have=have,
                witness_needed=needed,
            )
            round_index += 1
            self.rounds.append(trace)
            # Step 2: partners of a, frozen counts, decreasing order.
            order_b = sorted(U, key=lambda v: (-pair_count[v], rank[v]))
            b = None
            for v in order_b:
                pred = 1 - y_tilde
                obs = yield (v, pred)
                U.remove(v)
                trace.b_steps.append((v, pred, obs))
                if obs != pred:
                    b = v
                    break
            if b is None:
                continue
            if not U:
                continue
            # Step 3: nodes extending (a, b), frozen counts, decreasing order.
            tcounts = _kernels.triple_counts(packed, np.asarray(U), a, b)
            tmap = dict(zip(list(U), (int(c) for c in tcounts)))
            order_c = sorted(U, key=lambda v: (-tmap[v], rank[v]))
            c = None
            for v in order_c:
                obs = yield (v, y_tilde)
                U.remove(v)
                trace.c_steps.append((v, y_tilde, obs))
                if obs != y_tilde:
                    c = v
                    break
            if c is None:
                continue
            if not U:
                continue
            # Step 4: all quadruple completions of (a, b, c).
            flags = _kernels.partner_flags(packed, np.asarray(U), a, b, c)
            for v in [u for u, hit in zip(list(U), flags) if hit]:
                obs = yield (v, y_tilde)
                U.remove(v)
                trace.d_steps.append((v, y_tilde, obs))
                if obs != y_tilde:
                    break
        # Step 5: no good quadruple left; remaining labels are a free-for-all.
        for v in list(U):
            yield (v, self._default)


def total_q(m: int) -> int:
    return 3 * comb(m, 4) if m >= 4 else 0


def run_good4(
    g: Graph, source, *, tables=None, tie_break="lowest", rng=None
) -> tuple[Transcript, list[RoundTrace]]:
    learner = Good4Learner(tables=tables, tie_break=tie_break, rng=rng)
    transcript = run_session(g, learner, source)
    transcript.extras["rounds"] = [t.to_dict() for t in learner.rounds]
    return transcript, learner.rounds


def run_good4_nearconvex(g: Graph, source, *, tables=None) -> Transcript:
    """Identical code path to :func:`run_good4`; the robustness to label
    flips is a property of the same algorithm, which never needs the flip
    count in advance.  Separate entry point for bound reporting only."""
    transcript, _ = run_good4(g, source, tables=tables)
    return transcript


def round_ledger_violations(
    traces: list[RoundTrace], convex: bool
) -> list[str]:
    """Check the per-round accounting on every sufficiently large round.

    Convex inputs: at most 3 mistakes, at least ``ceil(eps * |U|)`` labels
    revealed, and no mistake among the quadruple completions of step 4.
    Arbitrary binary inputs: each round either satisfies the above or ends
    by removing a convexity-violating quadruple with at most 4 mistakes.
    """
    issues = []
    for t in traces:
        if t.u_size <= _ceil(1 / t.epsilon) + 3:
            continue
        need = _ceil(t.epsilon * t.u_size)
        clean = t.mistakes <= 3 and t.revealed >= need and not t.step4_mistake
        if convex:
            if not clean:
                issues.append(
                    f"round {t.index}: mistakes={t.mistakes} revealed="
                    f"{t.revealed} (need {need}) step4={t.step4_mistake}"
                )
        else:
            violating = t.step4_mistake and t.mistakes <= 4
            if not (clean or violating):
                issues.append(
                    f"round {t.index}: mistakes={t.mistakes} revealed="
                    f"{t.revealed} (need {need}) step4={t.step4_mistake}"
                )
    return issues


def witness_violations(traces: list[RoundTrace], w: int) -> list[str]:
    """The anchor of every large-enough round must certify the good-node
    property: enough partners with enough good pairs each."""
    issues = []
    for t in traces:
        if t.u_size >= max(w, 4) and not t.witness_ok:
            issues.append(
                f"round {t.index}: anchor {t.a} has {t.witness_have} strong "
                f"partners, needs {t.witness_needed}"
            )
    return issues


# ---------------------------------------------------------------------------
# Multiclass
# ---------------------------------------------------------------------------

@dataclass
class FdlState:
    """Session-global context threaded through the search recursion."""

    it: IntervalTable
    labels: dict = field(default_factory=dict)
    mistakes: int = 0
    call_log: list = field(default_factory=list)
    small_set_returns: int = 0


def find_distinct_label(state: FdlState, S: list, Z: frozenset, pre=None):
    """Search ``S`` for a node labeled outside ``Z``.

    Generator protocol: yields ``(node, prediction)`` and receives the
    observed label; returns the found node or ``NOT_FOUND``.  Revisited
    nodes never cost a prediction: observed labels are tracked globally in
    ``state``.  Each call (recursive ones included) makes at most
    ``3 * 2^(|Z|-1) - 2`` prediction mistakes and otherwise either reveals
    an ``epsilon^(|Z|-1)`` fraction of ``S`` or exposes a
    convexity-violating quadruple.
    """
    before = state.mistakes
    result = yield from _fdl_body(state, S, Z, pre)
    state.call_log.append((len(Z), len(S), state.mistakes - before))
    return result


def _query(state: FdlState, v: int, pred: int):
    obs = yield (v, pred)
    state.labels[v] = obs
    if obs != pred:
        state.mistakes += 1
    return obs


def _fdl_body(state: FdlState, S: list, Z: frozenset, pre=None):
    labels = state.labels
    if len(Z) == 1:
        (z,) = Z
        for v in sorted(S):
            if v not in labels:
                yield from _query(state, v, z)
            if labels[v] != z:
                return v
        return NOT_FOUND
    if len(S) < 4:
        # no quadruples to steer by; the caller's thresholds guarantee this
        # only happens on degenerate recursions
        state.small_set_returns += 1
        return NOT_FOUND
    packed = state.it.packed
    arr = np.asarray(sorted(S))
    if pre is None:
        f, per_node, q_good = _kernels.round_pair_stats(packed, arr)
    else:
        f, per_node, q_good = pre
    s = len(arr)
    eps = Fraction(q_good, 8 * total_q(s))
    best = int(max(range(s), key=lambda i: (per_node[i], -arr[i])))
    a = int(arr[best])
    if a not in labels:
        yield from _query(state, a, min(Z))
    if labels[a] not in Z:
        return a
    thr_b = _ceil(2 * eps * (s - 2) * (s - 3))
    Y_a = [
        int(arr[j])
        for j in range(s)
        if j != best and f[_kernels.pair_index(best, j, s)] >= thr_b
    ]
    b = yield from find_distinct_label(state, Y_a, Z - {labels[a]})
    if b == NOT_FOUND:
        return NOT_FOUND
    if labels[b] != labels[a]:
        return b
    rest = [v for v in arr.tolist() if v not in (a, b)]
    thr_c = _ceil(eps * (s - 3))
    tcounts = _kernels.triple_counts(packed, np.asarray(rest), a, b)
    Y_ab = [v for v, cnt in zip(rest, tcounts) if cnt >= thr_c]
    c = yield from find_distinct_label(state, Y_ab, frozenset({labels[a]}))
    if c == NOT_FOUND:
        return NOT_FOUND
    if labels[c] not in Z:
        return c
    rest2 = [v for v in rest if v != c]
    flags = _kernels.partner_flags(packed, np.asarray(rest2), a, b, c)
    Y_abc = [v for v, hit in zip(rest2, flags) if hit]
    d = yield from find_distinct_label(state, Y_abc, Z - {labels[c]})
    if d == NOT_FOUND:
        return NOT_FOUND
    if labels[d] == labels[c]:
        return NOT_FOUND  # violating quadruple exposed
    return d


class MulticlassGood4Learner(Learner):
    """Multiclass wrapper: repeat the distinct-label search over the
    shrinking unknown set while good quadruples remain."""

    name = "multiclass_good4"

    def __init__(self, k: int, tables=None, default_label=0):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._tables = tables
        self._default = default_label
        self.state: FdlState | None = None
        self.rounds_run = 0

    def _run(self, g: Graph):
        it = (self._tables or build_tables(g))[1]
        state = FdlState(it=it)
        self.state = state
        self.rounds_run = 0
        Z = frozenset(range(self.k))
        U = list(range(g.n))
        while len(U) >= 4:
            pre = _kernels.round_pair_stats(it.packed, np.asarray(U))
            if pre[2] == 0:
                break
            self.rounds_run += 1
            yield from find_distinct_label(state, U, Z, pre=pre)
            U = [v for v in U if v not in state.labels]
        for v in range(g.n):
            if v not in state.labels:
                yield from _query(state, v, self._default)


def run_multiclass_good4(g: Graph, source, k: int, *, tables=None) -> Transcript:
    learner = MulticlassGood4Learner(k, tables=tables)
    transcript = run_session(g, learner, source)
    transcript.extras["fdl_calls"] = [
        {"z_size": z, "s_size": s, "mistakes": m}
        for z, s, m in learner.state.call_log
    ]
    return transcript
