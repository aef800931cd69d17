"""Good-quadruple counting over a shrinking unknown node set.

A quadruple is an unordered set of two disjoint unordered node pairs
``{(a, b), (c, d)}``; it is *good* when the geodesic intervals of the two
pairs share at least one node.  Counts here are exact integers and the
progress rate ``epsilon = q_good / (8 q)`` is kept as an exact
:class:`~fractions.Fraction` so that ceiling thresholds never suffer
floating-point drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from . import _kernels
from .graphs import IntervalTable, NodeSet


@dataclass(frozen=True)
class Quadruple:
    """Canonical quadruple: pairs sorted internally, then lexicographically."""

    pair1: tuple
    pair2: tuple

    def __post_init__(self):
        a, b = sorted(self.pair1)
        c, d = sorted(self.pair2)
        if len({a, b, c, d}) != 4:
            raise ValueError("quadruple needs four distinct nodes")
        p1, p2 = sorted(((a, b), (c, d)))
        object.__setattr__(self, "pair1", p1)
        object.__setattr__(self, "pair2", p2)

    @property
    def nodes(self) -> tuple:
        return (*self.pair1, *self.pair2)


@dataclass(frozen=True)
class QuadrupleStats:
    """Exact totals over one node set: ``q = 3 * C(|U|, 4)`` quadruples."""

    q: int
    q_good: int
    epsilon: Fraction | None

    @property
    def good_fraction(self) -> Fraction:
        if self.q == 0:
            raise ValueError("no quadruples: |U| < 4")
        return Fraction(self.q_good, self.q)


def total_quadruples(m: int) -> int:
    """3 * C(m, 4): each 4-subset splits into pairs in exactly 3 ways."""
    return 3 * comb(m, 4) if m >= 4 else 0


def iter_quadruples(nodes):
    """Canonical quadruples over a node collection, each exactly once."""
    for w, x, y, z in combinations(sorted(nodes), 4):
        yield Quadruple((w, x), (y, z))
        yield Quadruple((w, y), (x, z))
        yield Quadruple((w, z), (x, y))


def is_good(it: IntervalTable, a: int, b: int, c: int, d: int) -> bool:
    """Do the intervals I(a, b) and I(c, d) share a node?"""
    if len({a, b, c, d}) != 4:
        raise ValueError("quadruple needs four distinct nodes")
    return bool(np.any(it.packed[a, b] & it.packed[c, d]))


def _as_node_list(U) -> list[int]:
    if isinstance(U, NodeSet):
        return U.to_list()
    return sorted(set(int(v) for v in U))


def stats(it: IntervalTable, U) -> QuadrupleStats:
    """Exact quadruple totals over ``U`` (bitset-accelerated)."""
    nodes = _as_node_list(U)
    m = len(nodes)
    if m < 4:
        return QuadrupleStats(0, 0, None)
    _, _, q_good = _kernels.round_pair_stats(it.packed, np.asarray(nodes))
    q = total_quadruples(m)
    return QuadrupleStats(q, q_good, Fraction(q_good, 8 * q))


def naive_stats(it: IntervalTable, U) -> QuadrupleStats:
    """Reference counter: plain enumeration of every canonical quadruple."""
    nodes = _as_node_list(U)
    m = len(nodes)
    if m < 4:
        return QuadrupleStats(0, 0, None)
    q = 0
    q_good = 0
    for quad in iter_quadruples(nodes):
        q += 1
        if is_good(it, *quad.nodes):
            q_good += 1
    eps = Fraction(q_good, 8 * q)
    return QuadrupleStats(q, q_good, eps)


def per_node_good_counts(it: IntervalTable, U) -> dict:
    """For each node of ``U``: the number of good quadruples containing it."""
    nodes = _as_node_list(U)
    if len(nodes) < 4:
        return {v: 0 for v in nodes}
    _, per_node, _ = _kernels.round_pair_stats(it.packed, np.asarray(nodes))
    return {v: int(c) for v, c in zip(nodes, per_node)}


def pair_good_counts(it: IntervalTable, U, a: int) -> dict:
    """For each ``b'`` in ``U``: pairs ``(c, d)`` making ``{(a, b'), (c, d)}`` good.

    ``a`` must not be in ``U``; the partner pairs range over ``U`` minus
    ``b'``.
    """
    nodes = _as_node_list(U)
    if a in nodes:
        raise ValueError("anchor node must not be in U")
    ext = sorted(nodes + [a])
    m = len(ext)
    f, _, _ = _kernels.round_pair_stats(it.packed, np.asarray(ext))
    ia = ext.index(a)
    out = {}
    for b in nodes:
        ib = ext.index(b)
        out[b] = int(f[_kernels.pair_index(ia, ib, m)])
    return out


def triple_good_counts(it: IntervalTable, U, a: int, b: int) -> dict:
    """For each ``c'`` in ``U``: nodes ``d`` in ``U`` with ``{(a, b), (c', d)}`` good."""
    nodes = _as_node_list(U)
    if a in nodes or b in nodes:
        raise ValueError("anchor pair must not be in U")
    if not nodes:
        return {}
    counts = _kernels.triple_counts(it.packed, np.asarray(nodes), a, b)
    return {v: int(c) for v, c in zip(nodes, counts)}


def partners(it: IntervalTable, U, a: int, b: int, c: int) -> NodeSet:
    """All ``d`` in ``U`` completing the good quadruple ``{(a, b), (c, d)}``."""
    nodes = _as_node_list(U)
    for x in (a, b, c):
        if x in nodes:
            raise ValueError("anchor nodes must not be in U")
    if not nodes:
        return NodeSet(it.n, 0)
    flags = _kernels.partner_flags(it.packed, np.asarray(nodes), a, b, c)
    mask = 0
    for v, hit in zip(nodes, flags):
        if hit:
            mask |= 1 << v
    return NodeSet(it.n, mask)
