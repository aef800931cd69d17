"""Bit-packed counting kernels with numba and pure-numpy implementations.

Everything here operates on the packed interval table: a C-contiguous
``(n, n, W)`` uint64 array where bit ``x`` of row ``(u, v)`` (little-endian
within and across words) says whether node ``x`` lies on a shortest
``u``-``v`` path.

The backend is chosen once at import time from the ``SDNC_BACKEND``
environment variable: ``numba`` (default when importable), ``numpy``, or
``auto``.  Both implementations are importable directly for benchmarking
and equivalence tests: see :mod:`sdnc.bench`.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "round_pair_stats",
    "triple_counts",
    "partner_flags",
    "enum_bipartition_masks",
    "pair_index",
]

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)


def pair_index(i: int, j: int, m: int) -> int:
    """Row-major index of the unordered position pair ``i < j`` among ``m`` items."""
    if i > j:
        i, j = j, i
    return i * (2 * m - i - 1) // 2 + (j - i - 1)


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _unpack_row(packed_row: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(packed_row.view(np.uint8), bitorder="little", count=n)


def round_pair_stats_numpy(packed, U):
    """Per-pair good-partner counts over the node set ``U``.

    Returns ``(f, per_node, q_good)`` where ``f[p]`` is the number of node
    pairs ``(c, d)`` inside ``U`` and disjoint from pair ``p = (U[i], U[j])``
    whose interval meets the interval of ``p``; ``per_node[i]`` sums ``f``
    over the pairs with endpoint ``U[i]``; ``q_good`` is the good-quadruple
    count (half the total of ``f``).
    """
    n = packed.shape[0]
    m = len(U)
    P = m * (m - 1) // 2
    PW = max(1, (P + 63) >> 6)
    npb = np.zeros((n, PW), dtype=np.uint64)
    epb = np.zeros((m, PW), dtype=np.uint64)
    member_lists = []
    p = 0
    for i in range(m):
        u = int(U[i])
        for j in range(i + 1, m):
            v = int(U[j])
            xs = np.nonzero(_unpack_row(packed[u, v], n))[0]
            member_lists.append(xs)
            word = p >> 6
            bit = np.uint64(1) << np.uint64(p & 63)
            npb[xs, word] |= bit
            epb[i, word] |= bit
            epb[j, word] |= bit
            p += 1
    f = np.zeros(P, dtype=np.int64)
    per_node = np.zeros(m, dtype=np.int64)
    p = 0
    for i in range(m):
        for j in range(i + 1, m):
            acc = np.bitwise_or.reduce(npb[member_lists[p]], axis=0)
            good = acc & ~(epb[i] | epb[j])
            cnt = int(np.bitwise_count(good).sum())
            f[p] = cnt
            per_node[i] += cnt
            per_node[j] += cnt
            p += 1
    return f, per_node, int(f.sum()) // 2


def triple_counts_numpy(packed, U, a, b):
    """For each ``c`` in ``U``: how many ``d`` in ``U`` complete a good
    quadruple ``{(a, b), (c, d)}``."""
    m = len(U)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    mask_ab = packed[a, b]
    sub = packed[np.ix_(U, U)]
    hit = np.any(sub & mask_ab, axis=2)
    np.fill_diagonal(hit, False)
    return hit.sum(axis=1).astype(np.int64)


def partner_flags_numpy(packed, U, a, b, c):
    """Boolean flag per node of ``U``: does it complete ``{(a, b), (c, .)}``?"""
    if len(U) == 0:
        return np.zeros(0, dtype=np.bool_)
    mask_ab = packed[a, b]
    return np.any(packed[c][U] & mask_ab, axis=1)


def enum_bipartition_masks_numpy(masks, n):
    """All label masks whose one-set and zero-set are both convex.

    ``masks`` is the single-word interval table (``n <= 64``); the result is
    a sorted uint64 array of 2-labelings encoded bitwise, constants included.
    """
    total = np.uint64(1) << np.uint64(n)
    s = np.arange(int(total), dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    ok = np.ones(int(total), dtype=np.bool_)
    comp = s ^ full
    for u in range(n):
        su = (s >> np.uint64(u)) & _ONE
        cu = (comp >> np.uint64(u)) & _ONE
        for v in range(u + 1, n):
            iw = masks[u, v]
            both1 = (su & ((s >> np.uint64(v)) & _ONE)).astype(np.bool_)
            viol1 = (iw & ~s) != 0
            both0 = (cu & ((comp >> np.uint64(v)) & _ONE)).astype(np.bool_)
            viol0 = (iw & ~comp) != 0
            ok &= ~((both1 & viol1) | (both0 & viol0))
    return s[ok]


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None
    NUMBA_AVAILABLE = False


if NUMBA_AVAILABLE:

    @njit(cache=True, inline="always")
    def _pop64(x):
        x = x - ((x >> _ONE) & _M1)
        x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
        x = (x + (x >> np.uint64(4))) & _M4
        return (x * _H01) >> np.uint64(56)

    @njit(cache=True)
    def _round_pair_stats_numba(packed, U):
        n = packed.shape[0]
        W = packed.shape[2]
        m = U.shape[0]
        P = m * (m - 1) // 2
        PW = max(1, (P + 63) >> 6)
        npb = np.zeros((n, PW), dtype=np.uint64)
        epb = np.zeros((m, PW), dtype=np.uint64)
        p = 0
        for i in range(m):
            u = U[i]
            for j in range(i + 1, m):
                v = U[j]
                word = p >> 6
                bit = _ONE << np.uint64(p & 63)
                epb[i, word] |= bit
                epb[j, word] |= bit
                for w in range(W):
                    chunk = packed[u, v, w]
                    base = w << 6
                    off = 0
                    while chunk:
                        if chunk & _ONE:
                            npb[base + off, word] |= bit
                        chunk >>= _ONE
                        off += 1
                p += 1
        f = np.zeros(P, dtype=np.int64)
        per_node = np.zeros(m, dtype=np.int64)
        acc = np.empty(PW, dtype=np.uint64)
        p = 0
        for i in range(m):
            u = U[i]
            for j in range(i + 1, m):
                v = U[j]
                for t in range(PW):
                    acc[t] = np.uint64(0)
                for w in range(W):
                    chunk = packed[u, v, w]
                    base = w << 6
                    off = 0
                    while chunk:
                        if chunk & _ONE:
                            x = base + off
                            for t in range(PW):
                                acc[t] |= npb[x, t]
                        chunk >>= _ONE
                        off += 1
                cnt = 0
                for t in range(PW):
                    cnt += _pop64(acc[t] & ~(epb[i, t] | epb[j, t]))
                f[p] = cnt
                per_node[i] += cnt
                per_node[j] += cnt
                p += 1
        total = np.int64(0)
        for p in range(P):
            total += f[p]
        return f, per_node, total // 2

    @njit(cache=True)
    def _triple_counts_numba(packed, U, a, b):
        W = packed.shape[2]
        m = U.shape[0]
        out = np.zeros(m, dtype=np.int64)
        for ci in range(m):
            c = U[ci]
            cnt = 0
            for di in range(m):
                if di == ci:
                    continue
                d = U[di]
                for w in range(W):
                    if packed[c, d, w] & packed[a, b, w]:
                        cnt += 1
                        break
            out[ci] = cnt
        return out

    @njit(cache=True)
    def _partner_flags_numba(packed, U, a, b, c):
        W = packed.shape[2]
        m = U.shape[0]
        out = np.zeros(m, dtype=np.bool_)
        for di in range(m):
            d = U[di]
            for w in range(W):
                if packed[c, d, w] & packed[a, b, w]:
                    out[di] = True
                    break
        return out

    @njit(cache=True)
    def _enum_bipartition_masks_numba(masks, n):
        full = (_ONE << np.uint64(n)) - _ONE
        cap = 1024
        out = np.empty(cap, dtype=np.uint64)
        size = 0
        total = 1 << n
        for si in range(total):
            s = np.uint64(si)
            good = True
            for side in range(2):
                sel = s if side == 0 else (s ^ full)
                inv = ~sel
                for u in range(n):
                    if not (sel >> np.uint64(u)) & _ONE:
                        continue
                    for v in range(u + 1, n):
                        if not (sel >> np.uint64(v)) & _ONE:
                            continue
                        if masks[u, v] & inv:
                            good = False
                            break
                    if not good:
                        break
                if not good:
                    break
            if good:
                if size == cap:
                    cap *= 2
                    bigger = np.empty(cap, dtype=np.uint64)
                    bigger[:size] = out[:size]
                    out = bigger
                out[size] = s
                size += 1
        return out[:size]

    def round_pair_stats_numba(packed, U):
        f, per_node, qg = _round_pair_stats_numba(
            packed, np.ascontiguousarray(U, dtype=np.int64)
        )
        return f, per_node, int(qg)

    def triple_counts_numba(packed, U, a, b):
        return _triple_counts_numba(
            packed, np.ascontiguousarray(U, dtype=np.int64), a, b
        )

    def partner_flags_numba(packed, U, a, b, c):
        return _partner_flags_numba(
            packed, np.ascontiguousarray(U, dtype=np.int64), a, b, c
        )

    def enum_bipartition_masks_numba(masks, n):
        return _enum_bipartition_masks_numba(
            np.ascontiguousarray(masks, dtype=np.uint64), n
        )


def _select_backend() -> str:
    choice = os.environ.get("SDNC_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if choice == "numba":
        if not NUMBA_AVAILABLE:
            raise ImportError("SDNC_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"unknown SDNC_BACKEND value: {choice!r}")


BACKEND = _select_backend()

if BACKEND == "numba":
    round_pair_stats = round_pair_stats_numba
    triple_counts = triple_counts_numba
    partner_flags = partner_flags_numba
    enum_bipartition_masks = enum_bipartition_masks_numba
else:
    round_pair_stats = round_pair_stats_numpy
    triple_counts = triple_counts_numpy
    partner_flags = partner_flags_numpy
    enum_bipartition_masks = enum_bipartition_masks_numpy
