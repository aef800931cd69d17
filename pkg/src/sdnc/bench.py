"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run with ``python -m sdnc.bench``.  Timings cover the two hot paths: the
per-round quadruple statistics and the version-space enumeration.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .generators import gen_graph
from .good4 import build_tables


def _time(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    print(f"active backend: {_kernels.BACKEND}")
    if not _kernels.NUMBA_AVAILABLE:
        print("numba not importable; only the numpy path can run")
        return
    rng = np.random.default_rng(7)
    cases = [
        ("tree n=150", gen_graph("tree", rng, n=150)),
        ("grid 10x10", gen_graph("grid", rng, rows=10, cols=10)),
        ("3-tree n=80", gen_graph("k_tree", rng, k=3, n=80)),
    ]
    print(f"{'instance':<14} {'kernel':<18} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, inst in cases:
        _, it = build_tables(inst.graph)
        U = np.arange(inst.n)
        # warm up the jit before timing
        _kernels.round_pair_stats_numba(it.packed, U)
        t_nb, out_nb = _time(_kernels.round_pair_stats_numba, it.packed, U)
        t_np, out_np = _time(_kernels.round_pair_stats_numpy, it.packed, U)
        assert out_nb[2] == out_np[2], "backend mismatch"
        print(
            f"{name:<14} {'round_pair_stats':<18} {t_nb * 1e3:>8.1f}ms "
            f"{t_np * 1e3:>8.1f}ms {t_np / t_nb:>7.1f}x"
        )
    small = gen_graph("grid", rng, rows=4, cols=4)
    _, it = build_tables(small.graph)
    masks = it.single_word()
    _kernels.enum_bipartition_masks_numba(masks, small.n)
    t_nb, out_nb = _time(_kernels.enum_bipartition_masks_numba, masks, small.n)
    t_np, out_np = _time(_kernels.enum_bipartition_masks_numpy, masks, small.n)
    assert sorted(out_nb) == sorted(out_np)
    print(
        f"{'grid 4x4':<14} {'enum_bipartitions':<18} {t_nb * 1e3:>8.1f}ms "
        f"{t_np * 1e3:>8.1f}ms {t_np / t_nb:>7.1f}x"
    )


if __name__ == "__main__":
    main()
