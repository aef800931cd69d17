"""On-disk formats: edge lists, labeling files, grid matrices, transcripts.

All writers are byte-deterministic: ascending order, single spaces, LF line
endings, trailing newline.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .baselines import GridSpec
from .errors import FormatError
from .graphs import Graph, Labeling, build_graph


def dumps_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def loads_edge_list(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty edge list")
    try:
        n, m = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad header line: {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise FormatError(f"header says {m} edges, file has {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        try:
            u, v = (int(x) for x in ln.split())
        except ValueError as exc:
            raise FormatError(f"bad edge line: {ln!r}") from exc
        if u >= v:
            raise FormatError(f"edge line must satisfy u < v: {ln!r}")
        edges.append((u, v))
    return build_graph(n, edges)


def save_edge_list(g: Graph, path):
    Path(path).write_bytes(dumps_edge_list(g).encode("ascii"))


def load_edge_list(path) -> Graph:
    return loads_edge_list(Path(path).read_text())


def dumps_labeling(y: Labeling) -> str:
    return "\n".join(str(v) for v in y.labels) + "\n"


def loads_labeling(text: str, k: int | None = None) -> Labeling:
    labels = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        try:
            labels.append(int(ln))
        except ValueError as exc:
            raise FormatError(f"bad label line: {ln!r}") from exc
    if not labels:
        raise FormatError("empty labeling file")
    return Labeling.from_list(labels, k)


def save_labeling(y: Labeling, path):
    Path(path).write_bytes(dumps_labeling(y).encode("ascii"))


def load_labeling(path, k: int | None = None) -> Labeling:
    return loads_labeling(Path(path).read_text(), k)


def dumps_gridspec(spec: GridSpec) -> str:
    lines = [f"{spec.rows} {spec.cols}"]
    for row in spec.matrix:
        lines.append(" ".join(str(int(x)) for x in row))
    return "\n".join(lines) + "\n"


def loads_gridspec(text: str) -> GridSpec:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty grid file")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad grid header: {lines[0]!r}") from exc
    n = rows * cols
    if len(lines) - 1 != n:
        raise FormatError(f"grid file needs {n} matrix rows, has {len(lines) - 1}")
    matrix = np.zeros((n, 4), dtype=np.int32)
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 4:
            raise FormatError(f"matrix row needs 4 entries: {ln!r}")
        matrix[i] = [int(x) for x in parts]
    return GridSpec(rows, cols, matrix)


def save_gridspec(spec: GridSpec, path):
    Path(path).write_bytes(dumps_gridspec(spec).encode("ascii"))


def load_gridspec(path) -> GridSpec:
    return loads_gridspec(Path(path).read_text())


def dumps_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def save_json(data: dict, path):
    Path(path).write_bytes(dumps_json(data).encode("utf-8"))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
