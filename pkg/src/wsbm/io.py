"""Edge-list and label-file ingestion.

Edge files hold ``source, target, weight`` rows; label files hold
``node, class`` rows. Fields are comma separated, or whitespace separated
when a line has no comma. Blank lines and ``#`` comments are skipped and a
single header row is tolerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PartialLabels, WeightedGraph


_LABEL_HEADERS = {"node", "id", "node_id"}


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _rows(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f.strip() for f in text.split(",")] if "," in text else text.split()
            yield lineno, fields


def _parse_weight(text: str) -> float | None:
    try:
        w = float(text)
    except ValueError:
        return None
    return w if math.isfinite(w) else None


@dataclass(frozen=True)
class Ingested:
    graph: WeightedGraph
    labels: PartialLabels
    class_names: tuple  # block index -> class name
    node_ids: tuple  # node index -> original id


def read_directed_edges(path):
    """Return ``[(source, target, weight, lineno), ...]`` from an edge file."""
    out = []
    first = True
    for lineno, fields in _rows(path):
        if len(fields) != 3:
            raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        w = _parse_weight(fields[2])
        if w is None:
            if first and _is_header(fields[2]):
                first = False
                continue
            raise DataError(f"{path}:{lineno}: weight {fields[2]!r} is not a finite number")
        first = False
        out.append((fields[0], fields[1], w, lineno))
    return out


def _is_header(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return True
    return False


def ingest_and_symmetrize(edge_path, label_path=None) -> Ingested:
    """Read a directed weighted edge list and make it undirected and hollow.

    The undirected weight is w(i->j) + w(j->i), a missing direction counting
    as 0. Self-loops are dropped. Nodes are indexed by first appearance in
    the edge file; classes by first appearance in the label file.
    """
    index: dict[str, int] = {}
    directed: dict[tuple[int, int], float] = {}
    for src, tgt, w, lineno in read_directed_edges(edge_path):
        for node in (src, tgt):
            if node not in index:
                index[node] = len(index)
        key = (index[src], index[tgt])
        if key in directed:
            raise DataError(f"{edge_path}:{lineno}: duplicate directed edge {src} -> {tgt}")
        directed[key] = w

    undirected: dict[tuple[int, int], float] = {}
    for (i, j), w in directed.items():
        if i == j:
            continue
        key = (i, j) if i < j else (j, i)
        undirected[key] = undirected.get(key, 0.0) + w
    keys = sorted(undirected)
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    weights = np.array([undirected[k] for k in keys], dtype=float)
    graph = WeightedGraph(len(index), rows, cols, weights)

    class_index: dict[str, int] = {}
    assignments: dict[int, int] = {}
    if label_path is not None:
        for k, (lineno, fields) in enumerate(_rows(label_path)):
            if len(fields) != 2:
                raise DataError(f"{label_path}:{lineno}: expected 2 fields, got {len(fields)}")
            node, name = fields
            if node not in index:
                if k == 0 and node.lower() in _LABEL_HEADERS:
                    continue
                raise DataError(f"{label_path}:{lineno}: unknown node id {node!r}")
            if name not in class_index:
                class_index[name] = len(class_index)
            i = index[node]
            if i in assignments and assignments[i] != class_index[name]:
                raise DataError(f"{label_path}:{lineno}: conflicting labels for node {node!r}")
            assignments[i] = class_index[name]
    labels = PartialLabels(len(index), len(class_index), assignments)
    return Ingested(graph, labels, tuple(class_index), tuple(index))


def write_edge_list(graph: WeightedGraph, path, node_ids=None) -> None:
    """Write each undirected edge once; re-ingesting yields the same graph.

    Every node is first listed as a zero-weight self-loop so that node order
    and isolated nodes survive ingestion (self-loops are dropped on read).
    """
    ids = node_ids if node_ids is not None else [str(i) for i in range(graph.n)]
    with open(path, "w") as fh:
        fh.write("source,target,weight\n")
        for node in ids:
            fh.write(f"{node},{node},0\n")
        for i, j, w in graph.edges():
            fh.write(f"{ids[i]},{ids[j]},{w!r}\n")


def write_labels(assignments, path, node_ids=None, class_names=None) -> None:
    """Write ``node,class`` rows for a mapping of node index to block index."""
    with open(path, "w") as fh:
        fh.write("node,class\n")
        for i, u in sorted(assignments.items()):
            node = node_ids[i] if node_ids is not None else str(i)
            name = class_names[u] if class_names is not None else str(u)
            fh.write(f"{node},{name}\n")
