"""Reading labeled graphs from CSV edge and label lists."""

import csv
import warnings

import numpy as np

from .graphs import LabeledGraph

__all__ = ["GraphFormatError", "load_graph", "write_graph"]


class GraphFormatError(ValueError):
    """Malformed edge or label file."""


def _rows(path, header):
    """Yield (physical line number, stripped fields), skipping blanks and # comments."""
    with open(path, newline="") as fh:
        lines = [(i, row) for i, row in enumerate(fh, 1) if row.strip() and not row.startswith("#")]
    if not lines:
        raise GraphFormatError(f"{path}: missing header {','.join(header)}")
    parsed = csv.reader(row for _, row in lines)
    first = next(parsed)
    if [c.strip() for c in first] != header:
        raise GraphFormatError(f"{path}: expected header {','.join(header)}, got {','.join(first)}")
    for (line, _), row in zip(lines[1:], parsed):
        if len(row) != len(header):
            raise GraphFormatError(f"{path}:{line}: expected {len(header)} fields")
        yield line, [c.strip() for c in row]


def load_graph(edge_path, labels_path, weight_rule="nonzero"):
    """Build a labeled simple graph from ``u,v,weight`` and ``vertex,label`` CSV files.

    A pair is an edge iff some row for it has a nonzero weight. Duplicate
    rows are merged, self-loops dropped with a warning. Vertices and labels
    are indexed in order of first appearance in the labels file, so isolated
    vertices are kept only if they are listed there.
    """
    if weight_rule != "nonzero":
        raise ValueError("only the 'nonzero' weight rule is supported")
    index = {}
    label_index = {}
    labels = []
    for line, (vertex, label) in _rows(labels_path, ["vertex", "label"]):
        if vertex in index:
            raise GraphFormatError(f"{labels_path}:{line}: duplicate vertex {vertex!r}")
        index[vertex] = len(index)
        labels.append(label_index.setdefault(label, len(label_index)))
    n = len(index)
    A = np.zeros((n, n), dtype=np.uint8)
    loops = 0
    for line, (u, v, w) in _rows(edge_path, ["u", "v", "weight"]):
        for x in (u, v):
            if x not in index:
                raise GraphFormatError(f"{edge_path}:{line}: unknown vertex {x!r}")
        try:
            weight = float(w)
        except ValueError:
            raise GraphFormatError(f"{edge_path}:{line}: non-numeric weight {w!r}") from None
        if np.isnan(weight):
            raise GraphFormatError(f"{edge_path}:{line}: non-numeric weight {w!r}")
        if u == v:
            loops += 1
            continue
        if weight != 0:
            i, j = index[u], index[v]
            A[i, j] = A[j, i] = 1
    if loops:
        warnings.warn(f"dropped {loops} self-loop row(s) from {edge_path}", stacklevel=2)
    return LabeledGraph(A, np.array(labels, dtype=np.int64), max(1, len(label_index)),
                        tuple(index), tuple(label_index))


def write_graph(g, edge_path, labels_path):
    """Inverse of :func:`load_graph` (weights written as 1)."""
    ids = g.vertex_ids or tuple(str(i) for i in range(g.n))
    names = g.label_names or tuple(str(k) for k in range(g.K))
    with open(labels_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex", "label"])
        for i in range(g.n):
            w.writerow([ids[i], names[g.labels[i]]])
    iu, ju = np.nonzero(np.triu(g.adjacency, 1))
    with open(edge_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "weight"])
        for i, j in zip(iu, ju):
            w.writerow([ids[i], ids[j], 1])
