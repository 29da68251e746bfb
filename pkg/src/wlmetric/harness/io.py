"""Reading graphs and datasets, writing matrices.

Formats:
    * edge-list JSON: ``{"n": int, "edges": [[u, v], ...], "labels": [[...], ...]}``
      with 0-based vertices; ``labels`` is optional (constant 1.0 if absent).
    * TUDataset flat files in one directory: ``DS_A.txt`` (1-based global edge
      list), ``DS_graph_indicator.txt``, ``DS_graph_labels.txt`` and optionally
      ``DS_node_labels.txt``.
    * matrices: comma-separated, 17 significant digits, no header, plus a
      sidecar ``<file>.json`` with the parameters that produced them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import IndexOutOfRange, InvalidEdge, MissingFile, ParseError, ValidationError
from ..graphs import LabeledGraph, make_graph


@dataclass(frozen=True, eq=False)
class Dataset:
    graphs: list
    class_labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        if len(self.graphs) != len(self.class_labels):
            raise ValidationError(f"{len(self.graphs)} graphs but {len(self.class_labels)} class labels")

    def __len__(self):
        return len(self.graphs)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    entries: np.ndarray
    method: str
    params: dict = field(default_factory=dict)


def load_edgelist_json(path) -> LabeledGraph:
    """Load one graph from edge-list JSON.

    Raises:
        MissingFile: ``path`` does not exist.
        ParseError: malformed JSON or schema.
        InvalidEdge: self-loops, duplicates or out-of-range endpoints.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    try:
        doc = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise ParseError(f"{path}: expected an object with 'n' and 'edges'")
    n, edges, labels = doc["n"], doc["edges"], doc.get("labels")
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError(f"{path}: 'n' must be an integer")
    if not isinstance(edges, list) or any(not isinstance(e, list) or len(e) != 2 for e in edges):
        raise InvalidEdge(f"{path}: 'edges' must be a list of [u, v] pairs")
    try:
        return make_graph(n, edges, labels)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"{path}: {exc}") from None


def _read_ints(path, required=True):
    if not path.is_file():
        if required:
            raise MissingFile(f"no such file: {path}")
        return None
    try:
        text = path.read_text()
        rows = [line.replace(",", " ").split() for line in text.splitlines() if line.strip()]
        return np.array(rows, dtype=float)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def _dataset_name(directory):
    hits = sorted(directory.glob("*_graph_indicator.txt"))
    if not hits:
        raise MissingFile(f"no *_graph_indicator.txt in {directory}")
    return hits[0].name[: -len("_graph_indicator.txt")]


def load_tudataset(directory, name=None, categorical=True) -> Dataset:
    """Load a TUDataset-format directory.

    Args:
        directory: folder holding the ``DS_*.txt`` files.
        name: the ``DS`` prefix; inferred from ``*_graph_indicator.txt`` if
            omitted.
        categorical: one-hot encode node labels (otherwise use them as raw
            reals). Graphs without node labels get their degrees.

    Raises:
        MissingFile: a required file is absent or empty.
        IndexOutOfRange: an edge or indicator refers to a nonexistent node
            or graph.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(f"no such directory: {directory}")
    name = name or _dataset_name(directory)
    indicator = _read_ints(directory / f"{name}_graph_indicator.txt")
    if indicator is None or indicator.size == 0:
        raise MissingFile(f"{name}_graph_indicator.txt is empty")
    indicator = indicator[:, 0].astype(np.int64)
    n_graphs = int(indicator.max())
    if indicator.min() < 1 or np.any(np.diff(indicator) < 0):
        raise IndexOutOfRange("graph indicator must be 1-based and nondecreasing")
    classes = _read_ints(directory / f"{name}_graph_labels.txt")
    if classes.shape[0] != n_graphs:
        raise ParseError(f"{n_graphs} graphs but {classes.shape[0]} graph labels")
    edges = _read_ints(directory / f"{name}_A.txt")
    edges = np.zeros((0, 2), dtype=np.int64) if edges.size == 0 else edges[:, :2].astype(np.int64)
    n_nodes = indicator.size
    if edges.size and (edges.min() < 1 or edges.max() > n_nodes):
        raise IndexOutOfRange(f"edge endpoint outside 1..{n_nodes}")
    node_labels = _read_ints(directory / f"{name}_node_labels.txt", required=False)
    if node_labels is not None:
        if node_labels.shape[0] != n_nodes:
            raise ParseError(f"{n_nodes} nodes but {node_labels.shape[0]} node labels")
        if categorical:
            values = node_labels[:, 0]
            codes = np.unique(values)
            node_labels = (values[:, None] == codes[None, :]).astype(float)

    edges -= 1
    starts = np.searchsorted(indicator, np.arange(1, n_graphs + 2))
    owner = indicator[edges[:, 0]] if edges.size else np.zeros(0, dtype=np.int64)
    if edges.size and np.any(indicator[edges[:, 1]] != owner):
        raise InvalidEdge("edge joins vertices of different graphs")
    graphs = []
    for gid in range(1, n_graphs + 1):
        lo, hi = starts[gid - 1], starts[gid]
        local = edges[owner == gid] - lo
        # Flat files list each undirected edge in both directions.
        local = np.unique(np.sort(local, axis=1), axis=0) if local.size else local
        labels = None if node_labels is None else node_labels[lo:hi]
        g = make_graph(hi - lo, local, labels)
        if node_labels is None:
            g = g.with_labels(g.degrees.astype(float))
        graphs.append(g)
    return Dataset(graphs, classes[:, 0].astype(np.int64), name)


def write_matrix_csv(path, matrix, meta=None):
    """Write ``matrix`` as round-trip exact CSV and ``meta`` as ``path.json``."""
    path = Path(path)
    try:
        np.savetxt(path, np.atleast_2d(matrix), fmt="%.17g", delimiter=",")
        if meta is not None:
            Path(f"{path}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise MissingFile(f"cannot write {path}: {exc}") from None


def read_matrix_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def read_classes(path) -> np.ndarray:
    """Integer class labels, one per line."""
    values = _read_ints(Path(path))
    if values.size == 0:
        raise ParseError(f"{path}: no class labels")
    if np.any(values[:, 0] != np.round(values[:, 0])):
        raise ParseError(f"{path}: class labels must be integers")
    return values[:, 0].astype(np.int64)


def write_classes(path, classes):
    try:
        Path(path).write_text("".join(f"{int(c)}\n" for c in classes))
    except OSError as exc:
        raise MissingFile(f"cannot write {path}: {exc}") from None
