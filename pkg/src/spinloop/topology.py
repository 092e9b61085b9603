"""Graphs that carry the spin models.

Square lattices are generated; hardware-style graphs are imported from
edge-list files; planar grid sub-embeddings are supplied as files and
verified, never searched for.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable

import numpy as np

from .errors import ParseError, ValidationError

Edge = tuple[int, int]


def _canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected graph with dense node indices in [0, node_count).

    ``coords`` are 2D positions in lattice-constant units; they are required
    for structure-factor work and optional otherwise.  ``labels`` preserves
    the original node names of an imported edge list.
    """

    node_count: int
    edges: tuple[Edge, ...]
    coords: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise ValidationError("graph needs at least one node")
        canon = []
        seen: set[Edge] = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValidationError(
                    f"edge ({u}, {v}) references a node outside [0, {self.node_count})"
                )
            e = _canonical(u, v)
            if e in seen:
                raise ValidationError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            if coords.shape != (self.node_count, 2):
                raise ValidationError(
                    f"coords must have shape ({self.node_count}, 2), got {coords.shape}"
                )
            coords.setflags(write=False)
            if len({(x, y) for x, y in coords.tolist()}) != self.node_count:
                raise ValidationError("node coordinates must be pairwise distinct")
            object.__setattr__(self, "coords", coords)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.node_count:
                raise ValidationError("labels must cover every node")
            object.__setattr__(self, "labels", labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _canonical(u, v) in self.edge_set

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def node_label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


def square_lattice(rows: int, cols: int) -> Graph:
    """Open-boundary square lattice; node (r, c) gets index r * cols + c and
    coordinate (c, r)."""
    if rows < 1 or cols < 1:
        raise ValidationError("rows and cols must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    coords = np.array(
        [(c, r) for r in range(rows) for c in range(cols)], dtype=float
    )
    return Graph(rows * cols, tuple(edges), coords=coords)


def _as_text_stream(source: IO[str] | str) -> IO[str]:
    if hasattr(source, "read"):
        return source  # type: ignore[return-value]
    return io.StringIO(source)


def load_edge_list(source: IO[str] | str) -> Graph:
    """Parse the ``u v [ux uy vx vy]`` edge-list format.

    Node labels are arbitrary tokens, re-indexed densely in order of first
    appearance.  A six-token line additionally declares the coordinates of
    both endpoints; coordinate declarations must be consistent across lines,
    and if any node carries coordinates all nodes must.
    """
    stream = _as_text_stream(source)
    index: dict[str, int] = {}
    coords: dict[int, tuple[float, float]] = {}
    edges: list[Edge] = []
    seen: set[Edge] = set()

    def node_id(tok: str) -> int:
        if tok not in index:
            index[tok] = len(index)
        return index[tok]

    def set_coord(n: int, x: str, y: str, lineno: int) -> None:
        try:
            pt = (float(x), float(y))
        except ValueError:
            raise ParseError(f"line {lineno}: bad coordinate pair {x!r} {y!r}") from None
        if n in coords and coords[n] != pt:
            raise ParseError(
                f"line {lineno}: conflicting coordinates for node {n}"
            )
        coords[n] = pt

    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) not in (2, 6):
            raise ParseError(
                f"line {lineno}: expected 'u v' or 'u v ux uy vx vy', got {len(toks)} tokens"
            )
        u, v = node_id(toks[0]), node_id(toks[1])
        if u == v:
            raise ValidationError(f"line {lineno}: self-loop on {toks[0]!r}")
        e = _canonical(u, v)
        if e in seen:
            raise ValidationError(f"line {lineno}: duplicate edge {toks[0]} {toks[1]}")
        seen.add(e)
        edges.append(e)
        if len(toks) == 6:
            set_coord(u, toks[2], toks[3], lineno)
            set_coord(v, toks[4], toks[5], lineno)

    if not index:
        raise ParseError("edge list is empty")
    n = len(index)
    coord_arr = None
    if coords:
        if len(coords) != n:
            missing = sorted(set(range(n)) - set(coords))
            raise ValidationError(
                f"coordinates given for some nodes but missing for indices {missing[:5]}"
            )
        coord_arr = np.array([coords[i] for i in range(n)], dtype=float)
    labels = tuple(sorted(index, key=index.get))  # type: ignore[arg-type]
    return Graph(n, tuple(edges), coords=coord_arr, labels=labels)


def write_edge_list(graph: Graph, stream: IO[str]) -> None:
    """Inverse of :func:`load_edge_list` (identity up to node relabeling)."""
    for u, v in graph.edges:
        if graph.coords is not None:
            xu, yu = graph.coords[u]
            xv, yv = graph.coords[v]
            stream.write(
                f"{graph.node_label(u)} {graph.node_label(v)} "
                f"{xu!r} {yu!r} {xv!r} {yv!r}\n"
            )
        else:
            stream.write(f"{graph.node_label(u)} {graph.node_label(v)}\n")


def edge_list_text(graph: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(graph, buf)
    return buf.getvalue()


def graph_hash(graph: Graph) -> str:
    """Stable content hash over the canonical edge-list serialization."""
    return hashlib.sha256(edge_list_text(graph).encode()).hexdigest()


@dataclass(frozen=True)
class GridEmbedding:
    """Assignment of every (row, col) grid coordinate to a host-graph node."""

    rows: int
    cols: int
    mapping: dict[tuple[int, int], int]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("rows and cols must be >= 1")
        want = {(r, c) for r in range(self.rows) for c in range(self.cols)}
        got = set(self.mapping)
        if got != want:
            raise ValidationError("mapping must cover every grid coordinate exactly")
        nodes = list(self.mapping.values())
        if len(set(nodes)) != len(nodes):
            raise ValidationError("mapping must be injective")

    def mapped_nodes(self) -> list[int]:
        return [self.mapping[(r, c)] for r in range(self.rows) for c in range(self.cols)]


def identity_embedding(rows: int, cols: int) -> GridEmbedding:
    """Embedding of a rows x cols grid onto square_lattice(rows, cols) itself."""
    return GridEmbedding(
        rows, cols, {(r, c): r * cols + c for r in range(rows) for c in range(cols)}
    )


@dataclass(frozen=True)
class EmbeddingReport:
    """Outcome of :func:`verify_grid_embedding`."""

    passed: bool
    missing_edges: tuple[Edge, ...]  # host node pairs that should be coupled
    extra_edges: tuple[Edge, ...]  # host edges beyond grid adjacency (chords)


def verify_grid_embedding(host: Graph, emb: GridEmbedding) -> EmbeddingReport:
    """Check that the embedded grid is a strictly planar subgraph of the host:
    every grid-adjacent pair is a host edge and the induced subgraph contains
    nothing else."""
    for node in emb.mapping.values():
        if not (0 <= node < host.node_count):
            raise ValidationError(f"embedding references node {node} outside the host")
    grid_edges: set[Edge] = set()
    for (r, c), u in emb.mapping.items():
        if (r, c + 1) in emb.mapping:
            grid_edges.add(_canonical(u, emb.mapping[(r, c + 1)]))
        if (r + 1, c) in emb.mapping:
            grid_edges.add(_canonical(u, emb.mapping[(r + 1, c)]))
    missing = tuple(sorted(e for e in grid_edges if e not in host.edge_set))
    mapped = set(emb.mapping.values())
    induced = {e for e in host.edges if e[0] in mapped and e[1] in mapped}
    extra = tuple(sorted(induced - grid_edges))
    return EmbeddingReport(not missing and not extra, missing, extra)


def embedded_subgraph(host: Graph, emb: GridEmbedding) -> Graph:
    """Extract the embedded grid as a standalone graph with grid coordinates.

    Requires a passing verification report.
    """
    report = verify_grid_embedding(host, emb)
    if not report.passed:
        raise ValidationError(
            f"embedding is not a strict planar grid: {len(report.missing_edges)} "
            f"missing, {len(report.extra_edges)} chord edges"
        )
    return square_lattice(emb.rows, emb.cols)


def load_embedding(source: IO[str] | str) -> GridEmbedding:
    """Parse an embedding file: header ``rows cols`` then ``row col node`` triples."""
    stream = _as_text_stream(source)
    header = None
    mapping: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise ParseError(f"line {lineno}: expected integers, got {line!r}") from None
        if header is None:
            if len(vals) != 2:
                raise ParseError(f"line {lineno}: header must be 'rows cols'")
            header = (vals[0], vals[1])
        else:
            if len(vals) != 3:
                raise ParseError(f"line {lineno}: expected 'row col node'")
            key = (vals[0], vals[1])
            if key in mapping:
                raise ParseError(f"line {lineno}: grid coordinate {key} mapped twice")
            mapping[key] = vals[2]
    if header is None:
        raise ParseError("embedding file is empty")
    return GridEmbedding(header[0], header[1], mapping)


def write_embedding(emb: GridEmbedding, stream: IO[str]) -> None:
    stream.write(f"{emb.rows} {emb.cols}\n")
    for r in range(emb.rows):
        for c in range(emb.cols):
            stream.write(f"{r} {c} {emb.mapping[(r, c)]}\n")


def build_graph(kind: str, *, rows: int = 0, cols: int = 0,
                path: str | None = None) -> Graph:
    """Construct a graph from a config-style description."""
    if kind == "square":
        return square_lattice(rows, cols)
    if kind == "edge_list":
        if not path:
            raise ValidationError("edge_list graphs need a 'path'")
        with open(path) as fh:
            return load_edge_list(fh)
    raise ValidationError(f"unknown graph kind {kind!r}")
