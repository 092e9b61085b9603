"""Ising model families on an arbitrary graph.

The device Hamiltonian adds ``+J sigma sigma`` and ``+h sigma`` terms, so a
ferromagnet is J = -1 throughout this package.  Couplings and fields stay in
the programmable range [-1, 1]; physical energy scaling lives in `device`.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, replace
from typing import IO

import numpy as np

from .errors import ParseError, ValidationError
from .topology import Graph, graph_hash

FERROMAGNET = "ferromagnet"
RANDOM_BOND = "random_bond"


@dataclass(frozen=True)
class IsingModel:
    """Per-edge couplings and per-node fields on a graph.

    ``couplings[k]`` belongs to ``graph.edges[k]``.  Zero couplings are
    rejected because the frustration observable needs a defined sign.
    """

    graph: Graph
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self):
        couplings = np.array(self.couplings, dtype=float)
        fields = np.array(self.fields, dtype=float)
        if couplings.shape != (self.graph.edge_count,):
            raise ValidationError(
                f"couplings must match the edge count {self.graph.edge_count}"
            )
        if fields.shape != (self.graph.node_count,):
            raise ValidationError(
                f"fields must match the node count {self.graph.node_count}"
            )
        if np.any(np.abs(couplings) > 1.0):
            raise ValidationError("couplings must lie in [-1, 1]")
        if np.any(couplings == 0.0):
            raise ValidationError("zero couplings are not allowed")
        if np.any(np.abs(fields) > 1.0):
            raise ValidationError("fields must lie in [-1, 1]")
        couplings.setflags(write=False)
        fields.setflags(write=False)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "fields", fields)

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def edge_count(self) -> int:
        return self.graph.edge_count


def ferromagnet(graph: Graph) -> IsingModel:
    """All couplings -1 (aligned ground states), fields zero until set."""
    return IsingModel(
        graph,
        -np.ones(graph.edge_count),
        np.zeros(graph.node_count),
    )


def random_bond(graph: Graph, seed: int) -> IsingModel:
    """Binary +-J model with an exact half/half sign split.

    With an odd edge count one extra seeded coin decides which sign gets the
    surplus bond, keeping the assignment deterministic and unbiased across
    seeds.
    """
    rng = np.random.default_rng(seed)
    n_e = graph.edge_count
    half = n_e // 2
    signs = np.empty(n_e)
    signs[:half] = -1.0
    signs[half : 2 * half] = 1.0
    if n_e % 2 == 1:
        signs[-1] = -1.0 if rng.random() < 0.5 else 1.0
    rng.shuffle(signs)
    return IsingModel(graph, signs, np.zeros(graph.node_count))


def set_uniform_fields(model: IsingModel, value: float) -> IsingModel:
    """Return a copy with every local field set to ``value``."""
    if abs(value) > 1.0:
        raise ValidationError(f"field value {value} outside [-1, 1]")
    return replace(model, fields=np.full(model.node_count, float(value)))


def save_model(model: IsingModel, stream: IO[str]) -> None:
    """`h i value` / `J i j value` lines plus a graph content hash."""
    stream.write(f"graph {graph_hash(model.graph)}\n")
    for i, h in enumerate(model.fields):
        stream.write(f"h {i} {h!r}\n")
    for (u, v), j in zip(model.graph.edges, model.couplings):
        stream.write(f"J {u} {v} {j!r}\n")


def model_text(model: IsingModel) -> str:
    buf = io.StringIO()
    save_model(model, buf)
    return buf.getvalue()


def model_hash(model: IsingModel) -> str:
    return hashlib.sha256(model_text(model).encode()).hexdigest()


def load_model(source: IO[str] | str, graph: Graph) -> IsingModel:
    """Inverse of :func:`save_model`; the graph must match the stored hash."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    fields = np.zeros(graph.node_count)
    couplings = np.zeros(graph.edge_count)
    edge_index = {e: k for k, e in enumerate(graph.edges)}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "graph" and len(toks) == 2:
                if toks[1] != graph_hash(graph):
                    raise ValidationError(
                        "model file was saved against a different graph"
                    )
            elif toks[0] == "h" and len(toks) == 3:
                fields[int(toks[1])] = float(toks[2])
            elif toks[0] == "J" and len(toks) == 4:
                u, v = int(toks[1]), int(toks[2])
                key = (u, v) if u < v else (v, u)
                couplings[edge_index[key]] = float(toks[3])
            else:
                raise ParseError(f"line {lineno}: unrecognized record {line!r}")
        except (ValueError, KeyError, IndexError):
            raise ParseError(f"line {lineno}: malformed record {line!r}") from None
    return IsingModel(graph, couplings, fields)


def build_model(family: str, graph: Graph, *, seed: int = 0,
                field_value: float = 1.0) -> IsingModel:
    """Construct one of the studied model families with uniform fields applied."""
    if family == FERROMAGNET:
        model = ferromagnet(graph)
    elif family == RANDOM_BOND:
        model = random_bond(graph, seed)
    else:
        raise ValidationError(f"unknown model family {family!r}")
    return set_uniform_fields(model, field_value)
