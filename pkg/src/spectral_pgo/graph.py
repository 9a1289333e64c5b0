"""Pose-graph data model, text I/O and (weighted) Laplacians."""

from __future__ import annotations

import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import kernels
from .lie import Pose

log = logging.getLogger(__name__)

SYM_TOL = 1e-9


class PoseGraphError(ValueError):
    """Invalid pose-graph content."""


class PoseGraphFormatError(PoseGraphError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class Edge:
    i: int
    k: int
    measurement: Pose
    info: np.ndarray
    line: int | None = field(default=None, compare=False)


def _check_info(info: np.ndarray, ell: int, what: str, jitter: bool = False) -> np.ndarray:
    info = np.asarray(info, dtype=float)
    if info.shape != (ell, ell):
        raise PoseGraphError(f"{what}: information matrix must be {ell}x{ell}, got {info.shape}")
    scale = max(float(np.max(np.abs(info))), np.finfo(float).tiny)
    if np.max(np.abs(info - info.T)) > SYM_TOL * scale:
        raise PoseGraphError(f"{what}: information matrix is not symmetric")
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        if not jitter:
            raise PoseGraphError(f"{what}: information matrix is not positive definite") from None
        repaired = info + 1e-12 * np.trace(info) / ell * np.eye(ell)
        try:
            np.linalg.cholesky(repaired)
        except np.linalg.LinAlgError:
            raise PoseGraphError(
                f"{what}: information matrix is not positive definite (jitter did not help)"
            ) from None
        log.warning("%s: added diagonal jitter to indefinite information matrix", what)
        return repaired
    return info


@dataclass(frozen=True, eq=False)
class PoseGraph:
    """Vertices (compacted to 0..n-1) and edges with edge-frame information.

    ``ids[v]`` is the original file id of vertex ``v``.
    """

    dim: int
    ids: tuple[int, ...]
    poses: tuple[Pose, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise PoseGraphError(f"dimension must be 2 or 3, got {self.dim}")
        if len(self.ids) != len(self.poses):
            raise PoseGraphError("ids and poses must have equal length")
        if len(set(self.ids)) != len(self.ids):
            raise PoseGraphError("duplicate vertex id")
        for p in self.poses:
            if p.dim != self.dim:
                raise PoseGraphError("pose dimension does not match graph dimension")
        n = len(self.poses)
        for j, e in enumerate(self.edges):
            where = f"edge {j}" + (f" (line {e.line})" if e.line is not None else "")
            if not (0 <= e.i < n and 0 <= e.k < n):
                raise PoseGraphError(f"{where}: vertex index out of range")
            if e.i == e.k:
                raise PoseGraphError(f"{where}: self-loop on vertex {self.ids[e.i]}")
            if e.measurement.dim != self.dim:
                raise PoseGraphError(f"{where}: measurement dimension mismatch")
            _check_info(e.info, self.ell, where)

    @classmethod
    def from_edges(cls, n: int, pairs, infos=None, dim: int = 2, poses=None) -> PoseGraph:
        """Convenience constructor for tests and synthetic data.

        ``infos`` may be None (identity), one matrix shared by all edges, or a
        sequence with one matrix per edge. Poses default to the identity.
        """
        ell = 3 if dim == 2 else 6
        pairs = list(pairs)
        if infos is None:
            infos = [np.eye(ell)] * len(pairs)
        elif np.ndim(infos) == 2:
            infos = [np.asarray(infos, dtype=float)] * len(pairs)
        if poses is None:
            poses = [Pose.identity(dim)] * n
        ident = Pose.identity(dim)
        edges = tuple(
            Edge(int(i), int(k), ident, np.asarray(info, dtype=float))
            for (i, k), info in zip(pairs, infos)
        )
        return cls(dim, tuple(range(n)), tuple(poses), edges)

    @property
    def n(self) -> int:
        return len(self.poses)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def ell(self) -> int:
        return 3 if self.dim == 2 else 6

    @cached_property
    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.fromiter((e.i for e in self.edges), dtype=np.intp, count=self.m)
        k = np.fromiter((e.k for e in self.edges), dtype=np.intp, count=self.m)
        return i, k

    @cached_property
    def infos(self) -> np.ndarray:
        """Edge-frame information matrices stacked as (m, ell, ell)."""
        if not self.edges:
            return np.zeros((0, self.ell, self.ell))
        return np.stack([e.info for e in self.edges])

    def duplicate_pair_count(self) -> int:
        counts = Counter(frozenset((e.i, e.k)) for e in self.edges)
        return sum(c - 1 for c in counts.values())


# ---------------------------------------------------------------------------
# text format

_TAGS_2D = ("VERTEX_SE2", "EDGE_SE2")
_TAGS_3D = ("VERTEX_SE3:QUAT", "EDGE_SE3:QUAT")


def _upper_to_sym(values, ell):
    mat = np.zeros((ell, ell))
    mat[np.triu_indices(ell)] = values
    return mat + np.triu(mat, 1).T


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise PoseGraphFormatError(f"malformed numeric field ({exc})", lineno) from None


def _int(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise PoseGraphFormatError(f"malformed vertex id {token!r}", lineno) from None


def parse_pose_graph(stream: TextIO | str | Iterable[str], jitter: bool = False) -> PoseGraph:
    """Parse a plain-text (g2o-style) pose-graph.

    Vertices may appear after the edges that reference them. Unknown tags are
    skipped with a warning; their counts end up in ``graph.skipped_tags``.
    Vertices keep file order and are compacted to 0..n-1.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    vertices: dict[int, tuple[Pose, int]] = {}
    raw_edges = []
    skipped: Counter = Counter()
    dim = None

    def set_dim(d, lineno):
        nonlocal dim
        if dim is None:
            dim = d
        elif dim != d:
            raise PoseGraphFormatError("mixed 2D and 3D records", lineno)

    for lineno, line in enumerate(stream, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        tag = tok[0]
        if tag == "VERTEX_SE2":
            set_dim(2, lineno)
            if len(tok) != 5:
                raise PoseGraphFormatError(f"VERTEX_SE2 expects 4 fields, got {len(tok) - 1}", lineno)
            vid = _int(tok[1], lineno)
            x, y, th = _floats(tok[2:], lineno)
            pose = Pose.se2(x, y, th)
        elif tag == "VERTEX_SE3:QUAT":
            set_dim(3, lineno)
            if len(tok) != 9:
                raise PoseGraphFormatError(
                    f"VERTEX_SE3:QUAT expects 8 fields, got {len(tok) - 1}", lineno
                )
            vid = _int(tok[1], lineno)
            x, y, z, qx, qy, qz, qw = _floats(tok[2:], lineno)
            try:
                pose = Pose.se3((x, y, z), (qw, qx, qy, qz))
            except ValueError as exc:
                raise PoseGraphFormatError(str(exc), lineno) from None
        elif tag == "EDGE_SE2":
            set_dim(2, lineno)
            if len(tok) != 12:
                raise PoseGraphFormatError(f"EDGE_SE2 expects 11 fields, got {len(tok) - 1}", lineno)
            a, b = _int(tok[1], lineno), _int(tok[2], lineno)
            vals = _floats(tok[3:], lineno)
            meas = Pose.se2(*vals[:3])
            raw_edges.append((a, b, meas, _upper_to_sym(vals[3:], 3), lineno))
            continue
        elif tag == "EDGE_SE3:QUAT":
            set_dim(3, lineno)
            if len(tok) != 31:
                raise PoseGraphFormatError(
                    f"EDGE_SE3:QUAT expects 30 fields, got {len(tok) - 1}", lineno
                )
            a, b = _int(tok[1], lineno), _int(tok[2], lineno)
            vals = _floats(tok[3:], lineno)
            x, y, z, qx, qy, qz, qw = vals[:7]
            try:
                meas = Pose.se3((x, y, z), (qw, qx, qy, qz))
            except ValueError as exc:
                raise PoseGraphFormatError(str(exc), lineno) from None
            raw_edges.append((a, b, meas, _upper_to_sym(vals[7:], 6), lineno))
            continue
        else:
            skipped[tag] += 1
            continue
        if vid in vertices:
            raise PoseGraphFormatError(f"duplicate vertex id {vid}", lineno)
        vertices[vid] = (pose, lineno)

    if skipped:
        log.warning("skipped %d unknown records: %s", sum(skipped.values()), dict(skipped))
    if dim is None:
        raise PoseGraphFormatError("no vertices or edges found")

    ids = tuple(vertices)
    index = {vid: v for v, vid in enumerate(ids)}
    ell = 3 if dim == 2 else 6
    edges = []
    for j, (a, b, meas, info, lineno) in enumerate(raw_edges):
        for vid in (a, b):
            if vid not in index:
                raise PoseGraphFormatError(f"edge {j} references missing vertex {vid}", lineno)
        if a == b:
            raise PoseGraphFormatError(f"edge {j} is a self-loop on vertex {a}", lineno)
        try:
            info = _check_info(info, ell, f"edge {j}", jitter=jitter)
        except PoseGraphError as exc:
            raise PoseGraphFormatError(str(exc), lineno) from None
        edges.append(Edge(index[a], index[b], meas, info, lineno))

    graph = PoseGraph(dim, ids, tuple(p for p, _ in vertices.values()), tuple(edges))
    object.__setattr__(graph, "skipped_tags", dict(skipped))
    return graph


def read_pose_graph(path, jitter: bool = False) -> PoseGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_pose_graph(fh, jitter=jitter)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_pose_graph(graph: PoseGraph, stream: TextIO) -> None:
    """Serialize with round-trip float precision."""
    vtag, etag = _TAGS_2D if graph.dim == 2 else _TAGS_3D
    iu = np.triu_indices(graph.ell)
    for vid, pose in zip(graph.ids, graph.poses):
        stream.write(f"{vtag} {vid} {_pose_fields(pose)}\n")
    for e in graph.edges:
        info = " ".join(_fmt(v) for v in e.info[iu])
        stream.write(
            f"{etag} {graph.ids[e.i]} {graph.ids[e.k]} {_pose_fields(e.measurement)} {info}\n"
        )


def _pose_fields(pose: Pose) -> str:
    if pose.dim == 2:
        vals = (*pose.translation, pose.theta)
    else:
        w, x, y, z = pose.quat
        vals = (*pose.translation, x, y, z, w)
    return " ".join(_fmt(v) for v in vals)


def dumps_pose_graph(graph: PoseGraph) -> str:
    buf = io.StringIO()
    write_pose_graph(graph, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# topology


def incidence_column(edge: Edge | tuple[int, int], n: int) -> np.ndarray:
    """Column ``q_j`` of the incidence matrix: +1 at i, -1 at k."""
    i, k = (edge.i, edge.k) if isinstance(edge, Edge) else edge
    q = np.zeros(n, dtype=int)
    q[i] = 1
    q[k] = -1
    return q


def incidence_matrix(graph: PoseGraph) -> sp.csc_matrix:
    i, k = graph.edge_index
    cols = np.arange(graph.m)
    data = np.concatenate([np.ones(graph.m, dtype=int), -np.ones(graph.m, dtype=int)])
    return sp.csc_matrix(
        (data, (np.concatenate([i, k]), np.concatenate([cols, cols]))), shape=(graph.n, graph.m)
    )


def laplacian_generator(edge: Edge | tuple[int, int], n: int) -> np.ndarray:
    q = incidence_column(edge, n)
    return np.outer(q, q)


def adjacency_matrix(graph: PoseGraph) -> np.ndarray:
    """0/1 adjacency; parallel edges do not accumulate here."""
    a = np.zeros((graph.n, graph.n), dtype=int)
    i, k = graph.edge_index
    a[i, k] = 1
    a[k, i] = 1
    return a


@dataclass(frozen=True, eq=False)
class WeightedLaplacian:
    """``sum_j weights[j] * E_j`` for edges ``(i_idx[j], k_idx[j])`` on n vertices."""

    n: int
    i_idx: np.ndarray
    k_idx: np.ndarray
    weights: np.ndarray

    @property
    def is_unit(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        w = self.weights
        rows = np.concatenate([self.i_idx, self.k_idx, self.i_idx, self.k_idx])
        cols = np.concatenate([self.i_idx, self.k_idx, self.k_idx, self.i_idx])
        data = np.concatenate([w, w, -w, -w])
        return sp.coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        return kernels.scatter_laplacian(out, self.i_idx, self.k_idx, self.weights)

    def trace(self) -> float:
        return 2.0 * float(np.sum(self.weights))

    def component_count(self) -> int:
        return _components(self.n, self.i_idx, self.k_idx)


def laplacian(graph: PoseGraph, weights=None) -> WeightedLaplacian:
    """Weighted Laplacian of ``graph``; unit weights when ``weights`` is None."""
    i, k = graph.edge_index
    if weights is None:
        w = np.ones(graph.m)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size != graph.m:
            raise ValueError(f"expected {graph.m} weights, got {w.size}")
        if np.any(~(w > 0)):
            raise ValueError("edge weights must be positive")
    return WeightedLaplacian(graph.n, i, k, w)


def average_degree(graph: PoseGraph) -> float:
    return 2.0 * graph.m / graph.n


def _components(n, i_idx, k_idx) -> int:
    adj = sp.coo_matrix((np.ones(len(i_idx)), (i_idx, k_idx)), shape=(n, n))
    count, _ = connected_components(adj, directed=False)
    return int(count)


def component_count(graph: PoseGraph) -> int:
    i, k = graph.edge_index
    return _components(graph.n, i, k)


def is_connected(graph: PoseGraph) -> bool:
    return component_count(graph) == 1


def prefix(graph: PoseGraph, k: int) -> PoseGraph:
    """First ``k`` vertices and the edges with both endpoints among them."""
    if not 1 <= k <= graph.n:
        raise ValueError(f"prefix length must be in [1, {graph.n}], got {k}")
    if k == graph.n:
        return graph
    edges = tuple(e for e in graph.edges if e.i < k and e.k < k)
    # sub-structure of a validated graph; skip re-validation
    sub = object.__new__(PoseGraph)
    for name, value in (("dim", graph.dim), ("ids", graph.ids[:k]),
                        ("poses", graph.poses[:k]), ("edges", edges)):
        object.__setattr__(sub, name, value)
    return sub
