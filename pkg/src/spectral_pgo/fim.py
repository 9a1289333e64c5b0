"""Fisher information matrix of a pose graph, ``Y = sum_j E_j kron Phi_j``."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .graph import PoseGraph, WeightedLaplacian, is_connected
from .lie import Pose, adjoint, inverse

log = logging.getLogger(__name__)

#: nl x nl problems up to this size are stored and eigensolved densely
DENSE_LIMIT = 3000

FRAMES = ("world", "raw")


@dataclass(frozen=True, eq=False)
class FimMatrix:
    """Symmetric (n*ell)x(n*ell) information matrix in ell x ell blocks.

    ``matrix`` is a dense ndarray for small problems and a scipy BSR matrix
    otherwise.
    """

    n: int
    ell: int
    matrix: np.ndarray | sp.bsr_matrix

    @property
    def size(self) -> int:
        return self.n * self.ell

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def toarray(self) -> np.ndarray:
        return self.matrix if self.is_dense else self.matrix.toarray()

    def tosparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def block_support(self, tol: float = 0.0) -> np.ndarray:
        """n x n boolean mask of vertex pairs whose block has a nonzero entry."""
        a = np.abs(self.toarray()).reshape(self.n, self.ell, self.n, self.ell)
        return a.max(axis=(1, 3)) > tol


def world_information(info: np.ndarray, pose_i: Pose) -> np.ndarray:
    """Edge information expressed in the world frame.

    ``Ad^T info Ad`` with ``Ad`` the adjoint of the inverse of the pose of the
    edge's first vertex.
    """
    ad = adjoint(inverse(pose_i))
    return ad.T @ np.asarray(info, dtype=float) @ ad


def vertex_adjoints(graph: PoseGraph) -> np.ndarray:
    """Adjoint of the inverse of every vertex pose, stacked (n, ell, ell)."""
    if graph.n == 0:
        return np.zeros((0, graph.ell, graph.ell))
    return np.stack([adjoint(inverse(p)) for p in graph.poses])


def edge_informations(graph: PoseGraph, frame: str = "world", adjoints=None) -> np.ndarray:
    """Per-edge information matrices Phi_j, (m, ell, ell).

    ``frame="raw"`` returns the stored edge-frame matrices unchanged.
    ``adjoints`` may carry precomputed :func:`vertex_adjoints` of a supergraph.
    """
    if frame == "raw":
        return graph.infos
    if frame != "world":
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    if graph.m == 0:
        return graph.infos
    if adjoints is None:
        adjoints = vertex_adjoints(graph)
    i, _ = graph.edge_index
    return kernels.congruence(adjoints[i], graph.infos)


def fim_generator(i: int, k: int, info: np.ndarray, n: int) -> FimMatrix:
    """``E_j kron info`` for a single edge, as a dense FimMatrix."""
    info = np.asarray(info, dtype=float)
    ell = info.shape[0]
    out = np.zeros((n * ell, n * ell))
    kernels.scatter_blocks(out, [i], [k], info[None])
    return FimMatrix(n, ell, out)


def _assemble(n, ell, i_idx, k_idx, blocks, dense):
    if dense is None:
        dense = n * ell <= DENSE_LIMIT
    if dense:
        out = np.zeros((n * ell, n * ell))
        kernels.scatter_blocks(out, i_idx, k_idx, blocks)
        return FimMatrix(n, ell, out)
    # block-COO over vertex pairs; duplicates summed by the conversion
    bi = np.concatenate([i_idx, k_idx, i_idx, k_idx])
    bk = np.concatenate([i_idx, k_idx, k_idx, i_idx])
    bdata = np.concatenate([blocks, blocks, -blocks, -blocks])
    off = np.arange(ell)
    rows = (bi[:, None, None] * ell + off[None, :, None]) + 0 * off[None, None, :]
    cols = (bk[:, None, None] * ell + off[None, None, :]) + 0 * off[None, :, None]
    coo = sp.coo_matrix(
        (bdata.ravel(), (rows.ravel(), cols.ravel())), shape=(n * ell, n * ell)
    )
    return FimMatrix(n, ell, coo.tocsr().tobsr(blocksize=(ell, ell)))


def assemble_fim(
    graph: PoseGraph,
    frame: str = "world",
    *,
    infos: np.ndarray | None = None,
    dense: bool | None = None,
) -> FimMatrix:
    """Sum of all edge generators ``E_j kron Phi_j``.

    ``infos`` overrides the per-edge matrices (e.g. a constant Phi for every
    edge); otherwise they come from :func:`edge_informations` in ``frame``.
    """
    if graph.m and not is_connected(graph):
        log.warning("assembling the FIM of a disconnected graph")
    if infos is None:
        infos = edge_informations(graph, frame)
    else:
        infos = np.asarray(infos, dtype=float)
        if infos.ndim == 2:
            infos = np.broadcast_to(infos, (graph.m, *infos.shape))
    i, k = graph.edge_index
    return _assemble(graph.n, graph.ell, i, k, infos, dense)


def kron_constant_fim(lap: WeightedLaplacian, info: np.ndarray, dense: bool | None = None) -> FimMatrix:
    """``L kron info`` for an unweighted Laplacian."""
    if not lap.is_unit:
        raise ValueError("kron_constant_fim expects an unweighted Laplacian")
    info = np.asarray(info, dtype=float)
    ell = info.shape[0]
    if dense is None:
        dense = lap.n * ell <= DENSE_LIMIT
    if dense:
        return FimMatrix(lap.n, ell, np.kron(lap.dense(), info))
    return FimMatrix(lap.n, ell, sp.kron(lap.sparse, info, format="bsr"))
