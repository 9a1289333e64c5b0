"""Kiefer optimality criteria, Laplacian connectivity indices, and the
graph-side estimators of FIM criteria.

Normalization: sums and products run over the retained (nonzero) eigenvalues
but are divided by the nominal dimension (n for a Laplacian, n*ell for a FIM,
ell for an edge matrix). With this convention the constant-uncertainty
factorization ``crit(L kron Phi) = crit(L) * crit(Phi)`` is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fim import DENSE_LIMIT, FimMatrix, edge_informations
from .graph import PoseGraph, WeightedLaplacian, laplacian

#: eigenvalues at or below TAU_REL * max|eig| count as zero when thresholding
TAU_REL = 1e-9
#: round-off floor for eigenvalues, relative to a bound on the largest eigenvalue
NOISE_REL = 16 * np.finfo(float).eps
ITERATIVE_TOL = 1e-8


class Criterion(str, Enum):
    T = "t"
    D = "d"
    A = "a"
    E = "e"
    EMAX = "emax"

    @property
    def p(self) -> float:
        return {"t": 1.0, "d": 0.0, "a": -1.0, "e": -math.inf, "emax": math.inf}[self.value]

    @property
    def label(self) -> str:
        return {"t": "T", "d": "D", "a": "A", "e": "E", "emax": "Emax"}[self.value]

    @classmethod
    def parse(cls, value) -> Criterion:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"inf": "emax", "etilde": "emax", "e~": "emax"}
        return cls(aliases.get(key, key))


class GaugeError(RuntimeError):
    """The number of near-zero eigenvalues is not what the graph implies."""


class DisconnectedGraphError(ValueError):
    pass


def _criteria(criteria) -> list[Criterion]:
    if isinstance(criteria, (str, Criterion)):
        return [Criterion.parse(criteria)]
    return [Criterion.parse(c) for c in criteria]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Retained eigenvalues (ascending, all > tau) and the nominal dimension."""

    values: np.ndarray
    d_nom: int
    dropped: int = 0
    tau: float = 0.0

    def __post_init__(self):
        if self.values.size > self.d_nom:
            raise ValueError("more retained eigenvalues than the nominal dimension")

    @property
    def retained(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_eigenvalues(
        cls,
        eigenvalues,
        d_nom: int | None = None,
        kernel_dim: int | None = None,
        tau_rel: float = TAU_REL,
    ) -> Spectrum:
        """Split off the near-zero eigenvalues.

        If ``kernel_dim`` is given, exactly that many eigenvalues must fall
        below the threshold, otherwise :class:`GaugeError` is raised.
        """
        ev = np.sort(np.asarray(eigenvalues, dtype=float).reshape(-1))
        if d_nom is None:
            d_nom = ev.size
        scale = float(np.max(np.abs(ev))) if ev.size else 0.0
        tau = tau_rel * scale
        if ev.size and ev[0] < -tau:
            raise ValueError(f"matrix is not positive semi-definite (eigenvalue {ev[0]:.3e})")
        keep = ev > tau
        dropped = int(ev.size - np.count_nonzero(keep))
        if kernel_dim is not None and dropped != kernel_dim:
            raise GaugeError(
                f"expected {kernel_dim} eigenvalues below tau={tau:.3e}, found {dropped}"
            )
        return cls(ev[keep], int(d_nom), dropped, tau)


def kiefer(spectrum: Spectrum, criterion, normalization: str = "nominal") -> float:
    """Kiefer information function of a spectrum for one criterion.

    ``normalization="retained"`` divides by the number of retained eigenvalues
    instead of the nominal dimension; this changes the constants relating the
    FIM and Laplacian values but never their ordering.
    """
    c = Criterion.parse(criterion)
    lam = spectrum.values
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if normalization == "nominal":
        d = spectrum.d_nom
    elif normalization == "retained":
        d = lam.size
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if c is Criterion.E:
        return float(lam[0])
    if c is Criterion.EMAX:
        return float(lam[-1])
    if np.any(lam <= 0):
        raise ValueError(f"{c.label}-criterion needs positive eigenvalues")
    if c is Criterion.T:
        return float(np.sum(lam) / d)
    if c is Criterion.D:
        return float(math.exp(np.sum(np.log(lam)) / d))
    return float(d / np.sum(1.0 / lam))


def matrix_spectrum(mat: np.ndarray) -> Spectrum:
    """Full spectrum of a small PD matrix (e.g. one edge's information)."""
    mat = np.asarray(mat, dtype=float)
    ev = np.linalg.eigvalsh(mat)
    if ev[0] <= 0:
        raise ValueError("matrix is not positive definite")
    return Spectrum(ev, mat.shape[0])


# ---------------------------------------------------------------------------
# Laplacian indices


def _dense_or_sparse(lap: WeightedLaplacian):
    return lap.dense() if lap.n <= DENSE_LIMIT else None


def deflated_eigenvalues(mat: np.ndarray, n: int, ell: int) -> np.ndarray:
    """Eigenvalues of a Laplacian-structured PSD matrix with its known kernel
    span{1 kron e_b} removed exactly.

    The kernel is shifted to a negative value by a rank-ell update, so it
    separates from the rest of the spectrum however small the smallest nonzero
    eigenvalue is. Raises :class:`GaugeError` if the shift does not move exactly
    ell eigenvalues or if another eigenvalue sits at the round-off floor.
    """
    shift = float(np.abs(mat).sum(axis=1).max())  # Gershgorin bound on lambda_max
    if shift == 0.0:
        raise GaugeError("matrix is identically zero")
    shifted = (mat.reshape(n, ell, n, ell) - (shift / n) * np.eye(ell)[None, :, None, :])
    ev = np.linalg.eigvalsh(shifted.reshape(n * ell, n * ell))
    moved = int(np.count_nonzero(ev < -0.5 * shift))
    if moved != ell:
        raise GaugeError(f"kernel shift moved {moved} eigenvalues, expected {ell}")
    rest = ev[ell:]
    floor = NOISE_REL * shift
    if rest[0] <= floor:
        raise GaugeError(
            f"eigenvalue {rest[0]:.3e} at the round-off floor {floor:.3e}: "
            "kernel is larger than the gauge (disconnected or degenerate graph)"
        )
    return rest


def laplacian_spectrum(lap: WeightedLaplacian, connected: bool = True) -> Spectrum:
    """Laplacian eigenvalues with the zero eigenvalue removed; ``d_nom = n``.

    ``connected=False`` falls back to thresholding at ``TAU_REL * mu_max``.
    """
    if connected:
        return Spectrum(deflated_eigenvalues(lap.dense(), lap.n, 1), lap.n, 1)
    return Spectrum.from_eigenvalues(np.linalg.eigvalsh(lap.dense()), lap.n)


def spanning_trees_log(lap: WeightedLaplacian) -> float:
    """Natural log of the (weighted) number of spanning trees.

    Log-determinant of the Laplacian with vertex 0 removed, from a Cholesky
    factor (dense) or an LU factor (sparse, large n).
    """
    if lap.n == 1:
        return 0.0
    dense = _dense_or_sparse(lap)
    if dense is not None:
        try:
            chol = sla.cholesky(dense[1:, 1:], lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise DisconnectedGraphError(
                "reduced Laplacian is singular: graph is disconnected"
            ) from None
        d = np.diag(chol)
        if np.any(d <= 0):
            raise DisconnectedGraphError("reduced Laplacian is singular: graph is disconnected")
        return float(2.0 * np.sum(np.log(d)))
    reduced = lap.sparse[1:, 1:].tocsc()
    try:
        lu = spla.splu(reduced)
    except RuntimeError:
        raise DisconnectedGraphError("reduced Laplacian is singular: graph is disconnected") from None
    diag = lu.U.diagonal()
    if np.any(np.abs(diag) <= NOISE_REL * lap.n * np.max(np.abs(diag))):
        raise DisconnectedGraphError("reduced Laplacian is numerically singular")
    return float(np.sum(np.log(np.abs(diag))))


def _extremal(lap: WeightedLaplacian, index: int) -> float:
    dense = _dense_or_sparse(lap)
    if dense is not None:
        return float(sla.eigh(dense, eigvals_only=True, subset_by_index=[index, index],
                              check_finite=False)[0])
    return float(
        _sparse_extremal(lap.sparse, kernel=np.ones((lap.n, 1)) / math.sqrt(lap.n),
                         smallest=index != lap.n - 1)
    )


def algebraic_connectivity(lap: WeightedLaplacian) -> float:
    """Second-smallest Laplacian eigenvalue (0 for disconnected graphs)."""
    if lap.n < 2:
        raise ValueError("algebraic connectivity needs at least 2 vertices")
    if lap.component_count() > 1:
        return 0.0
    return _extremal(lap, 1)


def largest_laplacian_eigenvalue(lap: WeightedLaplacian) -> float:
    return _extremal(lap, lap.n - 1)


def kirchhoff_index(lap: WeightedLaplacian) -> float:
    """``n * sum_{k>=2} 1/mu_k`` of an unweighted connected graph."""
    if not lap.is_unit:
        raise ValueError("the Kirchhoff index is only defined here for unweighted graphs")
    try:
        spec = laplacian_spectrum(lap, connected=True)
    except GaugeError:
        raise DisconnectedGraphError("Kirchhoff index of a disconnected graph") from None
    return float(lap.n * np.sum(1.0 / spec.values))


def laplacian_criterion(lap: WeightedLaplacian, criterion) -> float:
    """Criterion of a weighted Laplacian via its connectivity-index closed form.

    T = average degree times mean weight, D = (n t(G))^(1/n) evaluated in log
    space, A = n^2 / K(G) (unit weights only), E = algebraic connectivity,
    Emax = largest Laplacian eigenvalue.
    """
    c = Criterion.parse(criterion)
    n = lap.n
    if c is Criterion.T:
        m = lap.weights.size
        return (2.0 * m / n) * float(np.mean(lap.weights)) if m else 0.0
    if c is Criterion.D:
        return n ** (1.0 / n) * math.exp(spanning_trees_log(lap) / n)
    if c is Criterion.A:
        if not lap.is_unit:
            raise ValueError(
                "A-criterion graph estimate needs unit weights: the weighted Kirchhoff "
                "index is not supported"
            )
        return n * n / kirchhoff_index(lap)
    if c is Criterion.E:
        return algebraic_connectivity(lap)
    return largest_laplacian_eigenvalue(lap)


# ---------------------------------------------------------------------------
# graph-side estimates


def edge_weight(info: np.ndarray, scheme="infinity") -> float:
    """Scalar weight for one edge.

    ``"infinity"`` gives the largest eigenvalue of ``info``; a criterion name
    gives that criterion of ``info`` with nominal dimension ell.
    """
    spec = matrix_spectrum(info)
    if scheme in ("infinity", "inf"):
        return float(spec.values[-1])
    return kiefer(spec, scheme)


def edge_weights(infos: np.ndarray, scheme="infinity") -> np.ndarray:
    """Vectorized :func:`edge_weight` over a stack of (m, ell, ell) matrices."""
    infos = np.asarray(infos, dtype=float)
    if infos.shape[0] == 0:
        return np.zeros(0)
    ev = np.linalg.eigvalsh(infos)
    if np.any(ev[:, 0] <= 0):
        bad = int(np.argmax(ev[:, 0] <= 0))
        raise ValueError(f"edge {bad}: information matrix is not positive definite")
    if scheme in ("infinity", "inf"):
        return ev[:, -1].copy()
    c = Criterion.parse(scheme)
    ell = infos.shape[1]
    if c is Criterion.T:
        return ev.sum(axis=1) / ell
    if c is Criterion.D:
        return np.exp(np.log(ev).sum(axis=1) / ell)
    if c is Criterion.A:
        return ell / (1.0 / ev).sum(axis=1)
    if c is Criterion.E:
        return ev[:, 0].copy()
    return ev[:, -1].copy()


def weighted_laplacian(graph: PoseGraph, scheme="criterion", criterion=None,
                       frame: str = "world", infos=None) -> WeightedLaplacian:
    """Laplacian weighted per ``scheme``: ``"criterion"`` (same criterion as
    estimated), ``"infinity"``, ``"unit"``, or an explicit criterion name."""
    if scheme == "unit":
        return laplacian(graph)
    if infos is None:
        infos = edge_informations(graph, frame)
    if scheme == "criterion":
        if criterion is None:
            raise ValueError("scheme='criterion' needs the criterion to estimate")
        scheme = Criterion.parse(criterion)
    return laplacian(graph, edge_weights(infos, scheme))


def graph_estimate(graph: PoseGraph, criterion, scheme="criterion", frame: str = "world",
                   infos=None) -> float:
    """Estimate a FIM criterion from the weighted pose-graph alone.

    With ``scheme="infinity"`` the result upper-bounds the FIM criterion; with
    ``scheme="criterion"`` it approximates it (exactly for T, and for every
    criterion when edge information is isotropic). A is only available with
    unit weights.
    """
    c = Criterion.parse(criterion)
    if c is Criterion.A and scheme != "unit":
        raise ValueError(
            "A-criterion graph estimate is only available with unit weights "
            "(constant uncertainty); the weighted Kirchhoff index is not supported"
        )
    lap = weighted_laplacian(graph, scheme, c, frame, infos)
    return laplacian_criterion(lap, c)


def constant_estimate(lap: WeightedLaplacian, info: np.ndarray, criterion) -> float:
    """FIM criterion of ``L kron info`` from the Laplacian and ``info`` separately.

    Product rule ``crit(L) * crit(info)``, with the extra factor
    ``crit(info)^(-1/n)`` for D.
    """
    c = Criterion.parse(criterion)
    phi = kiefer(matrix_spectrum(info), c)
    value = laplacian_criterion(lap, c) * phi
    if c is Criterion.D:
        value *= phi ** (-1.0 / lap.n)
    return value


# ---------------------------------------------------------------------------
# FIM side


def _deflated_start(size: int, kernel: np.ndarray) -> np.ndarray:
    v = np.linspace(1.0, 2.0, size) ** 2
    v -= kernel @ (kernel.T @ v)
    return v / np.linalg.norm(v)


def _sparse_extremal(mat: sp.spmatrix, kernel: np.ndarray, smallest: bool) -> float:
    """Extremal eigenvalue of a PSD sparse matrix with known orthonormal kernel."""
    mat = sp.csc_matrix(mat)
    v0 = _deflated_start(mat.shape[0], kernel)
    top = float(spla.eigsh(mat, k=1, which="LA", v0=v0, tol=ITERATIVE_TOL,
                           return_eigenvectors=False)[0])
    if not smallest:
        return top
    # inverse iteration on (A - shift I)^-1 restricted to the kernel's complement
    shift = -1e-6 * top
    lu = spla.splu((mat - shift * sp.identity(mat.shape[0], format="csc")).tocsc())

    def project(x):
        return x - kernel @ (kernel.T @ x)

    op = spla.LinearOperator(mat.shape, matvec=lambda b: project(lu.solve(project(np.ravel(b)))),
                             dtype=float)
    theta = float(spla.eigsh(op, k=1, which="LA", v0=v0, tol=ITERATIVE_TOL,
                             return_eigenvectors=False)[0])
    return shift + 1.0 / theta


def fim_kernel_basis(n: int, ell: int) -> np.ndarray:
    """Orthonormal basis of span{1 kron e_b}, the gauge directions of Y."""
    return np.kron(np.ones((n, 1)), np.eye(ell)) / math.sqrt(n)


def fim_spectrum(fim: FimMatrix, connected: bool = True, gauge: str = "deflate",
                 tau_rel: float = TAU_REL) -> Spectrum:
    """Nonzero spectrum of the FIM with the ell gauge eigenvalues removed.

    ``gauge="deflate"`` removes the known kernel exactly (see
    :func:`deflated_eigenvalues`); ``gauge="threshold"`` drops eigenvalues below
    ``tau_rel * lambda_max`` and requires exactly ell of them. Disconnected
    graphs (``connected=False``) are always thresholded without a count check.
    """
    mat = fim.toarray()
    if connected and gauge == "deflate":
        return Spectrum(deflated_eigenvalues(mat, fim.n, fim.ell), fim.size, fim.ell)
    if gauge not in ("deflate", "threshold"):
        raise ValueError(f"unknown gauge handling {gauge!r}")
    return Spectrum.from_eigenvalues(
        np.linalg.eigvalsh(mat), fim.size,
        kernel_dim=fim.ell if connected else None, tau_rel=tau_rel,
    )


def fim_criteria(fim: FimMatrix, criteria: Iterable | str | Criterion,
                 normalization: str = "nominal", dense_limit: int = DENSE_LIMIT,
                 gauge: str = "deflate", tau_rel: float = TAU_REL) -> dict[Criterion, float]:
    """Criteria of a connected-graph FIM over its nonzero spectrum.

    Dense eigensolve up to ``dense_limit``; above it, E and Emax alone are
    computed by iterative extremal solves.
    """
    crits = _criteria(criteria)
    if fim.size > dense_limit and set(crits) <= {Criterion.E, Criterion.EMAX} \
            and normalization == "nominal":
        kernel = fim_kernel_basis(fim.n, fim.ell)
        out = {}
        for c in crits:
            out[c] = _sparse_extremal(fim.tosparse(), kernel, smallest=c is Criterion.E)
        return out
    spec = fim_spectrum(fim, gauge=gauge, tau_rel=tau_rel)
    return {c: kiefer(spec, c, normalization) for c in crits}


def fim_criterion(fim: FimMatrix, criterion, **kwargs) -> float:
    c = Criterion.parse(criterion)
    return fim_criteria(fim, [c], **kwargs)[c]
