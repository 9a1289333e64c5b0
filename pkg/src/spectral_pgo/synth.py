"""Synthetic pose graphs: a noisy odometry chain plus random loop closures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Edge, PoseGraph
from .lie import Pose, exp_map, inverse

INFO_MODELS = ("iso", "diag", "corr")


@dataclass(frozen=True)
class SynthSpec:
    nodes: int
    dim: int = 2
    loop_prob: float = 0.0
    span: int | None = None
    info: str = "diag"
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if not 0.0 <= self.loop_prob <= 1.0:
            raise ValueError("loop_prob must lie in [0, 1]")
        if self.span is not None and self.span < 2:
            raise ValueError("span must be >= 2")
        if self.info not in INFO_MODELS:
            raise ValueError(f"info must be one of {INFO_MODELS}")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")

    @property
    def ell(self) -> int:
        return 3 if self.dim == 2 else 6


def _loguniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def random_information(rng, ell: int, model: str = "diag", eta: float = 0.0) -> np.ndarray:
    """One PD edge information matrix (translation block first).

    ``corr`` adds symmetric off-diagonal terms bounded by ``eta`` times the
    smaller of the two diagonal entries divided by ell-1, so every row stays
    strictly diagonally dominant.
    """
    if model == "iso":
        return _loguniform(rng, 5.0, 500.0) * np.eye(ell)
    n_rot = 1 if ell == 3 else 3
    d = np.concatenate([
        _loguniform(rng, 5.0, 50.0, ell - n_rot), _loguniform(rng, 100.0, 1000.0, n_rot)
    ])
    info = np.diag(d)
    if model == "corr" and eta > 0.0:
        iu = np.triu_indices(ell, 1)
        bound = eta * np.minimum(d[iu[0]], d[iu[1]]) / (ell - 1)
        off = rng.uniform(-1.0, 1.0, iu[0].size) * bound
        info[iu] = off
        info[iu[1], iu[0]] = off
    return info


def _step_twist(rng, dim):
    if dim == 2:
        return np.array([rng.uniform(0.2, 0.6), rng.normal(0, 0.05), rng.normal(0, 0.3)])
    return np.concatenate([
        [rng.uniform(0.2, 0.6)], rng.normal(0, 0.05, 2), rng.normal(0, 0.05, 2), [rng.normal(0, 0.3)]
    ])


def _noise(rng, dim):
    return rng.normal(0, 0.01, 3 if dim == 2 else 6)


def synthesize(spec: SynthSpec) -> PoseGraph:
    """Deterministic pose graph for a given spec (same seed, same graph)."""
    rng = np.random.default_rng(spec.seed)
    poses = [Pose.identity(spec.dim)]
    for _ in range(1, spec.nodes):
        poses.append(poses[-1] @ exp_map(_step_twist(rng, spec.dim)))

    def measure(i, k):
        return inverse(poses[i]) @ poses[k] @ exp_map(_noise(rng, spec.dim))

    def info():
        return random_information(rng, spec.ell, spec.info, spec.eta)

    span = spec.span or spec.nodes
    edges = []
    for k in range(1, spec.nodes):
        edges.append(Edge(k - 1, k, measure(k - 1, k), info()))
        if k >= 2 and rng.random() < spec.loop_prob:
            lo = max(0, k - span)
            i = int(rng.integers(lo, k - 1))
            edges.append(Edge(i, k, measure(i, k), info()))
    return PoseGraph(spec.dim, tuple(range(spec.nodes)), tuple(poses), tuple(edges))
