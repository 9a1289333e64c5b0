"""Optimality criteria of pose-graph Fisher information matrices, computed
directly and estimated from weighted graph connectivity indices."""

from .criteria import (
    Criterion,
    DisconnectedGraphError,
    GaugeError,
    Spectrum,
    algebraic_connectivity,
    constant_estimate,
    edge_weight,
    edge_weights,
    fim_criteria,
    fim_criterion,
    fim_spectrum,
    graph_estimate,
    kiefer,
    kirchhoff_index,
    laplacian_criterion,
    laplacian_spectrum,
    largest_laplacian_eigenvalue,
    spanning_trees_log,
    weighted_laplacian,
)
from .fim import FimMatrix, assemble_fim, edge_informations, kron_constant_fim, world_information
from .graph import (
    Edge,
    PoseGraph,
    PoseGraphError,
    PoseGraphFormatError,
    WeightedLaplacian,
    average_degree,
    is_connected,
    laplacian,
    parse_pose_graph,
    prefix,
    read_pose_graph,
    write_pose_graph,
)
from .kernels import BACKEND
from .lie import IllConditionedLogError, Pose, adjoint, compose, exp_map, inverse, log_map
from .replay import ReplayConfig, StepRecord, replay, summarize
from .synth import SynthSpec, synthesize

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
