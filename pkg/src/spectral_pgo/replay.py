"""Incremental replay: grow a pose graph one vertex at a time and compare each
criterion computed on the full FIM against its graph-side estimate."""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .criteria import (
    Criterion,
    GaugeError,
    constant_estimate,
    fim_spectrum,
    kiefer,
    laplacian_criterion,
    weighted_laplacian,
)
from .fim import assemble_fim, edge_informations, vertex_adjoints
from .graph import PoseGraph, is_connected, laplacian, prefix
from .synth import SynthSpec, synthesize

log = logging.getLogger(__name__)

WEIGHTINGS = ("criterion", "infinity", "constant")
DEFAULT_CRITERIA = (Criterion.EMAX, Criterion.T, Criterion.D, Criterion.E)
# a FIM value may exceed its upper bound by this relative slack before it counts
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class ReplayConfig:
    criteria: tuple[Criterion, ...] = DEFAULT_CRITERIA
    weighting: str = "criterion"
    constant_info: np.ndarray | None = field(default=None, compare=False)
    frame: str = "world"
    stride: int = 1
    start: int = 3
    repetitions: int = 1

    def __post_init__(self):
        crits = tuple(Criterion.parse(c) for c in self.criteria)
        object.__setattr__(self, "criteria", crits)
        if not crits:
            raise ValueError("at least one criterion is required")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        if self.weighting == "constant":
            if self.constant_info is None:
                raise ValueError("constant weighting needs constant_info")
            object.__setattr__(self, "constant_info", np.asarray(self.constant_info, dtype=float))
        elif Criterion.A in crits:
            raise ValueError("the A criterion is only available with constant weighting")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.start < 2:
            raise ValueError("start must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class CriterionRecord:
    criterion: Criterion
    fim_value: float
    graph_value: float
    rel_error: float
    bound_violated: bool | None
    fim_time_ns: int
    graph_time_ns: int


@dataclass(frozen=True)
class StepRecord:
    step: int
    n: int
    m: int
    entries: tuple[CriterionRecord, ...]

    def get(self, criterion) -> CriterionRecord:
        c = Criterion.parse(criterion)
        for e in self.entries:
            if e.criterion is c:
                return e
        raise KeyError(c)


def _timed(fn, repetitions):
    best = None
    result = None
    for rep in range(repetitions):
        t0 = time.perf_counter_ns()
        out = fn()
        dt = time.perf_counter_ns() - t0
        if rep == 0:
            result = out
        best = dt if best is None else min(best, dt)
    return result, max(best, 1)


def _fim_route(sub: PoseGraph, config: ReplayConfig, adjoints):
    if config.weighting == "constant":
        fim = assemble_fim(sub, infos=config.constant_info)
    else:
        fim = assemble_fim(sub, infos=edge_informations(sub, config.frame, adjoints))
    spec = fim_spectrum(fim)
    return {c: kiefer(spec, c) for c in config.criteria}


def _graph_route(sub: PoseGraph, config: ReplayConfig, criterion: Criterion, adjoints):
    if config.weighting == "constant":
        return constant_estimate(laplacian(sub), config.constant_info, criterion)
    infos = edge_informations(sub, config.frame, adjoints)
    scheme = "infinity" if config.weighting == "infinity" else criterion
    return laplacian_criterion(weighted_laplacian(sub, scheme, infos=infos), criterion)


def evaluate_step(sub: PoseGraph, config: ReplayConfig, step: int | None = None,
                  adjoints=None) -> StepRecord:
    """Both routes on one (connected) graph.

    The FIM route (assembly, one eigensolve, all criteria) is timed once and its
    time split evenly across criteria; each graph-route criterion is timed on
    its own since it builds its own weighted Laplacian.
    """
    if adjoints is not None:
        adjoints = adjoints[: sub.n]
    fim_values, fim_ns = _timed(lambda: _fim_route(sub, config, adjoints), config.repetitions)
    share = max(fim_ns // len(config.criteria), 1)
    entries = []
    for c in config.criteria:
        graph_value, graph_ns = _timed(
            lambda: _graph_route(sub, config, c, adjoints), config.repetitions
        )
        fim_value = fim_values[c]
        rel = abs(fim_value - graph_value) / abs(fim_value) if fim_value else math.inf
        violated = None
        if config.weighting == "infinity":
            violated = bool(fim_value > graph_value * (1.0 + BOUND_SLACK))
        entries.append(CriterionRecord(c, fim_value, graph_value, rel, violated, share, graph_ns))
    return StepRecord(sub.n if step is None else step, sub.n, sub.m, tuple(entries))


def replay(graph: PoseGraph, config: ReplayConfig) -> list[StepRecord]:
    """Evaluate every prefix of ``graph`` from ``config.start`` vertices on.

    Disconnected prefixes and steps whose FIM kernel is not exactly ell
    dimensional are skipped with a logged diagnostic.
    """
    adjoints = vertex_adjoints(graph) if config.frame == "world" else None
    records = []
    for k in range(config.start, graph.n + 1, config.stride):
        sub = prefix(graph, k)
        if not is_connected(sub):
            log.info("step %d: prefix is disconnected, skipped", k)
            continue
        try:
            records.append(evaluate_step(sub, config, k, adjoints))
        except GaugeError as exc:
            log.warning("step %d: %s; skipped", k, exc)
    return records


@dataclass(frozen=True)
class CriterionSummary:
    criterion: Criterion
    median_rel_error: float
    max_rel_error: float
    trend_agreement: float
    bound_violations: int
    steps: int


@dataclass(frozen=True)
class ReplaySummary:
    criteria: dict[Criterion, CriterionSummary]
    fim_time_ns: int
    graph_time_ns: int
    n: int
    m: int

    @property
    def time_reduction(self) -> float:
        return 1.0 - self.graph_time_ns / self.fim_time_ns


def trend_agreement(fim_values, graph_values, tie_rel: float = 1e-12,
                    zero_delta_agrees: bool = True) -> float:
    """Fraction of consecutive pairs where both series move the same way.

    A step whose change is below ``tie_rel`` times the value counts as flat;
    by default a flat step on either side counts as agreement.
    """
    def signs(values):
        v = np.asarray(values, dtype=float)
        d = np.diff(v)
        flat = np.abs(d) < tie_rel * np.maximum(np.abs(v[1:]), np.abs(v[:-1]))
        return np.where(flat, 0, np.sign(d))

    a, b = signs(fim_values), signs(graph_values)
    if a.size == 0:
        return math.nan
    agree = a == b
    if zero_delta_agrees:
        agree |= (a == 0) | (b == 0)
    return float(np.mean(agree))


def summarize(records: list[StepRecord], tie_rel: float = 1e-12,
              zero_delta_agrees: bool = True) -> ReplaySummary:
    if not records:
        raise ValueError("no records to summarize")
    crits = [e.criterion for e in records[0].entries]
    out = {}
    fim_total = graph_total = 0
    for c in crits:
        rows = [r.get(c) for r in records]
        errs = [e.rel_error for e in rows]
        out[c] = CriterionSummary(
            criterion=c,
            median_rel_error=float(statistics.median(errs)),
            max_rel_error=float(max(errs)),
            trend_agreement=trend_agreement(
                [e.fim_value for e in rows], [e.graph_value for e in rows], tie_rel, zero_delta_agrees
            ),
            bound_violations=sum(bool(e.bound_violated) for e in rows),
            steps=len(rows),
        )
        fim_total += sum(e.fim_time_ns for e in rows)
        graph_total += sum(e.graph_time_ns for e in rows)
    return ReplaySummary(out, fim_total, graph_total, records[-1].n, records[-1].m)


@dataclass(frozen=True)
class ProbeRow:
    n: int
    fim_time_ns: int
    graph_time_ns: int

    @property
    def ratio(self) -> float:
        return self.fim_time_ns / self.graph_time_ns


def complexity_probe(sizes, dim: int = 2, criteria=DEFAULT_CRITERIA, repetitions: int = 1,
                     seed: int = 0) -> list[ProbeRow]:
    """Time both routes on synthetic chains of each size (criterion weighting).

    FIM time covers world-frame assembly, one eigensolve and all criteria;
    graph time covers weighting and the index computation for every criterion.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    config = ReplayConfig(criteria=tuple(criteria), repetitions=repetitions)
    rows = []
    for n in sizes:
        graph = synthesize(SynthSpec(nodes=n, dim=dim, info="corr", eta=0.3, seed=seed))
        rec = evaluate_step(graph, config)
        rows.append(ProbeRow(
            n,
            sum(e.fim_time_ns for e in rec.entries),
            sum(e.graph_time_ns for e in rec.entries),
        ))
    return rows
