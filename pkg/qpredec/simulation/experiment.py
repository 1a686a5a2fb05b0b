"""Monte-Carlo evaluation of a predecoder in front of a BP+OSD decoder.

Every shot with a non-trivial syndrome is run through the predecoder pipeline.
Resolved shots take the predecoder's prediction; the others are decoded by BP+OSD
on the original syndrome. The comparison arm decodes every non-trivial shot with
BP+OSD alone. Both arms see identical shots.
"""
import csv
import hashlib
import io
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from tqdm import tqdm

from qpredec.decoders import BPOSD, MinSumBP, TannerGraph
from qpredec.dem.model import DetectorErrorModel, merge_duplicates, structure_digest
from qpredec.pipeline.assembly import Pipeline, truncate_pipeline
from qpredec.simulation.predecoder import Predecoder
from qpredec.simulation.sampling import MechanismSampler

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "p", "shots", "coverage", "util_reduction", "ler_hier", "ler_l2", "ler_hier_ci95",
    "ler_l2_ci95", "bp_fail", "osd_reduction", "depth", "stages_removed", "seed",
)
COVERAGE_NOTE = "coverage counts resolved shots among shots with a non-zero syndrome"


@dataclass(frozen=True)
class DecoderConfig:
    """Second-level decoder settings.

    Parameters
    ----------
    max_iters : int, default=50
        BP iteration budget.
    osd_budget_x10 : bool, default=False
        Classify BP convergence for OSD accounting with a separate run of ten times
        the budget instead of reusing the decoding run.
    """
    max_iters: int = 50
    osd_budget_x10: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"`max_iters` must be >= 1, got {self.max_iters}.")


@dataclass
class _Tally:
    shots: int
    num_observables: int
    depth: int
    nonzero: int = 0
    resolved: int = 0
    hier_errors: int = 0
    l2_errors: int = 0
    bp_nonconverged: int = 0
    bp_nonconverged_resolved: int = 0
    osd_calls_l2: int = 0
    osd_calls_hierarchy: int = 0
    hier_observable_errors: np.ndarray = None
    l2_observable_errors: np.ndarray = None
    stage_fires: np.ndarray = None
    fired_histogram: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.hier_observable_errors = np.zeros(self.num_observables, dtype=np.int64)
        self.l2_observable_errors = np.zeros(self.num_observables, dtype=np.int64)
        self.stage_fires = np.zeros(self.depth, dtype=np.int64)

    def add(self, other: "_Tally"):
        for name in ("shots", "nonzero", "resolved", "hier_errors", "l2_errors",
                     "bp_nonconverged", "bp_nonconverged_resolved", "osd_calls_l2",
                     "osd_calls_hierarchy"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.hier_observable_errors += other.hier_observable_errors
        self.l2_observable_errors += other.l2_observable_errors
        self.stage_fires += other.stage_fires
        self.fired_histogram.update(other.fired_histogram)


def wilson_interval(errors: int, shots: int) -> Tuple[float, float]:
    """95% Wilson score interval of a binomial proportion."""
    interval = stats.binomtest(errors, shots).proportion_ci(confidence_level=0.95,
                                                           method="wilson")
    return float(interval.low), float(interval.high)


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated metrics of one experiment.

    ``utilization_reduction`` is ``1 / (1 - coverage)`` and infinite at full
    coverage. ``osd_reduction`` is the share of BP-non-converged shots the
    predecoder resolved, None when BP always converged.
    """
    shots: int
    nonzero_syndrome_shots: int
    trivial_shots: int
    resolved_shots: int
    coverage: float
    utilization_reduction: float
    ler_hierarchy: float
    ler_l2_only: float
    ler_hierarchy_ci95: Tuple[float, float]
    ler_l2_only_ci95: Tuple[float, float]
    bp_nonconverged: int
    bp_nonconverged_resolved: int
    osd_reduction: Optional[float]
    osd_calls_l2_only: int
    osd_calls_hierarchy: int
    per_observable_ler_hierarchy: Tuple[float, ...]
    per_observable_ler_l2_only: Tuple[float, ...]
    fired_histogram: Dict[int, int]
    stage_fire_counts: Tuple[int, ...]
    depth: int
    stages_removed: int
    seed: int
    p: Optional[float] = None
    config: Dict[str, object] = field(default_factory=dict)
    notes: Tuple[str, ...] = (COVERAGE_NOTE,)

    def to_dict(self) -> Dict[str, object]:
        report = asdict(self)
        report["utilization_reduction"] = _json_float(self.utilization_reduction)
        report["ler_hierarchy_ci95"] = list(self.ler_hierarchy_ci95)
        report["ler_l2_only_ci95"] = list(self.ler_l2_only_ci95)
        report["per_observable_ler_hierarchy"] = list(self.per_observable_ler_hierarchy)
        report["per_observable_ler_l2_only"] = list(self.per_observable_ler_l2_only)
        report["fired_histogram"] = {str(k): v for k, v in sorted(self.fired_histogram.items())}
        report["stage_fire_counts"] = list(self.stage_fire_counts)
        report["notes"] = list(self.notes)
        return report

    def csv_row(self) -> List[str]:
        return [
            _csv_float(self.p),
            str(self.shots),
            _csv_float(self.coverage),
            _csv_float(self.utilization_reduction),
            _csv_float(self.ler_hierarchy),
            _csv_float(self.ler_l2_only),
            "%.6e;%.6e" % self.ler_hierarchy_ci95,
            "%.6e;%.6e" % self.ler_l2_only_ci95,
            str(self.bp_nonconverged),
            _csv_float(self.osd_reduction),
            str(self.depth),
            str(self.stages_removed),
            str(self.seed),
        ]


def _json_float(value: float):
    return "inf" if math.isinf(value) else value


def _csv_float(value: Optional[float]) -> str:
    if value is None or math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf"
    return repr(float(value))


class _Experiment:
    """Shared, read-only state of one experiment; chunks are evaluated independently."""

    def __init__(self, dem: DetectorErrorModel, pipeline: Pipeline, config: DecoderConfig,
                 seed: int):
        self.sampler = MechanismSampler.from_dem(dem)
        self.predecoder = Predecoder(pipeline)
        graph = TannerGraph.from_dem(dem)
        self.decoder = BPOSD(graph, config.max_iters)
        self.generous_bp = MinSumBP(graph, 10 * config.max_iters) if config.osd_budget_x10 else None
        self.seed = seed
        self.num_observables = dem.num_observables
        self.depth = pipeline.depth

    def run_chunk(self, bounds: Tuple[int, int]) -> _Tally:
        start, stop = bounds
        fired, syndromes, flips = self.sampler.sample(self.seed, start, stop - start)
        tally = _Tally(stop - start, self.num_observables, self.depth)
        tally.fired_histogram.update(fired.sum(axis=1).tolist())

        hier = np.zeros_like(flips)
        l2 = np.zeros_like(flips)
        rows = np.flatnonzero(syndromes.any(axis=1))
        tally.nonzero = int(rows.size)
        if rows.size:
            nontrivial = syndromes[rows]
            bp_batch = self.decoder.bp.decode_batch(nontrivial)
            decoded = self.decoder.decode_with_bp(nontrivial, bp_batch)
            converged = bp_batch[0]
            if self.generous_bp is not None:
                converged = self.generous_bp.decode_batch(nontrivial)[0]
            for j, row in enumerate(rows):
                correction, used_osd = decoded[j]
                l2[row] = correction.observable_flips
                outcome = self.predecoder.run(nontrivial[j])
                tally.stage_fires += np.asarray(outcome.per_stage_fire_counts, dtype=np.int64)
                if outcome.fully_resolved:
                    tally.resolved += 1
                    hier[row] = outcome.predicted_observable_flips
                else:
                    hier[row] = correction.observable_flips
                    tally.osd_calls_hierarchy += int(used_osd)
                tally.osd_calls_l2 += int(used_osd)
                if not converged[j]:
                    tally.bp_nonconverged += 1
                    tally.bp_nonconverged_resolved += int(outcome.fully_resolved)

        hier_wrong = hier != flips
        l2_wrong = l2 != flips
        tally.hier_errors = int(hier_wrong.any(axis=1).sum())
        tally.l2_errors = int(l2_wrong.any(axis=1).sum())
        tally.hier_observable_errors += hier_wrong.sum(axis=0)
        tally.l2_observable_errors += l2_wrong.sum(axis=0)
        return tally


def _chunks(shots: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, shots)) for start in range(0, shots, chunk_size)]


def run_experiment(
    dem: DetectorErrorModel,
    pipeline: Pipeline,
    decoder_config: DecoderConfig = DecoderConfig(),
    shots: int = 10_000,
    seed: int = 0,
    p: Optional[float] = None,
    stages_removed: int = 0,
    workers: int = 1,
    chunk_size: int = 1024,
    progress: bool = False,
    force: bool = False,
) -> ExperimentReport:
    """Sample shots and compare the predecoder hierarchy with BP+OSD alone.

    Parameters
    ----------
    dem : DetectorErrorModel
        Model to sample from; normalized before use.
    pipeline : Pipeline
        Built from a model with the same structure.
    decoder_config : DecoderConfig
    shots : int, default=10000
    seed : int, default=0
        Shot ``i`` is drawn from ``np.random.default_rng([seed, i])``.
    p : float, optional
        Physical error rate, echoed in the report.
    stages_removed : int, default=0
        Number of stages already truncated from ``pipeline``, echoed in the report.
    workers : int, default=1
        Threads evaluating chunks of shots; results do not depend on it.
    chunk_size : int, default=1024
    progress : bool, default=False
        Show a progress bar.
    force : bool, default=False
        Skip the structure-digest check.

    Returns
    -------
    report : ExperimentReport
    """
    if shots < 1:
        raise ValueError(f"`shots` must be >= 1, got {shots}.")
    if workers < 1 or chunk_size < 1:
        raise ValueError(f"`workers` and `chunk_size` must be >= 1, got {workers}, {chunk_size}.")
    dem = merge_duplicates(dem)
    if dem.num_detectors != pipeline.num_detectors:
        raise ValueError(
            f"pipeline expects {pipeline.num_detectors} detectors, model has {dem.num_detectors}."
        )
    if not force and structure_digest(dem) != pipeline.dem_digest:
        raise ValueError("pipeline was built from a different detector error model "
                         "(structure digest mismatch).")

    experiment = _Experiment(dem, pipeline, decoder_config, seed)
    chunks = _chunks(shots, chunk_size)
    total = _Tally(0, dem.num_observables, pipeline.depth)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(experiment.run_chunk, chunks)
        for tally in tqdm(results, total=len(chunks), disable=not progress, desc="shots"):
            total.add(tally)

    report = _report(total, decoder_config, seed, p, pipeline.depth, stages_removed)
    logger.info("%d shots: coverage %.4f, LER hierarchy %.3e, LER L2 %.3e", shots,
                report.coverage, report.ler_hierarchy, report.ler_l2_only)
    return report


def _report(total: _Tally, config: DecoderConfig, seed: int, p: Optional[float], depth: int,
            stages_removed: int) -> ExperimentReport:
    notes = (COVERAGE_NOTE,)
    if total.nonzero:
        coverage = total.resolved / total.nonzero
    else:
        coverage = 1.
        notes += ("no shot had a non-zero syndrome",)
    utilization = math.inf if coverage >= 1. else 1. / (1. - coverage)
    osd_reduction = None
    if total.bp_nonconverged:
        osd_reduction = total.bp_nonconverged_resolved / total.bp_nonconverged
    return ExperimentReport(
        shots=total.shots,
        nonzero_syndrome_shots=total.nonzero,
        trivial_shots=total.shots - total.nonzero,
        resolved_shots=total.resolved,
        coverage=coverage,
        utilization_reduction=utilization,
        ler_hierarchy=total.hier_errors / total.shots,
        ler_l2_only=total.l2_errors / total.shots,
        ler_hierarchy_ci95=wilson_interval(total.hier_errors, total.shots),
        ler_l2_only_ci95=wilson_interval(total.l2_errors, total.shots),
        bp_nonconverged=total.bp_nonconverged,
        bp_nonconverged_resolved=total.bp_nonconverged_resolved,
        osd_reduction=osd_reduction,
        osd_calls_l2_only=total.osd_calls_l2,
        osd_calls_hierarchy=total.osd_calls_hierarchy,
        per_observable_ler_hierarchy=tuple((total.hier_observable_errors / total.shots).tolist()),
        per_observable_ler_l2_only=tuple((total.l2_observable_errors / total.shots).tolist()),
        fired_histogram=dict(sorted(total.fired_histogram.items())),
        stage_fire_counts=tuple(total.stage_fires.tolist()),
        depth=depth,
        stages_removed=stages_removed,
        seed=seed,
        p=p,
        config={"max_iters": config.max_iters, "osd_budget_x10": config.osd_budget_x10},
        notes=notes,
    )


@dataclass(frozen=True)
class SweepPoint:
    p: Optional[float] = None
    stages_removed: int = 0


def sweep_points(
    p_grid: Optional[Sequence[float]] = None,
    truncate_grid: Optional[Sequence[int]] = None,
) -> List[SweepPoint]:
    """Cartesian product of the grids, p-major."""
    return [SweepPoint(p, n) for p in (p_grid or [None]) for n in (truncate_grid or [0])]


def sub_seed(base_seed: int, p: Optional[float]) -> int:
    """Per-point seed: first 8 bytes of SHA-256 over ``"{base_seed}:{p!r}"``.

    Without a physical error rate the key is ``"{base_seed}:dem"``. Truncation
    points at one p therefore share their shots.
    """
    key = f"{base_seed}:{'dem' if p is None else repr(float(p))}"
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def sweep(
    points: Sequence[SweepPoint],
    model_for: Callable[[Optional[float]], DetectorErrorModel],
    pipeline: Pipeline,
    decoder_config: DecoderConfig = DecoderConfig(),
    shots: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    progress: bool = False,
    force: bool = False,
) -> List[ExperimentReport]:
    """Run one experiment per grid point.

    Parameters
    ----------
    points : sequence of SweepPoint
    model_for : callable
        Returns the model to sample for a point's ``p`` (None for a fixed model).
    pipeline : Pipeline
        Full pipeline; each point truncates its own copy.

    Returns
    -------
    reports : list of ExperimentReport
        In grid order.
    """
    if not points:
        raise ValueError("`points` must be non-empty.")
    for point in points:
        if point.stages_removed < 0 or (point.stages_removed
                                        and point.stages_removed >= pipeline.depth):
            raise ValueError(
                f"truncation {point.stages_removed} is out of range for depth {pipeline.depth}."
            )
        if point.p is not None and not 0. < point.p < 1.:
            raise ValueError(f"grid value p must be in (0, 1), got {point.p}.")
    models: Dict[Optional[float], DetectorErrorModel] = {}
    reports = []
    for point in points:
        if point.p not in models:
            models[point.p] = model_for(point.p)
        reports.append(run_experiment(
            models[point.p],
            truncate_pipeline(pipeline, point.stages_removed),
            decoder_config,
            shots=shots,
            seed=sub_seed(seed, point.p),
            p=point.p,
            stages_removed=point.stages_removed,
            workers=workers,
            progress=progress,
            force=force,
        ))
    return reports


def reports_to_csv(reports: Iterable[ExperimentReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerow(report.csv_row())
    return buffer.getvalue()


def reports_to_json(reports: Iterable[ExperimentReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
