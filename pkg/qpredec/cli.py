"""Command-line front end: ``qpredec build|simulate|sweep|analyze|emit``."""
import argparse
import logging
import sys
from typing import Optional, Sequence

from qpredec.config import DEFAULT_NS_PER_ITER, DEFAULT_SHOTS, ModelSource, RunConfig
from qpredec.pipeline.assembly import Pipeline, truncate_pipeline
from qpredec.pipeline.build import class_coloring_summary, compile_pipeline
from qpredec.pipeline.emit import EMIT_FORMATS, emit_pipeline, load_pipeline, save_pipeline
from qpredec.primitives import PrimitiveSet, class_table, format_class_table
from qpredec.simulation.experiment import reports_to_csv, reports_to_json, run_experiment, sweep

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("both", "csv", "json")
_REPORT_WRITERS = {"csv": reports_to_csv, "json": reports_to_json}


def _add_model_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("model input")
    group.add_argument("--dem", help="detector error model text file")
    group.add_argument("--code", help="CSS code spec JSON file")
    group.add_argument("--sector", choices=("X", "Z"), default="Z",
                       help="decoding sector of a code-spec input")
    group.add_argument("--rounds", type=int, help="syndrome-measurement rounds")
    group.add_argument("--p-data", type=float, help="data error probability")
    group.add_argument("--p-meas", type=float, default=0., help="measurement error probability")
    group.add_argument("--p-hook", type=float, default=0., help="hook error probability")


def _add_simulation_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--pipeline", required=True, help="pipeline JSON written by `build`")
    _add_model_arguments(parser)
    parser.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--bp-iters", type=int, help="BP iteration budget")
    parser.add_argument("--distance", type=int,
                        help="distance for the latency-derived BP budget (default: code distance, "
                             "else rounds)")
    parser.add_argument("--ns-per-iter", type=int, default=DEFAULT_NS_PER_ITER,
                        help="nanoseconds per BP iteration for the latency-derived budget")
    parser.add_argument("--osd-budget-x10", action="store_true",
                        help="classify BP convergence with ten times the iteration budget")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--progress", action="store_true")
    parser.add_argument("--force", action="store_true",
                        help="skip the check that the pipeline matches the model")
    parser.add_argument("--format", choices=REPORT_FORMATS, default="both",
                        help="report formats; stdout takes CSV for `both`")
    parser.add_argument("-o", "--out", help="output stem; writes <out>.csv and/or <out>.json")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpredec",
        description="Compile and evaluate syndrome predecoders for qLDPC codes.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for debugging output")
    commands = parser.add_subparsers(dest="command", required=True)

    build = commands.add_parser("build", help="compile a predecoder pipeline",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arguments(build)
    build.add_argument("--sidecar", help="JSON map of mechanism index to kind")
    build.add_argument("--timeout", type=float,
                       help="exact-colouring budget per class in seconds "
                            "(default: $QPREDEC_TIMEOUT, else 60)")
    build.add_argument("--lenient-composites", action="store_true",
                       help="prune a composite when any cover reproduces its observables")
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("-o", "--out", help="pipeline JSON output path")

    simulate = commands.add_parser("simulate", help="compare the hierarchy with BP+OSD alone",
                                   formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_simulation_arguments(simulate)
    simulate.add_argument("--truncate", type=int, default=0, help="stages to remove from the tail")

    sweep_parser = commands.add_parser("sweep", help="run simulations over a grid",
                                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_simulation_arguments(sweep_parser)
    sweep_parser.add_argument("--p-grid", help="comma-separated data error probabilities")
    sweep_parser.add_argument("--truncate-grid", help="comma-separated stage-removal counts")

    analyze = commands.add_parser("analyze", help="print class and conflict-graph statistics")
    analyze.add_argument("pipeline")

    emit = commands.add_parser("emit", help="render a pipeline artifact")
    emit.add_argument("pipeline")
    emit.add_argument("--format", choices=EMIT_FORMATS, default="json")
    emit.add_argument("-o", "--out", help="output path (default: stdout)")
    return parser


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info("wrote %s", path)


def _simulation_source(config: RunConfig, pipeline: Pipeline) -> ModelSource:
    if config.has_model_input:
        return config.model_source()
    if not pipeline.source:
        raise ValueError("the pipeline does not record its model; give `--dem` or `--code`.")
    return ModelSource.from_dict(pipeline.source)


def _write_reports(config: RunConfig, reports):
    formats = ("csv", "json") if config.format == "both" else (config.format,)
    paths = config.output_paths(tuple(f".{name}" for name in formats))
    if paths is None:
        _write(_REPORT_WRITERS[formats[0]](reports), None)
        return
    for name, path in zip(formats, paths):
        _write(_REPORT_WRITERS[name](reports), path)


def run_build(config: RunConfig):
    source = config.model_source()
    pipeline, report = compile_pipeline(
        source.model(),
        timeout=config.resolved_timeout(),
        sidecar=config.load_sidecar(source),
        unanimous=not config.lenient_composites,
        seed=config.seed,
        code=source.label,
        source=source.to_dict(),
    )
    print(report.format())
    if config.out is not None:
        save_pipeline(pipeline, config.out)
        logger.info("wrote %s", config.out)


def run_simulate(config: RunConfig):
    pipeline = load_pipeline(config.pipeline)
    source = _simulation_source(config, pipeline)
    report = run_experiment(
        source.model(),
        truncate_pipeline(pipeline, config.truncate),
        config.decoder_config(source),
        shots=config.shots,
        seed=config.seed,
        p=source.noise.p_data if source.noise is not None else None,
        stages_removed=config.truncate,
        workers=config.workers,
        progress=config.progress,
        force=config.force,
    )
    _write_reports(config, [report])


def run_sweep(config: RunConfig):
    pipeline = load_pipeline(config.pipeline)
    source = _simulation_source(config, pipeline)
    reports = sweep(
        config.grid(),
        source.model,
        pipeline,
        config.decoder_config(source),
        shots=config.shots,
        seed=config.seed,
        workers=config.workers,
        progress=config.progress,
        force=config.force,
    )
    _write_reports(config, reports)


def run_analyze(config: RunConfig):
    pipeline = load_pipeline(config.pipeline)
    primitives = PrimitiveSet(pipeline.primitives, pipeline.dem_digest,
                              class_priorities=pipeline.class_priorities)
    print(format_class_table(class_table(primitives)))
    print()
    print(f"{'class':<15}{'nodes':>7}{'edges':>7}{'omega':>7}{'colors':>8}")
    for row in class_coloring_summary(pipeline):
        print(f"{row['class']:<15}{row['nodes']:>7}{row['edges']:>7}{row['omega_lb']:>7}"
              f"{row['colors']:>8}")
    print(f"depth: {pipeline.depth}")
    cost = pipeline.cost
    print(f"cost: {cost.and_gate_inputs} AND inputs, {cost.register_bits} register bits, "
          f"{cost.primitive_count} primitives")


def run_emit(config: RunConfig):
    _write(emit_pipeline(load_pipeline(config.pipeline), config.format), config.out)


COMMANDS = {
    "build": run_build,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "analyze": run_analyze,
    "emit": run_emit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](RunConfig.from_args(args))
    except (ValueError, OSError) as error:
        print(f"qpredec {args.command}: error: {error}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
