"""Command-line entry point.

Subcommands: spec-check, verify, train, project, gen-data, gen-trace.

Exit codes: 0 success; 1 input error (unreadable files, parse errors, bad
flag values); 2 semantic error (scope errors, training divergence); 3 only
under `verify --strict` when at least one trace violates the specification.
Set PROTO_TQTL_LOG to a level name (DEBUG, INFO, ...) to adjust logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .formula import Formula, pretty_print, scope_check
from .model_io import ModelFileError, read_dataset, read_model, write_dataset, write_model
from .parser import ParseError, parse
from .prototypes import TrainConfig, TrainingDiverged, accuracy, project, train
from .semantics import ClassSource
from .specs import BUILDERS, SatisfactionReport, SpecParams, TraceGroup, report
from .synth import SynthSpec, generate_dataset, load_spec, spec_from_dict, spec_to_dict
from .trace import Label, TraceError, read_trace, write_trace
from .tracegen import AGGREGATIONS, generate_trace

log = logging.getLogger("proto_tqtl")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SEMANTIC = 2
EXIT_VIOLATIONS = 3


class CliInputError(Exception):
    """Invalid flags or unreadable inputs; maps to exit code 1."""


class CliSemanticError(Exception):
    """Well-formed input that fails a semantic check; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep the 0/1/2/3 contract
        raise CliInputError(message)


def _configure_logging():
    level_name = os.environ.get("PROTO_TQTL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc.strerror}") from None


def _format_robustness(value: float) -> str:
    if value == float("inf"):
        return "+inf"
    if value == float("-inf"):
        return "-inf"
    return repr(value)


def _robustness_json(value: float):
    if value == float("inf"):
        return "+inf"
    if value == float("-inf"):
        return "-inf"
    return value


# --- spec loading shared by spec-check and verify -----------------------------


def _spec_params(args) -> SpecParams:
    return SpecParams(
        target_class=Label(args.target_class),
        similarity_ceiling=args.ceiling,
        drift_bound=args.drift,
        window=args.window,
        class_source=ClassSource(args.class_source),
    )


def _load_spec_formula(args) -> Formula:
    name = args.spec
    if name in BUILDERS:
        params = _spec_params(args)
        if name == "phi1":
            return BUILDERS[name](params, literal=args.literal_phi1)
        return BUILDERS[name](params)
    flags_used = [
        flag
        for flag, default in (
            ("--ceiling", 0.4),
            ("--drift", 0.1),
            ("--window", 5),
            ("--target-class", "FAKE"),
        )
        if getattr(args, flag.lstrip("-").replace("-", "_")) != default
    ]
    if args.literal_phi1:
        flags_used.append("--literal-phi1")
    if flags_used:
        raise CliInputError(
            f"{', '.join(flags_used)} only apply to built-in specs (phi1, phi2, phi3), "
            f"not to spec file {name}"
        )
    formula = parse(_read_text(name))
    errors = scope_check(formula)
    if errors:
        raise CliSemanticError("\n".join(f"scope error: {err}" for err in errors))
    return formula


# --- subcommands ---------------------------------------------------------------


def cmd_spec_check(args) -> int:
    text = _read_text(args.spec_path)
    try:
        formula = parse(text)
    except ParseError as exc:
        print(f"parse error: {args.spec_path}:{exc}", file=sys.stderr)
        return EXIT_INPUT
    errors = scope_check(formula)
    if errors:
        for err in errors:
            print(f"scope error: {err}", file=sys.stderr)
        return EXIT_SEMANTIC
    print(pretty_print(formula))
    return EXIT_OK


def _collect_trace_paths(args) -> list[Path]:
    paths = [Path(p) for p in args.trace]
    if args.trace_dir:
        directory = Path(args.trace_dir)
        if not directory.is_dir():
            raise CliInputError(f"--trace-dir {directory} is not a directory")
        paths.extend(sorted(directory.glob("*.trace")))
    if not paths:
        raise CliInputError("no traces given; use --trace or --trace-dir")
    return paths


def _render_report(rep: SatisfactionReport) -> str:
    lines = []
    for result in rep.results:
        lines.append(
            f"{result.verdict.value:<12} {_format_robustness(result.robustness):>24}  {result.video_id}"
        )
    lines.append("")
    lines.append(f"{'group':<6} {'satisfied':>10} {'sat/total':>12} {'inconclusive':>14}")
    for group in (TraceGroup.POSITIVE, TraceGroup.NEGATIVE, TraceGroup.ALL):
        stats = rep.groups[group]
        pct = stats.percent_satisfied
        pct_text = "n/a" if pct is None else f"{pct:.2f}"
        lines.append(
            f"{group.value:<6} {pct_text:>10} {f'{stats.sat}/{stats.total}':>12} {stats.inconclusive:>14}"
        )
    return "\n".join(lines)


def _report_json(rep: SatisfactionReport, spec_text: str, class_source: ClassSource) -> dict:
    group_names = {
        TraceGroup.POSITIVE: "positive",
        TraceGroup.NEGATIVE: "negative",
        TraceGroup.ALL: "all",
    }
    return {
        "spec": spec_text,
        "class_source": class_source.value,
        "results": [
            {
                "video_id": r.video_id,
                "ground_truth": r.ground_truth.value,
                "predicted": r.predicted.value,
                "verdict": r.verdict.value,
                "robustness": _robustness_json(r.robustness),
            }
            for r in rep.results
        ],
        "groups": {
            group_names[g]: {
                "total": s.total,
                "sat": s.sat,
                "unsat": s.unsat,
                "inconclusive": s.inconclusive,
                "percent_satisfied": s.percent_satisfied,
            }
            for g, s in rep.groups.items()
        },
    }


def cmd_verify(args) -> int:
    formula = _load_spec_formula(args)
    traces = []
    for path in _collect_trace_paths(args):
        try:
            traces.append(read_trace(path))
        except OSError as exc:
            raise CliInputError(f"cannot read trace {path}: {exc.strerror}") from None
        except TraceError as exc:
            raise CliInputError(f"bad trace {path}: {exc}") from None
    class_source = ClassSource(args.class_source)
    rep = report(
        formula,
        traces,
        class_source=class_source,
        group_by=ClassSource(args.group_by),
        jobs=args.jobs,
    )
    if args.json:
        print(json.dumps(_report_json(rep, pretty_print(formula), class_source), indent=2))
    else:
        print(_render_report(rep))
    violations = rep.groups[TraceGroup.ALL].unsat
    if args.strict and violations:
        log.info("strict mode: %d violating trace(s)", violations)
        return EXIT_VIOLATIONS
    return EXIT_OK


def _train_config(args) -> TrainConfig:
    try:
        return TrainConfig(
            lambda_cluster=args.lambda_cluster,
            lambda_sep=args.lambda_sep,
            lambda_div=args.lambda_div,
            s_max=args.s_max,
            m_k=args.m_k,
            lr_proto=args.lr_proto,
            lr_fc=args.lr_fc,
            epochs=args.epochs,
            projection_period=args.projection_period,
            seed=args.seed,
            literal_lambda_signs=args.literal_lambda_signs,
        )
    except ValueError as exc:
        raise CliInputError(str(exc)) from None


def _print_config(title: str, pairs) -> None:
    print(title)
    for key, value in pairs:
        print(f"  {key} = {value}")


def cmd_train(args) -> int:
    try:
        clips = read_dataset(args.data)
    except (OSError, ModelFileError, ValueError) as exc:
        raise CliInputError(f"bad dataset {args.data}: {exc}") from None
    cfg = _train_config(args)
    _print_config("resolved training config:", [(k, getattr(cfg, k)) for k in cfg.__dataclass_fields__])
    try:
        result = train(clips, cfg)
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    write_model(result.bank, args.out)
    print(f"initial loss = {result.initial_loss:.6f}")
    print(f"final loss   = {result.final_loss:.6f}")
    print(f"train accuracy = {accuracy(clips, result.bank):.4f}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_project(args) -> int:
    try:
        bank = read_model(args.model)
        clips = read_dataset(args.data)
    except (OSError, ModelFileError, ValueError) as exc:
        raise CliInputError(str(exc)) from None
    try:
        projected = project(bank, clips)
    except ValueError as exc:
        print(f"projection failed: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    out = args.out or args.model
    write_model(projected, out)
    print(f"grounded {projected.num_prototypes} prototypes; model written to {out}")
    return EXIT_OK


def cmd_gen_data(args) -> int:
    if args.config:
        try:
            spec = load_spec(args.config)
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise CliInputError(f"bad config {args.config}: {exc}") from None
        overrides = {}
        for name in ("clips_per_class", "grid_h", "grid_w", "dim", "noise_scale", "seed"):
            value = getattr(args, name)
            if value is not None:
                overrides[name] = value
        if overrides:
            raw = spec_to_dict(spec)
            raw.update(overrides)
            spec = spec_from_dict(raw)
    else:
        kwargs = {
            name: getattr(args, name)
            for name in ("clips_per_class", "grid_h", "grid_w", "dim", "noise_scale", "seed")
            if getattr(args, name) is not None
        }
        try:
            spec = SynthSpec(**kwargs)
        except ValueError as exc:
            raise CliInputError(str(exc)) from None
    _print_config("resolved synthetic data spec:", sorted(spec_to_dict(spec).items()))
    clips = generate_dataset(spec)
    write_dataset(clips, args.out)
    print(f"{len(clips)} clips written to {args.out}")
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    try:
        bank = read_model(args.model)
        clips = read_dataset(args.data)
    except (OSError, ModelFileError, ValueError) as exc:
        raise CliInputError(str(exc)) from None
    if args.class_filter:
        clips = [c for c in clips if c.label is Label(args.class_filter)]
        if not clips:
            raise CliInputError(f"no {args.class_filter} clips in {args.data}")
    try:
        trace = generate_trace(
            clips, bank, args.video_id, Label(args.ground_truth), aggregation=args.agg
        )
    except (ValueError, TraceError) as exc:
        raise CliInputError(str(exc)) from None
    write_trace(trace, args.out)
    print(
        f"trace {trace.video_id}: {trace.length} frames, predicted {trace.predicted.value}; "
        f"written to {args.out}"
    )
    return EXIT_OK


# --- argument wiring -------------------------------------------------------------


def _add_spec_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--spec", required=True, help="spec file path or built-in name phi1|phi2|phi3")
    sub.add_argument("--ceiling", type=float, default=0.4, help="similarity ceiling for phi2/phi3")
    sub.add_argument("--drift", type=float, default=0.1, help="drift bound for phi2")
    sub.add_argument("--window", type=int, default=5, help="drift window (frames) for phi2")
    sub.add_argument("--target-class", choices=[l.value for l in Label], default="FAKE")
    sub.add_argument(
        "--literal-phi1",
        action="store_true",
        help="build phi1's inner universal body as a bare conjunction (audit form)",
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proto-tqtl", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("spec-check", help="parse and scope-check a spec file")
    sub.add_argument("spec_path")
    sub.set_defaults(func=cmd_spec_check)

    sub = commands.add_parser("verify", help="evaluate a spec over traces and report")
    _add_spec_flags(sub)
    sub.add_argument("--trace", action="append", default=[], help="trace file (repeatable)")
    sub.add_argument("--trace-dir", help="directory of *.trace files")
    sub.add_argument(
        "--class-source",
        choices=[c.value for c in ClassSource],
        default=ClassSource.PREDICTED.value,
        help="which stored label the class atom reads",
    )
    sub.add_argument(
        "--group-by",
        choices=[c.value for c in ClassSource],
        default=ClassSource.GROUND_TRUTH.value,
        help="which stored label splits the (+)/(-) report rows",
    )
    sub.add_argument("--json", action="store_true", help="machine-readable output")
    sub.add_argument("--jobs", type=int, default=1, help="parallel trace evaluations")
    sub.add_argument("--strict", action="store_true", help="exit 3 when any trace violates")
    sub.set_defaults(func=cmd_verify)

    sub = commands.add_parser("train", help="train a prototype bank on a dataset file")
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--lambda-cluster", type=float, default=0.2)
    sub.add_argument("--lambda-sep", type=float, default=None)
    sub.add_argument("--lambda-div", type=float, default=0.1)
    sub.add_argument("--s-max", type=float, default=0.3)
    sub.add_argument("--m-k", type=int, default=10)
    sub.add_argument("--lr-proto", type=float, default=1e-3)
    sub.add_argument("--lr-fc", type=float, default=1e-3)
    sub.add_argument("--epochs", type=int, default=200)
    sub.add_argument("--projection-period", type=int, default=5)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--literal-lambda-signs", action="store_true")
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("project", help="project prototypes onto training patches")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--out", help="defaults to rewriting --model in place")
    sub.set_defaults(func=cmd_project)

    sub = commands.add_parser("gen-data", help="generate a synthetic dataset file")
    sub.add_argument("--config", help="JSON config for the generator")
    sub.add_argument("--clips-per-class", type=int)
    sub.add_argument("--grid-h", type=int)
    sub.add_argument("--grid-w", type=int)
    sub.add_argument("--dim", type=int)
    sub.add_argument("--noise-scale", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_gen_data)

    sub = commands.add_parser("gen-trace", help="run a model over clips and write a trace")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True, help="dataset file; clips become frames in order")
    sub.add_argument("--video-id", required=True)
    sub.add_argument("--ground-truth", choices=[l.value for l in Label], required=True)
    sub.add_argument(
        "--class-filter",
        choices=[l.value for l in Label],
        help="keep only clips of this label, so a labeled dataset yields a class-pure video",
    )
    sub.add_argument("--agg", choices=AGGREGATIONS, default="avg")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_gen_trace)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CliSemanticError as exc:
        print(exc, file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
