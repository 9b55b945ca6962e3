"""Command-line interface.

Exit codes: 0 success, 1 usage or parse failure, 2 incomplete rule set,
3 inference failure (total conflict or impossible evidence).

Reports go to stdout; notices and diagnostics go to stderr.  In ``tsv``
format stdout carries only the SET/MASS/BEL/PL table plus any explicitly
requested ``#``-marked sections, so output stays byte-stable and parseable.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from math import fsum
from pathlib import Path

from .errors import (
    FrameMismatchError,
    InferenceError,
    ParseError,
    ValidationError,
)
from .frames import Frame
from .mapping import (
    EvidentialMapping,
    Propagator,
    bayes_enumeration_posterior,
    classify_mapping,
    combine_mappings,
    compose,
    export_cem_rows,
    posterior,
    propagate_mass,
)
from .mass import NORMALIZATION_TOL, MassFunction, combine_dempster
from .product import ProductFrame, fuse_marginals
from .report import BeliefReport, render_text, render_tsv, save_figure
from .rules import (
    CompletenessReport,
    classify_completeness,
    complete_ruleset,
    parse_document,
    render_mapping,
    render_ruleset,
    ruleset_to_mapping,
)


class _CliFailure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.message = message
        self.code = code


class _IncompleteStrict(Exception):
    def __init__(self, path: str, reasons: tuple[str, ...]):
        super().__init__(path)
        self.path = path
        self.reasons = reasons


def _notice(message: str) -> None:
    print(message, file=sys.stderr)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _parse_file(path: str, frames: dict[str, Frame] | None = None):
    try:
        return parse_document(_read(path), frames=frames)
    except ParseError as exc:
        raise _CliFailure(f"{path}:{exc.line or 0}:{exc.col or 0}: {exc.message}", 1) from None


@dataclass
class LoadedMap:
    path: str
    mapping: EvidentialMapping
    frames: dict[str, Frame]
    report: CompletenessReport


def _load_mapping(path: str, strict: bool) -> LoadedMap:
    doc = _parse_file(path)
    rs = doc.ruleset
    if rs is None:
        raise _CliFailure(f"{path}: the file declares no rules", 1)
    report = classify_completeness(rs)
    if not report.complete:
        if strict:
            raise _IncompleteStrict(path, report.reasons())
        rs, theta_e, theta_h = complete_ruleset(rs)
        _notice(f"note: auto-completed rule set in {path}:")
        for reason in report.reasons():
            _notice(f"  {reason}")
    else:
        theta_e, theta_h = rs.antecedent_frame, rs.conclusion_frame
        assert theta_e is not None and theta_h is not None
    mapping = ruleset_to_mapping(rs, theta_e, theta_h)
    frames = dict(doc.frames)
    frames.setdefault(theta_e.name, theta_e)
    frames.setdefault(theta_h.name, theta_h)
    return LoadedMap(path, mapping, frames, report)


def _load_evidence(
    path: str,
    frames: dict[str, Frame],
    normalize: bool = False,
) -> MassFunction:
    doc = _parse_file(path, frames=dict(frames))
    if len(doc.evidence) != 1:
        raise _CliFailure(
            f"{path}: expected exactly one evidence declaration, found {len(doc.evidence)}", 1
        )
    decl = doc.evidence[0]
    known = {**frames, **doc.frames}
    frame = known.get(decl.frame_name)
    if frame is None:
        raise _CliFailure(f"{path}: unknown frame {decl.frame_name!r}", 1)
    pairs = []
    for target, value in decl.assignments:
        subset = frame.full() if target is None else frame.subset(target)
        pairs.append((subset, value))
    if normalize:
        total = fsum(v for _, v in pairs)
        if not 0.9 <= total <= 1.1:
            raise ValidationError(
                f"{path}: evidence total {total:g} is outside [0.9, 1.1]; refusing to rescale"
            )
        if abs(total - 1.0) > NORMALIZATION_TOL:
            pairs = [(s, v / total) for s, v in pairs]
            _notice(f"note: rescaled evidence in {path} by 1/{total:g}")
    return MassFunction(frame, pairs)


def _emit_report(report: BeliefReport, fmt: str, figure: str | None) -> None:
    if fmt == "tsv":
        sys.stdout.write(render_tsv(report))
        for heading, body in report.extra_sections:
            sys.stdout.write(f"# {heading}\n")
            for line in body:
                sys.stdout.write(line + "\n")
        for line in report.conflicts:
            _notice(f"conflict: {line}")
        for line in report.provenance:
            _notice(f"provenance: {line}")
    else:
        sys.stdout.write(render_text(report))
    if figure:
        save_figure(report, figure)
        _notice(f"wrote figure {figure}")


def _mapping_provenance(loaded: LoadedMap) -> str:
    kinds = "/".join(sorted(classify_mapping(loaded.mapping)))
    return f"map {loaded.mapping.name} ({kinds}) from {loaded.path}"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(args: argparse.Namespace) -> int:
    doc = _parse_file(args.rules)
    if doc.ruleset is None:
        raise _CliFailure(f"{args.rules}: the file declares no rules", 1)
    report = classify_completeness(doc.ruleset)
    if report.complete:
        print("complete")
        return 0
    print("incomplete:")
    for reason in report.reasons():
        print(f"  {reason}")
    return 2


def cmd_complete(args: argparse.Namespace) -> int:
    doc = _parse_file(args.rules)
    if doc.ruleset is None:
        raise _CliFailure(f"{args.rules}: the file declares no rules", 1)
    completed, _, _ = complete_ruleset(doc.ruleset)
    text = render_ruleset(completed)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _notice(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_propagate(args: argparse.Namespace) -> int:
    loaded = [_load_mapping(args.map, args.strict)]
    for path in args.chain or []:
        loaded.append(_load_mapping(path, args.strict))
    propagator: Propagator = loaded[0].mapping
    for link in loaded[1:]:
        propagator = compose(propagator, link.mapping)
    evidence = _load_evidence(args.evidence, loaded[0].frames, normalize=args.normalize)
    result = propagate_mass(propagator, evidence)
    provenance = [_mapping_provenance(link) for link in loaded]
    provenance.append(
        "rows used: " + ", ".join(str(s) for s in evidence.focal_sets())
    )
    sections: list[tuple[str, tuple[str, ...]]] = []
    if args.export_cem is not None:
        if propagator.source.size <= args.export_cem:
            sections.append(
                (f"CEM {propagator.name}", tuple(export_cem_rows(propagator)))
            )
        else:
            _notice(
                f"note: skipping CEM export, source frame has {propagator.source.size} "
                f"elements (> {args.export_cem})"
            )
    report = BeliefReport(
        title=f"belief on {propagator.target.name}",
        mass=result,
        provenance=tuple(provenance),
        extra_sections=tuple(sections),
    )
    _emit_report(report, args.format, args.figure)
    return 0


def cmd_combine_evidence(args: argparse.Namespace) -> int:
    if len(args.evidence) < 2:
        raise _CliFailure("combine-evidence needs at least two evidence files", 1)
    frames: dict[str, Frame] = {}
    masses = []
    for path in args.evidence:
        doc = _parse_file(path, frames=dict(frames))
        frames.update(doc.frames)
        if len(doc.evidence) != 1:
            raise _CliFailure(
                f"{path}: expected exactly one evidence declaration, found {len(doc.evidence)}",
                1,
            )
        decl = doc.evidence[0]
        if decl.frame_name != args.frame:
            raise _CliFailure(
                f"{path}: evidence is on frame {decl.frame_name!r}, expected {args.frame!r}", 1
            )
        frame = frames.get(decl.frame_name)
        if frame is None:
            raise _CliFailure(f"{path}: frame {decl.frame_name!r} is never declared", 1)
        pairs = [
            (frame.full() if target is None else frame.subset(target), value)
            for target, value in decl.assignments
        ]
        masses.append(MassFunction(frame, pairs))
    combined = masses[0]
    conflicts = []
    survival = 1.0
    for i, nxt in enumerate(masses[1:], start=2):
        combined, conflict = combine_dempster(combined, nxt)
        survival *= 1.0 - conflict
        conflicts.append(f"after file {i}: discarded conflict {conflict:.9f}")
    conflicts.append(f"cumulative discarded conflict {1.0 - survival:.9f}")
    report = BeliefReport(
        title=f"combined belief on {args.frame}",
        mass=combined,
        conflicts=tuple(conflicts),
        provenance=tuple(f"evidence from {p}" for p in args.evidence),
    )
    _emit_report(report, args.format, args.figure)
    return 0


def cmd_combine_maps(args: argparse.Namespace) -> int:
    first = _load_mapping(args.map[0], args.strict)
    second = _load_mapping(args.map[1], args.strict)
    combined, row_conflicts = combine_mappings(first.mapping, second.mapping)
    text = render_mapping(combined)
    Path(args.out).write_text(text, encoding="utf-8")
    for label, conflict in row_conflicts.items():
        line = f"row {label}: discarded conflict {conflict:.9f}"
        if conflict > 0.5:
            line += "  (warning: over half the joint row mass was discarded)"
        print(line)
    _notice(f"wrote {args.out}")
    return 0


def cmd_posterior(args: argparse.Namespace) -> int:
    loaded = _load_mapping(args.map, args.strict)
    prior = _load_evidence(args.prior, loaded.frames)
    observations = [
        label.strip()
        for chunk in args.observe or []
        for label in chunk.split(",")
        if label.strip()
    ]
    table = posterior(prior, loaded.mapping, observations)
    mass = MassFunction(
        loaded.mapping.source, {s: v for s, v in table.items() if v > 0.0}
    )
    provenance = [
        _mapping_provenance(loaded),
        "observations: " + (", ".join(observations) if observations else "(none)"),
    ]
    if args.verify:
        oracle = bayes_enumeration_posterior(prior, loaded.mapping, observations)
        deviation = max(
            abs(table.value(loaded.mapping.source.singleton(label)) - value)
            for label, value in oracle.items()
        )
        provenance.append(
            f"cross-check against joint enumeration: max deviation {deviation:.3e}"
        )
    report = BeliefReport(
        title=f"posterior belief on {loaded.mapping.source.name}",
        mass=mass,
        provenance=tuple(provenance),
    )
    _emit_report(report, args.format, args.figure)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    loaded = _load_mapping(args.map, args.strict)
    source = loaded.mapping.source
    if not isinstance(source, ProductFrame):
        raise _CliFailure(
            f"{args.map}: the map's source frame {source.name!r} is not a product frame", 1
        )
    by_component: dict[Frame, MassFunction] = {}
    for path in args.components:
        mass = _load_evidence(path, loaded.frames)
        if mass.frame not in source.components:
            raise _CliFailure(
                f"{path}: evidence frame {mass.frame.name!r} is not a component of "
                f"{source.name!r}",
                1,
            )
        if mass.frame in by_component:
            raise _CliFailure(
                f"{path}: duplicate evidence for component {mass.frame.name!r}", 1
            )
        by_component[mass.frame] = mass
    missing = [c.name for c in source.components if c not in by_component]
    if missing:
        raise _CliFailure("missing evidence for components: " + ", ".join(missing), 1)
    masses = [by_component[c] for c in source.components]
    fused = fuse_marginals(masses, source)
    result = propagate_mass(loaded.mapping, fused)
    sections = []
    if args.trace:
        sections.append(
            (
                f"fused mass on {source.name}",
                tuple(f"{s}\t{v:.9f}" for s, v in fused.items()),
            )
        )
    report = BeliefReport(
        title=f"belief on {loaded.mapping.target.name}",
        mass=result,
        provenance=(
            _mapping_provenance(loaded),
            "components: " + ", ".join(c.name for c in source.components),
        ),
        extra_sections=tuple(sections),
    )
    _emit_report(report, args.format, args.figure)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_report_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--format", choices=("text", "tsv"), default="text", help="report format"
    )
    sub.add_argument(
        "--figure", metavar="PATH", help="also render the report as a bar chart image"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="evmap",
        description="Propagate belief masses through uncertain heuristic rules.",
    )
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    p = sub.add_parser("check", help="classify a rule file as complete or incomplete")
    p.add_argument("rules")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("complete", help="complete a rule file and print the canonical form")
    p.add_argument("rules")
    p.add_argument("--out", metavar="FILE", help="write the completed file here")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("propagate", help="push evidence through one or more rule maps")
    p.add_argument("--map", required=True, metavar="FILE")
    p.add_argument("--chain", nargs="+", metavar="FILE", help="further maps, applied in order")
    p.add_argument("--evidence", required=True, metavar="FILE")
    p.add_argument(
        "--normalize",
        action="store_true",
        help="accept evidence totals in [0.9, 1.1] and rescale",
    )
    p.add_argument("--strict", action="store_true", help="fail on incomplete rule files")
    p.add_argument(
        "--export-cem",
        type=int,
        metavar="N",
        help="dump all complete-matrix rows when the source frame has at most N (<= 10) elements",
    )
    _add_report_options(p)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("combine-evidence", help="combine evidence files on one frame")
    p.add_argument("--frame", required=True, metavar="NAME")
    p.add_argument("--evidence", required=True, nargs="+", metavar="FILE")
    _add_report_options(p)
    p.set_defaults(func=cmd_combine_evidence)

    p = sub.add_parser("combine-maps", help="combine two rule maps over the same frames")
    p.add_argument("--map", required=True, nargs=2, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--strict", action="store_true", help="fail on incomplete rule files")
    p.set_defaults(func=cmd_combine_maps)

    p = sub.add_parser("posterior", help="update a prior from observed evidence elements")
    p.add_argument("--prior", required=True, metavar="FILE")
    p.add_argument("--map", required=True, metavar="FILE")
    p.add_argument(
        "--observe",
        action="append",
        metavar="ELEMENTS",
        help="comma-separated observed elements; may repeat",
    )
    p.add_argument(
        "--verify",
        action="store_true",
        help="cross-check against a full-joint enumeration",
    )
    p.add_argument("--strict", action="store_true", help="fail on incomplete rule files")
    _add_report_options(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("fuse", help="fuse per-component evidence through a product-frame map")
    p.add_argument("--components", required=True, nargs="+", metavar="FILE")
    p.add_argument("--map", required=True, metavar="FILE")
    p.add_argument("--trace", action="store_true", help="include the fused product-frame mass")
    p.add_argument("--strict", action="store_true", help="fail on incomplete rule files")
    _add_report_options(p)
    p.set_defaults(func=cmd_fuse)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if not hasattr(args, "func"):
        parser.print_help()
        return 1
    if getattr(args, "export_cem", None) is not None and not 1 <= args.export_cem <= 10:
        _notice("error: --export-cem takes a bound between 1 and 10")
        return 1
    try:
        return args.func(args)
    except _CliFailure as exc:
        _notice(f"error: {exc.message}")
        return exc.code
    except _IncompleteStrict as exc:
        _notice(f"{exc.path}: incomplete rule set:")
        for reason in exc.reasons:
            _notice(f"  {reason}")
        return 2
    except ParseError as exc:
        _notice(f"error: {exc.describe()}")
        return 1
    except InferenceError as exc:
        _notice(f"error: {exc}")
        return 3
    except (ValidationError, FrameMismatchError) as exc:
        _notice(f"error: {exc}")
        return 1
    except OSError as exc:
        _notice(f"error: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
