"""Command-line interface: check, verify, ground, plan and fmt.

Exit codes: 0 success, 1 semantic negative (inadmissible, not adherent,
unsat, no grounding), 2 parse or input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Sequence, TextIO

from . import specfmt
from .admissibility import AdmissibilityReport, is_admissible
from .errors import CompileError, InadmissibleGrounding, InputError
from .groundsearch import GroundingQuery, enumerate_admissible
from .model import Grounding, validate_grounding_structure
from .planner import PlanRequest, plan
from .specfmt import SpecFormatError
from .verifier import SCHEMA_VERSION, verify

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def grounding_dict(g: Grounding) -> dict:
    return {"name": g.name,
            "roles": [list(p) for p in sorted(g.roles)],
            "acts": [list(p) for p in sorted(g.acts)],
            "arts": [list(p) for p in sorted(g.arts)]}


class _Output:
    def __init__(self, args: argparse.Namespace, stdout: TextIO):
        self.structured = args.output == "structured"
        self.stdout = stdout
        self.command = args.command

    def emit(self, human: str, doc: dict) -> None:
        if self.structured:
            doc = {"schema_version": SCHEMA_VERSION, "command": self.command, **doc}
            self.stdout.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
        else:
            self.stdout.write(human if human.endswith("\n") else human + "\n")


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _load_common(args: argparse.Namespace):
    inst = specfmt.load_institution(args.institution)
    dom = specfmt.load_domain(args.domain)
    return inst, dom


def _load_grounding(args, inst, dom) -> Grounding:
    g = specfmt.load_grounding(args.grounding)
    issues = validate_grounding_structure(inst, dom, g)
    if issues:
        raise InputError(f"{args.grounding}: malformed grounding\n" + "\n".join(map(str, issues)))
    return g


def _admissibility_text(report: AdmissibilityReport) -> str:
    if report.admissible:
        return "admissible"
    return "\n".join(["inadmissible"] + [f"  {line}" for line in report.lines()])


def cmd_check(args, out: _Output) -> int:
    inst, dom = _load_common(args)
    g = _load_grounding(args, inst, dom)
    report = is_admissible(inst, dom, g)
    out.emit(_admissibility_text(report),
             {"grounding": g.name, "admissibility": report.to_dict()})
    return EXIT_OK if report.admissible else EXIT_NEGATIVE


def cmd_verify(args, out: _Output) -> int:
    inst, dom = _load_common(args)
    g = _load_grounding(args, inst, dom)
    traj = specfmt.load_trajectory(args.trajectory, dom)
    try:
        report = verify(inst, dom, g, traj)
    except InadmissibleGrounding as e:
        out.emit(_admissibility_text(e.report),
                 {"grounding": g.name, "admissibility": e.report.to_dict(),
                  "verification": None})
        return EXIT_NEGATIVE
    out.emit(report.table(), {"grounding": g.name,
                              "admissibility": is_admissible(inst, dom, g).to_dict(),
                              "verification": report.to_dict()})
    return EXIT_OK if report.adherent else EXIT_NEGATIVE


def cmd_ground(args, out: _Output) -> int:
    inst, dom = _load_common(args)
    partial = specfmt.load_grounding(args.fix) if args.fix else None
    query = GroundingQuery(inst, dom, partial, args.limit, args.maximal)
    found = list(enumerate_admissible(query))
    text = "\n".join(specfmt.serialize_grounding(g) for g in found)
    _write(args.out, text)
    human = text if not args.out else f"{len(found)} grounding(s) written to {args.out}"
    out.emit(human or "no admissible grounding",
             {"count": len(found), "groundings": [grounding_dict(g) for g in found]})
    return EXIT_OK if found else EXIT_NEGATIVE


def cmd_plan(args, out: _Output) -> int:
    inst, dom = _load_common(args)
    g = _load_grounding(args, inst, dom) if args.grounding else None
    req = PlanRequest(inst, dom, g, tuple(args.horizon), args.max_segments)
    try:
        result = plan(req)
    except InadmissibleGrounding as e:
        out.emit(_admissibility_text(e.report),
                 {"status": "inadmissible", "admissibility": e.report.to_dict()})
        return EXIT_NEGATIVE
    if result is None:
        out.emit(f"unsat: no adherent trajectory over [{args.horizon[0]},{args.horizon[1]}] "
                 f"with at most {args.max_segments} segment(s) per variable",
                 {"status": "unsat", "horizon": list(args.horizon),
                  "max_segments": args.max_segments})
        return EXIT_NEGATIVE
    trj = specfmt.serialize_trajectory(result.trajectory, dom)
    _write(args.out, trj)
    comment = "\n".join(f"# {line}" if line else "#" for line in
                        (specfmt.serialize_grounding(result.grounding).splitlines()
                         + [""] + result.report.table().splitlines()))
    human = (trj + comment) if not args.out else comment
    out.emit(human, {"status": "plan", "grounding": grounding_dict(result.grounding),
                     "activations": result.activations, "trajectory": trj,
                     "verification": result.report.to_dict()})
    return EXIT_OK


def cmd_fmt(args, out: _Output) -> int:
    kind = specfmt.kind_of(args.file)
    dom = specfmt.load_domain(args.domain) if args.domain else None
    value = (specfmt.load_trajectory(args.file, dom) if kind == "trajectory"
             else specfmt.load(args.file))
    text = specfmt.serialize(value, dom)
    _write(args.out, text)
    out.emit(text if not args.out else f"formatted {args.file} -> {args.out}",
             {"kind": kind, "text": text})
    return EXIT_OK


def _error_dict(err) -> dict:
    return {"file": err.span.file, "line": err.span.line, "column": err.span.column,
            "message": err.message, "expected": list(err.expected)}


def _emit_error(out: _Output, kind: str, errors: list[dict]) -> None:
    # human mode already reported on stderr
    if out.structured:
        out.emit("", {"status": "error", "error_kind": kind, "errors": errors})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normative",
        description="Check, verify, ground and plan with normative institutions.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("human", "structured"), default="human",
                        help="human-readable text or a JSON document")
    sub = parser.add_subparsers(dest="command", required=True)

    def files(p: argparse.ArgumentParser, grounding: str | None) -> None:
        p.add_argument("-i", "--institution", required=True, help=".inst file")
        p.add_argument("-d", "--domain", required=True, help=".dom file")
        if grounding == "required":
            p.add_argument("-g", "--grounding", required=True, help=".grd file")
        elif grounding == "optional":
            p.add_argument("-g", "--grounding", help=".grd file (omit to search groundings)")

    p = sub.add_parser("check", parents=[common], help="is the grounding admissible?")
    files(p, "required")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", parents=[common], help="does a trajectory adhere?")
    files(p, "required")
    p.add_argument("-t", "--trajectory", required=True, help=".trj file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ground", parents=[common], help="enumerate admissible groundings")
    files(p, None)
    p.add_argument("--fix", help=".grd file with pairs every result must contain")
    p.add_argument("--limit", type=int, help="stop after this many groundings")
    p.add_argument("--maximal", action="store_true",
                   help="one grounding per role assignment, with every useful pair")
    p.add_argument("--out", help="write the groundings here instead of stdout")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("plan", parents=[common], help="synthesize an adherent trajectory")
    files(p, "optional")
    p.add_argument("--horizon", nargs=2, type=int, metavar=("START", "END"), default=[1, 4])
    p.add_argument("--max-segments", type=int, default=4, metavar="N",
                   help="at most N constant segments per state variable")
    p.add_argument("--out", help="write the .trj here instead of stdout")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("fmt", parents=[common], help="print a file in canonical form")
    p.add_argument("file")
    p.add_argument("-d", "--domain", help=".dom file, used to elide default timelines")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    out = _Output(args, stdout)
    try:
        return args.func(args, out)
    except SpecFormatError as e:
        for err in e.errors:
            stderr.write(f"error: {err}\n")
        _emit_error(out, "input", [_error_dict(err) for err in e.errors])
        return EXIT_INPUT
    except (InputError, CompileError, OSError) as e:
        stderr.write(f"error: {e}\n")
        _emit_error(out, "input", [{"message": str(e)}])
        return EXIT_INPUT
    except Exception as e:
        traceback.print_exc(file=stderr)
        _emit_error(out, "internal", [{"message": f"{type(e).__name__}: {e}"}])
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
