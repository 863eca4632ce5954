"""Check a trajectory against every norm of an institution under a grounding."""
from __future__ import annotations

from dataclasses import dataclass

from .admissibility import is_admissible
from .errors import InadmissibleGrounding, InputError
from .model import (
    Domain,
    Grounding,
    Institution,
    Norm,
    Segment,
    StateVarName,
    Trajectory,
    derived_sets,
    validate_grounding_structure,
    validate_trajectory,
)
from .semantics import (
    CompileContext,
    CompiledConstraint,
    QualifierRegistry,
    TimelineVar,
    Timelines,
    Verdict,
    default_registry,
)

SCHEMA_VERSION = 1


def segment_trajectory(traj: Trajectory, dom: Domain,
                       variables: set[StateVarName] | None = None) -> Timelines:
    """Materialize defaults and split every variable into maximal constant runs.

    ``variables`` restricts the result to a subset of the domain's variables.
    """
    unknown = sorted(v for v in traj.timelines if v not in dom.variables)
    if unknown:
        raise InputError("undeclared state variable(s): " + ", ".join(map(str, unknown)))
    names = dom.variables.keys() if variables is None else variables
    values = {}
    for var in names:
        default = dom.default_of(var)
        values[var] = [traj.value_at(var, t, default) for t in range(traj.start, traj.end + 1)]
    return Timelines.from_values(traj.start, traj.end, values)


def trajectory_from_segments(start: int, end: int, segments) -> Trajectory:
    """Build a trajectory holding only the given timeline segments."""
    out: dict[StateVarName, list[Segment]] = {}
    for s in segments:
        out.setdefault(s.var, []).append(Segment(s.start, s.end, s.value))
    return Trajectory(start, end, {k: tuple(sorted(set(v))) for k, v in out.items()})


def trajectory_from_timelines(tl: Timelines, dom: Domain | None = None) -> Trajectory:
    """Inverse of :func:`segment_trajectory`; all-default variables are dropped."""
    out = {}
    for var in sorted(tl.variables):
        segs = tl.segments(var)
        if dom is not None and all(s.value == dom.default_of(var) for s in segs):
            continue
        out[var] = tuple(Segment(s.start, s.end, s.value) for s in segs)
    return Trajectory(tl.start, tl.end, out)


@dataclass(frozen=True)
class Network:
    """The compiled constraints of one institution under one grounding."""

    institution: Institution
    domain: Domain
    grounding: Grounding
    constraints: tuple[CompiledConstraint, ...]

    @property
    def scope(self) -> frozenset[StateVarName]:
        return frozenset().union(*(c.scope for c in self.constraints))


def build_network(inst: Institution, dom: Domain, g: Grounding,
                  registry: QualifierRegistry | None = None,
                  check_admissible: bool = True) -> Network:
    """Compile every norm; the grounding must be well formed and admissible."""
    issues = validate_grounding_structure(inst, dom, g)
    if issues:
        raise InputError("malformed grounding:\n" + "\n".join(map(str, issues)))
    if check_admissible:
        report = is_admissible(inst, dom, g)
        if not report.admissible:
            raise InadmissibleGrounding(report)
    registry = registry or default_registry()
    ctx = CompileContext(dom, derived_sets(inst, dom, g))
    return Network(inst, dom, g, tuple(registry.compile(n, ctx) for n in inst.norms))


@dataclass(frozen=True)
class NormResult:
    norm: Norm
    verdict: Verdict

    @property
    def satisfied(self) -> bool:
        return self.verdict.satisfied

    @property
    def witness(self) -> tuple[TimelineVar, ...]:
        return self.verdict.witness


def _segment_dict(s: TimelineVar) -> dict:
    return {"var": str(s.var), "index": s.index, "start": s.start, "end": s.end,
            "value": s.value}


@dataclass(frozen=True)
class VerificationReport:
    grounding: str
    horizon: tuple[int, int]
    results: tuple[NormResult, ...]

    @property
    def adherent(self) -> bool:
        return all(r.satisfied for r in self.results)

    @property
    def violations(self) -> list[NormResult]:
        return [r for r in self.results if not r.satisfied]

    def result_for(self, norm: Norm) -> NormResult:
        for r in self.results:
            if r.norm == norm:
                return r
        raise KeyError(str(norm))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "verification",
            "grounding": self.grounding,
            "horizon": list(self.horizon),
            "adherent": self.adherent,
            "norms": [
                {"norm": str(r.norm), "qualifier": r.norm.qualifier,
                 "satisfied": r.satisfied, "reason": r.verdict.reason,
                 "witness": [_segment_dict(s) for s in r.witness]}
                for r in self.results
            ],
        }

    def table(self) -> str:
        width = max([len(str(r.norm)) for r in self.results] + [4])
        lines = [f"grounding {self.grounding}, horizon [{self.horizon[0]},{self.horizon[1]}]",
                 f"{'norm':<{width}}  verdict"]
        for r in self.results:
            lines.append(f"{str(r.norm):<{width}}  {'ok' if r.satisfied else 'VIOLATED'}")
            if not r.satisfied:
                lines.append(f"{'':<{width}}    {r.verdict.reason}")
                for s in r.witness:
                    lines.append(f"{'':<{width}}    {s}")
        lines.append("adherent" if self.adherent else
                     f"not adherent: {len(self.violations)} violated norm(s)")
        return "\n".join(lines)


def check(network: Network, tl: Timelines) -> VerificationReport:
    """Evaluate every constraint; all violations are reported."""
    results = tuple(NormResult(c.norm, c.evaluate(tl)) for c in network.constraints)
    return VerificationReport(network.grounding.name, tl.horizon, results)


def verify(inst: Institution, dom: Domain, g: Grounding, traj: Trajectory,
           registry: QualifierRegistry | None = None) -> VerificationReport:
    issues = validate_trajectory(traj, dom)
    if issues:
        raise InputError("malformed trajectory:\n" + "\n".join(map(str, issues)))
    network = build_network(inst, dom, g, registry)
    return check(network, segment_trajectory(traj, dom, set(network.scope)))
