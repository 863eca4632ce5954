"""Norm semantics compiled to constraints over timeline sub-variables.

A trajectory under the piecewise-constant assumption is a set of
:class:`TimelineVar` values, one per maximal constant interval of each state
variable. Each norm compiles to a :class:`CompiledConstraint` whose evaluator
decides membership of such a set in the norm's denotation and returns the
segments that justify the verdict.

Qualifiers live in a :class:`QualifierRegistry`; new ones (for example
Allen-style interval relations) can be registered next to the built-ins.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from itertools import groupby
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import CompileError
from .model import (
    NONE,
    TRUE,
    DerivedSets,
    Domain,
    Norm,
    NormKind,
    Statement,
    StateVarName,
    active,
    position,
    used_object,
)


@dataclass(frozen=True, order=True)
class TimelineVar:
    """Sub-variable w_{var,index}: ``var`` holds ``value`` on ``[start, end]``."""

    var: StateVarName
    index: int
    start: int
    end: int
    value: str

    def overlaps(self, start: int, end: int) -> bool:
        return self.start <= end and start <= self.end

    def __str__(self) -> str:
        return f"w[{self.var},{self.index}][{self.start},{self.end}]={self.value}"


class Timelines:
    """The full set of sub-variables of a trajectory, indexed by state variable."""

    def __init__(self, start: int, end: int,
                 segments: Mapping[StateVarName, Sequence[TimelineVar]]):
        self.start = start
        self.end = end
        self._segments = {k: tuple(v) for k, v in segments.items()}
        self._starts = {k: [s.start for s in v] for k, v in self._segments.items()}

    @classmethod
    def from_values(cls, start: int, end: int,
                    values: Mapping[StateVarName, Sequence[str]]) -> Timelines:
        """Build maximal segments from per-time-point value sequences."""
        segments: dict[StateVarName, list[TimelineVar]] = {}
        for var, seq in values.items():
            out: list[TimelineVar] = []
            t = start
            for value, run in groupby(seq):
                n = sum(1 for _ in run)
                out.append(TimelineVar(var, len(out) + 1, t, t + n - 1, value))
                t += n
            segments[var] = out
        return cls(start, end, segments)

    @property
    def horizon(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def variables(self) -> Iterable[StateVarName]:
        return self._segments.keys()

    def __contains__(self, var: StateVarName) -> bool:
        return var in self._segments

    def __iter__(self) -> Iterator[TimelineVar]:
        for var in sorted(self._segments):
            yield from self._segments[var]

    def __len__(self) -> int:
        return sum(len(v) for v in self._segments.values())

    def segments(self, var: StateVarName) -> tuple[TimelineVar, ...]:
        return self._segments.get(var, ())

    def true_segments(self, var: StateVarName) -> list[TimelineVar]:
        return [s for s in self._segments.get(var, ()) if s.value == TRUE]

    def segment_at(self, var: StateVarName, t: int) -> TimelineVar | None:
        starts = self._starts.get(var)
        if not starts:
            return None
        i = bisect.bisect_right(starts, t) - 1
        if i < 0:
            return None
        seg = self._segments[var][i]
        return seg if seg.start <= t <= seg.end else None

    def value_at(self, var: StateVarName, t: int) -> str | None:
        seg = self.segment_at(var, t)
        return None if seg is None else seg.value

    def overlapping(self, var: StateVarName, start: int, end: int) -> list[TimelineVar]:
        return [s for s in self._segments.get(var, ()) if s.overlaps(start, end)]

    def values(self) -> dict[StateVarName, list[str]]:
        """Per-time-point values, the inverse of :meth:`from_values`."""
        out = {}
        for var, segs in self._segments.items():
            seq: list[str] = []
            for s in segs:
                seq.extend([s.value] * (s.end - s.start + 1))
            out[var] = seq
        return out


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    witness: tuple[TimelineVar, ...] = ()
    reason: str = ""


@dataclass(frozen=True)
class Demand:
    """At least ``count`` further activations of ``behaviors`` by ``agent`` are needed."""

    agent: str
    behaviors: frozenset[str]
    count: int


@dataclass(frozen=True)
class CompiledConstraint:
    """A norm compiled against one grounding.

    ``prefix_closed`` marks safety-style constraints: a violation on a prefix
    of a trajectory persists in every extension. ``demand`` (optional) reports
    activations still owed, which the planner uses as a lower bound.
    ``precedence`` (optional) is a pair (earlier, later) of activity
    variables: every true segment of the first set ends before any true
    segment of the second starts.
    """

    norm: Norm
    scope: frozenset[StateVarName]
    evaluator: Callable[[Timelines], Verdict] = field(repr=False, compare=False)
    prefix_closed: bool = False
    demand: Callable[[Timelines], list[Demand]] | None = field(
        default=None, repr=False, compare=False)
    precedence: tuple[frozenset[StateVarName], frozenset[StateVarName]] | None = None

    def evaluate(self, timelines: Timelines) -> Verdict:
        return self.evaluator(timelines)


@dataclass(frozen=True)
class CompileContext:
    domain: Domain
    sets: DerivedSets

    def agents(self, role: str) -> list[str]:
        return sorted(self.sets.agents(role))

    def behaviors(self, act: str) -> list[str]:
        return sorted(self.sets.behaviors(act))

    def targets(self, obj: str) -> list[str]:
        return sorted(self.sets.targets(obj))

    def require_position(self, entity: str, norm: Norm) -> None:
        if position(entity) not in self.domain.variables:
            raise CompileError(f"{norm}: no position state variable declared for {entity}")


Compiler = Callable[[Norm, CompileContext], CompiledConstraint]


@dataclass(frozen=True)
class QualifierSemantics:
    name: str
    arity: int
    kind: NormKind
    compile: Compiler = field(repr=False, compare=False)


class QualifierRegistry:
    """Qualifier name -> semantics. Names are unique."""

    def __init__(self, semantics: Iterable[QualifierSemantics] = ()):
        self._by_name: dict[str, QualifierSemantics] = {}
        for sem in semantics:
            self.register(sem)

    def register(self, sem: QualifierSemantics) -> QualifierRegistry:
        if sem.name in self._by_name:
            raise ValueError(f"qualifier {sem.name!r} is already registered")
        self._by_name[sem.name] = sem
        return self

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return sorted(self._by_name)

    def get(self, name: str) -> QualifierSemantics:
        try:
            return self._by_name[name]
        except KeyError:
            raise CompileError(f"unknown qualifier {name!r}") from None

    def signatures(self) -> dict[str, tuple[int, NormKind]]:
        return {n: (s.arity, s.kind) for n, s in self._by_name.items()}

    def compile(self, norm: Norm, ctx: CompileContext) -> CompiledConstraint:
        sem = self.get(norm.qualifier)
        if len(norm.statements) != sem.arity:
            raise CompileError(f"{norm}: {sem.name} expects arity {sem.arity}, "
                               f"got {len(norm.statements)}")
        return sem.compile(norm, ctx)


def _sets(stmt: Statement, ctx: CompileContext) -> tuple[list[str], list[str], list[str]]:
    return ctx.agents(stmt.subject), ctx.behaviors(stmt.predicate), ctx.targets(stmt.object)


def _cuts(tl: Timelines, seg: TimelineVar, vars_: Iterable[StateVarName]) -> list[tuple[int, int]]:
    """Split ``seg``'s interval at every segment boundary of ``vars_``."""
    points = {seg.start}
    for v in vars_:
        for s in tl.overlapping(v, seg.start, seg.end):
            if seg.start < s.start <= seg.end:
                points.add(s.start)
    starts = sorted(points)
    ends = [p - 1 for p in starts[1:]] + [seg.end]
    return list(zip(starts, ends))


def compile_must(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    agents, behaviors, _ = _sets(norm.statement, ctx)

    def hit(tl: Timelines, a: str) -> TimelineVar | None:
        for b in behaviors:
            for seg in tl.true_segments(active(b, a)):
                return seg
        return None

    def evaluate(tl: Timelines) -> Verdict:
        witness = []
        for a in agents:
            seg = hit(tl, a)
            if seg is None:
                refute = tuple(s for b in behaviors for s in tl.segments(active(b, a)))
                return Verdict(False, refute, f"{a} never performs {'/'.join(behaviors) or 'any behavior'}")
            witness.append(seg)
        return Verdict(True, tuple(witness))

    def demand(tl: Timelines) -> list[Demand]:
        return [Demand(a, frozenset(behaviors), 1) for a in agents if hit(tl, a) is None]

    scope = frozenset(active(b, a) for a in agents for b in behaviors)
    return CompiledConstraint(norm, scope, evaluate, False, demand)


def compile_must_always(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    agents, behaviors, _ = _sets(norm.statement, ctx)

    def evaluate(tl: Timelines) -> Verdict:
        witness: list[TimelineVar] = []
        for a in agents:
            covering = sorted(s for b in behaviors for s in tl.true_segments(active(b, a)))
            t = tl.start
            for seg in sorted(covering, key=lambda s: s.start):
                if seg.start > t:
                    break
                t = max(t, seg.end + 1)
            if t <= tl.end:
                refute = tuple(s for b in behaviors
                               if (s := tl.segment_at(active(b, a), t)) is not None)
                return Verdict(False, refute, f"{a} performs none of {'/'.join(behaviors)} at t={t}")
            witness.extend(covering)
        return Verdict(True, tuple(witness))

    scope = frozenset(active(b, a) for a in agents for b in behaviors)
    return CompiledConstraint(norm, scope, evaluate, True)


def compile_must_not(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    agents, behaviors, _ = _sets(norm.statement, ctx)

    def evaluate(tl: Timelines) -> Verdict:
        for a in agents:
            for b in behaviors:
                for seg in tl.true_segments(active(b, a)):
                    return Verdict(False, (seg,), f"{a} performs forbidden {b}")
        return Verdict(True, tuple(s for a in agents for b in behaviors
                                   for s in tl.segments(active(b, a))))

    scope = frozenset(active(b, a) for a in agents for b in behaviors)
    return CompiledConstraint(norm, scope, evaluate, True)


def compile_use(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    agents, behaviors, targets = _sets(norm.statement, ctx)
    allowed = frozenset(targets)

    def evaluate(tl: Timelines) -> Verdict:
        witness: list[TimelineVar] = []
        for a in agents:
            for b in behaviors:
                for seg in tl.true_segments(active(b, a)):
                    for u in tl.overlapping(used_object(b, a), seg.start, seg.end):
                        if u.value not in allowed:
                            return Verdict(False, (seg, u),
                                           f"{a} performs {b} with {u.value}, not one of "
                                           f"{{{','.join(targets)}}}")
                        witness.extend((seg, u))
        return Verdict(True, tuple(dict.fromkeys(witness)))

    scope = frozenset(v for a in agents for b in behaviors
                      for v in (active(b, a), used_object(b, a)))
    return CompiledConstraint(norm, scope, evaluate, True)


def compile_at(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    agents, behaviors, targets = _sets(norm.statement, ctx)
    if behaviors:
        for x in agents + targets:
            ctx.require_position(x, norm)
    target_vars = [position(o) for o in targets]

    def evaluate(tl: Timelines) -> Verdict:
        witness: list[TimelineVar] = []
        for a in agents:
            pa = position(a)
            for b in behaviors:
                for seg in tl.true_segments(active(b, a)):
                    for x, _y in _cuts(tl, seg, [pa, *target_vars]):
                        here = tl.segment_at(pa, x)
                        match = next((s for v in target_vars
                                      if (s := tl.segment_at(v, x)) is not None
                                      and here is not None and s.value == here.value), None)
                        if match is None:
                            refute = [seg] + [s for v in [pa, *target_vars]
                                              if (s := tl.segment_at(v, x)) is not None]
                            where = here.value if here else "?"
                            return Verdict(False, tuple(refute),
                                           f"{a} performs {b} at {where} (t={x}), away from "
                                           f"every {norm.statement.object}")
                        witness.extend((seg, here, match))
        return Verdict(True, tuple(dict.fromkeys(witness)))

    scope = frozenset([active(b, a) for a in agents for b in behaviors]
                      + [position(a) for a in agents] + target_vars)
    return CompiledConstraint(norm, scope, evaluate, True)


def compile_at_used(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    """The agent stands where the object it uses is: position(a) = usedObject(b,a)."""
    agents, behaviors, _ = _sets(norm.statement, ctx)
    if behaviors:
        for a in agents:
            ctx.require_position(a, norm)

    def evaluate(tl: Timelines) -> Verdict:
        witness: list[TimelineVar] = []
        for a in agents:
            pa = position(a)
            for b in behaviors:
                uv = used_object(b, a)
                for seg in tl.true_segments(active(b, a)):
                    for x, _y in _cuts(tl, seg, [pa, uv]):
                        p, u = tl.segment_at(pa, x), tl.segment_at(uv, x)
                        if p is None or u is None or u.value == NONE or p.value != u.value:
                            refute = tuple(s for s in (seg, p, u) if s is not None)
                            return Verdict(False, refute,
                                           f"{a} performs {b} at {p.value if p else '?'} "
                                           f"using {u.value if u else '?'} (t={x})")
                        witness.extend((seg, p, u))
        return Verdict(True, tuple(dict.fromkeys(witness)))

    scope = frozenset([v for a in agents for b in behaviors
                       for v in (active(b, a), used_object(b, a))]
                      + [position(a) for a in agents])
    return CompiledConstraint(norm, scope, evaluate, True)


def compile_before(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    first, second = norm.statements
    a1s, b1s, _ = _sets(first, ctx)
    a2s, b2s, _ = _sets(second, ctx)
    firsts = [active(b, a) for a in a1s for b in b1s]
    seconds = [active(b, a) for a in a2s for b in b2s]

    def evaluate(tl: Timelines) -> Verdict:
        for v1 in firsts:
            for s1 in tl.true_segments(v1):
                for v2 in seconds:
                    for s2 in tl.true_segments(v2):
                        if not s1.end < s2.start:
                            return Verdict(False, (s1, s2),
                                           f"{v1} on [{s1.start},{s1.end}] does not precede "
                                           f"{v2} on [{s2.start},{s2.end}]")
        witness = [s for v in firsts + seconds for s in tl.true_segments(v)]
        return Verdict(True, tuple(dict.fromkeys(witness)))

    return CompiledConstraint(norm, frozenset(firsts + seconds), evaluate, True,
                              precedence=(frozenset(firsts), frozenset(seconds)))


def _compile_used_obligation(norm: Norm, ctx: CompileContext, each: bool) -> CompiledConstraint:
    agents, behaviors, targets = _sets(norm.statement, ctx)
    allowed = frozenset(targets)

    def uses(tl: Timelines, a: str) -> dict[str, tuple[TimelineVar, TimelineVar]]:
        found: dict[str, tuple[TimelineVar, TimelineVar]] = {}
        for b in behaviors:
            for seg in tl.true_segments(active(b, a)):
                for u in tl.overlapping(used_object(b, a), seg.start, seg.end):
                    if u.value in allowed:
                        found.setdefault(u.value, (seg, u))
        return found

    def missing(tl: Timelines, a: str) -> list[str]:
        found = uses(tl, a)
        if each:
            return [o for o in targets if o not in found]
        return [] if found else ["any of " + "/".join(targets)]

    def evaluate(tl: Timelines) -> Verdict:
        witness: list[TimelineVar] = []
        for a in agents:
            gaps = missing(tl, a)
            if gaps:
                refute = [s for b in behaviors for s in tl.segments(active(b, a))]
                refute += [u for b in behaviors for seg in tl.true_segments(active(b, a))
                           for u in tl.overlapping(used_object(b, a), seg.start, seg.end)]
                return Verdict(False, tuple(dict.fromkeys(refute)),
                               f"{a} never performs {'/'.join(behaviors) or 'any behavior'} "
                               f"with {', '.join(gaps)}")
            found = uses(tl, a)
            for o in (targets if each else sorted(found)[:1]):
                witness.extend(found[o])
        return Verdict(True, tuple(dict.fromkeys(witness)))

    def demand(tl: Timelines) -> list[Demand]:
        out = []
        for a in agents:
            n = len(missing(tl, a))
            if n:
                out.append(Demand(a, frozenset(behaviors), n))
        return out

    scope = frozenset(v for a in agents for b in behaviors
                      for v in (active(b, a), used_object(b, a)))
    return CompiledConstraint(norm, scope, evaluate, False, demand)


def compile_must_each(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    """Every grounded object of the statement is used in some activation."""
    return _compile_used_obligation(norm, ctx, each=True)


def compile_must_toward(norm: Norm, ctx: CompileContext) -> CompiledConstraint:
    """must, but the activation has to use one of the grounded objects or agents."""
    return _compile_used_obligation(norm, ctx, each=False)


BUILTINS: tuple[QualifierSemantics, ...] = (
    QualifierSemantics("must", 1, NormKind.OBLIGATION, compile_must),
    QualifierSemantics("mustAlways", 1, NormKind.OBLIGATION, compile_must_always),
    QualifierSemantics("mustNot", 1, NormKind.OBLIGATION, compile_must_not),
    QualifierSemantics("mustEach", 1, NormKind.OBLIGATION, compile_must_each),
    QualifierSemantics("mustToward", 1, NormKind.OBLIGATION, compile_must_toward),
    QualifierSemantics("at", 1, NormKind.MODAL, compile_at),
    QualifierSemantics("atUsed", 1, NormKind.MODAL, compile_at_used),
    QualifierSemantics("use", 1, NormKind.MODAL, compile_use),
    QualifierSemantics("before", 2, NormKind.MODAL, compile_before),
)


def default_registry() -> QualifierRegistry:
    """A fresh registry holding the built-in qualifiers."""
    return QualifierRegistry(BUILTINS)

