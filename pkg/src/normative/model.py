"""Core value types: institutions, domains, groundings and trajectories.

Everything here is an immutable value. Structural checks return lists of
:class:`Issue` rather than raising, so callers can report every problem at
once.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cache, cached_property
from typing import Iterable, Mapping

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")

TRUE = "true"
FALSE = "false"
NONE = "none"
BOOLEAN_VALUES = (TRUE, FALSE)

ACTIVE = "active"
USED_OBJECT = "usedObject"
POSITION = "position"


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


class NormKind(str, Enum):
    OBLIGATION = "obligation"
    MODAL = "modal"


# name -> (arity, kind) for the qualifiers shipped with the engine. Qualifiers
# registered later carry their own signature (see semantics.QualifierSemantics).
BUILTIN_SIGNATURES: dict[str, tuple[int, NormKind]] = {
    "must": (1, NormKind.OBLIGATION),
    "mustAlways": (1, NormKind.OBLIGATION),
    "mustNot": (1, NormKind.OBLIGATION),
    "mustEach": (1, NormKind.OBLIGATION),
    "mustToward": (1, NormKind.OBLIGATION),
    "at": (1, NormKind.MODAL),
    "atUsed": (1, NormKind.MODAL),
    "use": (1, NormKind.MODAL),
    "before": (2, NormKind.MODAL),
}

# Prohibitions are stored as obligation-kind norms but never need affordances.
PROHIBITIONS = frozenset({"mustNot"})


@dataclass(frozen=True, order=True)
class Statement:
    subject: str
    predicate: str
    object: str

    def __str__(self) -> str:
        return f"({self.subject},{self.predicate},{self.object})"


@dataclass(frozen=True)
class Norm:
    qualifier: str
    statements: tuple[Statement, ...]
    kind: NormKind = NormKind.MODAL

    @classmethod
    def of(cls, qualifier: str, *triples: tuple[str, str, str],
           kind: NormKind | None = None) -> Norm:
        """Build a norm from plain triples; kind defaults to the builtin signature."""
        if kind is None:
            kind = BUILTIN_SIGNATURES.get(qualifier, (0, NormKind.MODAL))[1]
        return cls(qualifier, tuple(Statement(*t) for t in triples), kind)

    @property
    def statement(self) -> Statement:
        return self.statements[0]

    @property
    def is_obligation(self) -> bool:
        return self.kind is NormKind.OBLIGATION

    @property
    def is_prohibition(self) -> bool:
        return self.qualifier in PROHIBITIONS

    def __str__(self) -> str:
        if len(self.statements) == 1:
            return f"{self.qualifier}{self.statements[0]}"
        return f"{self.qualifier}({','.join(map(str, self.statements))})"


@dataclass(frozen=True)
class Cardinality:
    """Bounds on how many agents may play a role; ``max=None`` is unbounded."""

    min: int = 0
    max: int | None = None

    def admits(self, count: int) -> bool:
        return self.min <= count and (self.max is None or count <= self.max)

    def __str__(self) -> str:
        return f"({self.min},{'*' if self.max is None else self.max})"


DEFAULT_CARDINALITY = Cardinality()


@dataclass(frozen=True)
class Institution:
    name: str
    arts: frozenset[str]
    roles: frozenset[str]
    acts: frozenset[str]
    norms: tuple[Norm, ...] = ()
    cardinality: Mapping[str, Cardinality] = field(default_factory=dict)

    def card(self, role: str) -> Cardinality:
        return self.cardinality.get(role, DEFAULT_CARDINALITY)

    @property
    def obligations(self) -> tuple[Norm, ...]:
        return tuple(n for n in self.norms if n.is_obligation)

    @property
    def modal_norms(self) -> tuple[Norm, ...]:
        return tuple(n for n in self.norms if not n.is_obligation)


@dataclass(frozen=True, order=True)
class StateVarName:
    """A structured state-variable name such as ``active(give,nao)``."""

    functor: str
    args: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> StateVarName:
        m = re.fullmatch(r"\s*([A-Za-z][A-Za-z0-9_-]*)\s*(?:\((.*)\))?\s*", text)
        if not m:
            raise ValueError(f"malformed state variable name {text!r}")
        functor, inner = m.group(1), m.group(2)
        if inner is None:
            return cls(functor)
        args = tuple(a.strip() for a in inner.split(","))
        if not all(is_identifier(a) for a in args):
            raise ValueError(f"malformed state variable name {text!r}")
        return cls(functor, args)

    def __str__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(self.args)})"


@cache  # shared instances keep hot dict lookups cheap
def active(behavior: str, agent: str) -> StateVarName:
    return StateVarName(ACTIVE, (behavior, agent))


@cache
def used_object(behavior: str, agent: str) -> StateVarName:
    return StateVarName(USED_OBJECT, (behavior, agent))


@cache
def position(entity: str) -> StateVarName:
    return StateVarName(POSITION, (entity,))


BUILTIN_VALUE_SETS = ("boolean", "object-ref", "agent-ref", "none")


@dataclass(frozen=True)
class StateVarDecl:
    """A declared state variable.

    Either ``values`` lists the symbolic values explicitly, or ``builtin``
    names one of :data:`BUILTIN_VALUE_SETS`. ``default`` falls back to the
    first explicit value (or ``false``/``none`` for builtins).
    """

    name: StateVarName
    values: tuple[str, ...] = ()
    builtin: str | None = None
    default: str | None = None


@dataclass(frozen=True)
class Domain:
    name: str
    agents: frozenset[str]
    objects: frozenset[str]
    behaviors: frozenset[str]
    affordances: frozenset[tuple[str, str, str]] = frozenset()
    state_vars: tuple[StateVarDecl, ...] = ()
    concurrent_behaviors: bool = False

    def resolve(self, decl: StateVarDecl) -> tuple[str, ...]:
        if decl.builtin is None:
            return decl.values
        if decl.builtin == "boolean":
            return BOOLEAN_VALUES
        if decl.builtin == "object-ref":
            return tuple(sorted(self.objects)) + (NONE,)
        if decl.builtin == "agent-ref":
            return tuple(sorted(self.agents)) + (NONE,)
        return (NONE,)

    def _default(self, decl: StateVarDecl) -> str:
        if decl.default is not None:
            return decl.default
        if decl.builtin == "boolean":
            return FALSE
        if decl.builtin is not None:
            return NONE
        return decl.values[0] if decl.values else NONE

    @cached_property
    def variables(self) -> dict[StateVarName, tuple[tuple[str, ...], str]]:
        """Every state variable in R (implicit ones included) -> (values, default)."""
        out: dict[StateVarName, tuple[tuple[str, ...], str]] = {}
        ref_values = tuple(sorted(self.objects | self.agents)) + (NONE,)
        for b in sorted(self.behaviors):
            for a in sorted(self.agents):
                out[active(b, a)] = (BOOLEAN_VALUES, FALSE)
                out[used_object(b, a)] = (ref_values, NONE)
        for decl in self.state_vars:
            out[decl.name] = (self.resolve(decl), self._default(decl))
        return out

    def values_of(self, name: StateVarName) -> tuple[str, ...]:
        return self.variables[name][0]

    def default_of(self, name: StateVarName) -> str:
        return self.variables[name][1]

    def affords(self, agent: str, behavior: str, target: str) -> bool:
        return (agent, behavior, target) in self.affordances

    def afforded_targets(self, agent: str, behavior: str) -> tuple[str, ...]:
        return tuple(sorted(o for (a, b, o) in self.affordances
                            if a == agent and b == behavior))


@dataclass(frozen=True)
class Grounding:
    """Role, action and artifact groundings, all stored as pair sets.

    ``roles`` holds (role, agent) pairs so that a non-functional role
    grounding can be represented and reported rather than silently lost.
    """

    roles: frozenset[tuple[str, str]] = frozenset()
    acts: frozenset[tuple[str, str]] = frozenset()
    arts: frozenset[tuple[str, str]] = frozenset()
    name: str = "G"

    @classmethod
    def of(cls, role_map: Mapping[str, str] | None = None,
           acts: Iterable[tuple[str, str]] = (), arts: Iterable[tuple[str, str]] = (),
           name: str = "G") -> Grounding:
        role_map = role_map or {}
        return cls(frozenset((r, a) for a, r in role_map.items()),
                   frozenset(acts), frozenset(arts), name)

    @property
    def role_map(self) -> dict[str, str]:
        """agent -> role (assumes the grounding is a function)."""
        return {a: r for r, a in sorted(self.roles)}


@dataclass(frozen=True)
class DerivedSets:
    """A_role, B_act and O_art for one (institution, grounding) pair."""

    agents_by_role: Mapping[str, frozenset[str]]
    behaviors_by_act: Mapping[str, frozenset[str]]
    objects_by_art: Mapping[str, frozenset[str]]

    def agents(self, role: str) -> frozenset[str]:
        return self.agents_by_role.get(role, frozenset())

    def behaviors(self, act: str) -> frozenset[str]:
        return self.behaviors_by_act.get(act, frozenset())

    def objects(self, art: str) -> frozenset[str]:
        return self.objects_by_art.get(art, frozenset())

    def targets(self, obj: str) -> frozenset[str]:
        """Grounded entities for a statement object, which is an art or a role."""
        if obj in self.agents_by_role:
            return self.agents_by_role[obj]
        return self.objects(obj)


def derived_sets(inst: Institution, dom: Domain, g: Grounding) -> DerivedSets:
    return DerivedSets(
        {r: frozenset(a for rr, a in g.roles if rr == r and a in dom.agents)
         for r in inst.roles},
        {x: frozenset(b for xx, b in g.acts if xx == x and b in dom.behaviors)
         for x in inst.acts},
        {x: frozenset(o for xx, o in g.arts if xx == x and o in dom.objects)
         for x in inst.arts},
    )


@dataclass(frozen=True, order=True)
class Segment:
    start: int
    end: int
    value: str

    def __str__(self) -> str:
        return f"[{self.start},{self.end}]={self.value}"


@dataclass(frozen=True)
class Trajectory:
    """Explicit segments per state variable over ``[start, end]``.

    Time points not covered by a segment take the variable's default value;
    resolving defaults needs a :class:`Domain`.
    """

    start: int
    end: int
    timelines: Mapping[StateVarName, tuple[Segment, ...]] = field(default_factory=dict)

    @property
    def horizon(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def segment_count(self) -> int:
        return sum(len(s) for s in self.timelines.values())

    def value_at(self, name: StateVarName, t: int, default: str) -> str:
        for seg in self.timelines.get(name, ()):
            if seg.start <= t <= seg.end:
                return seg.value
        return default


@dataclass(frozen=True)
class Issue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def validate_institution(inst: Institution,
                         signatures: Mapping[str, tuple[int, NormKind]] | None = None
                         ) -> list[Issue]:
    sigs = BUILTIN_SIGNATURES if signatures is None else signatures
    issues: list[Issue] = []
    if not is_identifier(inst.name):
        issues.append(Issue("institution", f"invalid name {inst.name!r}"))
    groups = {"arts": inst.arts, "roles": inst.roles, "acts": inst.acts}
    for label, ids in groups.items():
        if not ids:
            issues.append(Issue(label, f"{label} must not be empty"))
        for x in sorted(ids):
            if not is_identifier(x):
                issues.append(Issue(f"{label}.{x}", f"invalid identifier {x!r}"))
    for la, lb in (("arts", "roles"), ("arts", "acts"), ("roles", "acts")):
        for x in sorted(groups[la] & groups[lb]):
            issues.append(Issue(f"{la}.{x}", f"{x} declared in both {la} and {lb}"))

    for i, norm in enumerate(inst.norms):
        path = f"norms[{i}] {norm}"
        if not norm.statements:
            issues.append(Issue(path, "norm has no statements"))
        sig = sigs.get(norm.qualifier)
        if sig is not None:
            arity, kind = sig
            if len(norm.statements) != arity:
                issues.append(Issue(path, f"{norm.qualifier} expects arity {arity}, "
                                          f"got {len(norm.statements)}"))
            if kind is not norm.kind:
                issues.append(Issue(path, f"{norm.qualifier} is a {kind.value} qualifier"))
        if norm.is_obligation and len(norm.statements) != 1:
            issues.append(Issue(path, "obligation norms take exactly one statement"))
        for s in norm.statements:
            if s.subject not in inst.roles:
                issues.append(Issue(path, f"undeclared role {s.subject}"))
            if s.predicate not in inst.acts:
                issues.append(Issue(path, f"undeclared act {s.predicate}"))
            if s.object not in inst.arts and s.object not in inst.roles:
                issues.append(Issue(path, f"undeclared artifact or role {s.object}"))

    for role, c in sorted(inst.cardinality.items()):
        path = f"card.{role}"
        if role not in inst.roles:
            issues.append(Issue(path, f"undeclared role {role}"))
        if c.min < 0:
            issues.append(Issue(path, "min must be non-negative"))
        if c.max is not None and c.max < 1:
            issues.append(Issue(path, "max must be positive"))
        if c.max is not None and c.min > c.max:
            issues.append(Issue(path, f"min > max ({c.min} > {c.max})"))
    return issues


def validate_domain(dom: Domain) -> list[Issue]:
    issues: list[Issue] = []
    for label, ids in (("agents", dom.agents), ("objects", dom.objects),
                       ("behaviors", dom.behaviors)):
        for x in sorted(ids):
            if not is_identifier(x):
                issues.append(Issue(f"{label}.{x}", f"invalid identifier {x!r}"))
    for x in sorted(dom.agents & dom.objects):
        issues.append(Issue(f"agents.{x}", f"{x} is both an agent and an object"))
    for a, b, o in sorted(dom.affordances):
        path = f"afford {a} {b} {o}"
        if a not in dom.agents:
            issues.append(Issue(path, f"undeclared agent {a}"))
        if b not in dom.behaviors:
            issues.append(Issue(path, f"undeclared behavior {b}"))
        if o not in dom.objects and o not in dom.agents:
            issues.append(Issue(path, f"undeclared object or agent {o}"))
    seen: set[StateVarName] = set()
    for decl in dom.state_vars:
        path = f"statevar {decl.name}"
        if decl.name in seen:
            issues.append(Issue(path, "duplicate state variable"))
        seen.add(decl.name)
        if decl.name.functor in (ACTIVE, USED_OBJECT):
            issues.append(Issue(path, f"{decl.name.functor} variables are implicit"))
        if decl.builtin is not None and decl.builtin not in BUILTIN_VALUE_SETS:
            issues.append(Issue(path, f"unknown builtin value set {decl.builtin}"))
        known = decl.builtin is None or decl.builtin in BUILTIN_VALUE_SETS
        values = dom.resolve(decl) if known else ()
        if known and not values:
            issues.append(Issue(path, "value set must not be empty"))
        elif values and decl.default is not None and decl.default not in values:
            issues.append(Issue(path, f"default {decl.default} not in value set"))
    return issues


def validate_grounding_structure(inst: Institution, dom: Domain, g: Grounding) -> list[Issue]:
    issues: list[Issue] = []
    by_agent: dict[str, list[str]] = {}
    for role, agent in sorted(g.roles):
        by_agent.setdefault(agent, []).append(role)
        if role not in inst.roles:
            issues.append(Issue(f"role {role} -> {agent}", f"undeclared role {role}"))
        if agent not in dom.agents:
            issues.append(Issue(f"role {role} -> {agent}", f"undeclared agent {agent}"))
    for agent, roles in sorted(by_agent.items()):
        if len(roles) > 1:
            issues.append(Issue(f"role * -> {agent}",
                                f"agent {agent} grounded to {len(roles)} roles"))
    for act, b in sorted(g.acts):
        if act not in inst.acts:
            issues.append(Issue(f"act {act} -> {b}", f"undeclared act {act}"))
        if b not in dom.behaviors:
            issues.append(Issue(f"act {act} -> {b}", f"undeclared behavior {b}"))
    for art, o in sorted(g.arts):
        if art not in inst.arts:
            issues.append(Issue(f"art {art} -> {o}", f"undeclared artifact {art}"))
        if o not in dom.objects:
            issues.append(Issue(f"art {art} -> {o}", f"undeclared object {o}"))
    return issues


def validate_trajectory(traj: Trajectory, dom: Domain) -> list[Issue]:
    issues: list[Issue] = []
    if traj.start > traj.end:
        issues.append(Issue("horizon", f"empty horizon [{traj.start},{traj.end}]"))
    for name, segs in sorted(traj.timelines.items()):
        path = f"timeline {name}"
        if name not in dom.variables:
            issues.append(Issue(path, f"undeclared state variable {name}"))
            continue
        values = dom.values_of(name)
        prev: Segment | None = None
        for seg in sorted(segs):
            if seg.start > seg.end:
                issues.append(Issue(f"{path} {seg}", "empty interval"))
            if seg.start < traj.start or seg.end > traj.end:
                issues.append(Issue(f"{path} {seg}", "segment outside horizon"))
            if seg.value not in values:
                issues.append(Issue(f"{path} {seg}", f"value {seg.value} not in vals({name})"))
            if prev is not None and seg.start <= prev.end:
                issues.append(Issue(f"{path} {seg}", f"overlaps {prev}"))
            prev = seg
    return issues
