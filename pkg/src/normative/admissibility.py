"""Grounding admissibility: executability of obligations plus cardinality."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .model import Cardinality, Domain, Grounding, Institution, Norm


@dataclass(frozen=True)
class ObligationFailure:
    norm: Norm
    agent: str

    def __str__(self) -> str:
        return f"{self.norm} not executable by {self.agent}"


@dataclass(frozen=True)
class CardinalityCheck:
    role: str
    ok: bool
    actual: int
    card: Cardinality

    @property
    def min(self) -> int:
        return self.card.min

    @property
    def max(self) -> int | None:
        return self.card.max

    def __str__(self) -> str:
        return f"card({self.role}) = {self.card} but {self.actual} agent(s) play it"


@dataclass(frozen=True)
class AdmissibilityReport:
    failed_obligations: tuple[ObligationFailure, ...] = ()
    cardinality_violations: tuple[CardinalityCheck, ...] = ()

    @property
    def admissible(self) -> bool:
        return not self.failed_obligations and not self.cardinality_violations

    def lines(self) -> list[str]:
        return [str(f) for f in self.failed_obligations] + \
               [str(c) for c in self.cardinality_violations]

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "failed_obligations": [{"norm": str(f.norm), "agent": f.agent}
                                   for f in self.failed_obligations],
            "cardinality_violations": [
                {"role": c.role, "actual": c.actual, "min": c.min,
                 "max": "*" if c.max is None else c.max}
                for c in self.cardinality_violations],
        }


def _check_ids(inst: Institution, dom: Domain, agent: str, act: str, target: str) -> None:
    if agent not in dom.agents:
        raise InputError(f"unknown agent {agent!r}")
    if act not in inst.acts:
        raise InputError(f"unknown act {act!r}")
    if target not in inst.arts and target not in inst.roles:
        raise InputError(f"unknown artifact or role {target!r}")


def capable(agent: str, act: str, target: str,
            inst: Institution, dom: Domain, g: Grounding) -> bool:
    """Can ``agent`` perform ``act`` on ``target`` through some grounded pair?

    ``target`` is an artifact (objects via G_O) or a role (agents via G_A).
    """
    _check_ids(inst, dom, agent, act, target)
    if target in inst.roles:
        grounded = sorted(a for r, a in g.roles if r == target)
    else:
        grounded = sorted(o for art, o in g.arts if art == target)
    for act_, b in sorted(g.acts):
        if act_ != act:
            continue
        for o in grounded:
            if (agent, b, o) in dom.affordances:
                return True
    return False


def executable(norm: Norm, inst: Institution, dom: Domain,
               g: Grounding) -> tuple[bool, tuple[str, ...]]:
    """Return (executable, agents that are not capable)."""
    if not norm.is_obligation:
        raise ValueError(f"{norm} is not an obligation norm")
    if norm.is_prohibition:
        return True, ()
    s = norm.statement
    failing = tuple(ag for role, ag in sorted(g.roles)
                    if role == s.subject and not capable(ag, s.predicate, s.object, inst, dom, g))
    return not failing, failing


def cardinality_satisfied(inst: Institution, g: Grounding) -> list[CardinalityCheck]:
    out = []
    for role in sorted(inst.roles):
        n = sum(1 for r, _ in g.roles if r == role)
        card = inst.card(role)
        out.append(CardinalityCheck(role, card.admits(n), n, card))
    return out


def is_admissible(inst: Institution, dom: Domain, g: Grounding) -> AdmissibilityReport:
    failures: list[ObligationFailure] = []
    for norm in inst.obligations:
        _, failing = executable(norm, inst, dom, g)
        failures.extend(ObligationFailure(norm, ag) for ag in failing)
    violations = tuple(c for c in cardinality_satisfied(inst, g) if not c.ok)
    return AdmissibilityReport(tuple(failures), violations)
