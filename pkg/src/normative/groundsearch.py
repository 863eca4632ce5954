"""Find or enumerate admissible groundings for an institution and a domain.

Role assignments are explored depth-first over agents in sorted order, each
agent trying the roles in sorted order and then staying unassigned, pruned by
cardinality bounds. For every complete role assignment the action and
artifact relations are enumerated as *minimal covers*: smallest sets of
(act, behavior) and (art, object) pairs that, together with any fixed pairs,
make every obligation executable. Admissibility is monotone in those
relations, so a cover is minimal exactly when no single pair can be dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import islice, product
from typing import Iterator

from .admissibility import is_admissible
from .errors import InputError
from .model import Domain, Grounding, Institution, validate_grounding_structure

Pair = tuple[str, str]


@dataclass(frozen=True)
class GroundingQuery:
    institution: Institution
    domain: Domain
    partial: Grounding | None = None
    limit: int | None = None
    maximal: bool = False


@dataclass(frozen=True)
class _Cover:
    acts: frozenset[Pair]
    arts: frozenset[Pair]

    @property
    def key(self) -> tuple:
        pairs = sorted([("act",) + p for p in self.acts] + [("art",) + p for p in self.arts])
        return (len(pairs), pairs)


def _role_maps(inst: Institution, agents: list[str], fixed: dict[str, str]
               ) -> Iterator[dict[str, str]]:
    roles = sorted(inst.roles)
    counts = dict.fromkeys(roles, 0)
    assignment: dict[str, str] = {}

    def feasible(remaining: int) -> bool:
        # every role still short of its minimum must be fillable by the agents left
        short = sum(max(0, inst.card(r).min - counts[r]) for r in roles)
        return short <= remaining

    def dfs(i: int) -> Iterator[dict[str, str]]:
        if i == len(agents):
            yield dict(assignment)
            return
        agent = agents[i]
        options: list[str | None] = [fixed[agent]] if agent in fixed else [*roles, None]
        for role in options:
            if role is not None:
                card = inst.card(role)
                if card.max is not None and counts[role] >= card.max:
                    continue
                counts[role] += 1
                assignment[agent] = role
            if feasible(len(agents) - i - 1):
                yield from dfs(i + 1)
            if role is not None:
                counts[role] -= 1
                del assignment[agent]

    yield from dfs(0)


def _requirements(inst: Institution, dom: Domain, role_map: dict[str, str],
                  fixed: Grounding) -> list[list[_Cover]] | None:
    """Per (obligation, agent): the alternative pair sets that would make it executable.

    Requirements already met by the fixed pairs are dropped. Returns None when
    some requirement has no alternative at all.
    """
    agents_of: dict[str, list[str]] = {}
    for agent, role in sorted(role_map.items()):
        agents_of.setdefault(role, []).append(agent)
    out: list[list[_Cover]] = []
    for norm in inst.obligations:
        if norm.is_prohibition:
            continue
        s = norm.statement
        for agent in agents_of.get(s.subject, []):
            options: list[_Cover] = []
            met = False
            for b in sorted(dom.behaviors):
                if s.object in inst.roles:
                    if not any(dom.affords(agent, b, o) for o in agents_of.get(s.object, [])):
                        continue
                    acts = frozenset({(s.predicate, b)}) - fixed.acts
                    arts: frozenset[Pair] = frozenset()
                    if not acts:
                        met = True
                    options.append(_Cover(acts, arts))
                    continue
                for o in sorted(dom.objects):
                    if not dom.affords(agent, b, o):
                        continue
                    acts = frozenset({(s.predicate, b)}) - fixed.acts
                    arts = frozenset({(s.object, o)}) - fixed.arts
                    if not acts and not arts:
                        met = True
                    options.append(_Cover(acts, arts))
            if met:
                continue
            if not options:
                return None
            out.append(options)
    return out


def _covers(requirements: list[list[_Cover]]) -> list[_Cover]:
    def satisfies(acts: frozenset[Pair], arts: frozenset[Pair]) -> bool:
        return all(any(o.acts <= acts and o.arts <= arts for o in opts)
                   for opts in requirements)

    candidates = set()
    for choice in product(*requirements):
        acts = frozenset().union(*(c.acts for c in choice))
        arts = frozenset().union(*(c.arts for c in choice))
        candidates.add(_Cover(acts, arts))
    minimal = [c for c in candidates
               if not any(satisfies(c.acts - {p}, c.arts) for p in c.acts)
               and not any(satisfies(c.acts, c.arts - {p}) for p in c.arts)]
    return sorted(minimal, key=lambda c: c.key)


def _check_partial(inst: Institution, dom: Domain, partial: Grounding) -> None:
    issues = validate_grounding_structure(inst, dom, partial)
    if issues:
        raise InputError("malformed partial grounding:\n" + "\n".join(map(str, issues)))


def _generate(query: GroundingQuery) -> Iterator[Grounding]:
    inst, dom = query.institution, query.domain
    fixed = query.partial or Grounding()
    _check_partial(inst, dom, fixed)
    count = 0
    for role_map in _role_maps(inst, sorted(dom.agents), fixed.role_map):
        reqs = _requirements(inst, dom, role_map, fixed)
        if reqs is None:
            continue
        covers = _covers(reqs)
        if query.maximal and covers:
            covers = [_Cover(frozenset().union(*(c.acts for c in covers)),
                             frozenset().union(*(c.arts for c in covers)))]
        for cover in covers:
            count += 1
            g = Grounding(frozenset((r, a) for a, r in role_map.items()),
                          cover.acts | fixed.acts, cover.arts | fixed.arts,
                          f"G{count}")
            assert is_admissible(inst, dom, g).admissible, g
            yield g


def enumerate_admissible(query: GroundingQuery) -> Iterator[Grounding]:
    """Lazily yield admissible groundings extending ``query.partial``.

    Order: role assignments in depth-first order (agents sorted, roles sorted,
    unassigned last), then covers by size and sorted pairs.
    """
    if query.limit is not None and query.limit < 0:
        raise InputError("limit must be non-negative")
    gen = _generate(query)
    return gen if query.limit is None else islice(gen, query.limit)


def find_grounding(query: GroundingQuery) -> Grounding | None:
    return next(iter(enumerate_admissible(query)), None)
