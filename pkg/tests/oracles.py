"""Brute-force reference implementations used as test oracles.

Nothing here shares code with the package beyond the value types: norms are
evaluated by expanding their quantified formulas over raw time points, and
admissibility is decided by direct set comprehension.
"""
from __future__ import annotations

from itertools import chain, combinations, product
from typing import Callable, Iterable, Iterator

from normative.model import (
    Domain,
    Grounding,
    Institution,
    Norm,
    Segment,
    StateVarName,
    Trajectory,
    active,
    position,
    used_object,
)

T, F, NONE = "true", "false", "none"


# -- sets ---------------------------------------------------------------------

def agents_of(g: Grounding, role: str) -> set[str]:
    return {a for r, a in g.roles if r == role}


def behaviors_of(g: Grounding, act: str) -> set[str]:
    return {b for x, b in g.acts if x == act}


def objects_of(g: Grounding, art: str) -> set[str]:
    return {o for x, o in g.arts if x == art}


def targets_of(inst: Institution, g: Grounding, obj: str) -> set[str]:
    return agents_of(g, obj) if obj in inst.roles else objects_of(g, obj)


# -- admissibility (executability over OBN, cardinality) -----------------------

def oracle_admissible(inst: Institution, dom: Domain, g: Grounding) -> bool:
    for norm in inst.norms:
        if not norm.is_obligation or norm.qualifier == "mustNot":
            continue
        s = norm.statement
        B = behaviors_of(g, s.predicate)
        O = targets_of(inst, g, s.object)
        if not all(any((a, b, o) in dom.affordances for b in B for o in O)
                   for a in agents_of(g, s.subject)):
            return False
    for role in inst.roles:
        c = inst.card(role)
        n = len(agents_of(g, role))
        if n < c.min or (c.max is not None and n > c.max):
            return False
    return True


def powerset(items: Iterable) -> Iterator[frozenset]:
    items = sorted(items)
    return (frozenset(c) for c in chain.from_iterable(
        combinations(items, k) for k in range(len(items) + 1)))


def all_groundings(inst: Institution, dom: Domain) -> Iterator[Grounding]:
    agents = sorted(dom.agents)
    for roles in product([*sorted(inst.roles), None], repeat=len(agents)):
        role_pairs = frozenset((r, a) for a, r in zip(agents, roles) if r is not None)
        for acts in powerset(product(sorted(inst.acts), sorted(dom.behaviors))):
            for arts in powerset(product(sorted(inst.arts), sorted(dom.objects))):
                yield Grounding(role_pairs, acts, arts)


def minimal_admissible(inst: Institution, dom: Domain, fixed: Grounding | None = None
                       ) -> set[tuple]:
    """Brute-force admissible set under the minimal-cover policy.

    A grounding is kept when it is admissible, contains the fixed pairs and
    no single non-fixed act or art pair can be removed keeping it admissible.
    Returned as (roles, acts, arts) keys so names do not matter.
    """
    fixed = fixed or Grounding()
    out = set()
    for g in all_groundings(inst, dom):
        if not fixed.acts <= g.acts or not fixed.arts <= g.arts:
            continue
        if any(dict(g.role_map).get(a) != r for a, r in fixed.role_map.items()):
            continue
        if not oracle_admissible(inst, dom, g):
            continue
        shrinkable = any(oracle_admissible(inst, dom, Grounding(g.roles, g.acts - {p}, g.arts))
                         for p in g.acts - fixed.acts) or \
            any(oracle_admissible(inst, dom, Grounding(g.roles, g.acts, g.arts - {p}))
                for p in g.arts - fixed.arts)
        if not shrinkable:
            out.add((g.roles, g.acts, g.arts))
    return out


# -- norm formulas over raw time points ------------------------------------------

Values = dict[StateVarName, list[str]]


def raw_values(traj: Trajectory, dom: Domain) -> Values:
    times = range(traj.start, traj.end + 1)
    return {v: [traj.value_at(v, t, dom.default_of(v)) for t in times] for v in dom.variables}


def norm_formula(norm: Norm, inst: Institution, g: Grounding) -> Callable[[Values, int], bool]:
    """The norm's formula with its grounded sets fixed; call it on (values, n)."""
    s = norm.statement
    A = sorted(agents_of(g, s.subject))
    B = sorted(behaviors_of(g, s.predicate))
    O = targets_of(inst, g, s.object)
    q = norm.qualifier
    if q == "before":
        s2 = norm.statements[1]
        A2 = sorted(agents_of(g, s2.subject))
        B2 = sorted(behaviors_of(g, s2.predicate))

    def holds(val: Values, n: int) -> bool:
        I = range(n)

        def on(b, a, t):
            return val[active(b, a)][t] == T

        def used(b, a, t):
            return val[used_object(b, a)][t]

        def pos(x, t):
            return val[position(x)][t]

        if q == "must":
            return all(any(on(b, a, t) for b in B for t in I) for a in A)
        if q == "mustAlways":
            return all(all(any(on(b, a, t) for b in B) for t in I) for a in A)
        if q == "mustNot":
            return not any(on(b, a, t) for a in A for b in B for t in I)
        if q == "use":
            return all(not on(b, a, t) or used(b, a, t) in O for a in A for b in B for t in I)
        if q == "at":
            return all(not on(b, a, t) or any(pos(a, t) == pos(o, t) for o in O)
                       for a in A for b in B for t in I)
        if q == "atUsed":
            return all(not on(b, a, t) or (used(b, a, t) != NONE and pos(a, t) == used(b, a, t))
                       for a in A for b in B for t in I)
        if q == "mustEach":
            return all(all(any(on(b, a, t) and used(b, a, t) == o for b in B for t in I)
                           for o in O)
                       for a in A)
        if q == "mustToward":
            return all(any(on(b, a, t) and used(b, a, t) in O for b in B for t in I) for a in A)
        if q == "before":
            return all(t1 < t2
                       for a1 in A for a2 in A2 for b1 in B for b2 in B2
                       for t1 in I for t2 in I if on(b1, a1, t1) and on(b2, a2, t2))
        raise ValueError(f"oracle has no formula for {q}")

    # variables the formula reads, listed independently of any compiled scope
    reads = {active(b, a) for a in A for b in B}
    if q == "before":
        reads |= {active(b, a) for a in A2 for b in B2}
    if q in ("use", "atUsed", "mustEach", "mustToward"):
        reads |= {used_object(b, a) for a in A for b in B}
    if q in ("at", "atUsed"):
        reads |= {position(a) for a in A}
    if q == "at":
        reads |= {position(o) for o in O}
    holds.reads = tuple(sorted(reads))
    return holds


def norm_holds(norm: Norm, inst: Institution, g: Grounding, val: Values, n: int) -> bool:
    """Evaluate one norm by quantifying over agents, behaviors, objects and time points."""
    return norm_formula(norm, inst, g)(val, n)


def adheres(inst: Institution, g: Grounding, val: Values, n: int) -> bool:
    return all(norm_holds(norm, inst, g, val, n) for norm in inst.norms)


# -- trajectory enumeration ----------------------------------------------------------

def runs(seq: list[str]) -> int:
    return sum(1 for i, x in enumerate(seq) if i == 0 or seq[i - 1] != x)


def to_trajectory(start: int, val: Values, defaults: dict[StateVarName, str]) -> Trajectory:
    """Explicit segments for every variable that is not constantly its default."""
    timelines = {}
    for var, seq in val.items():
        if all(x == defaults[var] for x in seq):
            continue
        segs, t0 = [], 0
        for i in range(1, len(seq) + 1):
            if i == len(seq) or seq[i] != seq[t0]:
                segs.append(Segment(start + t0, start + i - 1, seq[t0]))
                t0 = i
        timelines[var] = tuple(segs)
    end = start + len(next(iter(val.values()))) - 1 if val else start
    return Trajectory(start, end, timelines)


def plan_space(dom: Domain, pairs: list[tuple[str, str]], n: int, bound: int,
               used_vars: set[StateVarName]) -> Iterator[Values]:
    """Every assignment of the given (agent, behavior) pairs over n points.

    Mirrors the planner's plan space: activations only for afforded pairs,
    usedObject an afforded target or none and constant per activation, none
    when inactive, one behavior per agent at a time (unless concurrent), at
    most ``bound`` segments per variable. Only usedObject variables in
    ``used_vars`` are ever set.
    """
    per_pair: dict[tuple[str, str], list[tuple[list[str], list[str]]]] = {}
    for a, b in pairs:
        options = []
        targets = [*dom.afforded_targets(a, b), NONE] if used_object(b, a) in used_vars else [NONE]
        for pattern in product((F, T), repeat=n):
            pattern = list(pattern)
            if runs(pattern) > bound:
                continue
            starts = [i for i in range(n) if pattern[i] == T and (i == 0 or pattern[i - 1] == F)]
            for objs in product(targets, repeat=len(starts)):
                used = [NONE] * n
                k = -1
                for i in range(n):
                    if pattern[i] == T:
                        if i in starts:
                            k += 1
                        used[i] = objs[k]
                if runs(used) <= bound:
                    options.append((pattern, used))
        per_pair[(a, b)] = options
    keys = list(per_pair)
    for choice in product(*(per_pair[k] for k in keys)):
        if not dom.concurrent_behaviors:
            busy = {}
            clash = False
            for (a, b), (pattern, _) in zip(keys, choice):
                for i, x in enumerate(pattern):
                    if x == T:
                        if (a, i) in busy:
                            clash = True
                            break
                        busy[(a, i)] = b
                if clash:
                    break
            if clash:
                continue
        val: Values = {}
        for (a, b), (pattern, used) in zip(keys, choice):
            val[active(b, a)] = pattern
            val[used_object(b, a)] = used
        yield val


def exhaustive_assignments(variables: dict[StateVarName, tuple[str, ...]], n: int
                           ) -> Iterator[Values]:
    """Every piecewise-constant assignment of the variables over n time points."""
    names = sorted(variables)
    for combo in product(*(product(variables[v], repeat=n) for v in names)):
        yield {v: list(seq) for v, seq in zip(names, combo)}
