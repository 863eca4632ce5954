"""Planning via verification: search the space of timelines for an adherent trajectory.

The search walks time points in order. At each point every unit (an agent,
or an (agent, behavior) pair when the domain allows concurrent behaviors)
either continues its current activation, starts a new one, or idles. Other
variables read by the norms (positions, for instance) take a new value only
when an activation that reads them starts.

Iterative deepening on the number of activations gives plans with as few
activations as possible; within one depth the option order (continue, new
activations by behavior then object with ``none`` last, idle) breaks ties, so
activations start as early as possible.

Pruning uses the segment bound, the safety-style constraints evaluated on the
prefix built so far, and a lower bound on the activations still owed by the
liveness-style constraints. Every candidate is re-checked by the verifier.

Plan space. Besides the segment bound, plans obey these rules:

* an agent activates a behavior only if it has some affordance for it, and
  uses an afforded target or ``none``, constant over the activation;
* ``usedObject`` is ``none`` while the behavior is inactive;
* without ``concurrent-behaviors allowed`` an agent runs one behavior at a time;
* a non-behavior variable changes only when an activation that reads it
  starts; before its first change it already holds its first chosen value.

Variables no norm reads stay at their defaults. ``plan`` returns None only
when no trajectory in this space is adherent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import InputError
from .groundsearch import GroundingQuery, enumerate_admissible
from .model import (
    ACTIVE,
    FALSE,
    NONE,
    TRUE,
    USED_OBJECT,
    Domain,
    Grounding,
    Institution,
    StateVarName,
    Trajectory,
    active,
    used_object,
)
from .semantics import QualifierRegistry, Timelines
from .verifier import Network, VerificationReport, build_network, check, trajectory_from_timelines


@dataclass(frozen=True)
class PlanRequest:
    institution: Institution
    domain: Domain
    grounding: Grounding | None = None
    horizon: tuple[int, int] = (1, 4)
    max_segments: int = 4
    registry: QualifierRegistry | None = None


@dataclass(frozen=True)
class Plan:
    grounding: Grounding
    trajectory: Trajectory
    report: VerificationReport
    activations: int


Action = tuple[str, str]  # (behavior, used object)


@dataclass(frozen=True)
class _Unit:
    agent: str
    behaviors: tuple[str, ...]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        self.parent[self.find(i)] = self.find(j)


class _Search:
    def __init__(self, network: Network, start: int, end: int, bound: int):
        self.network = network
        self.dom = dom = network.domain
        self.start, self.end, self.bound = start, end, bound
        self.safety = [c for c in network.constraints if c.prefix_closed]
        self.liveness = [c for c in network.constraints if c.demand is not None]
        scope = network.scope

        pairs = sorted((v.args[1], v.args[0]) for v in scope if v.functor == ACTIVE)
        pairs = [(a, b) for a, b in pairs
                 if a in dom.agents and b in dom.behaviors and dom.afforded_targets(a, b)]
        self.controllable: dict[str, list[str]] = {}
        for a, b in pairs:
            self.controllable.setdefault(a, []).append(b)
        self.used_options: dict[tuple[str, str], list[str]] = {}
        for a, b in pairs:
            in_scope = used_object(b, a) in scope
            self.used_options[(a, b)] = ([*dom.afforded_targets(a, b), NONE] if in_scope
                                         else [NONE])
        if dom.concurrent_behaviors:
            self.units = [_Unit(a, (b,)) for a, b in pairs]
        else:
            self.units = [_Unit(a, tuple(bs)) for a, bs in sorted(self.controllable.items())]

        # behavior variables: every active/usedObject variable in scope
        self.behavior_vars = sorted(v for v in scope if v.functor in (ACTIVE, USED_OBJECT))
        # other variables change only when an activation that reads them starts
        self.free_vars = sorted(v for v in scope if v.functor not in (ACTIVE, USED_OBJECT))
        triggers: dict[StateVarName, set[StateVarName]] = {v: set() for v in self.free_vars}
        controllable_active = {active(b, a) for a, b in pairs}
        for c in network.constraints:
            acts = c.scope & controllable_active
            for v in c.scope:
                if v in triggers:
                    triggers[v] |= acts
        self.triggers = {v: sorted(t) for v, t in triggers.items()}
        self.free_values = {v: sorted(dom.values_of(v)) for v in self.free_vars}

        self.horizon_len = end - start + 1
        self.max_activations = self._max_activations()

    def _max_activations(self) -> int:
        per_pair = min((self.bound + 1) // 2, (self.horizon_len + 1) // 2)
        if self.dom.concurrent_behaviors:
            return per_pair * len(self.units)
        return sum(min(self.horizon_len, per_pair * len(u.behaviors)) for u in self.units)

    # state ------------------------------------------------------------------

    def _reset(self) -> None:
        self.seq: dict[StateVarName, list[str]] = {v: [] for v in self.behavior_vars}
        self.free_seq: dict[StateVarName, list[str | None]] = {v: [] for v in self.free_vars}
        self.segs: dict[StateVarName, int] = dict.fromkeys(self.behavior_vars + self.free_vars, 0)
        self.current: dict[_Unit, Action | None] = dict.fromkeys(self.units)
        self.used = 0
        self.budget_hit = False

    def _push(self, var: StateVarName, value: str) -> bool:
        seq = self.seq[var]
        if not seq or seq[-1] != value:
            self.segs[var] += 1
        seq.append(value)
        return self.segs[var] <= self.bound

    def _pop(self, var: StateVarName) -> None:
        seq = self.seq[var]
        value = seq.pop()
        if not seq or seq[-1] != value:
            self.segs[var] -= 1

    def _last_free(self, var: StateVarName) -> str | None:
        seq = self.free_seq[var]
        return seq[-1] if seq else None

    def _push_free(self, var: StateVarName, value: str | None) -> bool:
        prev = self._last_free(var)
        if value is not None and value != prev:
            self.segs[var] += 1
        self.free_seq[var].append(value)
        return self.segs[var] <= self.bound

    def _pop_free(self, var: StateVarName) -> None:
        value = self.free_seq[var].pop()
        if value is not None and value != self._last_free(var):
            self.segs[var] -= 1

    def _timelines(self, t: int, backfill: bool) -> Timelines:
        """Timelines over [start, t]; unchosen free values are backfilled or default."""
        values: dict[StateVarName, list[str]] = dict(self.seq)
        for var, seq in self.free_seq.items():
            first = next((x for x in seq if x is not None), None)
            fill = first if backfill and first is not None else self.dom.default_of(var)
            values[var] = [fill if x is None else x for x in seq]
        return Timelines.from_values(self.start, t, values)

    # one time step ----------------------------------------------------------

    def _unit_options(self, unit: _Unit) -> Iterator[tuple[Action | None, bool]]:
        cur = self.current[unit]
        if cur is not None:
            yield cur, False
        for b in unit.behaviors:
            if cur is not None and cur[0] == b:
                continue
            for o in self.used_options[(unit.agent, b)]:
                yield (b, o), True
        yield None, False

    def _apply(self, unit: _Unit, action: Action | None) -> int:
        """Record the unit's values at the current time; returns how many were pushed."""
        pushed = 0
        ok = True
        for b in unit.behaviors:
            on = action is not None and action[0] == b
            for var, value in ((active(b, unit.agent), TRUE if on else FALSE),
                               (used_object(b, unit.agent), action[1] if on else NONE)):
                if var in self.seq:
                    ok = self._push(var, value) and ok
                    pushed += 1
        return pushed if ok else -pushed - 1

    def _undo(self, unit: _Unit, pushed: int) -> None:
        for b in reversed(unit.behaviors):
            for var in (used_object(b, unit.agent), active(b, unit.agent)):
                if var in self.seq and pushed > 0:
                    self._pop(var)
                    pushed -= 1

    def _started(self, var: StateVarName) -> bool:
        for trig in self.triggers[var]:
            seq = self.seq[trig]
            if seq[-1] == TRUE and (len(seq) == 1 or seq[-2] == FALSE):
                return True
        return False

    def _free_options(self, var: StateVarName) -> list[str | None]:
        cur = self._last_free(var)
        if not self._started(var):
            return [cur]
        if cur is None:
            return list(self.free_values[var])
        return [cur] + [v for v in self.free_values[var] if v != cur]

    # bounds -----------------------------------------------------------------

    def _owed(self, tl: Timelines, t: int) -> int | None:
        """Lower bound on activations still needed, or None if the rest cannot fit."""
        by_agent: dict[str, list[tuple[frozenset[str], int]]] = {}
        for c in self.liveness:
            for d in c.demand(tl):
                if d.count > 0:
                    by_agent.setdefault(d.agent, []).append((d.behaviors, d.count))
        remaining = self.end - t
        total = 0
        for agent, demands in by_agent.items():
            able = set(self.controllable.get(agent, ()))
            if any(not (bs & able) for bs, _ in demands):
                return None
            uf = _UnionFind(len(demands))
            for i in range(len(demands)):
                for j in range(i + 1, len(demands)):
                    if demands[i][0] & demands[j][0]:
                        uf.union(i, j)
            comps: dict[int, tuple[set[str], int]] = {}
            for i, (bs, n) in enumerate(demands):
                root = uf.find(i)
                prev_bs, prev_n = comps.get(root, (set(), 0))
                comps[root] = (prev_bs | (bs & able), max(prev_n, n))
            owed = sum(n for _, n in comps.values())
            steps = owed if not self.dom.concurrent_behaviors else 0
            for bs, n in comps.values():
                if len(bs) == 1:
                    (b,) = bs
                    seq = self.seq[active(b, agent)]
                    busy = 1 if seq and seq[-1] == TRUE else 0
                    steps = max(steps, 2 * n - 1 + busy)
            if steps > remaining:
                return None
            total += owed
        return total

    # search -----------------------------------------------------------------

    def run(self, budget: int) -> Timelines | None:
        self._reset()
        self.budget = budget
        return self._step(self.start, 0)

    def _step(self, t: int, i: int) -> Timelines | None:
        if i < len(self.units):
            unit = self.units[i]
            saved = self.current[unit]
            for action, new in self._unit_options(unit):
                if new and self.used + 1 > self.budget:
                    self.budget_hit = True
                    continue
                pushed = self._apply(unit, action)
                if pushed >= 0:
                    self.current[unit] = action
                    self.used += new
                    found = self._step(t, i + 1)
                    self.used -= new
                    self.current[unit] = saved
                    if found is not None:
                        return found
                    self._undo(unit, pushed)
                else:
                    self._undo(unit, -pushed - 1)
            return None
        return self._free_step(t, 0)

    def _free_step(self, t: int, j: int) -> Timelines | None:
        if j < len(self.free_vars):
            var = self.free_vars[j]
            for value in self._free_options(var):
                ok = self._push_free(var, value)
                if ok:
                    found = self._free_step(t, j + 1)
                    if found is not None:
                        return found
                self._pop_free(var)
            return None
        return self._close(t)

    def _close(self, t: int) -> Timelines | None:
        tl = self._timelines(t, backfill=False)
        for c in self.safety:
            if not c.evaluate(tl).satisfied:
                return None
        owed = self._owed(tl, t)
        if owed is None:
            return None
        if self.used + owed > self.budget:
            self.budget_hit = True
            return None
        if t < self.end:
            return self._step(t + 1, 0)
        full = self._timelines(t, backfill=True)
        if check(self.network, full).adherent:
            return full
        return None

    def initial_bound(self) -> int | None:
        self._reset()
        empty = Timelines(self.start, self.start - 1, {v: () for v in self.behavior_vars})
        owed = self._owed(empty, self.start - 1)
        if owed is None or self._precedence_cycle(empty):
            return None
        return owed

    def _precedence_cycle(self, tl: Timelines) -> bool:
        """Do the ordering constraints force some mandatory activity to precede itself?"""
        mandatory = set()
        for c in self.liveness:
            for d in c.demand(tl):
                able = d.behaviors & set(self.controllable.get(d.agent, ()))
                if d.count > 0 and len(able) == 1:
                    mandatory.add(active(next(iter(able)), d.agent))
        edges: dict[StateVarName, set[StateVarName]] = {v: set() for v in mandatory}
        for c in self.network.constraints:
            if c.precedence is None:
                continue
            earlier, later = c.precedence
            for v in earlier & mandatory:
                edges[v] |= later & mandatory
        state: dict[StateVarName, int] = {}

        def cyclic(v: StateVarName) -> bool:
            state[v] = 1
            for w in sorted(edges[v]):
                if state.get(w) == 1 or (w not in state and cyclic(w)):
                    return True
            state[v] = 2
            return False

        return any(v not in state and cyclic(v) for v in sorted(mandatory))


def count_activations(tl: Timelines) -> int:
    return sum(len(tl.true_segments(v)) for v in tl.variables if v.functor == ACTIVE)


def _validate(req: PlanRequest) -> None:
    start, end = req.horizon
    if start > end:
        raise InputError(f"empty horizon [{start},{end}]")
    if start < 0:
        raise InputError("horizon must start at a non-negative time point")
    if req.max_segments < 1:
        raise InputError("the segment bound must be at least 1")


def _plan(req: PlanRequest, grounding: Grounding) -> Plan | None:
    network = build_network(req.institution, req.domain, grounding, req.registry)
    search = _Search(network, *req.horizon, req.max_segments)
    lower = search.initial_bound()
    if lower is None:
        return None
    for budget in range(lower, search.max_activations + 1):
        tl = search.run(budget)
        if tl is not None:
            report = check(network, tl)
            traj = trajectory_from_timelines(tl, req.domain)
            return Plan(grounding, traj, report, count_activations(tl))
        if not search.budget_hit:
            return None
    return None


def plan(req: PlanRequest) -> Plan | None:
    """Find an adherent trajectory; None means none exists in the plan space.

    Without a grounding this behaves like :func:`plan_with_grounding`. A
    supplied grounding must be admissible (InadmissibleGrounding otherwise).
    """
    _validate(req)
    if req.grounding is None:
        return plan_with_grounding(req)
    return _plan(req, req.grounding)


def plan_with_grounding(req: PlanRequest, partial: Grounding | None = None,
                        maximal: bool = False) -> Plan | None:
    """Try every admissible grounding in enumeration order; first plan wins."""
    _validate(req)
    query = GroundingQuery(req.institution, req.domain, partial, maximal=maximal)
    for g in enumerate_admissible(query):
        found = _plan(req, g)
        if found is not None:
            return found
    return None
