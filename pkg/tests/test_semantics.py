from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from normative.errors import CompileError
from normative.model import (
    Domain,
    Grounding,
    Institution,
    Norm,
    NormKind,
    StateVarDecl,
    active,
    position,
    used_object,
)
from normative.semantics import (
    BUILTINS,
    CompiledConstraint,
    QualifierSemantics,
    Timelines,
    Verdict,
    default_registry,
)
from normative.verifier import build_network, segment_trajectory, trajectory_from_segments

from oracles import norm_formula, norm_holds

POSITIONS = ("p1", "p2")


def toy():
    agents, objects, behaviors = ("r1", "r2"), ("o1", "o2"), ("b1", "b2")
    aff = frozenset((a, b, x) for a in agents for b in behaviors for x in agents + objects)
    decls = tuple(StateVarDecl(position(x), POSITIONS, default="p1")
                  for x in sorted(agents + objects))
    dom = Domain("Toy", frozenset(agents), frozenset(objects), frozenset(behaviors), aff, decls)
    norms = (
        Norm.of("must", ("R1", "A1", "X")),
        Norm.of("mustAlways", ("R1", "A1", "X")),
        Norm.of("mustNot", ("R2", "A1", "X")),
        Norm.of("use", ("R1", "A1", "Y")),
        Norm.of("at", ("R1", "A1", "X")),
        Norm.of("at", ("R2", "A2", "R1")),
        Norm.of("atUsed", ("R1", "A1", "X")),
        Norm.of("mustEach", ("R1", "A1", "X")),
        Norm.of("mustToward", ("R2", "A2", "R1")),
        Norm.of("before", ("R1", "A1", "X"), ("R2", "A2", "X")),
        Norm.of("before", ("R1", "A1", "X"), ("R1", "A1", "X")),
    )
    inst = Institution("Toy", frozenset({"X", "Y"}), frozenset({"R1", "R2"}),
                       frozenset({"A1", "A2"}), norms)
    g = Grounding.of({"r1": "R1", "r2": "R2"}, {("A1", "b1"), ("A2", "b2")},
                     {("X", "o1"), ("X", "o2"), ("Y", "o1")})
    return inst, dom, g


INST, DOM, G = toy()
NETWORK = build_network(INST, DOM, G)


@st.composite
def raw_trajectories(draw):
    n = draw(st.integers(1, 5))
    values = {v: draw(st.lists(st.sampled_from(DOM.values_of(v)), min_size=n, max_size=n))
              for v in sorted(DOM.variables)}
    return n, values


@settings(max_examples=500)
@given(raw_trajectories())
def test_every_qualifier_matches_the_point_formula(case):
    n, values = case
    tl = Timelines.from_values(1, n, values)
    for c in NETWORK.constraints:
        assert c.evaluate(tl).satisfied == norm_holds(c.norm, INST, G, values, n), c.norm


@settings(max_examples=300)
@given(raw_trajectories())
def test_witness_alone_decides_the_verdict(case):
    n, values = case
    tl = Timelines.from_values(1, n, values)
    for c in NETWORK.constraints:
        verdict = c.evaluate(tl)
        segs = set(tl)
        assert set(verdict.witness) <= segs
        if not verdict.satisfied:
            assert verdict.witness and verdict.reason
        # Keep only the witness, fill the rest with defaults, re-evaluate.
        reduced = segment_trajectory(trajectory_from_segments(1, n, verdict.witness), DOM)
        assert c.evaluate(reduced).satisfied == verdict.satisfied, c.norm


@settings(max_examples=200)
@given(raw_trajectories())
def test_verdicts_do_not_depend_on_other_norms(case):
    n, values = case
    tl = Timelines.from_values(1, n, values)
    for c in NETWORK.constraints:
        alone = build_network(
            Institution("One", INST.arts, INST.roles, INST.acts, (c.norm,)), DOM, G)
        assert alone.constraints[0].evaluate(tl) == c.evaluate(tl)


@settings(max_examples=200)
@given(raw_trajectories(), st.integers(1, 5))
def test_safety_violations_persist_in_extensions(case, extra):
    n, values = case
    longer = {v: seq + seq[-1:] * extra for v, seq in values.items()}
    short, long_ = Timelines.from_values(1, n, values), Timelines.from_values(1, n + extra, longer)
    for c in NETWORK.constraints:
        if c.prefix_closed and not c.evaluate(short).satisfied:
            assert not c.evaluate(long_).satisfied, c.norm


def test_scopes():
    by_norm = {str(c.norm): c for c in NETWORK.constraints}
    assert by_norm["must(R1,A1,X)"].scope == {active("b1", "r1")}
    assert by_norm["use(R1,A1,Y)"].scope == {active("b1", "r1"), used_object("b1", "r1")}
    assert by_norm["at(R2,A2,R1)"].scope == {active("b2", "r2"), position("r2"), position("r1")}
    assert by_norm["must(R1,A1,X)"].demand is not None
    assert by_norm["before((R1,A1,X),(R2,A2,X))"].precedence == \
        ({active("b1", "r1")}, {active("b2", "r2")})


def test_use_with_empty_targets_forbids_activation_only():
    inst = Institution("E", frozenset({"Z"}), frozenset({"R1"}), frozenset({"A1"}),
                       (Norm.of("use", ("R1", "A1", "Z")),))
    net = build_network(inst, DOM, Grounding.of({"r1": "R1"}, {("A1", "b1")}))
    idle = Timelines.from_values(1, 2, {active("b1", "r1"): ["false"] * 2,
                                        used_object("b1", "r1"): ["none"] * 2})
    busy = Timelines.from_values(1, 2, {active("b1", "r1"): ["true"] * 2,
                                        used_object("b1", "r1"): ["o1"] * 2})
    assert net.constraints[0].evaluate(idle).satisfied
    assert not net.constraints[0].evaluate(busy).satisfied


def test_at_needs_position_variables():
    dom = Domain("D", DOM.agents, DOM.objects, DOM.behaviors, DOM.affordances)
    with pytest.raises(CompileError, match="no position state variable declared for r1"):
        build_network(INST, dom, G)


def test_registry_basics():
    reg = default_registry()
    assert reg.names() == sorted(s.name for s in BUILTINS)
    assert reg.signatures()["before"] == (2, NormKind.MODAL)
    with pytest.raises(ValueError):
        reg.register(BUILTINS[0])
    with pytest.raises(CompileError, match="unknown qualifier 'during'"):
        reg.get("during")


def test_unknown_qualifier_fails_compilation():
    inst = Institution("U", INST.arts, INST.roles, INST.acts,
                       (Norm.of("during", ("R1", "A1", "X"), ("R2", "A2", "X")),))
    with pytest.raises(CompileError):
        build_network(inst, DOM, G)


def test_custom_qualifier_can_be_registered():
    def compile_idle(norm, ctx):
        agents = ctx.agents(norm.statement.subject)
        scope = frozenset(active(b, a) for a in agents for b in sorted(DOM.behaviors))

        def evaluate(tl):
            busy = [s for v in sorted(scope) for s in tl.true_segments(v)]
            return Verdict(not busy, tuple(busy[:1]), "busy" if busy else "")

        return CompiledConstraint(norm, scope, evaluate, True)

    reg = default_registry().register(QualifierSemantics("idle", 1, NormKind.MODAL, compile_idle))
    inst = Institution("C", INST.arts, INST.roles, INST.acts, (Norm.of("idle", ("R2", "A2", "X")),))
    net = build_network(inst, DOM, G, reg)
    tl = Timelines.from_values(1, 1, {active("b1", "r2"): ["true"], active("b2", "r2"): ["false"]})
    verdict = net.constraints[0].evaluate(tl)
    assert not verdict.satisfied and verdict.witness[0].var == active("b1", "r2")


def test_at_exhaustively():
    n = 3
    norms = [c for c in NETWORK.constraints if c.norm.qualifier == "at"]
    formulas = [norm_formula(c.norm, INST, G) for c in norms]
    scope = frozenset().union(*(c.scope for c in norms))
    base = {v: [DOM.default_of(v)] * n for v in scope}
    tf, spots = ("true", "false"), POSITIONS
    cases = 0
    for x, y, p, q in product(product(tf, repeat=n), product(tf, repeat=n),
                              product(spots, repeat=n), product(spots, repeat=n)):
        values = {**base, active("b1", "r1"): list(x), active("b2", "r2"): list(y),
                  position("r1"): list(p), position("o1"): list(q), position("r2"): list(q)}
        tl = Timelines.from_values(1, n, values)
        for c, formula in zip(norms, formulas):
            assert c.evaluate(tl).satisfied == formula(values, n), (c.norm, values)
        cases += 1
    assert cases == 4096


class _Recording(dict):
    def __init__(self, *args):
        super().__init__(*args)
        self.seen = set()

    def __getitem__(self, key):
        self.seen.add(key)
        return super().__getitem__(key)


@settings(max_examples=100)
@given(raw_trajectories())
def test_oracle_formulas_read_only_their_declared_variables(case):
    n, values = case
    for norm in INST.norms:
        formula = norm_formula(norm, INST, G)
        rec = _Recording(values)
        formula(rec, n)
        assert rec.seen <= set(formula.reads), norm
