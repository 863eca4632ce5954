from __future__ import annotations

from hypothesis import given, strategies as st

from normative.model import (
    Cardinality,
    Domain,
    Grounding,
    Institution,
    Norm,
    NormKind,
    Segment,
    StateVarDecl,
    StateVarName,
    Trajectory,
    active,
    derived_sets,
    position,
    used_object,
    validate_domain,
    validate_grounding_structure,
    validate_institution,
    validate_trajectory,
)


def messages(issues):
    return [i.message for i in issues]


def test_trading_fixture_is_valid(trading):
    assert validate_institution(trading["inst"]) == []
    assert validate_domain(trading["dom"]) == []
    assert validate_grounding_structure(trading["inst"], trading["dom"], trading["g"]) == []


def test_norm_kinds_follow_qualifier():
    assert Norm.of("must", ("R", "A", "O")).kind is NormKind.OBLIGATION
    assert Norm.of("before", ("R", "A", "O"), ("R", "B", "O")).kind is NormKind.MODAL
    assert Norm.of("mustNot", ("R", "A", "O")).is_prohibition
    assert str(Norm.of("use", ("Seller", "GiveGoods", "Goods"))) == "use(Seller,GiveGoods,Goods)"


def test_institution_rejects_overlap_and_bad_arity():
    inst = Institution("I", frozenset({"X"}), frozenset({"X"}), frozenset({"Go"}),
                       (Norm.of("before", ("X", "Go", "X")),))
    msgs = messages(validate_institution(inst))
    assert "X declared in both arts and roles" in msgs
    assert "before expects arity 2, got 1" in msgs


def test_institution_card_bounds():
    inst = Institution("I", frozenset({"A"}), frozenset({"R"}), frozenset({"Go"}),
                       (), {"R": Cardinality(2, 1), "Ghost": Cardinality(0, None)})
    msgs = messages(validate_institution(inst))
    assert "min > max (2 > 1)" in msgs
    assert "undeclared role Ghost" in msgs


def test_cardinality_admits():
    assert Cardinality(1, 1).admits(1)
    assert not Cardinality(1, 1).admits(0)
    assert Cardinality().admits(5)
    assert str(Cardinality(1, None)) == "(1,*)"


def test_implicit_variables_exist_for_every_pair(trading):
    dom = trading["dom"]
    assert len(dom.variables) == 2 * len(dom.agents) * len(dom.behaviors)
    assert dom.values_of(active("give", "nao")) == ("true", "false")
    assert dom.default_of(used_object("give", "nao")) == "none"
    assert "cash" in dom.values_of(used_object("give", "nao"))
    assert "Sally" in dom.values_of(used_object("give", "nao"))


def test_declared_defaults(game):
    dom = game["dom"]
    assert dom.default_of(position("turtlebot1")) == "posA"
    assert dom.values_of(position("posC")) == ("posC",)


def test_domain_rejects_implicit_redeclaration():
    dom = Domain("D", frozenset({"a"}), frozenset({"o"}), frozenset({"b"}),
                 state_vars=(StateVarDecl(active("b", "a"), ("true", "false")),
                             StateVarDecl(position("a"), ("p",), default="q")))
    msgs = messages(validate_domain(dom))
    assert "active variables are implicit" in msgs
    assert "default q not in value set" in msgs


def test_grounding_function_violation(trading):
    g = Grounding(frozenset({("Buyer", "nao"), ("Seller", "nao")}),
                  frozenset({("Pay", "fly")}), frozenset())
    msgs = messages(validate_grounding_structure(trading["inst"], trading["dom"], g))
    assert "agent nao grounded to 2 roles" in msgs
    assert "undeclared behavior fly" in msgs


def test_derived_sets_trading(trading):
    sets = derived_sets(trading["inst"], trading["dom"], trading["g"])
    assert sets.agents("Buyer") == {"nao"}
    assert sets.behaviors("Pay") == {"give"}
    assert sets.objects("Goods") == {"battery"}
    assert sets.targets("Seller") == {"Sally"}


def test_derived_sets_empty_and_game(trading, game):
    empty = derived_sets(trading["inst"], trading["dom"], Grounding())
    assert all(not empty.agents(r) for r in trading["inst"].roles)
    sets = derived_sets(game["inst"], game["dom"], game["G"])
    assert sets.objects("Letter") == {"posA", "posB", "posC", "posD"}


def test_trajectory_validation(trading):
    dom = trading["dom"]
    traj = Trajectory(1, 4, {
        active("give", "nao"): (Segment(3, 2, "true"),),
        active("take", "nao"): (Segment(1, 2, "true"), Segment(2, 5, "false")),
        used_object("give", "nao"): (Segment(1, 1, "gold"),),
        StateVarName("weather"): (Segment(1, 1, "rain"),),
    })
    msgs = messages(validate_trajectory(traj, dom))
    assert "empty interval" in msgs
    assert "segment outside horizon" in msgs
    assert any(m.startswith("overlaps") for m in msgs)
    assert "value gold not in vals(usedObject(give,nao))" in msgs
    assert "undeclared state variable weather" in msgs


@given(st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,6}", fullmatch=True),
       st.lists(st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,6}", fullmatch=True), max_size=3))
def test_statevar_name_parse_roundtrip(functor, args):
    name = StateVarName(functor, tuple(args))
    assert StateVarName.parse(str(name)) == name


@given(st.dictionaries(st.sampled_from(["a1", "a2", "a3", "a4"]), st.sampled_from(["R", "S"])))
def test_derived_sets_invert_role_map(role_map):
    inst = Institution("I", frozenset({"O"}), frozenset({"R", "S"}), frozenset({"Go"}))
    dom = Domain("D", frozenset({"a1", "a2", "a3", "a4"}), frozenset({"o"}), frozenset({"b"}))
    sets = derived_sets(inst, dom, Grounding.of(role_map))
    for a in dom.agents:
        for r in inst.roles:
            assert (a in sets.agents(r)) == (role_map.get(a) == r)
