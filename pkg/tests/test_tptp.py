from importlib import resources

import pytest
from hypothesis import given, strategies as st

from hornchase.instance import Instance
from hornchase.logic import Atom, Const, Eq, Exists, Forall, Implies, Not, Null, Var, string
from hornchase.tptp import (
    FactSyntaxError, TptpSyntaxError, TptpUnit, format_unit, parse_facts, parse_formula,
    parse_tptp, print_facts, print_tptp, signature_of,
)

DATA = resources.files("hornchase").joinpath("data")


def test_john_unit():
    (u,) = parse_tptp("fof(john, axiom, (human(john))).")
    assert (u.name, u.role, u.language) == ("john", "axiom", "fof")
    assert u.payload == Atom("human", (Const("john"),))


def test_tautology_unit():
    (u,) = parse_tptp("fof(t, axiom, (![X]: (p(X) => p(X)))).")
    assert isinstance(u.payload, Forall)
    assert isinstance(u.payload.body, Implies)


def test_sort_declaration():
    (u,) = parse_tptp("tff(x_type, type, x: $tType).")
    assert u.role == "type" and u.payload.declares_sort and u.payload.symbol == "x"


def test_printing_the_transitivity_dependency():
    f = parse_formula("![X,Y,Z]: ((ancestor(X,Y) & ancestor(Y,Z)) => ancestor(X,Z))")
    text = format_unit(TptpUnit("trans", "axiom", f))
    assert text == "fof(trans, axiom, (![X,Y,Z]: ((ancestor(X,Y) & ancestor(Y,Z)) => ancestor(X,Z))))."


def test_disequality_prints_infix():
    f = parse_formula("![X,Y]: ((p(X) & p(Y) & X != Y) => q(X))")
    assert "X != Y" in format_unit(TptpUnit("d", "axiom", f))


@pytest.mark.parametrize("text, shape", [
    ("~p & q", "and"),  # ~ binds tighter than &
    ("p & q & r", "and"),
    ("(p | q) & r", "and"),
    ("![X]: p(X) & q", "and"),  # quantifier scope ends at the binary connective
    ("(p & q) => r", "implies"),
])
def test_standard_precedence(text, shape):
    f = parse_formula(text)
    assert type(f).__name__.lower() == shape


@pytest.mark.parametrize("text", ["p | q & r", "p => q => r", "p & q => r"])
def test_mixed_or_chained_connectives_need_parentheses(text):
    with pytest.raises(TptpSyntaxError, match="parentheses"):
        parse_formula(text)


def test_unbalanced_listing_gives_position():
    with pytest.raises(TptpSyntaxError) as err:
        parse_tptp((DATA / "tff_lattice_bad.p").read_text())
    assert err.value.line == 9
    assert "expected ')'" in str(err.value)


def test_duplicate_unit_names_are_rejected():
    with pytest.raises(TptpSyntaxError, match="duplicate"):
        parse_tptp("fof(a, axiom, p). fof(a, axiom, q).")


def test_sort_used_before_declaration():
    with pytest.raises(TptpSyntaxError):
        parse_tptp("tff(a, axiom, ![X: t0]: p(X)).")


def test_unknown_role_is_rejected():
    with pytest.raises(TptpSyntaxError):
        parse_tptp("fof(a, lemma, p).")


def test_type_role_only_in_tff():
    with pytest.raises(TptpSyntaxError):
        parse_tptp("fof(a, type, x: $tType).")


def test_anonymous_units_need_lax_mode():
    with pytest.raises(TptpSyntaxError):
        parse_tptp("fof(axiom, p).")
    units = parse_tptp("fof(axiom, p). fof(axiom, q).", lax=True)
    assert [u.name for u in units] == ["ax_0", "ax_1"]


def test_identical_redeclaration_is_accepted_but_conflict_is_not():
    units = parse_tptp((DATA / "tff_lattice.p").read_text())
    sig = signature_of(units)
    assert sig.relations["equiv"] == 2
    with pytest.raises(TptpSyntaxError, match="conflicting"):
        signature_of(parse_tptp("tff(x_type, type, x: $tType). tff(a, type, e: x > $o). "
                                "tff(b, type, e: (x*x) > $o)."))


def test_every_fof_example_parses():
    units = parse_tptp((DATA / "fof_examples.p").read_text())
    assert len(units) == 7
    assert {u.name for u in units} >= {"john", "john_failed", "someone_not_john"}


def test_big_integers_are_exact():
    (u,) = parse_tptp("fof(big, axiom, p(123456789012345678901234567890)).")
    assert u.payload.args[0] == Const(123456789012345678901234567890)


def test_comments_are_ignored():
    assert len(parse_tptp("% comment\nfof(a, axiom, p). % trailing\n")) == 1


@pytest.mark.parametrize("name", sorted(p.name for p in DATA.iterdir() if p.name.endswith(".p")
                                        and p.name != "tff_lattice_bad.p"))
def test_tptp_corpus_round_trip(name):
    units = parse_tptp((DATA / name).read_text())
    printed = print_tptp(units)
    assert parse_tptp(printed) == units
    assert print_tptp(parse_tptp(printed)) == printed


# -- fact files ---------------------------------------------------------


def test_ancestor_facts():
    inst = parse_facts((DATA / "ancestor.facts").read_text())
    assert len(inst) == 3 and inst.arity("ancestor") == 2


def test_empty_fact_file():
    assert len(parse_facts("")) == 0


def test_string_literal_fact():
    inst = parse_facts("pos('pl1', \"0 0\").")
    assert inst.contains("pos", (Const("pl1"), string("0 0")))


def test_nulls_round_trip():
    inst = parse_facts("r(_:n3, a).\nr(_:n0, _:n3).")
    assert Null(3) in inst.active_domain()
    assert parse_facts(print_facts(inst)) == inst
    assert inst.next_null == 4


@pytest.mark.parametrize("line", ["r(a,).", "r(a) extra", "R(a).", "r(a", "r(\"x)."])
def test_malformed_facts(line):
    with pytest.raises(FactSyntaxError):
        parse_facts(line)


def test_arity_inconsistency_names_the_line():
    with pytest.raises(FactSyntaxError, match="line 2"):
        parse_facts("r(a, b).\nr(a).")


def test_output_is_sorted():
    text = print_facts(parse_facts("b(z).\na(2).\na(1).\nb(\"s\").\nb(y)."))
    assert text.splitlines() == ["a(1).", "a(2).", "b(y).", "b(z).", 'b("s").']


@pytest.mark.parametrize("name", sorted(p.name for p in DATA.iterdir() if p.name.endswith(".facts")))
def test_fact_corpus_round_trip(name):
    inst = parse_facts((DATA / name).read_text())
    assert parse_facts(print_facts(inst)) == inst


_values = st.one_of(
    st.integers(-10**20, 10**20).map(Const),
    st.from_regex(r"[a-z][a-zA-Z0-9_]{0,4}", fullmatch=True).map(Const),
    st.text(st.characters(codec="utf-8", exclude_categories=("Cs", "Cc")), max_size=6).map(string),
    st.text(st.characters(codec="utf-8", exclude_categories=("Cs", "Cc")), min_size=1, max_size=6).map(Const),
    st.integers(0, 5).map(Null),
)


@given(st.lists(st.tuples(st.sampled_from(["r", "s", "$arc"]), st.lists(_values, min_size=2, max_size=2)),
                max_size=8))
def test_fact_round_trip_property(rows):
    inst = Instance()
    for rel, args in rows:
        inst.add(rel, tuple(args))
    assert parse_facts(print_facts(inst)) == inst
