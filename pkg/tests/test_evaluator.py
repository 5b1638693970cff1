import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hornchase.evaluator import find_homomorphism, hom_equivalent, match, satisfies
from hornchase.instance import Instance
from hornchase.logic import Atom, Const, Eq, Null, Var, sym, value_key
from hornchase.tptp import parse_facts, parse_formula
from support import naive_satisfies, random_instance, random_sentence

x, y, z = Var("x"), Var("y"), Var("z")


@pytest.fixture
def ancestors():
    return parse_facts("ancestor(alice, bob).\nancestor(bob, charlie).\nancestor(charlie, david).")


def test_satisfies_existential(ancestors):
    assert satisfies(ancestors, parse_formula("?[X]: ancestor(X, bob)"))
    assert not satisfies(ancestors, parse_formula("?[X]: ancestor(X, alice)"))


def test_satisfies_transitivity_fails_before_the_chase(ancestors):
    trans = parse_formula("![X,Y,Z]: ((ancestor(X,Y) & ancestor(Y,Z)) => ancestor(X,Z))")
    assert not satisfies(ancestors, trans)


def test_quantifiers_range_over_the_active_domain_only(ancestors):
    # every value occurring in the instance is alice, bob, charlie or david
    f = parse_formula("![X]: (X = alice | X = bob | X = charlie | X = david)")
    assert satisfies(ancestors, f)


def test_empty_instance():
    assert satisfies(Instance(), parse_formula("![X]: p(X)"))
    assert not satisfies(Instance(), parse_formula("?[X]: $true"))


def test_unknown_relation_is_empty(ancestors, caplog):
    assert not satisfies(ancestors, parse_formula("?[X]: missing(X)"))
    assert "does not occur" in caplog.text


def test_free_variables_are_rejected(ancestors):
    with pytest.raises(ValueError, match="not a sentence"):
        satisfies(ancestors, Atom("ancestor", (x, y)))


def test_match_enumerates_each_binding_once(ancestors):
    found = list(match(ancestors, (Atom("ancestor", (x, y)), Atom("ancestor", (y, z)))))
    assert [(b[x].value, b[z].value) for b in found] == [("alice", "charlie"), ("bob", "david")]


def test_match_with_equality_filter_binds_a_side():
    inst = parse_facts("p(1).\np(2).\nq(2).")
    found = list(match(inst, (Atom("p", (x,)), Eq(y, x), Atom("q", (y,)))))
    assert found == [{x: Const(2), y: Const(2)}]


def test_match_semi_naive_only_reports_new_combinations():
    inst = Instance()
    inst.add("e", (sym("a"), sym("b")))
    mark = inst.clock
    inst.add("e", (sym("b"), sym("c")))
    inst.add("e", (sym("c"), sym("d")))
    premise = (Atom("e", (x, y)), Atom("e", (y, z)))
    full = {tuple(sorted((k.name, v) for k, v in b.items())) for b in match(inst, premise)}
    new = [tuple(sorted((k.name, v) for k, v in b.items())) for b in match(inst, premise, since=mark)]
    assert len(new) == len(set(new)) == len(full) == 2


def test_builtins_in_premises():
    inst = parse_facts("v(1).\nv(5).\nv(9).")
    found = list(match(inst, (Atom("v", (x,)), Atom("$greater", (x, Const(4))))))
    assert sorted(b[x].value for b in found) == [5, 9]


def test_homomorphism_maps_nulls_and_fixes_constants():
    src = Instance()
    src.add("r", (sym("a"), Null(0)))
    dst = Instance()
    dst.add("r", (sym("a"), sym("b")))
    assert find_homomorphism(src, dst) == {Null(0): sym("b")}
    assert find_homomorphism(dst, src) is None


def test_hom_equivalence_ignores_redundant_null_facts():
    i1 = parse_facts("r(a, b).")
    i2 = parse_facts("r(a, b).\nr(a, _:n0).")
    assert hom_equivalent(i1, i2)
    assert not hom_equivalent(i1, parse_facts("r(a, c)."))


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_agrees_with_naive_evaluator(rnd):
    rng = random.Random(rnd.random())
    inst, f = random_instance(rng), random_sentence(rng)
    assert satisfies(inst, f) == naive_satisfies(inst, f)


def test_naive_oracle_sees_both_answers():
    rng = random.Random(7)
    answers = {naive_satisfies(random_instance(rng), random_sentence(rng)) for _ in range(200)}
    assert answers == {True, False}


def test_empty_premise_gives_one_empty_binding(ancestors):
    assert list(match(ancestors, ())) == [{}]


def test_premise_over_empty_relation_gives_nothing(ancestors):
    assert list(match(ancestors, (Atom("nothing", (x,)),))) == []


def test_identical_instances_map_by_identity(ancestors):
    assert find_homomorphism(ancestors, ancestors.copy()) == {}
    inst = parse_facts("p(_:n0).\nq(_:n0, _:n1).")
    h = find_homomorphism(inst, inst.copy())
    assert h == {Null(0): Null(0), Null(1): Null(1)}


def test_null_to_constant():
    assert find_homomorphism(parse_facts("p(_:n0)."), parse_facts("p(a).")) == {Null(0): sym("a")}
    assert not hom_equivalent(parse_facts("p(a)."), parse_facts("p(b)."))


def test_match_agrees_with_satisfies_on_ground_instances():
    rng = random.Random(3)
    premise = (Atom("r", (x, y)), Atom("p", (y,)), Atom("r", (y, z)))
    for _ in range(50):
        inst = random_instance(rng)
        dom = sorted(inst.active_domain(), key=repr)
        found = {(b[x], b[y], b[z]) for b in match(inst, premise)}
        expected = {(u, v, w) for u in dom for v in dom for w in dom
                    if inst.contains("r", (u, v)) and inst.contains("p", (v,)) and inst.contains("r", (v, w))}
        assert found == expected


def _random_null_instance(rng):
    inst = Instance()
    inst.declare("r", 2)
    pool = [sym("a"), sym("b"), Null(0), Null(1), Null(2)]
    for _ in range(rng.randint(1, 4)):
        inst.add("r", (rng.choice(pool), rng.choice(pool)))
    return inst


def test_hom_equivalence_is_an_equivalence_on_samples():
    rng = random.Random(11)
    for _ in range(200):
        i, j, k = (_random_null_instance(rng) for _ in range(3))
        assert hom_equivalent(i, i)
        assert hom_equivalent(i, j) == hom_equivalent(j, i)
        if hom_equivalent(i, j) and hom_equivalent(j, k):
            assert hom_equivalent(i, k)


def _brute_bindings(inst, premise, variables, fixed=None):
    fixed = fixed or {}
    free = [v for v in variables if v not in fixed]
    found = []
    for values in itertools.product(sorted(inst.active_domain(), key=value_key), repeat=len(free)):
        env = {**fixed, **dict(zip(free, values))}
        if all(inst.contains(a.rel, tuple(env.get(t, t) for t in a.args)) for a in premise):
            found.append(env)
    return found


def _key(binding):
    return frozenset(binding.items())


def test_flat_joins_agree_with_brute_force_enumeration():
    rng = random.Random(77)
    xs = [Var(n) for n in "xyzw"]
    for _ in range(300):
        facts = [(rng.choice("pq"), tuple(sym(rng.choice("abc")) for _ in range(2)))
                 for _ in range(rng.randint(1, 8))]
        inst = Instance.from_facts(facts[: len(facts) // 2])
        clock = inst.clock
        for rel, args in facts[len(facts) // 2:]:
            inst.add(rel, args)
        premise = [Atom(rng.choice("pq"), tuple(rng.choice(xs + [sym("a")]) for _ in range(2)))
                   for _ in range(rng.randint(1, 3))]
        variables = sorted({t for a in premise for t in a.args if isinstance(t, Var)}, key=repr)
        got = [_key(b) for b in match(inst, premise)]
        assert len(got) == len(set(got))
        assert set(got) == {_key(b) for b in _brute_bindings(inst, premise, variables)}
        if variables:
            seed = {variables[0]: sym("a")}
            assert {_key(b) for b in match(inst, premise, binding=seed)} == \
                {_key(b) for b in _brute_bindings(inst, premise, variables, seed)}
        old = Instance.from_facts(facts[: len(facts) // 2])
        new_only = {_key(b) for b in _brute_bindings(inst, premise, variables)} - \
            {_key(b) for b in _brute_bindings(old, premise, variables)}
        fresh = [_key(b) for b in match(inst, premise, since=clock)]
        assert len(fresh) == len(set(fresh)) and set(fresh) == new_only
