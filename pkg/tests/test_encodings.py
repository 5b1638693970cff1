import itertools
import random

import pytest

from hornchase.chase import chase_check
from hornchase.encodings import (
    AllValues, Complement, Concept, DlSyntaxError, Intersection, LabeledGraph, SomeValues,
    Subsumption, Union, comb_map_axiom_pack, decode_graph, dl_to_fol, encode_comb_map,
    encode_graph, graph_axiom_pack, graph_to_binary_relations, parse_dl, triples_to_arc,
    unigraph_axiom,
)
from hornchase.instance import Instance
from hornchase.logic import (
    And, Atom, ClassifyError, Forall, Implies, Not, Null, Or, Var, classify, sym,
)

FAMILY = LabeledGraph(
    nodes=frozenset({"n1", "n2", "n3", "n4"}),
    edges=frozenset({"e1", "e2", "e3", "e4"}),
    labels=frozenset({"Alice", "Bob", "Megan", "Dan", "mom", "dad"}),
    src={"e1": "n1", "e2": "n1", "e3": "n2", "e4": "n2"},
    dst={"e1": "n3", "e2": "n4", "e3": "n3", "e4": "n4"},
    nlabel={"n1": "Alice", "n2": "Bob", "n3": "Megan", "n4": "Dan"},
    elabel={"e1": "mom", "e2": "dad", "e3": "mom", "e4": "dad"},
)


def random_graph(rng, labels=("red", "blue", 1, 2)):
    nodes = [f"v{k}" for k in range(rng.randint(0, 5))]
    edges = [f"e{k}" for k in range(rng.randint(0, 6))] if nodes else []
    return LabeledGraph(
        frozenset(nodes), frozenset(edges), frozenset(labels),
        {e: rng.choice(nodes) for e in edges}, {e: rng.choice(nodes) for e in edges},
        {n: rng.choice(labels) for n in nodes}, {e: rng.choice(labels) for e in edges})


# ---------------------------------------------------------------------------
# graphs


def test_pack_has_twelve_axioms():
    assert len(graph_axiom_pack()) == 12


def test_family_instance_satisfies_the_pack(facts):
    assert chase_check(facts("family.facts"), graph_axiom_pack())


def test_family_encoding_matches_the_tables(facts):
    assert encode_graph(FAMILY).fact_set() == facts("family.facts").fact_set()


def test_parallel_edge_breaks_the_unigraph_axiom(facts):
    assert chase_check(facts("family.facts"), [unigraph_axiom()])
    assert not chase_check(facts("family_parallel.facts"), [unigraph_axiom()])
    # it is still a multigraph
    assert chase_check(facts("family_parallel.facts"), graph_axiom_pack())


def test_unigraph_axiom_agrees_with_a_direct_count():
    rng = random.Random(3)
    for _ in range(100):
        g = random_graph(rng)
        ends = [(g.src[e], g.dst[e]) for e in g.edges]
        expected = len(ends) == len(set(ends))
        assert chase_check(encode_graph(g), [unigraph_axiom()]) == expected


def test_empty_graph_encodes_to_an_empty_instance():
    assert len(encode_graph(LabeledGraph())) == 0


def test_decode_inverts_encode():
    rng = random.Random(11)
    for _ in range(100):
        g = random_graph(rng)
        inst = encode_graph(g)
        assert chase_check(inst, graph_axiom_pack())
        assert decode_graph(inst) == g


def test_decode_rejects_axiom_violations(facts):
    inst = facts("family.facts")
    inst.add("src", (sym("e1"), sym("n2")))
    with pytest.raises(ValueError):
        decode_graph(inst)


def test_graph_must_be_total():
    with pytest.raises(ValueError):
        LabeledGraph(frozenset({"n"}), frozenset({"e"}), frozenset({"x"}),
                     {"e": "n"}, {}, {"n": "x"}, {"e": "x"})


def test_mom_and_dad_become_relations():
    inst = graph_to_binary_relations(FAMILY)
    n = {k: sym(f"n{k}") for k in range(1, 5)}
    assert set(inst.tuples("mom")) == {(n[1], n[3]), (n[2], n[3])}
    assert set(inst.tuples("dad")) == {(n[1], n[4]), (n[2], n[4])}
    assert sorted(inst.relations()) == ["dad", "mom"]


def test_edgeless_graph_has_no_binary_relations():
    g = LabeledGraph(frozenset({"n"}), frozenset(), frozenset({"x"}), {}, {}, {"n": "x"}, {})
    assert len(graph_to_binary_relations(g)) == 0


def test_reserved_labels_are_rejected():
    g = LabeledGraph(frozenset({"n"}), frozenset({"e"}), frozenset({"src"}),
                     {"e": "n"}, {"e": "n"}, {"n": "src"}, {"e": "src"})
    with pytest.raises(ValueError):
        graph_to_binary_relations(g)


# ---------------------------------------------------------------------------
# RDF


def test_triples_become_arc_facts():
    inst = triples_to_arc([("pete", "http://foo.org/father", "john")])
    assert list(inst.tuples("$arc")) == [(sym("pete"), sym("http://foo.org/father"), sym("john"))]


def test_no_triples():
    assert len(triples_to_arc([])) == 0


def test_blank_nodes_become_nulls():
    inst = triples_to_arc([("_:b", "p", "o"), ("s", "p", "_:b"), ("_:c", "p", "o")])
    (b, _, _), (_, _, b2), (c, _, _) = inst.tuples("$arc")
    assert isinstance(b, Null) and b == b2 and c != b


def test_triple_count_ignores_duplicates():
    rng = random.Random(5)
    for _ in range(50):
        triples = [tuple(rng.choice("abc") for _ in range(3)) for _ in range(rng.randint(0, 12))]
        assert len(triples_to_arc(triples)) == len(set(triples))


# ---------------------------------------------------------------------------
# description logic

x, y = Var("x"), Var("y")


def test_donkey_translation():
    concept = Intersection(Concept("Animal"), AllValues("hasParent", Concept("Donkey")))
    assert dl_to_fol(concept) == And((
        Atom("Animal", (x,)),
        Forall((y,), Implies(Atom("hasParent", (x, y)), Atom("Donkey", (y,))))))


def test_atomic_concept():
    assert dl_to_fol(Concept("A")) == Atom("A", (x,))


def test_governor_translation_is_not_horn():
    statement = Subsumption(Intersection(Concept("Actor"), Concept("USGovernor")),
                            Union(Concept("Bodybuilder"), Complement(Concept("Austrian"))))
    formula = dl_to_fol(statement)
    assert formula == Forall((x,), Implies(
        And((Atom("Actor", (x,)), Atom("USGovernor", (x,)))),
        Or((Atom("Bodybuilder", (x,)), Not(Atom("Austrian", (x,)))))))
    with pytest.raises(ClassifyError):
        classify(formula, "governor")


def test_dl_surface_syntax(data):
    lines = [ln for ln in data("dl_examples.dl").splitlines() if ln and not ln.startswith("#")]
    assert parse_dl(lines[0]) == Intersection(Concept("Animal"), AllValues("hasParent", Concept("Donkey")))
    assert parse_dl(lines[1]) == Subsumption(
        Intersection(Concept("Actor"), Concept("USGovernor")),
        Union(Concept("Bodybuilder"), Complement(Concept("Austrian"))))


@pytest.mark.parametrize("text", ["", "and A", "sub A", "and (sub A B) C", "some A", "A )", "(A"])
def test_dl_syntax_errors(text):
    with pytest.raises(DlSyntaxError):
        parse_dl(text)


def _random_concept(rng, depth, allow_bad):
    if depth == 0 or rng.random() < 0.3:
        return Concept(rng.choice("ABC"))
    kinds = ["and", "some"] + (["or", "not", "all"] if allow_bad else [])
    kind = rng.choice(kinds)
    if kind == "and":
        return Intersection(_random_concept(rng, depth - 1, allow_bad), _random_concept(rng, depth - 1, allow_bad))
    if kind == "some":
        return SomeValues(rng.choice("RS"), _random_concept(rng, depth - 1, allow_bad))
    if kind == "or":
        return Union(_random_concept(rng, depth - 1, allow_bad), _random_concept(rng, depth - 1, allow_bad))
    if kind == "not":
        return Complement(_random_concept(rng, depth - 1, allow_bad))
    return AllValues(rng.choice("RS"), _random_concept(rng, depth - 1, allow_bad))


def _has_union_or_negation(c):
    if isinstance(c, (Union, Complement)):
        return True
    return any(_has_union_or_negation(v) for v in vars(c).values() if not isinstance(v, str))


def test_positive_existential_subsumptions_classify():
    rng = random.Random(2)
    for k in range(200):
        statement = Subsumption(_random_concept(rng, 3, False), _random_concept(rng, 3, False))
        classify(dl_to_fol(statement), f"s{k}")


def test_union_or_negation_is_rejected():
    rng = random.Random(4)
    checked = 0
    for k in range(400):
        statement = Subsumption(_random_concept(rng, 3, True), _random_concept(rng, 3, True))
        if _has_union_or_negation(statement.sub) or _has_union_or_negation(statement.sup):
            checked += 1
            with pytest.raises(ClassifyError):
                classify(dl_to_fol(statement), f"s{k}")
    assert checked > 50


# ---------------------------------------------------------------------------
# combinatorial maps


def _is_function(rel, darts):
    return all(sum(1 for a, _ in rel if a == d) == 1 for d in darts) and \
        all(a in darts and b in darts for a, b in rel)


def _map_oracle(darts, betas):
    """The axioms read directly on Python sets."""
    fns = {}
    for i in (1, 2, 3):
        rel = betas[i]
        if not _is_function(rel, darts) or len({b for _, b in rel}) != len(darts):
            return False
        fns[i] = dict(rel)
    for i in (2, 3):
        if any(fns[i][fns[i][d]] != d for d in darts):
            return False
    g = {d: fns[1][fns[3][d]] for d in darts}
    return all(g[g[d]] == d for d in darts)


def _relations(darts):
    pairs = list(itertools.product(darts, repeat=2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        yield frozenset(p for p, b in zip(pairs, bits) if b)


def _permutations(darts):
    for image in itertools.permutations(darts):
        yield frozenset(zip(darts, image))


def test_pack_contents():
    names = [d.name for d in comb_map_axiom_pack()]
    assert len(names) == 3 * 5 + 2 + 1
    assert "beta1_beta3_involution" in names and "beta1_involution" not in names


def test_empty_map_satisfies_the_pack():
    assert chase_check(encode_comb_map([], {1: {}, 2: {}, 3: {}}), comb_map_axiom_pack())


def test_smallest_valid_maps_found_by_exhaustive_search():
    pack = comb_map_axiom_pack()
    darts = ["d1", "d2"]
    found = 0
    for b1, b2, b3 in itertools.product(list(_relations(darts)), repeat=3):
        betas = {1: b1, 2: b2, 3: b3}
        inst = encode_comb_map(darts, {i: dict(r) if _is_function(r, darts) else {} for i, r in betas.items()})
        # relations that are not functions are encoded fact by fact
        inst = Instance()
        inst.declare("dart", 1)
        for d in darts:
            inst.add("dart", (sym(d),))
        for i, rel in betas.items():
            inst.declare(f"beta{i}", 2)
            for a, b in rel:
                inst.add(f"beta{i}", (sym(a), sym(b)))
        expected = _map_oracle(darts, betas)
        assert chase_check(inst, pack) == expected, betas
        found += expected
    # every beta is the identity or the swap, and beta1 . beta3 is always an involution
    assert found == 8


def test_three_dart_permutations_agree_with_the_oracle():
    pack = comb_map_axiom_pack()
    darts = ["a", "b", "c"]
    perms = list(_permutations(darts))
    for b1, b2, b3 in itertools.product(perms, repeat=3):
        betas = {1: b1, 2: b2, 3: b3}
        inst = encode_comb_map(darts, {i: dict(r) for i, r in betas.items()})
        assert chase_check(inst, pack) == _map_oracle(darts, betas)


def test_non_involutive_beta2_fails():
    swap = {"d1": "d2", "d2": "d1"}
    ident = {"d1": "d1", "d2": "d2"}
    darts = ["d1", "d2"]
    assert chase_check(encode_comb_map(darts, {1: swap, 2: swap, 3: ident}), comb_map_axiom_pack())
    cycle = {"a": "b", "b": "c", "c": "a"}
    ident3 = {d: d for d in "abc"}
    inst = encode_comb_map("abc", {1: ident3, 2: cycle, 3: ident3})
    failing = [d.name for d in comb_map_axiom_pack() if not chase_check(inst, [d])]
    assert failing == ["beta2_involution"]
