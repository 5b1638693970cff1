"""Axiom packs and translators: labelled graphs, RDF triples, DL, combinatorial maps."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .chase import chase_check, load_theory
from .instance import Instance
from .logic import (
    And, Atom, Const, Dependency, Eq, Exists, Forall, Formula, Implies, Not, Null, Or,
    Truth, Var, sym,
)
from .tptp import parse_tptp


def _data(name: str) -> str:
    return resources.files("hornchase").joinpath(f"data/{name}").read_text()


# ---------------------------------------------------------------------------
# Labelled directed multigraphs


def graph_axiom_pack() -> list:
    """The twelve axioms making src, dst, nlabel and elabel total functions."""
    return load_theory(parse_tptp(_data("graph_axioms.p")))


def unigraph_axiom() -> Dependency:
    """At most one edge between an ordered pair of nodes."""
    (dep,) = load_theory(parse_tptp(_data("unigraph.p")))
    return dep


GRAPH_RELATIONS = ("node", "edge", "label", "src", "dst", "nlabel", "elabel")


@dataclass(frozen=True)
class LabeledGraph:
    nodes: frozenset = frozenset()
    edges: frozenset = frozenset()
    labels: frozenset = frozenset()
    src: dict = field(default_factory=dict)
    dst: dict = field(default_factory=dict)
    nlabel: dict = field(default_factory=dict)
    elabel: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, fn, dom in (("src", self.src, self.edges), ("dst", self.dst, self.edges),
                              ("elabel", self.elabel, self.edges), ("nlabel", self.nlabel, self.nodes)):
            if set(fn) != set(dom):
                raise ValueError(f"{name} must be total on its domain")
        if not set(self.src.values()) | set(self.dst.values()) <= set(self.nodes):
            raise ValueError("edge endpoints must be nodes")
        if not set(self.nlabel.values()) | set(self.elabel.values()) <= set(self.labels):
            raise ValueError("labels must be declared")


def _value(v):
    if isinstance(v, (Const, Null)):
        return v
    if isinstance(v, int):
        return Const(v)
    return sym(v)


def _plain(v):
    return v.value if isinstance(v, Const) else v


def encode_graph(g: LabeledGraph) -> Instance:
    inst = Instance()
    for rel, arity in zip(GRAPH_RELATIONS, (1, 1, 1, 2, 2, 2, 2)):
        inst.declare(rel, arity)
    for n in g.nodes:
        inst.add("node", (_value(n),))
    for e in g.edges:
        inst.add("edge", (_value(e),))
    for lbl in g.labels:
        inst.add("label", (_value(lbl),))
    for rel in ("src", "dst", "nlabel", "elabel"):
        for k, v in getattr(g, rel).items():
            inst.add(rel, (_value(k), _value(v)))
    return inst


def decode_graph(inst: Instance) -> LabeledGraph:
    if not chase_check(inst, graph_axiom_pack()):
        raise ValueError("instance does not satisfy the graph axioms")

    def unary(rel):
        return frozenset(_plain(t[0]) for t in inst.tuples(rel))

    def binary(rel):
        return {_plain(a): _plain(b) for a, b in inst.tuples(rel)}

    return LabeledGraph(unary("node"), unary("edge"), unary("label"),
                        binary("src"), binary("dst"), binary("nlabel"), binary("elabel"))


def graph_to_binary_relations(g: LabeledGraph) -> Instance:
    """One binary relation per edge label relating the endpoints of each edge."""
    inst = Instance()
    for e in sorted(g.edges, key=str):
        rel = g.elabel[e]
        if not isinstance(rel, str) or rel in GRAPH_RELATIONS or rel.startswith("$"):
            raise ValueError(f"edge label {rel!r} cannot be used as a relation name")
        inst.add(rel, (_value(g.src[e]), _value(g.dst[e])))
    return inst


def triples_to_arc(triples) -> Instance:
    """RDF triples as ``$arc(s, p, o)`` facts; ``_:x`` blank nodes become nulls."""
    inst = Instance()
    inst.declare("$arc", 3)
    blanks: dict = {}

    def value(v):
        if isinstance(v, str) and v.startswith("_:"):
            if v not in blanks:
                blanks[v] = inst.fresh_null()
            return blanks[v]
        return _value(v)

    for s, p, o in triples:
        inst.add("$arc", (value(s), value(p), value(o)))
    return inst


# ---------------------------------------------------------------------------
# Description logic


@dataclass(frozen=True)
class Concept:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Complement:
    concept: object


@dataclass(frozen=True)
class Union:
    left: object
    right: object


@dataclass(frozen=True)
class Intersection:
    left: object
    right: object


@dataclass(frozen=True)
class SomeValues:
    role: str
    concept: object


@dataclass(frozen=True)
class AllValues:
    role: str
    concept: object


@dataclass(frozen=True)
class Subsumption:
    sub: object
    sup: object


class DlSyntaxError(ValueError):
    pass


_DL_ARITY = {"not": 1, "and": 2, "or": 2, "some": 2, "all": 2, "sub": 2}


def parse_dl(text: str):
    """Parse the prefix DL syntax: ``sub C D``, ``and C D``, ``or C D``,
    ``not C``, ``some R C``, ``all R C``, ``top``, ``bottom``, names.
    Parentheses group freely."""
    tokens = re.findall(r"[()]|[^\s()]+", text)
    pos = 0

    def parse(top_level=False):
        nonlocal pos
        if pos >= len(tokens):
            raise DlSyntaxError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            inner = parse(top_level)
            if pos >= len(tokens) or tokens[pos] != ")":
                raise DlSyntaxError("expected ')'")
            pos += 1
            return inner
        if tok == ")":
            raise DlSyntaxError("unexpected ')'")
        if tok == "top":
            return Top()
        if tok == "bottom":
            return Bottom()
        if tok == "sub":
            if not top_level:
                raise DlSyntaxError("'sub' is only allowed at the top level")
            return Subsumption(parse(), parse())
        if tok in ("some", "all"):
            role = tokens[pos] if pos < len(tokens) else None
            if role is None or role in "()" or role in _DL_ARITY:
                raise DlSyntaxError(f"'{tok}' needs a role name")
            pos += 1
            return (SomeValues if tok == "some" else AllValues)(role, parse())
        if tok == "not":
            return Complement(parse())
        if tok == "and":
            return Intersection(parse(), parse())
        if tok == "or":
            return Union(parse(), parse())
        return Concept(tok)

    result = parse(top_level=True)
    if pos != len(tokens):
        raise DlSyntaxError(f"unexpected trailing input: {' '.join(tokens[pos:])}")
    return result


def dl_to_fol(statement, var: str = "x") -> Formula:
    """Standard translation; a concept yields a formula free in ``var``."""
    used = {var}

    def fresh():
        k = 0
        while True:
            name = "y" if k == 0 else f"y{k}"
            k += 1
            if name not in used:
                used.add(name)
                return Var(name)

    def tr(c, x):
        if isinstance(c, Concept):
            return Atom(c.name, (x,))
        if isinstance(c, Top):
            return Truth(True)
        if isinstance(c, Bottom):
            return Truth(False)
        if isinstance(c, Complement):
            return Not(tr(c.concept, x))
        if isinstance(c, Intersection):
            return And((tr(c.left, x), tr(c.right, x)))
        if isinstance(c, Union):
            return Or((tr(c.left, x), tr(c.right, x)))
        if isinstance(c, SomeValues):
            y = fresh()
            return Exists((y,), And((Atom(c.role, (x, y)), tr(c.concept, y))))
        if isinstance(c, AllValues):
            y = fresh()
            return Forall((y,), Implies(Atom(c.role, (x, y)), tr(c.concept, y)))
        raise TypeError(f"not a DL concept: {c!r}")

    x = Var(var)
    if isinstance(statement, Subsumption):
        return Forall((x,), Implies(tr(statement.sub, x), tr(statement.sup, x)))
    return tr(statement, x)


# ---------------------------------------------------------------------------
# Combinatorial maps


def _dep(name, universals, premise, existentials, conclusion):
    return Dependency(name, tuple(Var(v) for v in universals), tuple(premise),
                      tuple(Var(v) for v in existentials), tuple(conclusion))


def comb_map_axiom_pack(dimension: int = 3) -> list:
    """Relational axioms for a combinatorial map over darts ``dart``.

    Every ``beta<i>`` is a permutation of the darts, ``beta2..beta<n>`` are
    involutions and ``beta1 . beta<i>`` is an involution for ``i >= 3``.
    """
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    x, y, z, v, w = (Var(n) for n in "xyzvw")
    deps = []
    for i in range(1, dimension + 1):
        b = f"beta{i}"
        deps += [
            _dep(f"{b}_typed", "xy", [Atom(b, (x, y))], "", [Atom("dart", (x,)), Atom("dart", (y,))]),
            _dep(f"{b}_total", "x", [Atom("dart", (x,))], "y", [Atom(b, (x, y))]),
            _dep(f"{b}_functional", "xyz", [Atom(b, (x, y)), Atom(b, (x, z))], "", [Eq(y, z)]),
            _dep(f"{b}_surjective", "y", [Atom("dart", (y,))], "x", [Atom(b, (x, y))]),
            _dep(f"{b}_injective", "xyz", [Atom(b, (x, z)), Atom(b, (y, z))], "", [Eq(x, y)]),
        ]
    for i in range(2, dimension + 1):
        b = f"beta{i}"
        deps.append(_dep(f"{b}_involution", "xyz", [Atom(b, (x, y)), Atom(b, (y, z))], "", [Eq(x, z)]))
    for i in range(3, dimension + 1):
        b = f"beta{i}"
        deps.append(_dep(f"beta1_{b}_involution", "vwxyz",
                         [Atom(b, (x, w)), Atom("beta1", (w, y)), Atom(b, (y, v)), Atom("beta1", (v, z))],
                         "", [Eq(x, z)]))
    return deps


def encode_comb_map(darts, betas) -> Instance:
    """``betas`` maps an index ``i`` to a dict dart -> dart."""
    inst = Instance()
    inst.declare("dart", 1)
    for d in darts:
        inst.add("dart", (_value(d),))
    for i, fn in betas.items():
        inst.declare(f"beta{i}", 2)
        for a, b in fn.items():
            inst.add(f"beta{i}", (_value(a), _value(b)))
    return inst
