"""Partition intersection and taxonomy merge with Dedekind-MacNeille completion.

The merge runs in two chase stages.  Stage one closes the input partitions,
intersects them, maps every input label into the output sort ``t0`` through
``tau1``/``tau2`` and transports both input orders into ``le0``.  Stage two
adds meets: each output label carries one bit per base label recording
whether the base label lies below it, meets intersect these bit vectors, and
a key dependency identifies labels with equal bit vectors.  The labels that
survive are exactly the cuts of the amalgamated order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations

import networkx as nx

from .chase import ChaseConfig, ChaseResult, chase, load_theory
from .instance import Instance
from .logic import App, Atom, Const, Dependency, Var, string, sym, value_key
from .tptp import parse_tptp

log = logging.getLogger(__name__)

TAU_BY_NAME = "by-name"
TAU_DISJOINT = "disjoint"

OUTPUT_RELATIONS = ("point", "equiv0", "t0", "glb0", "lub0", "top0", "bot0", "g0", "tau1", "tau2")


class TaxonomyError(ValueError):
    pass


class MergeError(RuntimeError):
    def __init__(self, message, result: ChaseResult | None = None):
        super().__init__(message)
        self.result = result


@lru_cache(maxsize=None)
def _theory_cached(name):
    return tuple(load_theory(parse_tptp(resources.files("hornchase").joinpath(f"data/{name}").read_text())))


def _theory(name):
    return list(_theory_cached(name))


def output_axioms() -> list:
    """The laws a merged output instance must satisfy."""
    return _theory("lattice_axioms.p")


# ---------------------------------------------------------------------------
# Finite orders


def order_closure(elements, pairs) -> frozenset:
    """Reflexive-transitive closure of ``pairs``; raises on a cycle."""
    g = nx.DiGraph()
    g.add_nodes_from(elements)
    g.add_edges_from((a, b) for a, b in pairs if a != b)
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise TaxonomyError(f"order contains a cycle: {cycle}")
    closure = {(x, x) for x in g}
    for x in g:
        closure |= {(x, y) for y in nx.descendants(g, x)}
    return frozenset(closure)


def least(candidates, le):
    """The least element of ``candidates`` under ``le``, or None."""
    cands = list(candidates)
    for c in cands:
        if all((c, d) in le for d in cands):
            return c
    return None


def join_table(elements, le) -> dict:
    """lub for every ordered pair; raises when some pair has no least upper bound."""
    table = {}
    for x in elements:
        for y in elements:
            upper = [z for z in elements if (x, z) in le and (y, z) in le]
            z = least(upper, le)
            if z is None:
                raise TaxonomyError(f"labels {x} and {y} have no least upper bound")
            table[(x, y)] = z
    return table


def meet_table(elements, le) -> dict:
    ge = {(b, a) for a, b in le}
    return join_table(elements, ge)


def hasse(elements, le) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(elements)
    g.add_edges_from((a, b) for a, b in le if a != b)
    return nx.transitive_reduction(g)


def order_isomorphic(elems1, le1, elems2, le2) -> bool:
    if len(elems1) != len(elems2) or len(le1) != len(le2):
        return False
    return nx.is_isomorphic(hasse(elems1, le1), hasse(elems2, le2))


# ---------------------------------------------------------------------------
# Taxonomies


@dataclass(frozen=True)
class Taxonomy:
    """A finite join-semilattice of labels given by ``a < b`` pairs."""

    labels: frozenset
    less: frozenset = frozenset()

    def __post_init__(self):
        missing = {x for pair in self.less for x in pair} - self.labels
        if missing:
            object.__setattr__(self, "labels", self.labels | missing)

    @property
    def le(self) -> frozenset:
        return order_closure(self.labels, self.less)

    def joins(self) -> dict:
        return join_table(sorted(self.labels), self.le)

    def top(self):
        le = self.le
        return next((x for x in self.labels if all((y, x) in le for y in self.labels)), None)


def parse_taxonomy(text: str) -> Taxonomy:
    """Lines ``a < b`` or ``label a``; ``#`` starts a comment."""
    labels, less = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 3 and parts[1] == "<":
            less.add((parts[0], parts[2]))
            labels.update((parts[0], parts[2]))
        elif len(parts) == 2 and parts[0] == "label":
            labels.add(parts[1])
        else:
            raise TaxonomyError(f"line {lineno}: expected 'a < b' or 'label a', got {line!r}")
    return Taxonomy(frozenset(labels), frozenset(less))


def format_taxonomy(t: Taxonomy) -> str:
    lines = [f"label {x}" for x in sorted(t.labels)]
    lines += [f"{a} < {b}" for a, b in sorted(t.less)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Partitions


def blocks_of(points, pairs) -> frozenset:
    g = nx.Graph()
    g.add_nodes_from(points)
    g.add_edges_from(pairs)
    return frozenset(frozenset(c) for c in nx.connected_components(g))


def _points(blocks) -> set:
    return {p for b in blocks for p in b}


def refine_partitions(b1, b2) -> frozenset:
    """Direct intersection: the nonempty pairwise block intersections."""
    if _points(b1) != _points(b2):
        raise ValueError("partitions are over different point sets")
    return frozenset(frozenset(x & y) for x in map(frozenset, b1) for y in map(frozenset, b2) if x & y)


def _value(v):
    if isinstance(v, Const):
        return v
    return Const(v) if isinstance(v, int) else string(v) if " " in v else sym(v)


def _plain(v):
    return v.value if isinstance(v, Const) else v


_EQUIV_ONLY = ("equiv1_refl", "equiv1_sym", "equiv1_trans",
               "equiv2_refl", "equiv2_sym", "equiv2_trans", "isect_part")


def intersect_partitions(b1, b2, config: ChaseConfig | None = None) -> frozenset:
    """Intersect two partitions (given as blocks) by chasing the equivalence rules."""
    if _points(b1) != _points(b2):
        raise ValueError("partitions are over different point sets")
    inst = Instance()
    for rel in ("equiv0", "equiv1", "equiv2"):
        inst.declare(rel, 2)
    for p in _points(b1):
        inst.add("point", (_value(p),))
    for rel, blocks in (("equiv1", b1), ("equiv2", b2)):
        for block in blocks:
            members = sorted(block, key=str)
            for a, b in zip(members, members[1:]):
                inst.add(rel, (_value(a), _value(b)))
    deps = [d for d in _theory("lattice_stage1.p") if d.name in _EQUIV_ONLY]
    result = chase(inst, deps, config)
    if not result.ok:
        raise MergeError(f"partition chase ended with {result.outcome}", result)
    pairs = [(_plain(a), _plain(b)) for a, b in result.instance.tuples("equiv0")]
    return blocks_of(_points(b1), pairs)


@dataclass(frozen=True)
class LabeledPartition:
    """Points grouped by ``equiv`` pairs, each point carrying a label."""

    points: frozenset
    pairs: frozenset
    labeling: dict = field(default_factory=dict)

    def blocks(self) -> frozenset:
        return blocks_of(self.points, self.pairs)


def partition_from_instance(inst: Instance) -> LabeledPartition:
    """Read ``equiv(x, y)`` and ``g(x, label)`` facts."""
    pairs = frozenset((a, b) for a, b in inst.tuples("equiv"))
    labeling = {}
    for x, lbl in inst.sorted_tuples("g"):
        if labeling.setdefault(x, lbl) != lbl:
            raise TaxonomyError(f"point {x} has two labels")
    points = frozenset({v for pair in pairs for v in pair} | set(labeling))
    return LabeledPartition(points, pairs, labeling)


# ---------------------------------------------------------------------------
# Lattices


@dataclass(frozen=True)
class FiniteLattice:
    elements: tuple
    le: frozenset
    embedding: dict = field(default_factory=dict)

    def meet(self, x, y):
        return least_upper(self.elements, {(b, a) for a, b in self.le}, x, y)

    def join(self, x, y):
        return least_upper(self.elements, self.le, x, y)


def least_upper(elements, le, x, y):
    return least([z for z in elements if (x, z) in le and (y, z) in le], le)


def is_lattice(elements, le) -> bool:
    ge = {(b, a) for a, b in le}
    return all(least_upper(elements, le, x, y) is not None and least_upper(elements, ge, x, y) is not None
               for x, y in combinations(elements, 2))


def dm_complete(elements, le, max_size: int = 20) -> FiniteLattice:
    """Dedekind-MacNeille completion by brute force over all subsets.

    Elements of the result are the cuts ``A = (A^u)^l`` as frozensets,
    ordered by inclusion; ``embedding`` sends ``p`` to its principal cut.
    """
    elems = list(elements)
    n = len(elems)
    if n > max_size:
        raise ValueError(f"poset too large for brute-force completion ({n} > {max_size})")
    full = (1 << n) - 1
    up = [sum(1 << j for j in range(n) if (elems[i], elems[j]) in le) for i in range(n)]
    down = [sum(1 << j for j in range(n) if (elems[j], elems[i]) in le) for i in range(n)]
    cuts = []
    for mask in range(1 << n):
        upper = full
        for i in range(n):
            if mask >> i & 1:
                upper &= up[i]
        lower = full
        for i in range(n):
            if upper >> i & 1:
                lower &= down[i]
        if lower == mask:
            cuts.append(frozenset(elems[i] for i in range(n) if mask >> i & 1))
    cut_le = frozenset((a, b) for a in cuts for b in cuts if a <= b)
    embedding = {elems[i]: frozenset(elems[j] for j in range(n) if down[i] >> j & 1) for i in range(n)}
    return FiniteLattice(tuple(cuts), cut_le, embedding)


def amalgamate(t1: Taxonomy, t2: Taxonomy, tau: str = TAU_BY_NAME):
    """The output-sort poset before completion: both orders pushed through tau."""
    if tau == TAU_BY_NAME:
        f1 = {x: x for x in t1.labels}
        f2 = {x: x for x in t2.labels}
    elif tau == TAU_DISJOINT:
        f1 = {x: ("1", x) for x in t1.labels}
        f2 = {x: ("2", x) for x in t2.labels}
    else:
        raise ValueError(f"unknown tau policy {tau!r}")
    elements = set(f1.values()) | set(f2.values())
    pairs = {(f1[a], f1[b]) for a, b in t1.le} | {(f2[a], f2[b]) for a, b in t2.le}
    return frozenset(elements), order_closure(elements, pairs)


# ---------------------------------------------------------------------------
# The chase-driven merge


@dataclass
class MergedLattice:
    instance: Instance
    elements: tuple
    le: frozenset
    top: object
    bottom: object
    tau1: dict
    tau2: dict
    steps: int = 0

    def names(self) -> dict:
        """Readable names: input labels keep theirs, fresh labels become meets."""
        out = {}
        for tau in (self.tau1, self.tau2):
            for label, v in tau.items():
                out.setdefault(v, str(label))
        return out


def key_dependency(base) -> Dependency:
    """bit(p1,z,b1) & ... & bit(pn,z,bn) => key(z, b1 ... bn) for the base labels."""
    z = Var("z")
    bits = [Var(f"b{i}") for i in range(len(base))]
    premise = tuple(Atom("bit", (p, z, b)) for p, b in zip(base, bits))
    if not bits:
        packed = string("")
    else:
        packed = bits[0]
        for b in bits[1:]:
            packed = App("$concat", (packed, b))
    return Dependency("key_of_cut", (z, *bits), premise, (), (Atom("key", (z, packed)),))


def _check(result: ChaseResult, stage: str):
    if result.ok:
        return
    if result.failed_dependency is not None:
        left, right = result.failed_values
        raise MergeError(f"{stage}: {result.failed_dependency.name} forces {left} = {right}", result)
    raise MergeError(f"{stage}: chase budget exhausted after {result.steps} steps", result)


def merge_taxonomies(t1: Taxonomy, t2: Taxonomy, p1: LabeledPartition | None = None,
                     p2: LabeledPartition | None = None, tau: str = TAU_BY_NAME,
                     config: ChaseConfig | None = None) -> MergedLattice:
    if tau not in (TAU_BY_NAME, TAU_DISJOINT):
        raise ValueError(f"unknown tau policy {tau!r}")
    inst = Instance()
    for rel, arity in (("equiv0", 2), ("equiv1", 2), ("equiv2", 2), ("g1", 2), ("g2", 2),
                       ("le0", 2), ("t0", 1), ("point", 1)):
        inst.declare(rel, arity)
    for i, t, p in ((1, t1, p1), (2, t2, p2)):
        inst.declare(f"label{i}", 1)
        inst.declare(f"tau{i}", 2)
        inst.declare(f"lub{i}", 3)
        for x in t.labels:
            inst.add(f"label{i}", (_value(x),))
            if tau == TAU_BY_NAME:
                inst.add(f"tau{i}", (_value(x), _value(x)))
                inst.add("t0", (_value(x),))
        for (x, y), z in t.joins().items():
            inst.add(f"lub{i}", (_value(x), _value(y), _value(z)))
        if p is not None:
            unknown = set(p.labeling.values()) - {_value(x) for x in t.labels}
            if unknown:
                raise TaxonomyError(f"partition {i} uses labels outside its taxonomy: {sorted(map(str, unknown))}")
            for x in p.points:
                inst.add("point", (x,))
            for a, b in p.pairs:
                inst.add(f"equiv{i}", (a, b))
            for x, lbl in p.labeling.items():
                inst.add(f"g{i}", (x, lbl))
    if (p1 is None) != (p2 is None):
        raise ValueError("give both partitions or neither")
    if p1 is not None and p1.points != p2.points:
        raise ValueError("partitions are over different point sets")

    stage1 = chase(inst, _theory("lattice_stage1.p"), config)
    _check(stage1, "stage 1")
    mid = stage1.instance
    base = mid.sorted_tuples("t0")
    base = [t[0] for t in base]
    le0 = mid.tuples("le0")
    one, zero = string("1"), string("0")
    for p in base:
        mid.add("base", (p,))
        for x in base:
            mid.add("bit", (p, x, one if (p, x) in le0 else zero))
            if (p, x) in le0:
                # the meet of comparable labels is the lower one
                mid.add("glb0", (p, x, p))
                mid.add("glb0", (x, p, p))
    deps = _theory("lattice_stage2.p") + [key_dependency(base)]
    stage2 = chase(mid, deps, config)
    _check(stage2, "stage 2")
    out = stage2.instance

    elements = tuple(sorted((t[0] for t in out.tuples("t0")), key=value_key))
    glb = {(x, y): z for x, y, z in out.tuples("glb0")}
    le = frozenset((x, y) for x in elements for y in elements if glb[(x, y)] == x)
    top = next(iter(out.tuples("top0")))[0]
    bottom = least(elements, le)
    out.declare("lub0", 3)
    for x in elements:
        for y in elements:
            out.add("lub0", (x, y, least_upper(elements, le, x, y)))
    out.add("bot0", (bottom,))
    for rel in out.relations():
        if rel not in OUTPUT_RELATIONS:
            out.remove_relation(rel)
    tau1 = {_plain(a): b for a, b in out.tuples("tau1")}
    tau2 = {_plain(a): b for a, b in out.tuples("tau2")}
    log.info("merged %d + %d labels into %d in %d steps", len(t1.labels), len(t2.labels),
             len(elements), stage1.steps + stage2.steps)
    return MergedLattice(out, elements, le, top, bottom, tau1, tau2, stage1.steps + stage2.steps)


def merged_poset(m: MergedLattice):
    return m.elements, m.le


def merge_matches_oracle(m: MergedLattice, t1: Taxonomy, t2: Taxonomy, tau: str = TAU_BY_NAME) -> bool:
    elements, le = amalgamate(t1, t2, tau)
    dm = dm_complete(elements, le)
    return order_isomorphic(m.elements, m.le, dm.elements, dm.le)


def sorted_blocks(blocks) -> list:
    return sorted((sorted(b, key=str) for b in blocks), key=lambda b: [str(x) for x in b])

