"""Finite relational instances with labelled nulls and a union-find quotient."""
from __future__ import annotations

from .logic import Const, Null, tuple_key, value_key


class ArityError(ValueError):
    pass


class ChaseFailure(Exception):
    """Two distinct constants were forced equal."""

    def __init__(self, left, right, dependency=None):
        self.left = left
        self.right = right
        self.dependency = dependency
        where = f" by {dependency.name}" if dependency is not None else ""
        super().__init__(f"cannot equate distinct constants {left!r} and {right!r}{where}")


class Instance:
    """A set of facts ``rel(v1, ..., vn)`` over constants and labelled nulls.

    Stored tuples always hold canonical representatives: :meth:`merge`
    rewrites every affected tuple eagerly.  Every fact carries the value of
    a global insertion clock, and facts iterate in insertion order, so runs
    are reproducible regardless of hash randomization.
    """

    def __init__(self):
        self._rels: dict[str, dict] = {}  # rel -> {tuple: timestamp}, insertion-ordered
        self._arity: dict[str, int] = {}
        self._index: dict = {}  # (rel, position, value) -> {tuple: None}
        self._occ: dict = {}  # value -> {(rel, tuple): None}
        # composite indexes, built on first use: rel -> {positions: {values: {tuple: None}}}
        self._multi: dict = {}
        self._parent: dict = {}
        self.next_null = 0
        self.merge_count = 0
        self.clock = 0

    # -- construction -----------------------------------------------------

    @classmethod
    def from_facts(cls, facts) -> "Instance":
        inst = cls()
        for rel, args in facts:
            inst.add(rel, tuple(args))
        return inst

    def copy(self) -> "Instance":
        other = Instance()
        other._rels = {r: dict(ts) for r, ts in self._rels.items()}
        other._arity = dict(self._arity)
        other._index = {k: dict(v) for k, v in self._index.items()}
        other._occ = {k: dict(v) for k, v in self._occ.items()}
        other._parent = dict(self._parent)
        other.next_null = self.next_null
        other.merge_count = self.merge_count
        other.clock = self.clock
        return other

    def declare(self, rel: str, arity: int):
        known = self._arity.get(rel)
        if known is None:
            self._arity[rel] = arity
            self._rels.setdefault(rel, {})
        elif known != arity:
            raise ArityError(f"relation {rel} used with arity {arity}, previously {known}")

    def add(self, rel: str, args: tuple) -> bool:
        """Insert a fact; returns True when it was not already present."""
        args = tuple(self.find(v) for v in args) if self._parent else tuple(args)
        tuples = self._rels.get(rel)
        if tuples is None or self._arity[rel] != len(args):
            self.declare(rel, len(args))
            tuples = self._rels[rel]
        if args in tuples:
            return False
        for v in args:
            if isinstance(v, Null) and v.id >= self.next_null:
                self.next_null = v.id + 1
        tuples[args] = self.clock
        self.clock += 1
        for i, v in enumerate(args):
            self._index.setdefault((rel, i, v), {})[args] = None
            self._occ.setdefault(v, {})[(rel, args)] = None
        multi = self._multi.get(rel)
        if multi:
            for positions, index in multi.items():
                index.setdefault(tuple(args[i] for i in positions), {})[args] = None
        return True

    def _discard(self, rel: str, args: tuple):
        self._rels[rel].pop(args, None)
        multi = self._multi.get(rel)
        if multi:
            for positions, index in multi.items():
                key = tuple(args[i] for i in positions)
                bucket = index.get(key)
                if bucket is not None:
                    bucket.pop(args, None)
                    if not bucket:
                        del index[key]
        for i, v in enumerate(args):
            bucket = self._index.get((rel, i, v))
            if bucket is not None:
                bucket.pop(args, None)
                if not bucket:
                    del self._index[(rel, i, v)]
            occ = self._occ.get(v)
            if occ is not None:
                occ.pop((rel, args), None)
                if not occ:
                    del self._occ[v]

    def remove_relation(self, rel: str):
        for t in list(self._rels.get(rel, ())):
            self._discard(rel, t)
        self._rels.pop(rel, None)
        self._arity.pop(rel, None)
        self._multi.pop(rel, None)

    def fresh_null(self) -> Null:
        n = Null(self.next_null)
        self.next_null += 1
        return n

    # -- queries ----------------------------------------------------------

    def relations(self) -> list:
        return sorted(self._rels)

    def arity(self, rel: str) -> int | None:
        return self._arity.get(rel)

    def tuples(self, rel: str):
        """The tuples of ``rel`` as a set-like view, in insertion order."""
        return self._rels.get(rel, {}).keys()

    def timestamp(self, rel: str, args: tuple) -> int | None:
        return self._rels.get(rel, {}).get(args)

    def since(self, rel: str, clock: int) -> list:
        """Tuples of ``rel`` inserted at or after ``clock``, oldest first."""
        out = []
        for t, ts in reversed(self._rels.get(rel, {}).items()):
            if ts < clock:
                break
            out.append(t)
        out.reverse()
        return out

    def sorted_tuples(self, rel: str) -> list:
        return sorted(self._rels.get(rel, ()), key=tuple_key)

    def lookup(self, rel: str, position: int, value):
        return self._index.get((rel, position, value), {}).keys()

    def lookup_many(self, rel: str, positions: tuple, values: tuple):
        """Tuples of ``rel`` holding ``values`` at ``positions`` (two or more)."""
        multi = self._multi.setdefault(rel, {})
        index = multi.get(positions)
        if index is None:
            index = multi[positions] = {}
            for t in self._rels.get(rel, ()):
                index.setdefault(tuple(t[i] for i in positions), {})[t] = None
        return index.get(values, {}).keys()

    def contains(self, rel: str, args: tuple) -> bool:
        return tuple(args) in self._rels.get(rel, ())

    def facts(self):
        for rel, ts in self._rels.items():
            for t in ts:
                yield rel, t

    def sorted_facts(self) -> list:
        return [(rel, t) for rel in sorted(self._rels) for t in self.sorted_tuples(rel)]

    def fact_set(self) -> frozenset:
        return frozenset(self.facts())

    def __len__(self):
        return sum(len(ts) for ts in self._rels.values())

    def __eq__(self, other):
        return isinstance(other, Instance) and self.fact_set() == other.fact_set()

    def __repr__(self):
        return f"Instance({len(self)} facts)"

    def active_domain(self) -> set:
        return set(self._occ)

    def sorted_domain(self) -> list:
        return sorted(self._occ, key=value_key)

    def nulls(self) -> set:
        return {v for v in self._occ if isinstance(v, Null)}

    # -- union-find -------------------------------------------------------

    def has_merges(self) -> bool:
        return bool(self._parent)

    def find(self, v):
        if v not in self._parent:
            return v
        root = v
        while root in self._parent:
            root = self._parent[root]
        while v in self._parent and self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def merge(self, a, b, dependency=None):
        """Identify two values; returns the surviving representative.

        A null is absorbed by a constant; between nulls the lower id wins.
        Raises ChaseFailure for two distinct constants.
        """
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        if isinstance(a, Const) and isinstance(b, Const):
            raise ChaseFailure(a, b, dependency)
        if isinstance(a, Const):
            keep, gone = a, b
        elif isinstance(b, Const):
            keep, gone = b, a
        else:
            keep, gone = (a, b) if a.id < b.id else (b, a)
        self._parent[gone] = keep
        self.merge_count += 1
        affected = list(self._occ.get(gone, ()))
        for rel, t in affected:
            self._discard(rel, t)
        for rel, t in affected:
            self.add(rel, tuple(keep if x == gone else x for x in t))
        return keep


def disjoint_union(i1: Instance, i2: Instance) -> Instance:
    """Union of two instances with the nulls of ``i2`` renamed apart."""
    return disjoint_union_with_renaming(i1, i2)[0]


def disjoint_union_with_renaming(i1: Instance, i2: Instance):
    out = i1.copy()
    for rel in i2.relations():
        out.declare(rel, i2.arity(rel))
    offset = out.next_null
    renaming = {n: Null(n.id + offset) for n in i2.nulls()}
    for rel, t in i2.sorted_facts():
        out.add(rel, tuple(renaming.get(v, v) for v in t))
    out.next_null = max(out.next_null, offset + i2.next_null)
    return out, renaming
