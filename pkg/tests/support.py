"""Shared generators and oracles for the test suite."""
import random

from hornchase.lattice import Taxonomy


def _closure(n, pairs):
    le = {(i, i) for i in range(n)} | set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(le):
            for c, d in list(le):
                if b == c and (a, d) not in le:
                    le.add((a, d))
                    changed = True
    return le


def brute_cuts(elements, le):
    """Every subset A with A == lower(upper(A)), by plain set arithmetic."""
    elements = list(elements)
    cuts = []
    for mask in range(1 << len(elements)):
        a = {e for i, e in enumerate(elements) if mask >> i & 1}
        upper = {u for u in elements if all((x, u) in le for x in a)}
        lower = {l for l in elements if all((l, u) in le for u in upper)}
        if lower == a:
            cuts.append(frozenset(a))
    return cuts


def random_taxonomy_pair(rng: random.Random, max_labels: int = 6, pool: int = 7):
    """Two join-semilattices over a shared global order.

    Each side takes a random subset of a random global poset (always
    including ``top``), completes it by cuts and gives the new cuts fresh
    side-specific names.  Both sides therefore agree on shared labels.
    """
    names = ["top"] + [f"l{i}" for i in range(pool - 1)]
    pairs = {(i, 0) for i in range(1, pool)}
    for i in range(1, pool):
        for j in range(i + 1, pool):
            if rng.random() < 0.3:
                pairs.add((i, j))
    le = _closure(pool, pairs)
    sides = []
    for side in (1, 2):
        while True:
            chosen = [0] + rng.sample(range(1, pool), rng.randint(0, 4))
            sub_le = {(a, b) for a, b in le if a in chosen and b in chosen}
            cuts = brute_cuts(chosen, sub_le)
            if len(cuts) <= max_labels:
                break
        principal = {frozenset(a for a in chosen if (a, p) in sub_le): names[p] for p in chosen}
        label = {}
        fresh = 0
        for c in cuts:
            if c in principal:
                label[c] = principal[c]
            else:
                label[c] = f"s{side}f{fresh}"
                fresh += 1
        less = {(label[a], label[b]) for a in cuts for b in cuts if a < b}
        sides.append(Taxonomy(frozenset(label.values()), frozenset(less)))
    return sides[0], sides[1]


# ---------------------------------------------------------------------------
# A second, independently structured evaluator.  Where the library recurses
# top-down over one environment, this one works bottom-up: every subformula
# denotes the set of assignments (over its free variables) that make it true.

from itertools import product

from hornchase.instance import Instance
from hornchase.logic import (
    And, Atom, Const, Eq, Exists, Forall, Iff, Implies, Not, Or, Truth, Var,
)


def _fv(f):
    if isinstance(f, Atom):
        return frozenset(a for a in f.args if isinstance(a, Var))
    if isinstance(f, Eq):
        return frozenset(a for a in (f.left, f.right) if isinstance(a, Var))
    if isinstance(f, Truth):
        return frozenset()
    if isinstance(f, Not):
        return _fv(f.body)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(_fv(p) for p in f.parts))
    if isinstance(f, (Implies, Iff)):
        return _fv(f.left) | _fv(f.right)
    return _fv(f.body) - set(f.vars)


def _assignments(vs, domain):
    vs = sorted(vs, key=lambda v: v.name)
    return {frozenset(zip(vs, combo)) for combo in product(domain, repeat=len(vs))}


def _denote(f, facts, domain):
    """Set of frozenset({(var, value)}) assignments over _fv(f) satisfying f."""
    vs = _fv(f)
    everything = _assignments(vs, domain)
    if isinstance(f, Atom):
        out = set()
        for a in everything:
            env = dict(a)
            row = tuple(env[t] if isinstance(t, Var) else t for t in f.args)
            if (f.rel, row) in facts:
                out.add(a)
        return out
    if isinstance(f, Eq):
        return {a for a in everything
                if (dict(a).get(f.left, f.left)) == (dict(a).get(f.right, f.right))}
    if isinstance(f, Truth):
        return everything if f.value else set()
    if isinstance(f, Not):
        return everything - _denote(f.body, facts, domain)
    if isinstance(f, (And, Or, Implies, Iff)):
        parts = f.parts if isinstance(f, (And, Or)) else (f.left, f.right)
        sets = [(_fv(p), _denote(p, facts, domain)) for p in parts]

        def holds(a, k):
            own, sat = sets[k]
            return frozenset(pair for pair in a if pair[0] in own) in sat

        if isinstance(f, And):
            return {a for a in everything if all(holds(a, k) for k in range(len(sets)))}
        if isinstance(f, Or):
            return {a for a in everything if any(holds(a, k) for k in range(len(sets)))}
        if isinstance(f, Implies):
            return {a for a in everything if not holds(a, 0) or holds(a, 1)}
        return {a for a in everything if holds(a, 0) == holds(a, 1)}
    inner = _denote(f.body, facts, domain)
    bound = [v for v in dict.fromkeys(f.vars)]
    body_vs = _fv(f.body)
    out = set()
    for a in everything:
        exts = [a | frozenset((v, val) for v, val in zip(bound, combo) if v in body_vs)
                for combo in product(domain, repeat=len(bound))]
        results = [e in inner for e in exts]
        if (all(results) if isinstance(f, Forall) else any(results)):
            out.add(a)
    return out


def naive_satisfies(inst: Instance, sentence) -> bool:
    facts = set(inst.facts())
    domain = sorted(inst.active_domain(), key=repr)
    return frozenset() in _denote(sentence, facts, domain)


_NAMES = [Const(c) for c in "abcd"]
_VARS = [Var(v) for v in "xyz"]


def random_instance(rng: random.Random, max_values: int = 4) -> Instance:
    values = _NAMES[:rng.randint(1, max_values)]
    inst = Instance()
    inst.declare("p", 1)
    inst.declare("r", 2)
    for v in values:
        inst.add("p", (v,)) if rng.random() < 0.5 else None
        for w in values:
            if rng.random() < 0.35:
                inst.add("r", (v, w))
    if not len(inst):
        inst.add("p", (values[0],))
    return inst


def _random_term(rng):
    return rng.choice(_VARS) if rng.random() < 0.8 else rng.choice(_NAMES)


def random_formula(rng: random.Random, depth: int = 3):
    if depth == 0 or rng.random() < 0.25:
        k = rng.random()
        if k < 0.4:
            return Atom("p", (_random_term(rng),))
        if k < 0.8:
            return Atom("r", (_random_term(rng), _random_term(rng)))
        if k < 0.95:
            return Eq(_random_term(rng), _random_term(rng))
        return Truth(rng.random() < 0.5)
    k = rng.randrange(7)
    sub = lambda: random_formula(rng, depth - 1)  # noqa: E731
    if k == 0:
        return Not(sub())
    if k == 1:
        return And((sub(), sub()))
    if k == 2:
        return Or((sub(), sub()))
    if k == 3:
        return Implies(sub(), sub())
    if k == 4:
        return Iff(sub(), sub())
    if k == 5:
        return Forall((rng.choice(_VARS),), sub())
    return Exists((rng.choice(_VARS),), sub())


def random_sentence(rng: random.Random, depth: int = 3):
    """A closed formula of quantifier/connective depth at most ``depth``
    below an outer block that closes any remaining free variables."""
    f = random_formula(rng, depth)
    free = sorted(_fv(f), key=lambda v: v.name)
    if free:
        f = (Forall if rng.random() < 0.5 else Exists)(tuple(free), f)
    return f
