"""Finite-model satisfaction, conjunctive matching and homomorphisms."""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Iterator

from .logic import (
    And, App, Atom, Const, Eq, EvaluationError, Exists, Forall, Formula, Iff, Implies, Not,
    Null, Or, Truth, Var, concat_leaves, eval_builtin, eval_term, free_vars, term_vars,
    tuple_key, value_key,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Satisfaction


def _domain_for(inst, var: Var, adom: list) -> list:
    # a unary relation named after a variable's sort bounds its range
    if var.sort is not None and inst.arity(var.sort) == 1:
        return sorted((t[0] for t in inst.tuples(var.sort)), key=value_key)
    return adom


def satisfies(inst, sentence: Formula) -> bool:
    """Tarskian truth with quantifiers ranging over the active domain."""
    free = free_vars(sentence)
    if free:
        raise ValueError(f"not a sentence; free variables {sorted(v.name for v in free)}")
    adom = inst.sorted_domain()
    return _holds(inst, sentence, {}, adom)


def _value(inst, t, env):
    v = eval_term(t, env)
    return inst.find(v) if isinstance(v, Null) else v


def _holds(inst, f, env, adom) -> bool:
    if isinstance(f, Atom):
        args = [_value(inst, a, env) for a in f.args]
        if f.is_builtin:
            return eval_builtin(f.rel, args)
        if inst.arity(f.rel) is None:
            log.warning("relation %s does not occur in the instance; treated as empty", f.rel)
            return False
        return inst.contains(f.rel, tuple(args))
    if isinstance(f, Eq):
        return _value(inst, f.left, env) == _value(inst, f.right, env)
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Not):
        return not _holds(inst, f.body, env, adom)
    if isinstance(f, And):
        return all(_holds(inst, p, env, adom) for p in f.parts)
    if isinstance(f, Or):
        return any(_holds(inst, p, env, adom) for p in f.parts)
    if isinstance(f, Implies):
        return not _holds(inst, f.left, env, adom) or _holds(inst, f.right, env, adom)
    if isinstance(f, Iff):
        return _holds(inst, f.left, env, adom) == _holds(inst, f.right, env, adom)
    if isinstance(f, (Forall, Exists)):
        want_all = isinstance(f, Forall)
        return _quantify(inst, f.vars, f.body, env, adom, want_all)
    raise TypeError(f"not a formula: {f!r}")


def _quantify(inst, vs, body, env, adom, want_all) -> bool:
    if not vs:
        return _holds(inst, body, env, adom)
    v, rest = vs[0], vs[1:]
    for value in _domain_for(inst, v, adom):
        inner = dict(env)
        inner[v] = value
        result = _quantify(inst, rest, body, inner, adom, want_all)
        if want_all and not result:
            return False
        if not want_all and result:
            return True
    return want_all


# ---------------------------------------------------------------------------
# Conjunctive matching


def _ready(atom, binding) -> bool:
    if isinstance(atom, Eq):
        return not ((term_vars(atom.left) | term_vars(atom.right)) - binding.keys())
    if isinstance(atom, Not):
        return _ready(atom.body, binding)
    return not (free_vars(atom) - binding.keys())


def _check_filter(inst, atom, binding) -> bool:
    try:
        if isinstance(atom, Eq):
            return _value(inst, atom.left, binding) == _value(inst, atom.right, binding)
        if isinstance(atom, Not):
            return not _check_filter(inst, atom.body, binding)
        return eval_builtin(atom.rel, [_value(inst, a, binding) for a in atom.args])
    except EvaluationError:
        return False


def _unify(inst, pattern, value, binding):
    """Extend ``binding`` so that ``pattern`` denotes ``value``; None on clash."""
    if isinstance(pattern, Var):
        bound = binding.get(pattern)
        if bound is None:
            out = dict(binding)
            out[pattern] = value
            return out
        return binding if inst.find(bound) == value else None
    if isinstance(pattern, (Const, Null)):
        return binding if inst.find(pattern) == value else None
    if pattern.fn == "$concat":
        if not (isinstance(value, Const) and isinstance(value.value, str)):
            return None
        leaves = concat_leaves(pattern)
        tokens = value.value.split()
        if len(tokens) != len(leaves):
            return None
        for leaf, tok in zip(leaves, tokens):
            binding = _unify(inst, leaf, Const(tok, True), binding)
            if binding is None:
                return None
        return binding
    try:
        return binding if eval_term(pattern, binding) == value else None
    except EvaluationError:
        return None


def _probe(pattern, binding):
    """A value the pattern certainly denotes, if determinable without search."""
    if isinstance(pattern, Var):
        return binding.get(pattern)
    if isinstance(pattern, (Const, Null)):
        return pattern
    if pattern.fn == "$concat":
        return None
    try:
        return eval_term(pattern, binding)
    except EvaluationError:
        return None


def match(inst, premise, universals=(), binding=None, *, since=None, ordered=True) -> Iterator[dict]:
    """Enumerate every binding satisfying a conjunction of atoms, exactly once.

    Relational atoms are joined left to right over tuples in sorted order;
    equalities and builtins act as filters once their variables are bound
    (an equality with one unbound variable side binds it).  Variables in
    ``universals`` that no atom binds range over the active domain.

    With ``since`` set, only bindings that use at least one fact inserted at
    or after that clock value are produced (semi-naive evaluation).  With
    ``ordered`` false, tuples are visited in insertion order instead.
    """
    binding = {k: inst.find(v) for k, v in binding.items()} if binding else {}
    relational, filters, wanted, covered = _prepare(tuple(premise), tuple(universals))
    uncovered = wanted - covered - binding.keys()
    if not uncovered:
        wanted = frozenset()  # the relational atoms bind everything
    if since is None or not relational or uncovered:
        plans = [tuple((a, None) for a in relational)]
    else:
        plans = [((delta, "new"),) + tuple((a, "old" if j < k else None)
                                           for j, a in enumerate(relational) if j != k)
                 for k, delta in enumerate(relational)]
    simple = not filters and not wanted and _all_flat(tuple(relational))
    for plan in plans:
        if simple:
            steps, slots = _compile(plan, tuple(binding))
            env = [None] * len(slots)
            for k, var in enumerate(binding):
                env[k] = binding[var]
            for filled in _join(inst, steps, 0, env, since, ordered):
                yield dict(zip(slots, filled))
        else:
            yield from _match(inst, list(plan), 0, filters, binding, wanted, None, since, ordered)


# ---------------------------------------------------------------------------
# Compiled joins for premises made of relational atoms over variables and values.
# Variables get integer slots in a reusable list, which avoids copying a
# binding dict per candidate tuple.


@lru_cache(maxsize=4096)
def _all_flat(relational: tuple) -> bool:
    return all(type(a) in (Var, Const, Null) for atom in relational for a in atom.args)


@lru_cache(maxsize=4096)
def _compile(plan: tuple, bound: tuple):
    """Per atom: relation, arity, mode, probe positions and their sources,
    binding positions and repeated-variable checks; plus the variable of
    every slot."""
    slot = {v: k for k, v in enumerate(bound)}
    steps = []
    for atom, mode in plan:
        probes, binds, checks = [], [], []
        first = {}
        for pos, a in enumerate(atom.args):
            if type(a) is not Var:
                probes.append((pos, None, a))
            elif a in slot:
                probes.append((pos, slot[a], None))
            elif a in first:
                checks.append((first[a], pos))
            else:
                first[a] = pos
        for v, pos in first.items():
            slot[v] = len(slot)
            binds.append((pos, slot[v]))
        positions = tuple(pos for pos, _, _ in probes)
        steps.append((atom.rel, len(atom.args), mode, positions, tuple((s, c) for _, s, c in probes),
                      tuple(binds), tuple(checks)))
    return tuple(steps), tuple(slot)


def _join(inst, steps, k, env, since, ordered):
    if k == len(steps):
        yield env
        return
    rel, arity, mode, positions, sources, binds, checks = steps[k]
    if arity != (inst.arity(rel) or arity):
        return
    merged = inst.has_merges()
    values = tuple(env[s] if s is not None else (inst.find(c) if merged else c)
                   for s, c in sources)
    if not positions:
        candidates = None
    elif len(positions) == 1:
        candidates = inst.lookup(rel, positions[0], values[0])
    elif len(positions) == arity:
        candidates = (values,) if inst.contains(rel, values) else ()
    else:
        candidates = inst.lookup_many(rel, positions, values)
    if candidates is not None and not candidates:
        return
    if mode == "new":
        if candidates is None:
            candidates = inst.since(rel, since)
        else:
            candidates = [t for t in candidates if inst.timestamp(rel, t) >= since]
    elif candidates is None:
        candidates = inst.tuples(rel)
    if mode == "old":
        candidates = [t for t in candidates if inst.timestamp(rel, t) < since]
    candidates = sorted(candidates, key=tuple_key) if ordered else tuple(candidates)
    last = k + 1 == len(steps)
    for t in candidates:
        if checks and any(t[i] != t[j] for i, j in checks):
            continue
        for pos, s in binds:
            env[s] = t[pos]
        if last:
            yield env
        else:
            yield from _join(inst, steps, k + 1, env, since, ordered)


@lru_cache(maxsize=4096)
def _prepare(premise: tuple, universals: tuple):
    relational = [a for a in premise if isinstance(a, Atom) and not a.is_builtin]
    filters = [a for a in premise if not (isinstance(a, Atom) and not a.is_builtin)]
    wanted = set(universals)
    for a in premise:
        wanted |= free_vars(a)
    covered = set()
    for a in relational:
        covered |= free_vars(a)
    return relational, filters, frozenset(wanted), frozenset(covered)


def _apply_filters(inst, filters, binding):
    """Run ready filters; returns (binding, remaining) or None on failure."""
    remaining = list(filters)
    progress = True
    while progress:
        progress = False
        for atom in list(remaining):
            if _ready(atom, binding):
                if not _check_filter(inst, atom, binding):
                    return None
                remaining.remove(atom)
                progress = True
            elif isinstance(atom, Eq):
                for var_side, other in ((atom.left, atom.right), (atom.right, atom.left)):
                    if isinstance(var_side, Var) and var_side not in binding and \
                            not (term_vars(other) - binding.keys()):
                        try:
                            binding = dict(binding)
                            binding[var_side] = _value(inst, other, binding)
                        except EvaluationError:
                            return None
                        remaining.remove(atom)
                        progress = True
                        break
    return binding, remaining


def _candidates_for(inst, atom, mode, binding, since, ordered):
    rel = atom.rel
    positions = []
    values = []
    for pos, pattern in enumerate(atom.args):
        if type(pattern) is Var:
            probe = binding.get(pattern)
        else:
            probe = _probe(pattern, binding)
            if probe is not None:
                probe = inst.find(probe)
        if probe is not None:
            positions.append(pos)
            values.append(probe)
    if not positions:
        candidates = None
    elif len(positions) == 1:
        candidates = inst.lookup(rel, positions[0], values[0])
    elif len(positions) == len(atom.args):
        values = tuple(values)
        candidates = (values,) if inst.contains(rel, values) else ()
    else:
        candidates = inst.lookup_many(rel, tuple(positions), tuple(values))
    if candidates is not None and not candidates:
        return ()
    if mode == "new":
        if candidates is None:
            candidates = inst.since(rel, since)
        else:
            candidates = [t for t in candidates if inst.timestamp(rel, t) >= since]
    elif candidates is None:
        candidates = inst.tuples(rel)
    if mode == "old":
        candidates = [t for t in candidates if inst.timestamp(rel, t) < since]
    if ordered:
        return sorted(candidates, key=tuple_key)
    # copy so that facts added while the caller iterates do not disturb it
    return tuple(candidates)


def _match(inst, plan, i, filters, binding, wanted, adom, since, ordered):
    if filters:
        applied = _apply_filters(inst, filters, binding)
        if applied is None:
            return
        binding, filters = applied
    if i < len(plan):
        atom, mode = plan[i]
        args = atom.args
        if len(args) != (inst.arity(atom.rel) or len(args)):
            return
        last = i + 1 == len(plan) and not filters and not wanted
        for t in _candidates_for(inst, atom, mode, binding, since, ordered):
            b = binding
            copied = False
            for pattern, value in zip(args, t):
                if type(pattern) is Var:
                    # stored tuples and bindings are canonical, so plain equality suffices
                    bound = b.get(pattern)
                    if bound is None:
                        if not copied:
                            b = dict(b)
                            copied = True
                        b[pattern] = value
                        continue
                    if bound == value:
                        continue
                    b = None
                else:
                    b = _unify(inst, pattern, value, b)
                    copied = False
                if b is None:
                    break
            if b is not None:
                if last:
                    yield b
                else:
                    yield from _match(inst, plan, i + 1, filters, b, wanted, adom, since, ordered)
        return
    unbound = sorted((v for v in wanted if v not in binding), key=lambda v: v.name)
    if unbound:
        if adom is None:
            adom = inst.sorted_domain()
        v = unbound[0]
        for value in _domain_for(inst, v, adom):
            b = dict(binding)
            b[v] = value
            yield from _match(inst, plan, i, filters, b, wanted, adom, since, ordered)
        return
    if filters:
        return
    yield binding


# ---------------------------------------------------------------------------
# Homomorphisms


def find_homomorphism(src, dst) -> dict | None:
    """A map from the nulls of ``src`` into ``dst`` sending facts to facts.

    Constants map to themselves.  Backtracking search that always extends
    the fact with the fewest candidate images next.
    """
    facts = list(src.sorted_facts())
    for rel, t in facts:
        if not any(isinstance(v, Null) for v in t) and not dst.contains(rel, t):
            return None
    pending = [(rel, t) for rel, t in facts if any(isinstance(v, Null) for v in t)]
    result = _extend({}, pending, dst)
    if result is None:
        return None
    return result


def _candidates(rel, t, h, dst):
    best = None
    for i, v in enumerate(t):
        image = h.get(v, v) if isinstance(v, Null) else v
        if isinstance(v, Null) and v not in h:
            continue
        bucket = dst.lookup(rel, i, image)
        if best is None or len(bucket) < len(best):
            best = bucket
    if best is None:
        best = dst.tuples(rel)
    out = []
    for cand in best:
        ext = h
        ok = True
        for v, w in zip(t, cand):
            if isinstance(v, Null):
                seen = ext.get(v)
                if seen is None:
                    if ext is h:
                        ext = dict(h)
                    ext[v] = w
                elif seen != w:
                    ok = False
                    break
            elif v != w:
                ok = False
                break
        if ok:
            out.append(ext)
    return out


def _extend(h, pending, dst):
    if not pending:
        return h
    best_i, best_c = None, None
    for i, (rel, t) in enumerate(pending):
        c = _candidates(rel, t, h, dst)
        if not c:
            return None
        if best_c is None or len(c) < len(best_c):
            best_i, best_c = i, c
            if len(c) == 1:
                break
    rest = pending[:best_i] + pending[best_i + 1:]
    for ext in best_c:
        found = _extend(ext, rest, dst)
        if found is not None:
            return found
    return None


def hom_equivalent(i1, i2) -> bool:
    return find_homomorphism(i1, i2) is not None and find_homomorphism(i2, i1) is not None
