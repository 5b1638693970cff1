"""The standard (restricted) chase over existential Horn clauses."""
from __future__ import annotations

import logging
import os
import random
from dataclasses import dataclass, field

from .evaluator import match
from .instance import ChaseFailure, Instance, disjoint_union_with_renaming
from .logic import (
    And, Atom, ClassifyError, Dependency, Eq, EvaluationError, Null, Var, classify, eval_term, free_vars,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 100_000
DEFAULT_MAX_NULLS = 100_000

FIXPOINT = "fixpoint"
FAILURE = "failure"
LIMIT = "limit"


def default_max_steps() -> int:
    return int(os.environ.get("HORNCHASE_MAX_STEPS", DEFAULT_MAX_STEPS))


@dataclass
class ChaseConfig:
    max_steps: int = field(default_factory=default_max_steps)
    max_nulls: int = DEFAULT_MAX_NULLS
    # when set, dependency and trigger order are shuffled with this seed
    seed: int | None = None

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_nulls <= 0:
            raise ValueError("chase limits must be positive")


@dataclass
class ChaseResult:
    instance: Instance
    outcome: str
    steps: int = 0
    nulls_created: int = 0
    failed_dependency: Dependency | None = None
    failed_values: tuple = ()

    @property
    def ok(self) -> bool:
        return self.outcome == FIXPOINT


class TriggerError(RuntimeError):
    """A conclusion term could not be evaluated for a trigger."""


def _premise_holds(inst, dep, binding) -> bool:
    return next(match(inst, dep.premise, dep.universals, binding), None) is not None


def _ground_holds(inst, atom, binding) -> bool:
    if isinstance(atom, Eq):
        return inst.find(eval_term(atom.left, binding)) == inst.find(eval_term(atom.right, binding))
    args = tuple(binding[a] if type(a) is Var and a in binding else eval_term(a, binding)
                 for a in atom.args)
    if inst.has_merges():
        args = tuple(map(inst.find, args))
    return inst.contains(atom.rel, args)


def is_active(inst, dep: Dependency, binding: dict) -> bool:
    """True when no extension of ``binding`` satisfies the conclusion."""
    try:
        if not dep.existentials:
            return not all(_ground_holds(inst, a, binding) for a in dep.conclusion)
        frontier = {v: binding[v] for v in dep.universals if v in binding}
        return next(match(inst, dep.conclusion, (), frontier, ordered=False), None) is None
    except EvaluationError as exc:
        raise TriggerError(f"{dep.name}: {exc}") from None


def _fire(inst, dep, binding) -> int:
    env = dict(binding)
    created = 0
    for y in dep.existentials:
        env[y] = inst.fresh_null()
        created += 1
    try:
        for atom in dep.conclusion:
            if isinstance(atom, Atom):
                inst.add(atom.rel, tuple(eval_term(a, env) for a in atom.args))
        for atom in dep.conclusion:
            if isinstance(atom, Eq):
                inst.merge(eval_term(atom.left, env), eval_term(atom.right, env), dep)
                env = {k: inst.find(v) for k, v in env.items()}
    except EvaluationError as exc:
        shown = {v.name: env[v] for v in dep.universals if v in env}
        raise TriggerError(f"{dep.name} with {shown}: {exc}") from None
    return created


class _Budget(Exception):
    pass


def chase(inst: Instance, deps, config: ChaseConfig | None = None) -> ChaseResult:
    """Chase a copy of ``inst`` with ``deps`` until fixpoint, failure or budget.

    Dependencies are visited round-robin; each visit collects the current
    triggers in match order and fires those that are still active.  Before
    each TGD with existentials is visited, the EGDs are applied to saturation so
    that no existential TGD ever fires on two values already forced equal.
    """
    config = config or ChaseConfig()
    work = inst.copy()
    rng = random.Random(config.seed) if config.seed is not None else None
    deps = list(deps)
    egds = [k for k, d in enumerate(deps) if not d.is_tgd]
    counters = {"steps": 0, "created": 0}
    seen: dict = {}  # dependency index -> clock at its previous visit

    def shuffled(items):
        items = list(items)
        if rng is not None:
            rng.shuffle(items)
        return items

    def visit(k) -> bool:
        dep = deps[k]
        fired = False
        epoch = work.merge_count
        since = seen.get(k)
        seen[k] = work.clock
        triggers = match(work, dep.premise, dep.universals, since=since, ordered=False)
        for binding in shuffled(triggers):
            if work.merge_count != epoch:
                # a merge may have invalidated this match; canonicalize and re-check
                binding = {k: work.find(v) for k, v in binding.items()}
                if dep.premise and not _premise_holds(work, dep, binding):
                    continue
            if not is_active(work, dep, binding):
                continue
            if counters["steps"] >= config.max_steps or \
                    counters["created"] + len(dep.existentials) > config.max_nulls:
                raise _Budget()
            counters["created"] += _fire(work, dep, binding)
            counters["steps"] += 1
            fired = True
        return fired

    dirty = [True]

    def saturate():
        if not dirty[0]:
            return
        while any([visit(e) for e in shuffled(egds)]):
            pass
        dirty[0] = False

    try:
        while True:
            fired = False
            for k in shuffled(range(len(deps))):
                if deps[k].existentials:
                    saturate()
                if visit(k):
                    fired = dirty[0] = True
            if not fired:
                return ChaseResult(work, FIXPOINT, counters["steps"], counters["created"])
    except _Budget:
        log.info("chase budget exhausted after %d steps", counters["steps"])
        return ChaseResult(work, LIMIT, counters["steps"], counters["created"])
    except ChaseFailure as exc:
        return ChaseResult(work, FAILURE, counters["steps"] + 1, counters["created"],
                           exc.dependency, (exc.left, exc.right))


def active_triggers(inst: Instance, deps):
    for dep in deps:
        for binding in match(inst, dep.premise, dep.universals, ordered=False):
            if is_active(inst, dep, binding):
                yield dep, binding


def chase_check(inst: Instance, deps) -> bool:
    """True iff the instance has no active trigger, i.e. satisfies every dependency."""
    return next(active_triggers(inst, deps), None) is None


def _h_equalities(name):
    x, y = Var("x"), Var("y")
    return Dependency(name, (x, y), (Atom(name, (x, y)),), (), (Eq(x, y),))


def pushout(d: Instance, r: Instance, h_kd, h_kr, config: ChaseConfig | None = None) -> ChaseResult:
    """Amalgamate ``d`` and ``r`` along an overlap given as two binary relations.

    ``h_kd`` and ``h_kr`` are pairs ``(k, v)`` sending an overlap value ``k``
    to a value of ``d`` (resp. ``r``).  Nulls are local to each instance;
    overlap nulls are renamed apart from both.
    """
    union, renaming = disjoint_union_with_renaming(d, r)
    k_renaming: dict = {}

    def overlap(v):
        if isinstance(v, Null):
            if v not in k_renaming:
                k_renaming[v] = union.fresh_null()
            return k_renaming[v]
        return v

    for k, v in h_kd:
        union.add("$h_kd", (overlap(k), v))
    for k, v in h_kr:
        union.add("$h_kr", (overlap(k), renaming.get(v, v)))
    deps = [_h_equalities("$h_kd"), _h_equalities("$h_kr")]
    result = chase(union, deps, config)
    result.instance.remove_relation("$h_kd")
    result.instance.remove_relation("$h_kr")
    return result


def _flatten(f):
    if isinstance(f, And):
        for p in f.parts:
            yield from _flatten(p)
    else:
        yield f


def load_theory(units) -> list:
    """Classify every axiom unit of a parsed TPTP file.

    A unit that is a conjunction of closed sentences (a rule together with
    some facts, say) contributes one dependency per conjunct, named
    ``<unit>_1``, ``<unit>_2``, ...
    """
    deps = []
    for u in units:
        if u.role != "axiom":
            continue
        try:
            deps.append(classify(u.payload, u.name))
        except ClassifyError:
            parts = list(_flatten(u.payload))
            if len(parts) < 2 or any(free_vars(p) for p in parts):
                raise
            deps.extend(classify(p, f"{u.name}_{k}") for k, p in enumerate(parts, 1))
    return deps
