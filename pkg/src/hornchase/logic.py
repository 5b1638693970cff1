"""Terms, formulas, signatures and the existential-Horn-clause fragment."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Iterator, Union


# ---------------------------------------------------------------------------
# Terms


_VAR_POOL: dict = {}


@dataclass(frozen=True)
class Var:
    name: str
    sort: str | None = None

    def __new__(cls, name, sort=None):
        # one object per (name, sort) so dict lookups mostly hit on identity
        key = (name.lower(), sort)
        v = _VAR_POOL.get(key)
        if v is None:
            v = _VAR_POOL[key] = object.__new__(cls)
        return v

    def __reduce__(self):
        return (Var, (self.name, self.sort))

    def __post_init__(self):
        # variable names are case-insensitive internally
        object.__setattr__(self, "name", self.name.lower())
        object.__setattr__(self, "_hash", hash(("var", self.name)))

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name if self.sort is None else f"{self.name}:{self.sort}"


_CONST_POOL: dict = {}
_NULL_POOL: dict = {}


@dataclass(frozen=True, eq=False)
class Const:
    """A constant domain value: a symbol, a string literal, or an integer.

    Constants are interned, so equality and hashing are by identity and run
    at C speed inside the instance indexes.
    """

    value: str | int
    is_string: bool = False

    def __new__(cls, value, is_string=False):
        key = (type(value), value, is_string)
        c = _CONST_POOL.get(key)
        if c is None:
            c = _CONST_POOL[key] = object.__new__(cls)
        return c

    def __reduce__(self):
        return (Const, (self.value, self.is_string))

    def __repr__(self):
        if isinstance(self.value, int):
            return str(self.value)
        return f'"{self.value}"' if self.is_string else str(self.value)


@dataclass(frozen=True, eq=False)
class Null:
    """A labelled null (blank node), interned like :class:`Const`."""

    id: int

    def __new__(cls, id):
        n = _NULL_POOL.get(id)
        if n is None:
            n = _NULL_POOL[id] = object.__new__(cls)
        return n

    def __reduce__(self):
        return (Null, (self.id,))

    def __repr__(self):
        return f"_:n{self.id}"


def _cached_hash(obj, fields):
    """Hash of a frozen node, computed once; nodes are hashed often as cache keys."""
    try:
        return obj.__dict__["_hash"]
    except KeyError:
        h = hash((type(obj).__name__,) + fields)
        object.__setattr__(obj, "_hash", h)
        return h


def _without_hash(obj):
    # string hashes differ between processes, so a cached hash is never pickled
    state = dict(obj.__dict__)
    state.pop("_hash", None)
    return state


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple = ()

    def __hash__(self):
        return _cached_hash(self, (self.fn, self.args))

    def __getstate__(self):
        return _without_hash(self)

    def __repr__(self):
        return f"{self.fn}({', '.join(map(repr, self.args))})"


Term = Union[Var, Const, Null, App]
Value = Union[Const, Null]


def sym(name: str) -> Const:
    return Const(name)


def string(text: str) -> Const:
    return Const(text, True)


def value_key(v) -> tuple:
    """Total order over domain values: integers, symbols, strings, nulls."""
    if isinstance(v, Null):
        return (3, v.id, "")
    if isinstance(v.value, int):
        return (0, v.value, "")
    return (2 if v.is_string else 1, 0, v.value)


def tuple_key(t: tuple) -> tuple:
    return tuple(value_key(v) for v in t)


# Interpreted function symbols.  All of them reduce on constants only.

def _concat(a: Const, b: Const) -> Const:
    return string(f"{a.value} {b.value}")


def _int_op(op):
    def apply(a: Const, b: Const) -> Const:
        if not (isinstance(a.value, int) and isinstance(b.value, int)):
            raise EvaluationError(f"integer operation on non-integers {a!r}, {b!r}")
        return Const(op(a.value, b.value))
    return apply


BUILTIN_FUNCTIONS = {
    "$concat": _concat,
    "$sum": _int_op(lambda x, y: x + y),
    "$difference": _int_op(lambda x, y: x - y),
    "$product": _int_op(lambda x, y: x * y),
}

BUILTIN_PREDICATES = {
    "$less": lambda x, y: x < y,
    "$lesseq": lambda x, y: x <= y,
    "$greater": lambda x, y: x > y,
    "$greatereq": lambda x, y: x >= y,
}


class EvaluationError(Exception):
    pass


def eval_term(t: Term, env: dict | None = None) -> Value:
    """Evaluate a term under a variable binding; builtin functions reduce on constants."""
    if isinstance(t, Var):
        if env is None or t not in env:
            raise EvaluationError(f"unbound variable {t.name}")
        return env[t]
    if isinstance(t, (Const, Null)):
        return t
    fn = BUILTIN_FUNCTIONS.get(t.fn)
    if fn is None:
        raise EvaluationError(f"uninterpreted function symbol {t.fn}")
    args = [eval_term(a, env) for a in t.args]
    if any(isinstance(a, Null) for a in args):
        raise EvaluationError(f"{t.fn} applied to a labelled null")
    return fn(*args)


def eval_builtin(pred: str, args: list) -> bool:
    if any(isinstance(a, Null) for a in args):
        return False
    vals = [a.value for a in args]
    if any(not isinstance(v, int) for v in vals):
        return False
    return BUILTIN_PREDICATES[pred](*vals)


def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    return set()


def concat_leaves(t: Term) -> list:
    """Flatten nested ``$concat`` applications into their leaf terms."""
    if isinstance(t, App) and t.fn == "$concat":
        return [leaf for a in t.args for leaf in concat_leaves(a)]
    return [t]


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple = ()

    def __hash__(self):
        return _cached_hash(self, (self.rel, self.args))

    def __getstate__(self):
        return _without_hash(self)

    @property
    def is_builtin(self) -> bool:
        return self.rel in BUILTIN_PREDICATES


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __hash__(self):
        return _cached_hash(self, (self.left, self.right))

    def __getstate__(self):
        return _without_hash(self)


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: "Formula"


Formula = Union[Atom, Eq, Truth, Not, And, Or, Implies, Iff, Forall, Exists]


def conj(parts: Iterable) -> Formula:
    parts = tuple(parts)
    if not parts:
        return Truth(True)
    return parts[0] if len(parts) == 1 else And(parts)


def free_vars(f: Formula) -> set:
    if isinstance(f, Atom):
        out = set()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Eq):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Truth):
        return set()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, (Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from subformulas(f.body)


def alpha_equal(f: Formula, g: Formula) -> bool:
    """Syntactic equality up to renaming of bound variables."""
    return _alpha(f, g, {}, {}, count())


def _alpha_term(s, t, ls, rs) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        if s in ls or t in rs:
            return ls.get(s) == rs.get(t) and ls.get(s) is not None
        return s == t
    if isinstance(s, App) and isinstance(t, App):
        return (s.fn == t.fn and len(s.args) == len(t.args)
                and all(_alpha_term(a, b, ls, rs) for a, b in zip(s.args, t.args)))
    return type(s) is type(t) and s == t


def _alpha(f, g, ls, rs, ctr) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        return (f.rel == g.rel and len(f.args) == len(g.args)
                and all(_alpha_term(a, b, ls, rs) for a, b in zip(f.args, g.args)))
    if isinstance(f, Eq):
        return _alpha_term(f.left, g.left, ls, rs) and _alpha_term(f.right, g.right, ls, rs)
    if isinstance(f, Truth):
        return f.value == g.value
    if isinstance(f, Not):
        return _alpha(f.body, g.body, ls, rs, ctr)
    if isinstance(f, (And, Or)):
        return len(f.parts) == len(g.parts) and all(
            _alpha(a, b, ls, rs, ctr) for a, b in zip(f.parts, g.parts))
    if isinstance(f, (Implies, Iff)):
        return _alpha(f.left, g.left, ls, rs, ctr) and _alpha(f.right, g.right, ls, rs, ctr)
    if len(f.vars) != len(g.vars):
        return False
    ls2, rs2 = dict(ls), dict(rs)
    for a, b in zip(f.vars, g.vars):
        k = next(ctr)
        ls2[a] = k
        rs2[b] = k
    return _alpha(f.body, g.body, ls2, rs2, ctr)


# ---------------------------------------------------------------------------
# Signatures


@dataclass
class Signature:
    """Relation and function symbols with arities; sorts are optional."""

    relations: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    sorts: set = field(default_factory=set)
    # symbol -> tuple of argument sorts
    arg_sorts: dict = field(default_factory=dict)

    def add_relation(self, name, arity, sorts=None):
        if arity < 0:
            raise ValueError(f"negative arity for {name}")
        self.relations[name] = arity
        if sorts is not None:
            self.arg_sorts[name] = tuple(sorts)

    def add_function(self, name, arity, sorts=None):
        if arity < 0:
            raise ValueError(f"negative arity for {name}")
        self.functions[name] = arity
        if sorts is not None:
            self.arg_sorts[name] = tuple(sorts)

    @classmethod
    def infer(cls, formulas: Iterable[Formula]) -> "Signature":
        sig = cls()

        def visit_term(t):
            if isinstance(t, App):
                sig.functions.setdefault(t.fn, len(t.args))
                for a in t.args:
                    visit_term(a)

        for f in formulas:
            for sub in subformulas(f):
                if isinstance(sub, Atom) and not sub.is_builtin:
                    sig.relations.setdefault(sub.rel, len(sub.args))
                if isinstance(sub, Atom):
                    for a in sub.args:
                        visit_term(a)
                elif isinstance(sub, Eq):
                    visit_term(sub.left)
                    visit_term(sub.right)
        return sig


def well_formed(f: Formula, sig: Signature) -> str | None:
    """Return None when every atom matches the signature, else a diagnostic.

    Never raises: arbitrary (even malformed) trees produce a diagnostic.
    """
    try:
        return _check_formula(f, sig)
    except Exception as exc:  # malformed trees of unexpected shape
        return f"malformed formula: {exc}"


def _check_args(symbol, args, sig, expected_arity):
    if len(args) != expected_arity:
        return f"arity mismatch: {symbol} expects {expected_arity} arguments, got {len(args)}"
    wanted = sig.arg_sorts.get(symbol)
    for i, a in enumerate(args):
        if isinstance(a, App):
            problem = _check_term(a, sig)
            if problem:
                return problem
        if wanted and isinstance(a, Var) and a.sort is not None and a.sort != wanted[i]:
            return (f"sort mismatch: argument {i + 1} of {symbol} is {a.name}: {a.sort}, "
                    f"expected {wanted[i]}")
    return None


def _check_term(t, sig):
    if not isinstance(t, App):
        if isinstance(t, (Var, Const, Null)):
            return None
        return f"not a term: {t!r}"
    if t.fn in BUILTIN_FUNCTIONS:
        return _check_args(t.fn, t.args, sig, 2)
    if t.fn not in sig.functions:
        return f"unknown function symbol {t.fn}"
    return _check_args(t.fn, t.args, sig, sig.functions[t.fn])


def _check_formula(f, sig):
    if isinstance(f, Atom):
        if f.is_builtin:
            return _check_args(f.rel, f.args, sig, 2)
        if f.rel not in sig.relations:
            return f"unknown relation symbol {f.rel}"
        return _check_args(f.rel, f.args, sig, sig.relations[f.rel])
    if isinstance(f, Eq):
        return _check_term(f.left, sig) or _check_term(f.right, sig)
    if isinstance(f, Truth):
        return None
    if isinstance(f, Not):
        return _check_formula(f.body, sig)
    if isinstance(f, (And, Or)):
        for p in f.parts:
            problem = _check_formula(p, sig)
            if problem:
                return problem
        return None
    if isinstance(f, (Implies, Iff)):
        return _check_formula(f.left, sig) or _check_formula(f.right, sig)
    if isinstance(f, (Forall, Exists)):
        for v in f.vars:
            if v.sort is not None and sig.sorts and v.sort not in sig.sorts:
                return f"unknown sort {v.sort} for variable {v.name}"
        return _check_formula(f.body, sig)
    return f"not a formula: {f!r}"


# ---------------------------------------------------------------------------
# Existential Horn clauses


class ClassifyError(ValueError):
    """A sentence outside the existential-Horn-clause fragment."""

    def __init__(self, message, subformula=None):
        super().__init__(message)
        self.subformula = subformula


@dataclass(frozen=True)
class Dependency:
    """forall universals, premise -> exists existentials, conclusion."""

    name: str
    universals: tuple
    premise: tuple
    existentials: tuple
    conclusion: tuple

    @property
    def kind(self) -> str:
        return "TGD" if any(isinstance(a, Atom) for a in self.conclusion) else "EGD"

    @property
    def is_tgd(self) -> bool:
        return self.kind == "TGD"

    def sentence(self) -> Formula:
        """Re-expand into a closed first-order sentence."""
        body = conj(self.conclusion)
        if self.existentials:
            body = Exists(self.existentials, body)
        if self.premise:
            body = Implies(conj(self.premise), body)
        if self.universals:
            body = Forall(self.universals, body)
        return body

    def __str__(self):
        from .tptp import format_formula
        return f"{self.name}: {format_formula(self.sentence())}"


_CONNECTIVE_NAMES = {
    Or: "disjunction (∨, DL ⊔)",
    Not: "negation (¬)",
    Iff: "biconditional (⇔)",
    Implies: "nested implication",
    Forall: "universal quantifier",
    Exists: "existential quantifier",
}


def _describe(f) -> str:
    from .tptp import format_formula
    try:
        return format_formula(f)
    except Exception:
        return repr(f)


def _conjuncts(f: Formula, where: str, hoisted: list) -> list:
    """Flatten a conjunction; inner existentials are moved to ``hoisted``.

    ``(exists y, a) -> b`` is ``forall y, a -> b`` and ``c & exists y, d`` is
    ``exists y, c & d`` when y is not free in c, so both are prenexed; a name
    clash shows up later as a variable bound twice.
    """
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(_conjuncts(p, where, hoisted))
        return out
    if isinstance(f, Exists):
        hoisted.extend(f.vars)
        return _conjuncts(f.body, where, hoisted)
    if isinstance(f, Truth):
        if f.value:
            return []
        raise ClassifyError(f"$false is not allowed in the {where}", f)
    if isinstance(f, Eq):
        return [f]
    if isinstance(f, Atom):
        if f.is_builtin and where != "premise":
            raise ClassifyError(f"builtin predicate {f.rel} only allowed in premises", f)
        return [f]
    if isinstance(f, Not) and isinstance(f.body, Eq) and where == "premise":
        return [f]
    name = _CONNECTIVE_NAMES.get(type(f), type(f).__name__)
    raise ClassifyError(f"{name} is not allowed in the {where} of an existential Horn clause: "
                        f"{_describe(f)}", f)


def classify(sentence: Formula, name: str = "dep") -> Dependency:
    """Recognise ``forall xs, phi -> exists ys, psi``; raise ClassifyError otherwise."""
    free = free_vars(sentence)
    if free:
        names = ", ".join(sorted(v.name for v in free))
        raise ClassifyError(f"sentence is not closed (free: {names})", sentence)
    universals: list = []
    body = sentence
    while isinstance(body, Forall):
        universals.extend(body.vars)
        body = body.body
    if isinstance(body, Implies):
        premise = _conjuncts(body.left, "premise", universals)
        rest = body.right
    else:
        premise = []
        rest = body
    existentials: list = []
    while isinstance(rest, Exists):
        existentials.extend(rest.vars)
        rest = rest.body
    if isinstance(rest, Forall):
        raise ClassifyError(f"universal quantifier in conclusion: {_describe(rest)}", rest)
    conclusion = _conjuncts(rest, "conclusion", existentials)

    bound = set(universals)
    if len(bound) != len(universals) or len(set(existentials)) != len(existentials) \
            or set(existentials) & bound:
        raise ClassifyError("variable bound twice", sentence)
    used = set()
    for a in conclusion:
        used |= free_vars(a)
    if used - bound - set(existentials):
        raise ClassifyError("conclusion mentions unbound variables", sentence)
    for a in conclusion:
        for t in (a.args if isinstance(a, Atom) else (a.left, a.right)):
            if isinstance(t, App) and term_vars(t) & set(existentials):
                raise ClassifyError(
                    f"function term over an existential variable: {_describe(a)}", a)
    return Dependency(name, tuple(universals), tuple(premise), tuple(existentials),
                      tuple(conclusion))
