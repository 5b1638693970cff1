"""A small first-order rewriting interpreter for point-in-polygon programs.

Rules are written in a Haskell-like equational syntax::

    crossProduct (Edge x1 y1 x2 y2) = (x1*y2) - (y1*x2)

Capitalized names are constructors, lowercase heads of left-hand sides are
defined symbols, and other lowercase names on a left-hand side are pattern
variables.  Integers are exact Python ints; ``True``/``False`` are the
boolean constructors.  Builtins: ``+ - * >= &&``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .instance import Instance
from .logic import string

DEFAULT_BUDGET = 1_000_000


class RewriteError(RuntimeError):
    pass


class RewriteSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class RVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class RApp:
    head: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.head
        if self.head in _BINOPS:
            return f"{_show_arg(self.args[0])} {self.head} {_show_arg(self.args[1])}"
        return f"{self.head} " + " ".join(_show_arg(a) for a in self.args)


def _show_arg(t):
    if isinstance(t, str):
        return f'"{t}"'
    if isinstance(t, RApp) and t.args:
        return f"({t})"
    if isinstance(t, int) and t < 0:
        return f"({t})"
    return str(t)


TRUE = RApp("True")
FALSE = RApp("False")


@dataclass(frozen=True)
class Rule:
    head: str
    patterns: tuple
    rhs: object

    def __str__(self):
        lhs = RApp(self.head, self.patterns)
        return f"{lhs} = {self.rhs}"


@dataclass
class RewriteSystem:
    rules: dict  # defined symbol -> list of Rule, in source order

    @property
    def defined(self) -> set:
        return set(self.rules)

    def constructors(self) -> set:
        out = set()

        def walk(t):
            if isinstance(t, RApp):
                if t.head not in self.rules and t.head not in _BINOPS:
                    out.add(t.head)
                for a in t.args:
                    walk(a)
        for rs in self.rules.values():
            for r in rs:
                for p in r.patterns:
                    walk(p)
                walk(r.rhs)
        return out


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_']*)|(&&|>=|[-+*()=])|(\"[^\"]*\"))")

# binary operators, loosest first; && is right-associative
_BINOPS = {"&&": 1, ">=": 2, "+": 3, "-": 3, "*": 4}


def _tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise RewriteSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("name", m.group(2)))
        elif m.group(3):
            out.append(("op", m.group(3)))
        else:
            out.append(("str", m.group(4)[1:-1]))
        pos = m.end()
    return out


class _ExprParser:
    def __init__(self, toks, variables):
        self.toks = toks
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def expr(self, min_prec=1):
        left = self.application()
        while True:
            kind, val = self.peek()
            if kind != "op" or val not in _BINOPS or _BINOPS[val] < min_prec:
                return left
            self.i += 1
            prec = _BINOPS[val]
            right = self.expr(prec if val == "&&" else prec + 1)
            left = RApp(val, (left, right))

    def application(self):
        kind, val = self.peek()
        if kind == "name" and not self._is_var(val):
            self.i += 1
            args = []
            while self._starts_atom():
                args.append(self.atom())
            return RApp(val, tuple(args))
        return self.atom()

    def _is_var(self, name):
        return name in self.variables

    def _starts_atom(self):
        kind, val = self.peek()
        return kind in ("int", "name", "str") or (kind, val) == ("op", "(")

    def atom(self):
        kind, val = self.peek()
        if kind is None:
            raise RewriteSyntaxError("unexpected end of expression")
        self.i += 1
        if kind == "int" or kind == "str":
            return val
        if kind == "name":
            return RVar(val) if self._is_var(val) else RApp(val)
        if val == "(":
            e = self.expr()
            if self.peek() != ("op", ")"):
                raise RewriteSyntaxError("expected ')'")
            self.i += 1
            return e
        raise RewriteSyntaxError(f"unexpected {val!r}")


def _lhs_variables(toks):
    return {v for k, v in toks[1:] if k == "name" and v[0].islower()}


def _logical_lines(text):
    lines = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("--"):
            continue
        if raw[0].isspace() and lines:
            lines[-1] += " " + raw.strip()
        else:
            lines.append(raw.strip())
    return lines


def parse_rules(text: str) -> RewriteSystem:
    """Parse equations ``lhs = rhs``; continuation lines start with whitespace."""
    rules: dict = {}
    for line in _logical_lines(text):
        toks = _tokenize(line)
        try:
            eq = toks.index(("op", "="))
        except ValueError:
            raise RewriteSyntaxError(f"missing '=' in rule: {line}") from None
        lhs_toks, rhs_toks = toks[:eq], toks[eq + 1:]
        if not lhs_toks or lhs_toks[0][0] != "name" or not lhs_toks[0][1][0].islower():
            raise RewriteSyntaxError(f"left-hand side must start with a defined symbol: {line}")
        variables = _lhs_variables(lhs_toks)
        p = _ExprParser(lhs_toks, variables)
        head = lhs_toks[0][1]
        p.i = 1
        patterns = []
        while p._starts_atom():
            patterns.append(p.atom())
        if p.i != len(lhs_toks):
            raise RewriteSyntaxError(f"malformed left-hand side: {line}")
        q = _ExprParser(rhs_toks, variables)
        rhs = q.expr()
        if q.i != len(rhs_toks):
            raise RewriteSyntaxError(f"trailing tokens in right-hand side: {line}")
        unbound = _vars(rhs) - set().union(*(_vars(x) for x in patterns)) if patterns else _vars(rhs)
        if unbound:
            raise RewriteSyntaxError(f"right-hand side variables {sorted(unbound)} not bound on the left: {line}")
        rules.setdefault(head, []).append(Rule(head, tuple(patterns), rhs))
    for rs in rules.values():
        for rule in rs:
            unknown = _calls(rule.rhs) - set(rules) - _NATIVE
            if unknown:
                raise RewriteSyntaxError(f"right-hand side calls undefined {sorted(unknown)}: {rule}")
    return RewriteSystem(rules)


_NATIVE = {"stringToPointList"}


def _calls(t) -> set:
    """Lowercase (defined) heads applied anywhere in ``t``."""
    if not isinstance(t, RApp):
        return set()
    out = {t.head} if t.head[0].islower() else set()
    for a in t.args:
        out |= _calls(a)
    return out


def parse_term(text: str):
    """Parse a ground term; lowercase names are treated as defined symbols."""
    toks = _tokenize(text)
    p = _ExprParser(toks, set())
    t = p.expr()
    if p.i != len(toks):
        raise RewriteSyntaxError(f"trailing tokens in term: {text}")
    return t


def _vars(t) -> set:
    if isinstance(t, RVar):
        return {t.name}
    if isinstance(t, RApp):
        return set().union(*(_vars(a) for a in t.args)) if t.args else set()
    return set()


def polygon_program() -> RewriteSystem:
    text = resources.files("hornchase").joinpath("data/polygon.eq").read_text()
    return parse_rules(text)


# ---------------------------------------------------------------------------
# Evaluation


def _match(pattern, term, env) -> bool:
    if isinstance(pattern, RVar):
        if pattern.name in env:
            return env[pattern.name] == term
        env[pattern.name] = term
        return True
    if isinstance(pattern, RApp):
        return (isinstance(term, RApp) and term.head == pattern.head
                and len(term.args) == len(pattern.args)
                and all(_match(p, a, env) for p, a in zip(pattern.args, term.args)))
    return type(pattern) is type(term) and pattern == term


def _subst(t, env):
    if isinstance(t, RVar):
        return env[t.name]
    if isinstance(t, RApp) and t.args:
        return RApp(t.head, tuple(_subst(a, env) for a in t.args))
    return t


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _builtin(head, args):
    if head in ("+", "-", "*", ">="):
        a, b = args
        if not (_is_int(a) and _is_int(b)):
            return None
        if head == "+":
            return a + b
        if head == "-":
            return a - b
        if head == "*":
            return a * b
        return TRUE if a >= b else FALSE
    if head == "&&":
        a, b = args
        if a in (TRUE, FALSE) and b in (TRUE, FALSE):
            return TRUE if (a == TRUE and b == TRUE) else FALSE
        return None
    if head == "stringToPointList" and len(args) == 1 and isinstance(args[0], str):
        return string_to_point_list(args[0])
    return None


class _Budget:
    def __init__(self, limit):
        self.left = limit

    def tick(self, redex):
        self.left -= 1
        if self.left < 0:
            raise RewriteError(f"rewrite budget exceeded at {redex}")


def normalize(t, rs: RewriteSystem, budget: int = DEFAULT_BUDGET):
    """Leftmost-innermost normal form of a ground term."""
    return _norm(t, rs, _Budget(budget))


def _norm(t, rs, budget):
    while True:
        if not isinstance(t, RApp):
            return t
        args = tuple(_norm(a, rs, budget) for a in t.args)
        t = RApp(t.head, args)
        if t.head in _BINOPS or t.head == "stringToPointList":
            value = _builtin(t.head, args)
            if value is None:
                raise RewriteError(f"stuck builtin application: {t}")
            budget.tick(t)
            return value
        rules = rs.rules.get(t.head)
        if rules is None:
            if t.head[0].islower():
                raise RewriteError(f"no rules for symbol {t.head}")
            return t
        for rule in rules:
            env: dict = {}
            if len(rule.patterns) == len(args) and all(
                    _match(p, a, env) for p, a in zip(rule.patterns, args)):
                budget.tick(t)
                t = _subst(rule.rhs, env)
                break
        else:
            raise RewriteError(f"no rule applies to stuck term: {t}")


# ---------------------------------------------------------------------------
# Native helpers


def point(x: int, y: int) -> RApp:
    return RApp("Point", (x, y))


def point_list(points) -> RApp:
    out = RApp("PointListNil")
    for x, y in reversed(list(points)):
        out = RApp("PointListCons", (point(x, y), out))
    return out


def parse_points(s: str) -> list:
    tokens = s.split()
    if len(tokens) % 2:
        raise ValueError(f"odd number of coordinates in {s!r}")
    try:
        nums = [int(tok) for tok in tokens]
    except ValueError:
        raise ValueError(f"non-integer coordinate in {s!r}") from None
    return list(zip(nums[0::2], nums[1::2]))


def string_to_point_list(s: str) -> RApp:
    return point_list(parse_points(s))


def signed_area2(points) -> int:
    """Twice the signed (shoelace) area; positive for counter-clockwise rings."""
    pts = list(points)
    return sum(x1 * y2 - x2 * y1 for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]))


def counter_clockwise(points) -> list:
    pts = list(points)
    return pts[::-1] if signed_area2(pts) < 0 else pts


def point_in_polygon(p, ring, rs: RewriteSystem | None = None) -> bool:
    """Evaluate ``pointInPointList`` after orienting the ring counter-clockwise.

    ``ring`` is a posList string or a sequence of integer pairs.
    """
    rs = rs or polygon_program()
    pts = parse_points(ring) if isinstance(ring, str) else list(ring)
    term = RApp("pointInPointList", (point(*p), point_list(counter_clockwise(pts))))
    result = normalize(term, rs)
    if result not in (TRUE, FALSE):
        raise RewriteError(f"pointInPointList did not reduce to a boolean: {result}")
    return result == TRUE


def grid_points(x0, y0, x1, y1, step=1) -> list:
    if step <= 0:
        raise ValueError("grid step must be positive")
    return [(x, y) for x in range(x0, x1 + 1, step) for y in range(y0, y1 + 1, step)]


def point_name(p) -> str:
    return f"{p[0]} {p[1]}"


def partition_from_rings(rings, grid, rs: RewriteSystem | None = None) -> Instance:
    """Facts ``equiv_<lr>(p, q)`` for grid points on the same side of ring ``lr``.

    ``rings`` is a list of ``(name, posList)``; ``grid`` is
    ``(x0, y0, x1, y1, step)`` (inclusive bounds) or an explicit point list.
    Points are string constants ``"x y"``.
    """
    rs = rs or polygon_program()
    points = grid_points(*grid) if isinstance(grid, tuple) and len(grid) == 5 \
        and all(isinstance(g, int) for g in grid) else list(grid)
    inst = Instance()
    for name, pos_list in rings:
        rel = f"equiv_{name}"
        inst.declare(rel, 2)
        inside = {p: point_in_polygon(p, pos_list, rs) for p in points}
        for p in points:
            for q in points:
                if inside[p] == inside[q]:
                    inst.add(rel, (string(point_name(p)), string(point_name(q))))
    return inst
