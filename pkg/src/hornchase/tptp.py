"""Reader and writer for the fof/tff subset of TPTP and for ``.facts`` files."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .logic import (
    And, App, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Null, Or,
    Signature, Truth, Var,
)

ROLES = ("axiom", "conjecture", "type")
BUILTIN_SORTS = {"$i", "$o", "$int", "$tType"}


class TptpSyntaxError(ValueError):
    def __init__(self, message, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class TypeDecl:
    """``symbol: (s1 * ... * sn) > result``; result ``$tType`` declares a sort."""

    symbol: str
    arg_sorts: tuple
    result: str

    @property
    def declares_sort(self) -> bool:
        return self.result == "$tType"


@dataclass(frozen=True)
class TptpUnit:
    name: str
    role: str
    payload: object  # Formula or TypeDecl
    language: str = "fof"


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<op><=>|<~>|=>|<=|!=|~\||~&|[!?~&|=():,\[\].*>])
  | (?P<sq>'(?:[^'\\]|\\.)*')
  | (?P<dq>"(?:[^"\\]|\\.)*")
  | (?P<int>[-+]?\d+)
  | (?P<dollar>\$\$?[a-zA-Z_][a-zA-Z0-9_]*)
  | (?P<upper>[A-Z][a-zA-Z0-9_]*)
  | (?P<lower>[a-z][a-zA-Z0-9_]*)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise TptpSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str, lax: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.lax = lax
        self.sorts: set = set()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        shown = tok.text or "end of input"
        raise TptpSyntaxError(f"{message} (found {shown!r})", tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def name_token(self) -> str:
        t = self.tok
        if t.kind in ("lower", "upper", "int"):
            self.i += 1
            return t.text
        if t.kind == "sq":
            self.i += 1
            return _unescape(t.text[1:-1])
        self.error("expected a name")

    # units
    def units(self) -> list:
        out = []
        seen = set()
        anon = 0
        while self.tok.kind != "eof":
            start = self.tok
            if start.kind != "lower" or start.text not in ("fof", "tff"):
                self.error("expected fof(...) or tff(...)")
            lang = start.text
            self.i += 1
            self.expect("(")
            if (self.lax and self.tok.text in ROLES and self.toks[self.i + 1].text == ","
                    and self.toks[self.i + 2].text not in ROLES):
                # anonymous unit: fof(role, formula).
                name = f"ax_{anon}"
                anon += 1
            else:
                name = self.name_token()
                self.expect(",")
            role_tok = self.tok
            role = self.name_token()
            if role not in ROLES:
                self.error(f"unsupported role {role!r}", role_tok)
            if role == "type" and lang != "tff":
                self.error("type declarations are only valid in tff", role_tok)
            self.expect(",")
            if role == "type":
                payload = self.type_decl()
            else:
                payload = self.formula()
            self.expect(")")
            self.expect(".")
            if name in seen:
                raise TptpSyntaxError(f"duplicate unit name {name!r}", start.line, start.col)
            seen.add(name)
            out.append(TptpUnit(name, role, payload, lang))
        return out

    def type_decl(self) -> TypeDecl:
        if self.accept("("):
            decl = self.type_decl()
            self.expect(")")
            return decl
        sym_tok = self.tok
        symbol = self.name_token()
        self.expect(":")
        args: list = []
        if self.accept("("):
            args.append(self.sort_name())
            while self.accept("*"):
                args.append(self.sort_name())
            self.expect(")")
            self.expect(">")
            result = self.sort_name()
        else:
            first = self.sort_name()
            if self.accept(">"):
                args = [first]
                result = self.sort_name()
            else:
                result = first
        if result == "$tType":
            if args:
                self.error("a sort declaration takes no arguments", sym_tok)
            self.sorts.add(symbol)
        return TypeDecl(symbol, tuple(args), result)

    def sort_name(self) -> str:
        t = self.tok
        if t.kind == "dollar" or t.kind == "lower":
            self.i += 1
            if t.kind == "lower" and t.text not in self.sorts:
                self.error(f"sort {t.text!r} used before declaration", t)
            if t.kind == "dollar" and t.text not in BUILTIN_SORTS:
                self.error(f"unknown builtin sort {t.text!r}", t)
            return t.text
        self.error("expected a sort")

    # formulas: binary connectives, non-associative except & and |
    def formula(self) -> Formula:
        left = self.unitary()
        t = self.tok
        if t.kind != "op":
            return left
        if t.text in ("&", "|"):
            parts = [left]
            op = t.text
            while self.accept(op):
                parts.append(self.unitary())
            if self.tok.kind == "op" and self.tok.text in ("&", "|", "=>", "<=", "<=>", "<~>"):
                self.error("mixed connectives need parentheses")
            return And(tuple(parts)) if op == "&" else Or(tuple(parts))
        if t.text in ("=>", "<=", "<=>", "<~>", "~|", "~&"):
            self.i += 1
            right = self.unitary()
            if self.tok.kind == "op" and self.tok.text in ("&", "|", "=>", "<=", "<=>", "<~>"):
                self.error("binary connectives are not associative; add parentheses")
            if t.text == "=>":
                return Implies(left, right)
            if t.text == "<=":
                return Implies(right, left)
            if t.text == "<=>":
                return Iff(left, right)
            if t.text == "<~>":
                return Not(Iff(left, right))
            if t.text == "~|":
                return Not(Or((left, right)))
            return Not(And((left, right)))
        return left

    def unitary(self) -> Formula:
        t = self.tok
        if t.kind == "op":
            if t.text in ("!", "?"):
                self.i += 1
                self.expect("[")
                vs = [self.variable()]
                while self.accept(","):
                    vs.append(self.variable())
                self.expect("]")
                self.expect(":")
                body = self.unitary()
                return Forall(tuple(vs), body) if t.text == "!" else Exists(tuple(vs), body)
            if t.text == "~":
                self.i += 1
                return Not(self.unitary())
            if t.text == "(":
                self.i += 1
                f = self.formula()
                self.expect(")")
                return f
        return self.atomic()

    def variable(self) -> Var:
        t = self.tok
        if t.kind != "upper":
            self.error("expected a variable")
        self.i += 1
        sort = None
        if self.accept(":"):
            sort = self.sort_name()
        return Var(t.text, sort)

    def atomic(self) -> Formula:
        t = self.tok
        if t.kind == "dollar" and t.text in ("$true", "$false"):
            self.i += 1
            return Truth(t.text == "$true")
        if t.kind in ("lower", "sq", "dollar") and not self._is_equation_ahead():
            name = t.text if t.kind != "sq" else _unescape(t.text[1:-1])
            self.i += 1
            args = self.arguments()
            return Atom(name, args)
        left = self.term()
        if self.accept("="):
            return Eq(left, self.term())
        if self.accept("!="):
            return Not(Eq(left, self.term()))
        self.error("expected an atom or an equation")

    def _is_equation_ahead(self) -> bool:
        # scan past one term and look for = or !=
        depth = 0
        j = self.i + 1
        if self.toks[j].text == "(":
            depth = 0
            while True:
                tx = self.toks[j]
                if tx.kind == "eof":
                    return False
                if tx.text == "(":
                    depth += 1
                elif tx.text == ")":
                    depth -= 1
                    if depth == 0:
                        j += 1
                        break
                j += 1
        return self.toks[j].kind == "op" and self.toks[j].text in ("=", "!=")

    def arguments(self) -> tuple:
        if not self.accept("("):
            return ()
        args = [self.term()]
        while self.accept(","):
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self):
        t = self.tok
        if t.kind == "upper":
            self.i += 1
            return Var(t.text)
        if t.kind == "int":
            self.i += 1
            return Const(int(t.text))
        if t.kind == "dq":
            self.i += 1
            return Const(_unescape(t.text[1:-1]), True)
        if t.kind in ("lower", "sq", "dollar"):
            name = t.text if t.kind != "sq" else _unescape(t.text[1:-1])
            self.i += 1
            args = self.arguments()
            if args:
                return App(name, args)
            return Const(name)
        self.error("expected a term")


def parse_tptp(text: str, lax: bool = False) -> list:
    """Parse fof/tff units.  ``lax`` permits anonymous units (named ``ax_<k>``)."""
    return _Parser(text, lax).units()


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        p.error("trailing input")
    return f


def signature_of(units) -> Signature:
    """Signature from tff type declarations, falling back to inference."""
    sig = Signature.infer(u.payload for u in units if u.role != "type")
    declared: dict = {}
    for u in units:
        if u.role != "type":
            continue
        d = u.payload
        # repeating an identical declaration is harmless; a different one is not
        previous = declared.setdefault(d.symbol, d)
        if previous != d:
            raise TptpSyntaxError(f"conflicting type declarations for {d.symbol} (unit {u.name})")
        if d.declares_sort:
            sig.sorts.add(d.symbol)
        elif d.result == "$o":
            sig.add_relation(d.symbol, len(d.arg_sorts), d.arg_sorts)
        else:
            sig.add_function(d.symbol, len(d.arg_sorts), d.arg_sorts)
    return sig


# ---------------------------------------------------------------------------
# Printer

_LOWER_WORD = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_DOLLAR_WORD = re.compile(r"\$\$?[a-zA-Z_][a-zA-Z0-9_]*\Z")


def format_name(name: str) -> str:
    if _LOWER_WORD.match(name) or _DOLLAR_WORD.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_value(v) -> str:
    if isinstance(v, Null):
        return f"_:n{v.id}"
    if isinstance(v.value, int):
        return str(v.value)
    if v.is_string:
        return '"' + v.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    # a bare $word would read back as a defined term, not a constant
    if v.value.startswith("$"):
        return "'" + v.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return format_name(v.value)


def format_var(v: Var) -> str:
    name = v.name.upper()
    if not re.match(r"[A-Z][A-Z0-9_]*\Z", name):
        raise ValueError(f"variable name {v.name!r} cannot be printed")
    return name if v.sort is None else f"{name}: {v.sort}"


def format_term(t) -> str:
    if isinstance(t, Var):
        return t.name.upper()
    if isinstance(t, App):
        return f"{format_name(t.fn)}({','.join(format_term(a) for a in t.args)})"
    if isinstance(t, Null):
        raise ValueError("labelled nulls cannot appear in TPTP formulas")
    return format_value(t)


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return format_name(f.rel)
        return f"{format_name(f.rel)}({','.join(format_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Truth):
        return "$true" if f.value else "$false"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{format_term(f.body.left)} != {format_term(f.body.right)}"
        return f"~{_unit(f.body)}"
    if isinstance(f, And):
        return "(" + " & ".join(_unit(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(_unit(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"({_unit(f.left)} => {_unit(f.right)})"
    if isinstance(f, Iff):
        return f"({_unit(f.left)} <=> {_unit(f.right)})"
    if isinstance(f, (Forall, Exists)):
        q = "!" if isinstance(f, Forall) else "?"
        return f"{q}[{','.join(format_var(v) for v in f.vars)}]: {_unit(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def _unit(f) -> str:
    s = format_formula(f)
    # equations must be parenthesised where a unitary formula is expected
    if isinstance(f, Eq) or (isinstance(f, Not) and isinstance(f.body, Eq)):
        return f"({s})"
    return s


def format_type_decl(d: TypeDecl) -> str:
    if not d.arg_sorts:
        return f"{format_name(d.symbol)}: {d.result}"
    if len(d.arg_sorts) == 1:
        return f"{format_name(d.symbol)}: {d.arg_sorts[0]} > {d.result}"
    return f"{format_name(d.symbol)}: ({'*'.join(d.arg_sorts)}) > {d.result}"


def format_unit(u: TptpUnit) -> str:
    if not u.name:
        raise ValueError("cannot print an unnamed unit")
    if u.role == "type":
        body = format_type_decl(u.payload)
    else:
        body = format_formula(u.payload)
        if not body.startswith("("):
            body = f"({body})"
    return f"{u.language}({format_name(u.name)}, {u.role}, {body})."


def print_tptp(units) -> str:
    return "".join(format_unit(u) + "\n" for u in units)


# ---------------------------------------------------------------------------
# Fact files


class FactSyntaxError(ValueError):
    pass


_FACT_VALUE = re.compile(r"""
    \s*(?:
      (?P<null>_:n(?P<nid>\d+))
    | (?P<int>[-+]?\d+)
    | (?P<sq>'(?:[^'\\]|\\.)*')
    | (?P<dq>"(?:[^"\\]|\\.)*")
    | (?P<word>[a-z][a-zA-Z0-9_]*)
    )\s*""", re.VERBOSE)
_FACT_HEAD = re.compile(r"\s*(?P<rel>\$?[a-z][a-zA-Z0-9_]*|'(?:[^'\\]|\\.)*')\s*")


def parse_fact(line: str, lineno: int = 1):
    """Parse one ``rel(arg, ...).`` line into ``(rel, values)``."""
    m = _FACT_HEAD.match(line)
    if not m:
        raise FactSyntaxError(f"line {lineno}: malformed relation name")
    rel = m.group("rel")
    if rel.startswith("'"):
        rel = _unescape(rel[1:-1])
    pos = m.end()
    args = []
    if line.startswith("(", pos):
        pos += 1
        while True:
            vm = _FACT_VALUE.match(line, pos)
            if not vm or vm.end() == pos:
                raise FactSyntaxError(f"line {lineno}: malformed literal at column {pos + 1}")
            if vm.group("null"):
                args.append(Null(int(vm.group("nid"))))
            elif vm.group("int"):
                args.append(Const(int(vm.group("int"))))
            elif vm.group("sq"):
                args.append(Const(_unescape(vm.group("sq")[1:-1])))
            elif vm.group("dq"):
                args.append(Const(_unescape(vm.group("dq")[1:-1]), True))
            else:
                args.append(Const(vm.group("word")))
            pos = vm.end()
            if line.startswith(",", pos):
                pos += 1
                continue
            if line.startswith(")", pos):
                pos += 1
                break
            raise FactSyntaxError(f"line {lineno}: expected ',' or ')' at column {pos + 1}")
    rest = line[pos:].strip()
    if not rest.startswith(".") or (rest[1:].strip() and not rest[1:].lstrip().startswith("%")):
        raise FactSyntaxError(f"line {lineno}: expected '.' after fact")
    return rel, tuple(args)


def parse_facts(text: str):
    """Parse a fact file into an :class:`~hornchase.instance.Instance`."""
    from .instance import Instance, ArityError

    inst = Instance()
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("%"):
            continue
        rel, args = parse_fact(raw, lineno)
        try:
            inst.add(rel, args)
        except ArityError as exc:
            raise FactSyntaxError(f"line {lineno}: {exc}") from None
    return inst


def format_fact(rel: str, args: tuple) -> str:
    if not args:
        return f"{format_name(rel)}."
    return f"{format_name(rel)}({', '.join(format_value(a) for a in args)})."


def print_facts(inst) -> str:
    """Facts sorted by relation name, then by value order."""
    return "".join(format_fact(rel, t) + "\n" for rel, t in inst.sorted_facts())
