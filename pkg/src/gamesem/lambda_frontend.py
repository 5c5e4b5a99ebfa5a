"""Front-end for the simply-typed lambda-calculus over one base type.

Parsing, type checking and normalization.  Normal forms are beta-normal and
eta-long: every subterm of arrow type is an abstraction, every head variable
is fully applied.  The game and intersection-type interpretations both walk
the eta-long tree, so normalization here is the syntactic reference point for
everything downstream.

Concrete grammar::

    term  ::=  \\x:T. term   |   app
    app   ::=  atom | app atom
    atom  ::=  ident | ( term )
    T     ::=  o | T -> T | ( T )        -- '->' associates to the right

Line comments start with ``--``.  Terms are also accepted as JSON trees with
a "tag" field ("var" / "lam" / "app"); type annotations in JSON may be given
either as concrete syntax strings or as nested objects.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

__all__ = [
    "SimpleType", "Base", "Arrow", "O",
    "Term", "Var", "Lam", "App",
    "LambdaError", "ParseError", "UnboundVariableError", "TypeMismatchError",
    "parse", "parse_type", "typecheck", "normalize",
    "pretty", "type_to_str", "alpha_equal", "type_order",
    "term_to_json", "term_from_json",
    "church", "church_type",
]


# --------------------------------------------------------------------------
# Types and terms
# --------------------------------------------------------------------------

class SimpleType:
    """Base class for simple types; instances are ``Base`` or ``Arrow``."""
    __slots__ = ()


@dataclass(frozen=True)
class Base(SimpleType):
    __slots__ = ()

    def __repr__(self) -> str:
        return "o"


@dataclass(frozen=True)
class Arrow(SimpleType):
    domain: SimpleType
    codomain: SimpleType
    __slots__ = ("domain", "codomain")

    def __repr__(self) -> str:
        return type_to_str(self)


O = Base()


def type_order(ty: SimpleType) -> int:
    """order(o) = 0, order(A -> B) = max(order(A) + 1, order(B))."""
    if isinstance(ty, Base):
        return 0
    return max(type_order(ty.domain) + 1, type_order(ty.codomain))


def type_to_str(ty: SimpleType) -> str:
    if isinstance(ty, Base):
        return "o"
    dom = type_to_str(ty.domain)
    if isinstance(ty.domain, Arrow):
        dom = f"({dom})"
    return f"{dom} -> {type_to_str(ty.codomain)}"


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    __slots__ = ("name",)


@dataclass(frozen=True)
class Lam(Term):
    binder: str
    annotation: SimpleType
    body: Term
    __slots__ = ("binder", "annotation", "body")


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term
    __slots__ = ("fun", "arg")


# --------------------------------------------------------------------------
# Errors
# --------------------------------------------------------------------------

class LambdaError(Exception):
    """Any front-end failure (syntax, scope, or typing)."""


class ParseError(LambdaError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnboundVariableError(LambdaError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable: {name}")
        self.name = name


class TypeMismatchError(LambdaError):
    pass


# --------------------------------------------------------------------------
# Lexer / parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>--[^\n]*)
      | (?P<arrow>->)
      | (?P<lam>\\|λ)
      | (?P<dot>\.)
      | (?P<colon>:)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(source: str) -> Iterator[_Token]:
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            yield _Token(kind, text, line, pos - line_start + 1)
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    yield _Token("eof", "", line, pos - line_start + 1)


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(_tokenize(source))
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise ParseError(f"expected {kind}, found {self.tok.text!r}",
                             self.tok.line, self.tok.column)
        return self.advance()

    # -- types -------------------------------------------------------------

    def parse_type(self) -> SimpleType:
        left = self.parse_type_atom()
        if self.tok.kind == "arrow":
            self.advance()
            return Arrow(left, self.parse_type())
        return left

    def parse_type_atom(self) -> SimpleType:
        t = self.tok
        if t.kind == "ident" and t.text == "o":
            self.advance()
            return O
        if t.kind == "lpar":
            self.advance()
            ty = self.parse_type()
            self.expect("rpar")
            return ty
        raise ParseError(f"expected a type, found {t.text!r}", t.line, t.column)

    # -- terms -------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.tok.kind == "lam":
            self.advance()
            binder = self.expect("ident").text
            self.expect("colon")
            annot = self.parse_type()
            self.expect("dot")
            return Lam(binder, annot, self.parse_term())
        return self.parse_app()

    def parse_app(self) -> Term:
        t = self.parse_atom()
        if t is None:
            tok = self.tok
            raise ParseError(f"expected a term, found {tok.text!r}",
                             tok.line, tok.column)
        while True:
            nxt = self.parse_atom()
            if nxt is None:
                return t
            t = App(t, nxt)

    def parse_atom(self) -> Optional[Term]:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return Var(t.text)
        if t.kind == "lpar":
            self.advance()
            inner = self.parse_term()
            self.expect("rpar")
            return inner
        if t.kind == "lam":
            # a lambda directly in argument position, e.g. "f \x:o. x",
            # is accepted and extends as far right as possible
            return self.parse_term()
        return None


def parse_type(source: str) -> SimpleType:
    """Parse a simple type from concrete syntax, e.g. ``(o -> o) -> o``."""
    p = _Parser(source)
    ty = p.parse_type()
    p.expect("eof")
    return ty


def parse(source: str, context: Optional[Mapping[str, SimpleType]] = None) -> Term:
    """Parse a term from concrete syntax or from a JSON tree.

    Free variables must be listed in ``context`` (by default none are
    allowed); the parse itself is untyped, only scoping is checked here.
    """
    stripped = source.lstrip()
    if stripped.startswith("{"):
        term = term_from_json(json.loads(source))
    else:
        p = _Parser(source)
        term = p.parse_term()
        p.expect("eof")
    _check_scope(term, frozenset(context or ()))
    return term


def _check_scope(t: Term, bound: frozenset) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            raise UnboundVariableError(t.name)
    elif isinstance(t, Lam):
        _check_scope(t.body, bound | {t.binder})
    elif isinstance(t, App):
        _check_scope(t.fun, bound)
        _check_scope(t.arg, bound)


# --------------------------------------------------------------------------
# JSON trees
# --------------------------------------------------------------------------

def _type_from_json(obj) -> SimpleType:
    if isinstance(obj, str):
        return parse_type(obj)
    if isinstance(obj, dict):
        if obj.get("tag") == "base" or obj == {}:
            return O
        return Arrow(_type_from_json(obj["domain"]), _type_from_json(obj["codomain"]))
    raise LambdaError(f"cannot read a type from {obj!r}")


def term_from_json(obj) -> Term:
    if not isinstance(obj, dict) or "tag" not in obj:
        raise LambdaError(f"expected a tagged JSON object, got {obj!r}")
    tag = obj["tag"]
    if tag == "var":
        return Var(obj["name"])
    if tag == "lam":
        return Lam(obj["binder"], _type_from_json(obj["annotation"]),
                   term_from_json(obj["body"]))
    if tag == "app":
        return App(term_from_json(obj["fun"]), term_from_json(obj["arg"]))
    raise LambdaError(f"unknown term tag {tag!r}")


def term_to_json(t: Term) -> dict:
    if isinstance(t, Var):
        return {"tag": "var", "name": t.name}
    if isinstance(t, Lam):
        return {"tag": "lam", "binder": t.binder,
                "annotation": type_to_str(t.annotation),
                "body": term_to_json(t.body)}
    assert isinstance(t, App)
    return {"tag": "app", "fun": term_to_json(t.fun), "arg": term_to_json(t.arg)}


# --------------------------------------------------------------------------
# Pretty-printing
# --------------------------------------------------------------------------

def pretty(t: Term) -> str:
    """Print a term; ``parse(pretty(t))`` is alpha-equal to ``t``."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lam):
        return f"\\{t.binder}:{type_to_str(t.annotation)}. {pretty(t.body)}"
    assert isinstance(t, App)
    fun = pretty(t.fun)
    if isinstance(t.fun, Lam):
        fun = f"({fun})"
    arg = pretty(t.arg)
    if isinstance(t.arg, (App, Lam)):
        arg = f"({arg})"
    return f"{fun} {arg}"


# --------------------------------------------------------------------------
# Typing
# --------------------------------------------------------------------------

def typecheck(ctx: Mapping[str, SimpleType], t: Term) -> SimpleType:
    """Return the unique simple type of ``t`` in ``ctx`` or raise."""
    if isinstance(t, Var):
        ty = ctx.get(t.name)
        if ty is None:
            raise UnboundVariableError(t.name)
        return ty
    if isinstance(t, Lam):
        body_ty = typecheck({**ctx, t.binder: t.annotation}, t.body)
        return Arrow(t.annotation, body_ty)
    assert isinstance(t, App)
    fun_ty = typecheck(ctx, t.fun)
    arg_ty = typecheck(ctx, t.arg)
    if not isinstance(fun_ty, Arrow):
        raise TypeMismatchError(
            f"cannot apply a term of base type: {pretty(t.fun)}")
    if fun_ty.domain != arg_ty:
        raise TypeMismatchError(
            f"argument type {type_to_str(arg_ty)} does not match "
            f"expected {type_to_str(fun_ty.domain)} in {pretty(t)}")
    return fun_ty.codomain


# --------------------------------------------------------------------------
# Substitution and normalization
# --------------------------------------------------------------------------

def free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.binder}
    return free_vars(t.fun) | free_vars(t.arg)


def _fresh(base: str, avoid: frozenset) -> str:
    if base not in avoid:
        return base
    stem = base.rstrip("0123456789")
    n = 0
    while f"{stem}{n}" in avoid:
        n += 1
    return f"{stem}{n}"


def _subst(t: Term, name: str, value: Term) -> Term:
    """Capture-avoiding substitution of ``value`` for ``name`` in ``t``."""
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, App):
        return App(_subst(t.fun, name, value), _subst(t.arg, name, value))
    assert isinstance(t, Lam)
    if t.binder == name:
        return t
    if t.binder in free_vars(value) and name in free_vars(t.body):
        new_binder = _fresh(t.binder, free_vars(value) | free_vars(t.body))
        renamed = _subst(t.body, t.binder, Var(new_binder))
        return Lam(new_binder, t.annotation, _subst(renamed, name, value))
    return Lam(t.binder, t.annotation, _subst(t.body, name, value))


def _beta_normalize(t: Term) -> Term:
    """Normal-order beta-normalization (terminates on well-typed input)."""
    while isinstance(t, App):
        fun = _beta_normalize(t.fun)
        if isinstance(fun, Lam):
            t = _subst(fun.body, fun.binder, t.arg)
        else:
            return App(fun, _beta_normalize(t.arg))
    if isinstance(t, Lam):
        return Lam(t.binder, t.annotation, _beta_normalize(t.body))
    return t


def _spine(t: Term):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def _eta_long(t: Term, ty: SimpleType, ctx: dict) -> Term:
    # peel existing binders
    binders = []
    ctx = dict(ctx)
    while isinstance(t, Lam):
        assert isinstance(ty, Arrow)
        binders.append((t.binder, t.annotation))
        ctx[t.binder] = t.annotation
        t = t.body
        ty = ty.codomain
    # add binders for the missing arrows and apply the head to them
    while isinstance(ty, Arrow):
        avoid = free_vars(t) | set(ctx)
        v = _fresh("e", avoid)
        binders.append((v, ty.domain))
        ctx[v] = ty.domain
        t = App(t, Var(v))
        ty = ty.codomain
    # the body now has base type; its head is a variable since t is beta-normal
    head, args = _spine(t)
    assert isinstance(head, Var), "beta-normal term of base type must be var-headed"
    head_ty = ctx[head.name]
    body: Term = head
    for a in args:
        assert isinstance(head_ty, Arrow)
        body = App(body, _eta_long(a, head_ty.domain, ctx))
        head_ty = head_ty.codomain
    for binder, annot in reversed(binders):
        body = Lam(binder, annot, body)
    return body


def normalize(t: Term, ctx: Optional[Mapping[str, SimpleType]] = None) -> Term:
    """Beta-normal, eta-long form of a well-typed term.

    The result is unique up to alpha-equivalence and normalizing again is the
    identity up to alpha.  ``ctx`` types any free variables.
    """
    ctx = dict(ctx or {})
    ty = typecheck(ctx, t)
    return _eta_long(_beta_normalize(t), ty, ctx)


# --------------------------------------------------------------------------
# Alpha-equivalence (de Bruijn comparison)
# --------------------------------------------------------------------------

def alpha_equal(t1: Term, t2: Term) -> bool:
    def go(a: Term, b: Term, env_a: dict, env_b: dict, depth: int) -> bool:
        if isinstance(a, Var) and isinstance(b, Var):
            da, db = env_a.get(a.name), env_b.get(b.name)
            if da is None and db is None:
                return a.name == b.name  # both free
            return da == db
        if isinstance(a, Lam) and isinstance(b, Lam):
            if a.annotation != b.annotation:
                return False
            return go(a.body, b.body,
                      {**env_a, a.binder: depth}, {**env_b, b.binder: depth},
                      depth + 1)
        if isinstance(a, App) and isinstance(b, App):
            return (go(a.fun, b.fun, env_a, env_b, depth)
                    and go(a.arg, b.arg, env_a, env_b, depth))
        return False

    return go(t1, t2, {}, {}, 0)


# --------------------------------------------------------------------------
# Stock terms
# --------------------------------------------------------------------------

def church_type(base: SimpleType = O) -> SimpleType:
    """(A -> A) -> A -> A at the given base instance A."""
    return Arrow(Arrow(base, base), Arrow(base, base))


def church(n: int, base: SimpleType = O) -> Term:
    """Church numeral for ``n`` at base instance ``base``: \\f. \\x. f^n x."""
    body: Term = Var("x")
    for _ in range(n):
        body = App(Var("f"), body)
    return Lam("f", Arrow(base, base), Lam("x", base, body))
