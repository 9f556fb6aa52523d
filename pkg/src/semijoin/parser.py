"""Text formats: database files, expressions, tuple literals.

Database files::

    # comment
    vocab { order }
    pred Adj/2 { (1,2) (2,3) }
    rel R/2 { (a,1) (b,2) }

Expressions::

    R   (E1 union E2)   (E1 diff E2)   (E1 isect E2)
    project[1,3](E)   select[COND](E)   (E1 semijoin[COND] E2)

Conditions combine atoms ``x1 = y2``, ``x1 != y2``, ``x1 < y2``, ``P(x1,y1)``,
``true`` and ``false`` with ``&``, ``|``, ``!`` and parentheses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import ParseError, SemijoinError
from .expr import Diff, Expression, Project, Rel, Select, Semijoin, Union, validate
from .model import (
    FALSE,
    TRUE,
    And,
    Atom,
    Condition,
    Database,
    Not,
    Or,
    Predicate,
    Var,
    Vocabulary,
    sorted_tuples,
)

EXPRESSION_KEYWORDS = frozenset({"union", "diff", "isect", "semijoin", "project", "select"})

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>!=|[()\[\]{},/&|!=<])
    """,
    re.VERBOSE,
)
_VAR = re.compile(r"([xy])([1-9]\d*)\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, op, eof
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance()

    def expect_eof(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # values and tuples

    def value(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return int(tok.text)
        if tok.kind == "ident":
            self.advance()
            return tok.text
        raise self.error(f"expected a value, found {tok.text or 'end of input'!r}")

    def tuple_literal(self) -> tuple:
        self.expect("(")
        vals = []
        if not self.at(")"):
            vals.append(self.value())
            while self.at(","):
                self.advance()
                vals.append(self.value())
        self.expect(")")
        return tuple(vals)

    def block_of_tuples(self, name: str, arity: int) -> list[tuple]:
        self.expect("{")
        out = []
        while self.at("("):
            start = self.tok
            t = self.tuple_literal()
            if len(t) != arity:
                raise self.error(
                    f"tuple {t} in {name} has {len(t)} values, expected {arity}", start
                )
            out.append(t)
        self.expect("}")
        return out

    def signature(self) -> tuple[Token, int]:
        name = self.expect_kind("ident", "a name")
        self.expect("/")
        ar = self.expect_kind("int", "an arity")
        arity = int(ar.text)
        if arity < 1:
            raise self.error("arity must be positive", ar)
        return name, arity

    # conditions

    def condition(self) -> Condition:
        parts = [self.conjunction()]
        while self.at("|"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Condition:
        parts = [self.unary()]
        while self.at("&"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Condition:
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        if self.at("("):
            self.advance()
            c = self.condition()
            self.expect(")")
            return c
        if self.at("true"):
            self.advance()
            return TRUE
        if self.at("false"):
            self.advance()
            return FALSE
        tok = self.tok
        if tok.kind == "ident" and _VAR.match(tok.text):
            left = self.variable()
            if self.at("="):
                self.advance()
                return Atom("=", (left, self.variable()))
            if self.at("!="):
                self.advance()
                return Not(Atom("=", (left, self.variable())))
            if self.at("<"):
                self.advance()
                return Atom("<", (left, self.variable()))
            raise self.error("expected '=', '!=' or '<'")
        if tok.kind == "ident":
            self.advance()
            self.expect("(")
            args = [self.variable()]
            while self.at(","):
                self.advance()
                args.append(self.variable())
            self.expect(")")
            return Atom(tok.text, tuple(args))
        raise self.error(f"expected a condition, found {tok.text or 'end of input'!r}")

    def variable(self) -> Var:
        tok = self.expect_kind("ident", "a variable")
        m = _VAR.match(tok.text)
        if not m:
            raise self.error(f"expected a variable like x1 or y2, found {tok.text!r}", tok)
        return Var(m.group(1), int(m.group(2)))

    # expressions

    def expression(self, schema: Mapping[str, int]) -> Expression:
        tok = self.tok
        try:
            return self._expression(schema)
        except SemijoinError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), tok.line, tok.col) from None

    def _expression(self, schema: Mapping[str, int]) -> Expression:
        tok = self.tok
        if self.at("project"):
            self.advance()
            self.expect("[")
            cols = []
            if not self.at("]"):
                cols.append(int(self.expect_kind("int", "a column index").text))
                while self.at(","):
                    self.advance()
                    cols.append(int(self.expect_kind("int", "a column index").text))
            self.expect("]")
            self.expect("(")
            child = self.expression(schema)
            self.expect(")")
            return self._build(tok, Project, tuple(cols), child)
        if self.at("select"):
            self.advance()
            self.expect("[")
            cond = self.condition()
            self.expect("]")
            self.expect("(")
            child = self.expression(schema)
            self.expect(")")
            return self._build(tok, Select, cond, child)
        if self.at("("):
            self.advance()
            left = self.expression(schema)
            op = self.tok
            if self.at("union") or self.at("diff") or self.at("isect"):
                self.advance()
                right = self.expression(schema)
                self.expect(")")
                if op.text == "union":
                    return self._build(op, Union, left, right)
                if op.text == "diff":
                    return self._build(op, Diff, left, right)
                inner = self._build(op, Diff, left, right)
                return Diff(left, inner)
            if self.at("semijoin"):
                self.advance()
                self.expect("[")
                cond = self.condition()
                self.expect("]")
                right = self.expression(schema)
                self.expect(")")
                return self._build(op, Semijoin, cond, left, right)
            raise self.error("expected 'union', 'diff', 'isect' or 'semijoin'")
        if tok.kind == "ident" and tok.text not in EXPRESSION_KEYWORDS:
            self.advance()
            if tok.text not in schema:
                raise self.error(f"unknown relation {tok.text!r}", tok)
            return Rel(tok.text, schema[tok.text])
        raise self.error(f"expected an expression, found {tok.text or 'end of input'!r}")

    def _build(self, tok: Token, cls, *args):
        try:
            return cls(*args)
        except SemijoinError as exc:
            raise ParseError(str(exc), tok.line, tok.col) from None


def parse_database(src: str) -> Database:
    """Parse a database file. Raises ParseError with line and column."""
    p = _Parser(src)
    order = False
    preds: list[Predicate] = []
    rels: dict[str, list] = {}
    schema: dict[str, int] = {}
    if p.at("vocab"):
        p.advance()
        p.expect("{")
        while p.at("order"):
            p.advance()
            order = True
        p.expect("}")
    while p.tok.kind != "eof":
        kw = p.tok
        if p.at("pred"):
            p.advance()
            name, arity = p.signature()
            if name.text in schema or any(q.name == name.text for q in preds):
                raise p.error(f"duplicate declaration of {name.text}", name)
            preds.append(Predicate(name.text, arity, frozenset(p.block_of_tuples(name.text, arity))))
        elif p.at("rel"):
            p.advance()
            name, arity = p.signature()
            if name.text in schema:
                raise p.error(f"duplicate relation {name.text}", name)
            if any(q.name == name.text for q in preds) or name.text in EXPRESSION_KEYWORDS:
                raise p.error(f"relation name {name.text} is reserved or names a predicate", name)
            schema[name.text] = arity
            rels[name.text] = p.block_of_tuples(name.text, arity)
        else:
            raise p.error(f"expected 'rel' or 'pred', found {kw.text!r}")
    vocab = Vocabulary(order=order, predicates=tuple(preds))
    try:
        return Database(rels, schema, vocab)
    except SemijoinError as exc:
        raise ParseError(str(exc), p.tok.line, p.tok.col) from None


def parse_expression(src: str, schema: Mapping[str, int], vocab: Vocabulary = Vocabulary()) -> Expression:
    """Parse and validate an expression over ``schema`` and ``vocab``."""
    p = _Parser(src)
    e = p.expression(schema)
    p.expect_eof()
    try:
        validate(e, schema, vocab)
    except SemijoinError as exc:
        raise ParseError(str(exc), 1, 1) from None
    return e


def parse_condition(src: str) -> Condition:
    p = _Parser(src)
    c = p.condition()
    p.expect_eof()
    return c


def parse_tuple(src: str) -> tuple:
    """Parse a tuple literal such as ``(a,1)`` or ``()``."""
    p = _Parser(src)
    t = p.tuple_literal()
    p.expect_eof()
    return t


# --------------------------------------------------------------------------
# rendering


def render_condition(c: Condition) -> str:
    if c == TRUE:
        return "true"
    if c == FALSE:
        return "false"
    if isinstance(c, Atom):
        if c.pred in ("=", "<"):
            return f"{c.args[0]} {c.pred} {c.args[1]}"
        return f"{c.pred}({','.join(map(str, c.args))})"
    if isinstance(c, Not):
        a = c.arg
        if isinstance(a, Atom) and a.pred == "=":
            return f"{a.args[0]} != {a.args[1]}"
        return f"!({render_condition(a)})"
    sep = " & " if isinstance(c, And) else " | "
    parts = []
    for sub in c.args:
        s = render_condition(sub)
        if isinstance(sub, (And, Or)) and sub not in (TRUE, FALSE):
            s = f"({s})"
        parts.append(s)
    return sep.join(parts)


def render_expression(e: Expression) -> str:
    """Text that parses back to a structurally identical expression."""
    out: list[str] = []
    stack: list = [e]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Rel):
            out.append(item.name)
        elif isinstance(item, Union):
            stack.extend([")", item.right, " union ", item.left, "("])
        elif isinstance(item, Diff):
            stack.extend([")", item.right, " diff ", item.left, "("])
        elif isinstance(item, Project):
            cols = ",".join(map(str, item.columns))
            stack.extend([")", item.child, f"project[{cols}]("])
        elif isinstance(item, Select):
            stack.extend([")", item.child, f"select[{render_condition(item.cond)}]("])
        elif isinstance(item, Semijoin):
            cond = render_condition(item.cond)
            stack.extend([")", item.right, f" semijoin[{cond}] ", item.left, "("])
        else:
            raise TypeError(f"not an expression: {item!r}")
    return "".join(out)


def render_value(v) -> str:
    return str(v)


def render_tuple(t: tuple) -> str:
    return "(" + ",".join(render_value(v) for v in t) + ")"


def render_database(D: Database) -> str:
    lines = []
    if D.vocab.order:
        lines.append("vocab { order }")
    for p in D.vocab.predicates:
        body = " ".join(render_tuple(t) for t in sorted_tuples(p.extension))
        lines.append(f"pred {p.name}/{p.arity} {{ {body} }}" if body else f"pred {p.name}/{p.arity} {{ }}")
    for name, arity in D.schema.items():
        body = " ".join(render_tuple(t) for t in sorted_tuples(D.relations[name]))
        lines.append(f"rel {name}/{arity} {{ {body} }}" if body else f"rel {name}/{arity} {{ }}")
    return "\n".join(lines) + "\n"
