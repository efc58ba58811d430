"""Recursive-descent parser for the program grammar.

Conditions bind ``not`` tighter than ``and`` tighter than ``or``; binary
operators associate to the left.  Inside ``all-views(...)``/``any-view(...)``
only view atoms are accepted; a ``merge-when`` condition additionally accepts
aggregators and ``view-count`` alongside node atoms (which act as a guard on
the merging node).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..tree import unquote
from . import ast as A

MAX_PARSE_NESTING = 64

_CMP = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">=", "≤": "<=", "≥": ">=",
        "==": "="}
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<cmp><=|>=|==|≤|≥|<|>|=)
  | (?P<word>[A-Za-z_][\w\-.]*)
  | (?P<punct>[(){}\[\];:,/])
    """,
    re.X,
)


class ProgramSyntaxError(SyntaxError):
    def __init__(self, message: str, line: int, column: int, text: str = ""):
        super().__init__(f"{message} (line {line}, column {column})")
        self.msg = message
        self.lineno = line
        self.offset = column
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return f"{self.msg} (line {self.line}, column {self.column})"


class DepthExceeded(ProgramSyntaxError):
    pass


@dataclass
class Token:
    kind: str
    value: str
    pos: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.nesting = 0
        self._peeked: Optional[Token] = None

    # -- lexing

    def _where(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, pos: Optional[int] = None, cls=ProgramSyntaxError):
        if pos is None:
            pos = self.peek().pos
        line, col = self._where(pos)
        return cls(message, line, col)

    def _lex(self) -> Token:
        while True:
            if self.pos >= len(self.text):
                return Token("eof", "", self.pos)
            m = _TOKEN_RE.match(self.text, self.pos)
            if not m:
                raise self.error(f"unexpected character {self.text[self.pos]!r}", self.pos)
            start = self.pos
            self.pos = m.end()
            if m.lastgroup != "ws":
                return Token(m.lastgroup, m.group(0), start)

    def peek(self) -> Token:
        if self._peeked is None:
            self._peeked = self._lex()
        return self._peeked

    def next(self) -> Token:
        tok = self.peek()
        self._peeked = None
        return tok

    def accept(self, value: str) -> bool:
        if self.peek().value == value and self.peek().kind != "string":
            self.next()
            return True
        return False

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if tok.value != value or tok.kind == "string":
            found = tok.value or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what}, found {tok.value or 'end of input'!r}")
        return self.next()

    def string(self) -> str:
        return unquote(self.expect_kind("string", "quoted string").value[1:-1])

    def integer(self) -> int:
        tok = self.expect_kind("int", "integer")
        return int(tok.value)

    def comparator(self) -> str:
        tok = self.expect_kind("cmp", "comparator")
        return _CMP[tok.value]

    def regex(self) -> str:
        # the lexer is bypassed: regex bodies may contain any character
        assert self._peeked is None
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        start = self.pos
        if not self.text.startswith("/", start):
            raise self.error("expected /regex/", start)
        i = start + 1
        out = []
        while i < len(self.text):
            c = self.text[i]
            if c == "\n":
                break
            if c == "\\" and i + 1 < len(self.text):
                pair = self.text[i:i + 2]
                out.append("/" if pair == "\\/" else pair)
                i += 2
                continue
            if c == "/":
                self.pos = i + 1
                return "".join(out)
            out.append(c)
            i += 1
        raise self.error("unterminated regex", start)

    # -- grammar

    def program(self) -> A.TransformProgram:
        self.expect("program")
        pid = self.expect_kind("word", "program id").value
        self.expect("{")
        holes: dict = {}
        leaf_props = A.DEFAULT_LEAF_PROPS
        merge_props = A.PropertyRules()
        seen = set()
        while not self.accept("}"):
            tok = self.expect_kind("word", "section name")
            name = tok.value
            if name in seen:
                raise self.error(f"duplicate section {name!r}", tok.pos)
            seen.add(name)
            if name in ("leaf-filter", "node-filter"):
                self.expect(":")
                holes[name] = self.condition("node")
            elif name == "merge-when":
                self.expect(":")
                holes[name] = self.condition("merge")
            elif name == "leaf-props":
                self.expect(":")
                leaf_props = self.key_list()
            elif name == "merge-props":
                merge_props = self.merge_props()
            else:
                raise self.error(f"unknown section {name!r}", tok.pos)
            self.expect(";")
        missing = [h for h in ("leaf-filter", "node-filter", "merge-when") if h not in holes]
        if missing:
            raise self.error(f"program {pid} is missing {', '.join(missing)}")
        return A.TransformProgram(
            pid,
            holes["leaf-filter"],
            holes["node-filter"],
            holes["merge-when"],
            leaf_props,
            merge_props,
        )

    def key_list(self) -> tuple:
        self.expect("[")
        keys = []
        if not self.accept("]"):
            while True:
                tok = self.next()
                if tok.kind == "word":
                    keys.append(tok.value)
                elif tok.kind == "string":
                    keys.append(unquote(tok.value[1:-1]))
                else:
                    raise self.error("expected property key", tok.pos)
                if self.accept("]"):
                    break
                self.expect(",")
        return tuple(keys)

    def merge_props(self) -> A.PropertyRules:
        self.expect("{")
        text_rule, type_rule = "concat", "parent"
        while not self.accept("}"):
            tok = self.expect_kind("word", "merge property")
            self.expect(":")
            value = self.expect_kind("word", "rule name")
            if tok.value == "text":
                if value.value not in A.TEXT_RULES:
                    raise self.error(f"unknown text rule {value.value!r}", value.pos)
                text_rule = value.value
            elif tok.value == "type":
                rule = value.value.replace("-", "_")
                if rule not in A.TYPE_RULES:
                    raise self.error(f"unknown type rule {value.value!r}", value.pos)
                type_rule = rule
            else:
                raise self.error(f"unknown merge property {tok.value!r}", tok.pos)
            if not self.accept(";"):
                self.expect("}")
                break
        return A.PropertyRules(A.DEFAULT_LEAF_PROPS, text_rule, type_rule)

    def condition(self, ctx: str) -> A.Expr:
        return self.or_expr(ctx)

    def _enter(self, pos: int):
        self.nesting += 1
        if self.nesting > MAX_PARSE_NESTING:
            raise self.error("condition nested too deeply", pos, DepthExceeded)

    def or_expr(self, ctx: str) -> A.Expr:
        left = self.and_expr(ctx)
        while self.accept("or"):
            left = A.Or(left, self.and_expr(ctx))
        return left

    def and_expr(self, ctx: str) -> A.Expr:
        left = self.unary(ctx)
        while self.accept("and"):
            left = A.And(left, self.unary(ctx))
        return left

    def unary(self, ctx: str) -> A.Expr:
        tok = self.peek()
        if tok.kind == "word" and tok.value == "not":
            self.next()
            self._enter(tok.pos)
            inner = self.unary(ctx)
            self.nesting -= 1
            return A.Not(inner)
        if tok.value == "(" and tok.kind == "punct":
            self.next()
            self._enter(tok.pos)
            inner = self.or_expr(ctx)
            self.expect(")")
            self.nesting -= 1
            return inner
        return self.atom(ctx)

    def atom(self, ctx: str) -> A.Expr:
        tok = self.peek()
        if tok.kind != "word":
            raise self.error(f"unexpected {tok.value or 'end of input'!r}")
        word = tok.value
        if word in ("and", "or"):
            raise self.error(f"unexpected {word!r}")
        self.next()
        if word in ("true", "false"):
            return A.Const(word == "true")
        if word == "text":
            nxt = self.peek()
            if nxt.value == "empty":
                self.next()
                return A.TextEmpty()
            if nxt.value == "nonempty":
                self.next()
                return A.TextNonEmpty()
            if ctx != "view" and nxt.kind == "cmp" and nxt.value in ("=", "=="):
                self.next()
                return A.TextEquals(self.string())
            raise self.error("expected 'empty', 'nonempty' or '= \"...\"' after 'text'")
        if ctx == "view":
            if word == "interactive":
                return A.Interactive()
            if word == "type":
                tok2 = self.expect_kind("cmp", "'='")
                if _CMP[tok2.value] != "=":
                    raise self.error("type only supports '='", tok2.pos)
                return A.TypeEquals(self.string())
            raise self.error(f"{word!r} is not a view predicate", tok.pos)
        if word == "tag":
            if self.accept("in"):
                self.expect("(")
                tags = [self.string()]
                while self.accept(","):
                    tags.append(self.string())
                self.expect(")")
                return A.TagIn(tuple(tags))
            tok2 = self.expect_kind("cmp", "'=' or 'in'")
            if _CMP[tok2.value] != "=":
                raise self.error("tag only supports '=' and 'in'", tok2.pos)
            return A.TagEquals(self.string())
        if word == "attr":
            self.expect("(")
            key = self.string()
            self.expect(")")
            nxt = self.peek()
            if nxt.kind == "word" and nxt.value == "exists":
                self.next()
                return A.AttrExists(key)
            if nxt.kind == "word" and nxt.value == "matches":
                self.next()
                return A.AttrMatches(key, self.regex())
            if nxt.kind == "cmp" and _CMP[nxt.value] == "=":
                self.next()
                return A.AttrEquals(key, self.string())
            raise self.error("expected 'exists', 'matches' or '=' after attr(...)")
        if word == "flag":
            self.expect("(")
            name = self.expect_kind("word", "flag name").value
            self.expect(")")
            return A.Flag(name.replace("-", "_"))
        if word == "child-count":
            return A.ChildCount(self.comparator(), self.integer())
        if word == "depth":
            return A.Depth(self.comparator(), self.integer())
        if ctx == "merge":
            if word in ("all-views", "any-view"):
                self.expect("(")
                self._enter(tok.pos)
                inner = self.or_expr("view")
                self.nesting -= 1
                self.expect(")")
                return A.AllViews(inner) if word == "all-views" else A.AnyView(inner)
            if word == "view-count":
                return A.ViewCount(self.comparator(), self.integer())
        raise self.error(f"unknown predicate {word!r}", tok.pos)


def parse_program(text: str) -> A.TransformProgram:
    parser = _Parser(text)
    prog = parser.program()
    if parser.peek().kind != "eof":
        raise parser.error("trailing text after program")
    return prog


def parse_library(text: str) -> list[A.TransformProgram]:
    """A library file is a sequence of program blocks applied in file order."""
    parser = _Parser(text)
    programs = []
    while parser.peek().kind != "eof":
        programs.append(parser.program())
    return programs


def parse_condition(text: str, ctx: str = "node") -> A.Expr:
    parser = _Parser(text)
    expr = parser.condition(ctx)
    if parser.peek().kind != "eof":
        raise parser.error("trailing text after condition")
    return expr
