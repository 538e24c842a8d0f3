"""Recursive-descent parser for the rule-policy DSL.

Source layout: a ``tr-policy name(Params)`` header line followed by one rule
per line (``condition -> action``). ``#`` starts a line comment; blank lines
are ignored. Connectives may be spelled in ASCII (``and``, ``or``, ``not``,
``then``, ``par``, ``->``) or with the symbol aliases ``∧ ∨ ¬ ⊗ ∥ →``.

Precedence: ``not`` > ``and`` > ``or`` for conditions; ``par`` binds tighter
than ``then`` for actions. Binary operators associate to the left;
parentheses override.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import TrSyntaxError
from .ast import (
    And,
    Atom,
    Call,
    CondExpr,
    Const,
    Dotted,
    Not,
    Or,
    Par,
    Seq,
    Term,
    TrPolicy,
    TrRule,
    TrueCond,
    Var,
    ActionExpr,
    validate_tr_policy,
)

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>[^\S\n]+)
    | (?P<COMMENT>\#[^\n]*)
    | (?P<NEWLINE>\n)
    | (?P<TRPOLICY>tr-policy(?![A-Za-z0-9_]))
    | (?P<ARROW>->|→)
    | (?P<LPAREN>\() | (?P<RPAREN>\)) | (?P<COMMA>,)
    | (?P<DOTTED>[A-Z][A-Za-z0-9_]*\.[A-Za-z0-9_]+)
    | (?P<VAR>[A-Z][A-Za-z0-9_]*)
    | (?P<IDENT>[a-z][A-Za-z0-9_]*)
    | (?P<AND>∧) | (?P<OR>∨) | (?P<NOT>¬) | (?P<THEN>⊗) | (?P<PAR>∥)
    """,
    re.VERBOSE,
)

_KEYWORDS = {
    "and": "AND",
    "or": "OR",
    "not": "NOT",
    "then": "THEN",
    "par": "PAR",
    "true": "TRUE",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise TrSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup or ""
        text = m.group()
        if kind == "IDENT" and text in _KEYWORDS:
            kind = _KEYWORDS[text]
        if kind == "NEWLINE":
            if tokens and tokens[-1].kind != "NEWLINE":
                tokens.append(_Token("NEWLINE", text, line, col))
            line += 1
            col = 1
        else:
            if kind not in ("WS", "COMMENT"):
                tokens.append(_Token(kind, text, line, col))
            col += len(text)
        pos = m.end()
    if tokens and tokens[-1].kind != "NEWLINE":
        tokens.append(_Token("NEWLINE", "\n", line, col))
    tokens.append(_Token("EOF", "", line + 1, 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    # token plumbing

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def _accept(self, kind: str) -> _Token | None:
        if self.cur.kind == kind:
            return self._advance()
        return None

    def _expect(self, kind: str, what: str) -> _Token:
        if self.cur.kind != kind:
            raise TrSyntaxError(
                f"expected {what}, found {self.cur.text or 'end of input'!r}",
                self.cur.line,
                self.cur.col,
            )
        return self._advance()

    def _skip_newlines(self) -> None:
        while self.cur.kind == "NEWLINE":
            self._advance()

    # grammar

    def parse_source(self) -> list[TrPolicy]:
        policies = []
        self._skip_newlines()
        while self.cur.kind != "EOF":
            policies.append(self._policy())
            self._skip_newlines()
        return policies

    def _policy(self) -> TrPolicy:
        self._expect("TRPOLICY", "'tr-policy'")
        name = self._expect("IDENT", "policy name (lowercase identifier)").text
        self._expect("LPAREN", "'('")
        params: list[str] = []
        if self.cur.kind != "RPAREN":
            params.append(self._expect("VAR", "parameter (uppercase identifier)").text)
            while self._accept("COMMA"):
                params.append(
                    self._expect("VAR", "parameter (uppercase identifier)").text
                )
        self._expect("RPAREN", "')'")
        self._expect("NEWLINE", "end of header line")
        rules: list[TrRule] = []
        while True:
            self._skip_newlines()
            if self.cur.kind in ("EOF", "TRPOLICY"):
                break
            rules.append(self._rule())
        if not rules:
            raise TrSyntaxError(
                f"policy {name!r} has no rules", self.cur.line, self.cur.col
            )
        return validate_tr_policy(TrPolicy(name, tuple(params), tuple(rules)))

    def _rule(self) -> TrRule:
        condition = self._cond_or()
        self._expect("ARROW", "'->'")
        action = self._act_then()
        self._expect("NEWLINE", "end of rule line")
        return TrRule(condition, action)

    def _cond_or(self) -> CondExpr:
        node = self._cond_and()
        while self._accept("OR"):
            node = Or(node, self._cond_and())
        return node

    def _cond_and(self) -> CondExpr:
        node = self._cond_not()
        while self._accept("AND"):
            node = And(node, self._cond_not())
        return node

    def _cond_not(self) -> CondExpr:
        if self._accept("NOT"):
            return Not(self._cond_not())
        return self._cond_prim()

    def _cond_prim(self) -> CondExpr:
        if self._accept("TRUE"):
            return TrueCond()
        if self._accept("LPAREN"):
            node = self._cond_or()
            self._expect("RPAREN", "')'")
            return node
        tok = self._expect("IDENT", "predicate name")
        return Atom(tok.text, self._arg_list())

    def _act_then(self) -> ActionExpr:
        node = self._act_par()
        while self._accept("THEN"):
            node = Seq(node, self._act_par())
        return node

    def _act_par(self) -> ActionExpr:
        node = self._act_prim()
        while self._accept("PAR"):
            node = Par(node, self._act_prim())
        return node

    def _act_prim(self) -> ActionExpr:
        if self._accept("LPAREN"):
            node = self._act_then()
            self._expect("RPAREN", "')'")
            return node
        tok = self._expect("IDENT", "function name")
        return Call(tok.text, self._arg_list())

    def _arg_list(self) -> tuple[Term, ...]:
        if not self._accept("LPAREN"):
            return ()
        args: list[Term] = []
        if self.cur.kind != "RPAREN":
            args.append(self._term())
            while self._accept("COMMA"):
                args.append(self._term())
        self._expect("RPAREN", "')'")
        return tuple(args)

    def _term(self) -> Term:
        tok = self.cur
        if tok.kind == "VAR":
            self._advance()
            return Var(tok.text)
        if tok.kind == "IDENT":
            self._advance()
            return Const(tok.text)
        if tok.kind == "DOTTED":
            self._advance()
            base, suffix = tok.text.split(".", 1)
            return Dotted(base, suffix)
        raise TrSyntaxError(
            f"expected a term, found {tok.text or 'end of input'!r}", tok.line, tok.col
        )


def parse_tr_source(source: str) -> list[TrPolicy]:
    """Parse a DSL source that may hold several policies."""
    return _Parser(source).parse_source()


def parse_tr_policy(source: str) -> TrPolicy:
    """Parse a DSL source holding exactly one policy."""
    policies = parse_tr_source(source)
    if len(policies) != 1:
        raise TrSyntaxError(f"expected exactly one policy, found {len(policies)}", 1, 1)
    return policies[0]
