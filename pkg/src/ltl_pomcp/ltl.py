"""LTL formulas: AST, parser, pretty-printer, negation normal form and a lasso evaluator.

Concrete syntax (tightest binding first)::

    !f  X f  F f  G f       unary
    f U g   f R g           right associative
    f & g
    f | g
    f -> g                  right associative

``true`` and ``false`` are literals; ``false`` is represented as ``!true``.
Identifiers are ``[A-Za-z_][A-Za-z0-9_]*``. The letters ``X``, ``F`` and ``G``
act as operators when followed by an operand and as atoms otherwise, so
``F G G`` over ``ap={"G"}`` reads as "eventually always G". ``U`` and ``R``
are operators in infix position and atoms in operand position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

KINDS = (
    "true",
    "atom",
    "not",
    "and",
    "or",
    "implies",
    "next",
    "until",
    "release",
    "eventually",
    "always",
)
ARITY = {
    "true": 0,
    "atom": 0,
    "not": 1,
    "next": 1,
    "eventually": 1,
    "always": 1,
    "and": 2,
    "or": 2,
    "implies": 2,
    "until": 2,
    "release": 2,
}
_UNARY_KW = {"X": "next", "F": "eventually", "G": "always"}
_BINARY_KW = {"U": "until", "R": "release"}


class LTLSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAtomError(ValueError):
    def __init__(self, atom: str):
        super().__init__(f"unknown atomic proposition {atom!r}")
        self.atom = atom


@dataclass(frozen=True)
class Formula:
    kind: str
    children: tuple["Formula", ...] = ()
    atom: str | None = None

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown formula kind {self.kind!r}")
        if len(self.children) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {ARITY[self.kind]} children")
        if (self.kind == "atom") != (self.atom is not None):
            raise ValueError("atom payload is required exactly for atoms")

    def __str__(self) -> str:
        return to_string(self)

    def atoms(self) -> frozenset[str]:
        if self.kind == "atom":
            return frozenset([self.atom])
        out: frozenset[str] = frozenset()
        for c in self.children:
            out |= c.atoms()
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


TRUE = Formula("true")
FALSE = Formula("not", (TRUE,))


def Atom(name: str) -> Formula:
    return Formula("atom", atom=name)


def Not(f: Formula) -> Formula:
    return Formula("not", (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula("and", (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula("or", (a, b))


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula("implies", (a, b))


def Next(f: Formula) -> Formula:
    return Formula("next", (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula("until", (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula("release", (a, b))


def Eventually(f: Formula) -> Formula:
    return Formula("eventually", (f,))


def Always(f: Formula) -> Formula:
    return Formula("always", (f,))


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(->)|([!&|()])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise LTLSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, ap: frozenset[str] | None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.ap = ap

    def peek(self, offset: int = 0) -> str | None:
        j = self.i + offset
        return self.tokens[j][0] if j < len(self.tokens) else None

    def position(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return len(self.text)

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            raise LTLSyntaxError(f"expected {tok!r}", self.position())
        self.i += 1

    def parse(self) -> Formula:
        if not self.tokens:
            raise LTLSyntaxError("empty formula", 0)
        f = self.implication()
        if self.i != len(self.tokens):
            raise LTLSyntaxError(f"unexpected token {self.peek()!r}", self.position())
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.binary_temporal()
        while self.peek() == "&":
            self.take()
            left = And(left, self.binary_temporal())
        return left

    def binary_temporal(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok in _BINARY_KW:
            self.take()
            return Formula(_BINARY_KW[tok], (left, self.binary_temporal()))
        return left

    def _starts_operand(self, tok: str | None) -> bool:
        if tok is None:
            return False
        if tok in ("(", "!"):
            return True
        return tok[0].isalpha() or tok[0] == "_"

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in _UNARY_KW and self._starts_operand(self.peek(1)):
            self.take()
            return Formula(_UNARY_KW[tok], (self.unary(),))
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        pos = self.position()
        if tok is None:
            raise LTLSyntaxError("unexpected end of formula", pos)
        if tok == "(":
            self.take()
            f = self.implication()
            self.expect(")")
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if tok[0].isalpha() or tok[0] == "_":
            self.take()
            if self.ap is not None and tok not in self.ap:
                raise UnknownAtomError(tok)
            return Atom(tok)
        raise LTLSyntaxError(f"unexpected token {tok!r}", pos)


def parse_ltl(text: str, ap: Iterable[str] | None = None) -> Formula:
    """Parse ``text``; when ``ap`` is given every atom must belong to it."""
    return _Parser(text, None if ap is None else frozenset(ap)).parse()


# ---------------------------------------------------------------- printing

_BIN_SYM = {"and": "&", "or": "|", "implies": "->", "until": "U", "release": "R"}
_UN_SYM = {"not": "!", "next": "X", "eventually": "F", "always": "G"}
_KEYWORDS = {"X", "F", "G", "U", "R", "true", "false"}


def to_string(f: Formula) -> str:
    """Fully parenthesised rendering that re-parses to the same AST."""
    if f.kind == "true":
        return "true"
    if f.kind == "atom":
        return f"({f.atom})" if f.atom in _KEYWORDS else f.atom
    if f.kind in _UN_SYM:
        return f"{_UN_SYM[f.kind]} {_wrap(f.children[0])}"
    a, b = f.children
    return f"{_wrap(a)} {_BIN_SYM[f.kind]} {_wrap(b)}"


def _wrap(f: Formula) -> str:
    s = to_string(f)
    if f.kind in _BIN_SYM:
        return f"({s})"
    return s


# ---------------------------------------------------------------- NNF


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms; eliminates ``implies``.

    ``!true`` is kept as the canonical false literal.
    """
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    k = f.kind
    if k == "true":
        return FALSE if neg else TRUE
    if k == "atom":
        return Not(f) if neg else f
    if k == "not":
        return _nnf(f.children[0], not neg)
    if k == "implies":
        a, b = f.children
        return _nnf(Or(Not(a), b), neg)
    if k == "next":
        return Next(_nnf(f.children[0], neg))
    if k in ("eventually", "always"):
        dual = {"eventually": "always", "always": "eventually"}
        return Formula(dual[k] if neg else k, (_nnf(f.children[0], neg),))
    a, b = f.children
    dual = {"and": "or", "or": "and", "until": "release", "release": "until"}
    return Formula(dual[k] if neg else k, (_nnf(a, neg), _nnf(b, neg)))


def is_nnf(f: Formula) -> bool:
    if f.kind == "implies":
        return False
    if f.kind == "not":
        return f.children[0].kind in ("atom", "true")
    return all(is_nnf(c) for c in f.children)


# ---------------------------------------------------------------- lasso semantics


def evaluate_lasso(
    f: Formula,
    prefix: Sequence[frozenset[str]],
    cycle: Sequence[frozenset[str]],
) -> bool:
    """Satisfaction of ``f`` on the word ``prefix . cycle^omega``.

    Letters are sets of atom names. Fixpoints are computed over the finite
    lasso graph directly, independent of any automaton.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")
    word = list(prefix) + list(cycle)
    n = len(word)
    succ = [i + 1 for i in range(n - 1)] + [len(prefix)]
    cache: dict[Formula, list[bool]] = {}

    def sat(g: Formula) -> list[bool]:
        if g in cache:
            return cache[g]
        k = g.kind
        if k == "true":
            out = [True] * n
        elif k == "atom":
            out = [g.atom in w for w in word]
        elif k == "not":
            out = [not v for v in sat(g.children[0])]
        elif k == "and":
            a, b = sat(g.children[0]), sat(g.children[1])
            out = [x and y for x, y in zip(a, b)]
        elif k == "or":
            a, b = sat(g.children[0]), sat(g.children[1])
            out = [x or y for x, y in zip(a, b)]
        elif k == "implies":
            a, b = sat(g.children[0]), sat(g.children[1])
            out = [(not x) or y for x, y in zip(a, b)]
        elif k == "next":
            a = sat(g.children[0])
            out = [a[succ[i]] for i in range(n)]
        elif k in ("until", "eventually"):
            if k == "until":
                a, b = sat(g.children[0]), sat(g.children[1])
            else:
                a, b = [True] * n, sat(g.children[0])
            out = [False] * n
            for _ in range(n + 1):
                for i in reversed(range(n)):
                    out[i] = b[i] or (a[i] and out[succ[i]])
        else:  # release, always
            if k == "release":
                a, b = sat(g.children[0]), sat(g.children[1])
            else:
                a, b = [False] * n, sat(g.children[0])
            out = [True] * n
            for _ in range(n + 1):
                for i in reversed(range(n)):
                    out[i] = b[i] and (a[i] or out[succ[i]])
        cache[g] = out
        return out

    return sat(f)[0]
