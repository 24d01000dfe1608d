"""Co-safe LTL in positive normal form: AST, parser and finite-word semantics.

Concrete syntax::

    !a        negated atom         X f     next
    f & g     conjunction          F f     eventually
    f | g     disjunction          f U g   until (right-associative)
    true, false, ( f )

Binding, tightest first: ``!``, then ``X``/``F``, then ``U``, ``&``, ``|``.
Atoms match ``[a-z][a-z0-9_]*``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union


class LtlSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class NotPositiveNormalForm(LtlSyntaxError):
    pass


class UnsupportedOperator(LtlSyntaxError):
    pass


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NegAtom:
    name: str

    def __str__(self):
        return "!" + self.name


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Next:
    arg: "Formula"

    def __str__(self):
        return f"X {self.arg}"


@dataclass(frozen=True)
class Eventually:
    arg: "Formula"

    def __str__(self):
        return f"F {self.arg}"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"({self.left} U {self.right})"


Formula = Union[Const, Atom, NegAtom, And, Or, Next, Eventually, Until]
TRUE = Const(True)
FALSE = Const(False)


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, (Atom, NegAtom)):
        return frozenset([f.name])
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, (Next, Eventually)):
        return atoms(f.arg)
    return atoms(f.left) | atoms(f.right)


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<ident>[a-z][a-z0-9_]*)"
    r"|(?P<unsupported>->|<->|=>|<=>|\[\]|<>|[GRWM](?![a-z0-9_]))"
    r"|(?P<op>[XFU](?![a-z0-9_])|[!&|()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LtlSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "unsupported":
            raise UnsupportedOperator(f"unsupported operator {value!r} (co-safe fragment only)", start, text)
        if kind == "ident" and value in ("true", "false"):
            kind = "const"
        toks.append((kind, value, start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] == "ident":
            raise LtlSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2], self.text)
        return tok

    def parse(self) -> Formula:
        f = self.disjunction()
        tok = self.peek()
        if tok[0] != "end":
            raise LtlSyntaxError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return f

    def disjunction(self):
        f = self.conjunction()
        while self.peek()[:2] == ("op", "|"):
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.until()
        while self.peek()[:2] == ("op", "&"):
            self.take()
            f = And(f, self.until())
        return f

    def until(self):
        f = self.unary()
        if self.peek()[:2] == ("op", "U"):
            self.take()
            return Until(f, self.until())
        return f

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "!":
            self.take()
            return self.negate(self.unary(), pos)
        if kind == "op" and value in ("X", "F"):
            self.take()
            arg = self.unary()
            return Next(arg) if value == "X" else Eventually(arg)
        return self.primary()

    def negate(self, f, pos):
        if isinstance(f, Atom):
            return NegAtom(f.name)
        if isinstance(f, Const):
            return Const(not f.value)
        raise NotPositiveNormalForm("negation not on atom", pos, self.text)

    def primary(self):
        kind, value, pos = self.take()
        if kind == "ident":
            return Atom(value)
        if kind == "const":
            return Const(value == "true")
        if (kind, value) == ("op", "("):
            f = self.disjunction()
            self.expect(")")
            return f
        raise LtlSyntaxError(f"unexpected {value or 'end of input'!r}", pos, self.text)


def parse(text: str) -> Formula:
    """Parse a co-safe LTL formula.

    >>> parse("!crash U goal")
    Until(left=NegAtom(name='crash'), right=Atom(name='goal'))
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# finite-word semantics (used as an independent oracle for automata)

Letter = Iterable[str]


def holds(f: Formula, word: Sequence[Letter]) -> bool:
    """True iff the finite ``word`` satisfies ``f``.

    Suffixes range over ``word[i:]`` for ``0 <= i <= len(word)``; only
    ``true`` (and boolean combinations of it) hold on the empty suffix.
    This semantics is upward closed under extension, so a word is a good
    prefix of ``f`` whenever ``holds`` is true.
    """
    letters = tuple(frozenset(a) for a in word)
    n = len(letters)

    @lru_cache(maxsize=None)
    def sat(g: Formula, i: int) -> bool:
        if isinstance(g, Const):
            return g.value
        if isinstance(g, Atom):
            return i < n and g.name in letters[i]
        if isinstance(g, NegAtom):
            return i < n and g.name not in letters[i]
        if isinstance(g, And):
            return sat(g.left, i) and sat(g.right, i)
        if isinstance(g, Or):
            return sat(g.left, i) or sat(g.right, i)
        if isinstance(g, Next):
            return i < n and sat(g.arg, i + 1)
        if isinstance(g, Eventually):
            return any(sat(g.arg, k) for k in range(i, n + 1))
        if isinstance(g, Until):
            for k in range(i, n + 1):
                if sat(g.right, k):
                    return True
                if not sat(g.left, k):
                    return False
            return False
        raise TypeError(g)

    return sat(f, 0)


def accepts_some_prefix(f: Formula, word: Sequence[Letter]) -> bool:
    """True iff some prefix of ``word`` satisfies ``f``."""
    return any(holds(f, word[:k]) for k in range(len(word) + 1))
