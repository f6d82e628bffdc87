"""Text syntax for free polynomial maps.

Grammar::

    map    := ["vars" ident ("," ident)* ";"] "(" expr ("," expr)* ")"
    expr   := ["+"|"-"] term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := atom ["^" uint]
    atom   := ident | literal | "(" expr ")" | "[" expr "," expr "]"

Literals are ``3``, ``2.5``, ``1e-3``, ``i``, ``3i``; a complex number with
both parts is written as a parenthesized sum such as ``(2+3i)``.  ``[A,B]``
is the commutator ``A*B - B*A``.  The identifier ``i`` is the imaginary
unit and ``vars`` is reserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .ncpoly import FreePoly, FreePolyMap

RESERVED = {"i", "vars"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*^()\[\],;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "imag", "ident", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        elif m.group("num") is not None:
            kind = "imag" if m.group("imag") else "num"
            tokens.append(Token(kind, m.group("num"), line, col))
        else:
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens, names):
        self.tokens = tokens
        self.pos = 0
        self.names = list(names)
        self.index = {name: k for k, name in enumerate(self.names)}
        self.n = len(self.names)

    @property
    def tok(self):
        return self.tokens[self.pos]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    # Values are complex scalars until they meet a variable, so a literal
    # such as (1+1e-20i) is formed exactly before any pruning happens.

    def poly(self, v):
        return v if isinstance(v, FreePoly) else FreePoly.constant(self.n, v)

    def add(self, a, b):
        if isinstance(a, complex) and isinstance(b, complex):
            return a + b
        return self.poly(a) + self.poly(b)

    def mul(self, a, b):
        if isinstance(a, complex) and isinstance(b, complex):
            return a * b
        if isinstance(a, complex):
            return b.scale(a)
        if isinstance(b, complex):
            return a.scale(b)
        return a * b

    def power(self, a, k):
        if isinstance(a, complex):
            return self.poly(a) ** k
        return a ** k

    def expr(self):
        negate = False
        if self.tok.kind == "op" and self.tok.text in ("+", "-"):
            negate = self.tok.text == "-"
            self.pos += 1
        out = self.term()
        if negate:
            out = -out
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.pos += 1
            rhs = self.term()
            out = self.add(out, rhs if op == "+" else -rhs)
        return out

    def term(self):
        out = self.factor()
        while self.accept("*"):
            out = self.mul(out, self.factor())
        return out

    def factor(self):
        base = self.atom()
        if self.accept("^"):
            tok = self.tok
            if tok.kind == "op" and tok.text == "-":
                raise self.error("negative exponent")
            if tok.kind != "num" or not tok.text.isdigit():
                raise self.error(f"exponent must be a nonnegative integer, found {tok.text!r}")
            self.pos += 1
            return self.power(base, int(tok.text))
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return complex(float(tok.text), 0.0)
        if tok.kind == "imag":
            self.pos += 1
            return complex(0.0, float(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if tok.text == "i":
                return 1j
            if tok.text not in self.index:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            return FreePoly.var(self.n, self.index[tok.text])
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if self.accept("["):
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect("]")
            return self.add(self.mul(a, b), -self.mul(b, a))
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def _read_header(tokens):
    """Return (declared names or None, index of first token after header)."""
    if not (tokens[0].kind == "ident" and tokens[0].text == "vars"):
        return None, 0
    names, pos = [], 1
    while True:
        tok = tokens[pos]
        if tok.kind != "ident" or tok.text in RESERVED:
            raise ParseError(f"expected variable name, found {tok.text!r}", tok.line, tok.col)
        if tok.text in names:
            raise ParseError(f"duplicate variable {tok.text!r}", tok.line, tok.col)
        names.append(tok.text)
        pos += 1
        tok = tokens[pos]
        if tok.kind == "op" and tok.text == ",":
            pos += 1
            continue
        if tok.kind == "op" and tok.text == ";":
            return names, pos + 1
        raise ParseError(f"expected ',' or ';' in vars header, found {tok.text!r}",
                         tok.line, tok.col)


def _first_appearance(tokens):
    names = []
    for tok in tokens:
        if tok.kind == "ident" and tok.text not in RESERVED and tok.text not in names:
            names.append(tok.text)
    return names


def parse_map(text: str) -> FreePolyMap:
    """Parse ``"vars X,Y; (X + Y, X^2 + Y^2)"`` into a :class:`FreePolyMap`.

    Without a ``vars`` header, variables are numbered in order of first
    appearance.
    """
    tokens = tokenize(text)
    names, start = _read_header(tokens)
    body = tokens[start:]
    if names is None:
        names = _first_appearance(body)
    p = _Parser(body, names)
    p.expect("(")
    if p.tok.kind == "op" and p.tok.text == ")":
        raise p.error("a map needs at least one component")
    comps = [p.poly(p.expr())]
    while p.accept(","):
        comps.append(p.poly(p.expr()))
    p.expect(")")
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return FreePolyMap(comps, names, len(names))


def parse_poly(text: str, names=None) -> FreePoly:
    """Parse a single expression.  ``names`` fixes the variable order."""
    tokens = tokenize(text)
    if names is None:
        names = _first_appearance(tokens)
    p = _Parser(tokens, names)
    out = p.poly(p.expr())
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return out


def default_names(num_vars):
    if num_vars <= 3:
        return ["X", "Y", "Z"][:num_vars]
    return [f"X{k + 1}" for k in range(num_vars)]


def _fmt_real(x):
    if x.is_integer() and abs(x) < 2.0**53:
        return str(int(x))
    return repr(x)


def _fmt_word(word, names, powers):
    if not powers:
        return "*".join(names[i] for i in word)
    parts, k = [], 0
    while k < len(word):
        j = k
        while j < len(word) and word[j] == word[k]:
            j += 1
        run = j - k
        parts.append(names[word[k]] if run == 1 else f"{names[word[k]]}^{run}")
        k = j
    return "*".join(parts)


def _fmt_term(c, word_text):
    """Return (negative, text) for one term."""
    if c.imag == 0:
        negative, mag = c.real < 0, abs(c.real)
        body = "" if mag == 1.0 and word_text else _fmt_real(mag)
    elif c.real == 0:
        negative, mag = c.imag < 0, abs(c.imag)
        body = "i" if mag == 1.0 else _fmt_real(mag) + "i"
    else:
        sign = "+" if c.imag > 0 else "-"
        negative = False
        body = f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"
    if body and word_text:
        return negative, f"{body}*{word_text}"
    return negative, body or word_text


def print_poly(p: FreePoly, names=None, powers=False) -> str:
    """Canonical text of ``p``: terms in word order, exact float digits.

    With ``powers=True`` repeated letters are written ``X^k``.
    """
    names = list(names) if names is not None else default_names(p.num_vars)
    if len(names) < p.num_vars:
        raise ValueError(f"{len(names)} names for {p.num_vars} variables")
    if p.is_zero():
        return "0"
    out = []
    for k, (word, c) in enumerate(p.items()):
        negative, text = _fmt_term(c, _fmt_word(word, names, powers))
        if k == 0:
            out.append("-" + text if negative else text)
        else:
            out.append((" - " if negative else " + ") + text)
    return "".join(out)


def print_map(P: FreePolyMap, powers=False, header=True) -> str:
    """Canonical text of a map; ``parse_map(print_map(P)) == P``."""
    names = list(P.names) if P.names is not None else default_names(P.num_vars)
    body = "(" + ", ".join(print_poly(c, names, powers) for c in P.components) + ")"
    if not header or not names:
        return body
    return f"vars {', '.join(names)}; {body}"
