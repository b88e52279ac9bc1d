"""Expression mini-language: parser and canonical printer.

Grammar (whitespace-insensitive)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor+
    factor := scalar | atom
    scalar := RATIONAL | 'i' | 'nbar' ['^' INT] | 'dt' ['^' INT] | 'sqdt'
    atom   := NAME '[' INT ']' | 'tau' | '(' expr ')'
    NAME   := b bd tb tbd J tJ fb fbd tfb tfbd c cv tc tcv dB dBd dtB dtBd
    RATIONAL := INT ['/' INT]

Atoms at the noise (fb...), quasiparticle (c...) and increment (dB...)
levels parse into their respective operator families; ``lower_level0``
rewrites them into raw generators for reduction.  Errors carry the
character position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .atoms import (Generator, Kind, NoiseKind, NoiseOp, QuasiKind, QuasiOp,
                    StatisticsFlag, TAU)
from .poly import Poly, Word
from .scalars import ScalarExpr


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.line = 1
        self.col = pos + 1
        super().__init__(f"{message} (at column {self.col})")


_LEVEL0_NAMES = {"b": Kind.A, "bd": Kind.AD, "tb": Kind.TA, "tbd": Kind.TAD,
                 "J": Kind.J, "tJ": Kind.TJ}
_NOISE_NAMES = {"fb": NoiseKind.B, "fbd": NoiseKind.BD,
                "tfb": NoiseKind.TB, "tfbd": NoiseKind.TBD}
_QUASI_NAMES = {"c": QuasiKind.C, "cv": QuasiKind.CV,
                "tc": QuasiKind.TC, "tcv": QuasiKind.TCV}
_INCREMENT_NAMES = {"dB": NoiseKind.B, "dBd": NoiseKind.BD,
                    "dtB": NoiseKind.TB, "dtBd": NoiseKind.TBD}

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z]+)|(?P<sym>[-+/^()\[\]]))")


@dataclass
class _Token:
    kind: str  # int | name | sym | end
    text: str
    pos: int


def _tokenize(src: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            bad = len(src) - len(stripped)
            raise ParseError(f"unexpected character {src[bad]!r}", bad, src)
        if m.lastgroup is None:
            break
        tokens.append(_Token(m.lastgroup, m.group(m.lastgroup),
                             m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        if not src.strip():
            raise ParseError("empty expression", 0, src)
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str) -> _Token:
        tok = self.peek()
        if tok.kind != "sym" or tok.text != sym:
            raise ParseError(f"expected {sym!r}", tok.pos, self.src)
        return self.advance()

    # ------------------------------------------------------------- grammar

    def parse(self) -> Poly:
        result = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.text!r}", tok.pos, self.src)
        return result

    def expr(self) -> Poly:
        sign = 1
        tok = self.peek()
        if tok.kind == "sym" and tok.text in "+-":
            sign = -1 if tok.text == "-" else 1
            self.advance()
        total = self.term().scaled(ScalarExpr.integer(sign))
        while True:
            tok = self.peek()
            if tok.kind == "sym" and tok.text in "+-":
                self.advance()
                nxt = self.term()
                total = total + (nxt if tok.text == "+" else -nxt)
            else:
                return total

    def term(self) -> Poly:
        prod: Optional[Poly] = None
        while True:
            factor = self.factor()
            if factor is None:
                break
            prod = factor if prod is None else prod * factor
        if prod is None:
            tok = self.peek()
            raise ParseError("expected a term", tok.pos, self.src)
        return prod

    def factor(self) -> Optional[Poly]:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            num = int(tok.text)
            if self._at_sym("/"):
                self.advance()
                den_tok = self.peek()
                if den_tok.kind != "int":
                    raise ParseError("expected a denominator", den_tok.pos, self.src)
                self.advance()
                if int(den_tok.text) == 0:
                    raise ParseError("zero denominator", den_tok.pos, self.src)
                return Poly.scalar(ScalarExpr.rational(Fraction(num, int(den_tok.text))))
            return Poly.scalar(ScalarExpr.integer(num))
        if tok.kind == "name":
            return self._name_factor()
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_sym(")")
            return inner
        return None

    def _at_sym(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == sym

    def _power_suffix(self) -> int:
        if self._at_sym("^"):
            self.advance()
            tok = self.peek()
            if tok.kind != "int":
                raise ParseError("expected an integer power", tok.pos, self.src)
            self.advance()
            return int(tok.text)
        return 1

    def _name_factor(self) -> Poly:
        tok = self.advance()
        name = tok.text
        if name == "i":
            return Poly.scalar(ScalarExpr.i())
        if name == "nbar":
            return Poly.scalar(ScalarExpr.nbar(self._power_suffix()))
        if name == "dt":
            return Poly.scalar(ScalarExpr.dt(self._power_suffix()))
        if name == "sqdt":
            return Poly.scalar(ScalarExpr.sqdt())
        if name == "tau":
            return Poly.atom(TAU)
        slot = self._slot_index(name, tok.pos)
        if name in _LEVEL0_NAMES:
            return Poly.atom(Generator(_LEVEL0_NAMES[name], slot))
        if name in _NOISE_NAMES:
            return Poly.atom(NoiseOp(_NOISE_NAMES[name], slot))
        if name in _QUASI_NAMES:
            return Poly.atom(QuasiOp(_QUASI_NAMES[name], slot))
        if name in _INCREMENT_NAMES:
            return Poly.atom(NoiseOp(_INCREMENT_NAMES[name], slot),
                             ScalarExpr.sqdt())
        raise ParseError(f"unknown operator name {name!r}", tok.pos, self.src)

    def _slot_index(self, name: str, name_pos: int) -> int:
        tok = self.peek()
        if not (tok.kind == "sym" and tok.text == "["):
            raise ParseError(f"operator {name!r} needs a slot index like {name}[1]",
                             name_pos, self.src)
        self.advance()
        idx_tok = self.peek()
        if idx_tok.kind != "int":
            raise ParseError("expected a slot index", idx_tok.pos, self.src)
        self.advance()
        slot = int(idx_tok.text)
        if slot < 1:
            raise ParseError("slot indices start at 1", idx_tok.pos, self.src)
        self.expect_sym("]")
        return slot


def parse_expr(src: str) -> Poly:
    """Parse source text into a polynomial over mixed operator families."""
    return _Parser(src).parse()


def lower_level0(p: Poly, flag: StatisticsFlag) -> Poly:
    """Rewrite noise and quasiparticle atoms into level-0 generators."""
    from .thermal import expand_noise_atom, from_c_basis_atom

    def lower_atom(g) -> Poly:
        if isinstance(g, Generator):
            return Poly.atom(g)
        if isinstance(g, NoiseOp):
            return Poly.atom(g).substitute_atoms(expand_noise_atom)
        if isinstance(g, QuasiOp):
            return from_c_basis_atom(g, flag).substitute_atoms(expand_noise_atom)
        raise TypeError(f"cannot lower atom {g!r}")

    return p.substitute_atoms(lower_atom)


# -------------------------------------------------------------- printing


def _atom_sort_key(g) -> Tuple:
    if isinstance(g, Generator):
        block = {Kind.AD: 0, Kind.TAD: 0, Kind.J: 1, Kind.TJ: 1,
                 Kind.TAU: 2, Kind.A: 3, Kind.TA: 3}[g.kind]
        return (0, block, g.tilde if not g.is_tau else False,
                g.slot or 0, g.kind.value)
    if isinstance(g, NoiseOp):
        return (1, 0, g.tilde, g.slot, g.kind.value)
    return (2, 0, g.tilde, g.slot, g.kind.value)


def _word_sort_key(word: Word) -> Tuple:
    return (-len(word), tuple(_atom_sort_key(g) for g in word))


def atom_name(g) -> str:
    return str(g)


def print_poly(p: Poly) -> str:
    """Canonical grammar text; parse_expr(print_poly(p)) reproduces p."""
    if p.is_zero:
        return "0"
    pieces: List[Tuple[int, str]] = []
    for word in sorted(p.words, key=_word_sort_key):
        coeff = p.words[word]
        if coeff.den_pow:
            raise ValueError(
                "polynomial carries thermal denominators; not grammar-printable")
        body = " ".join(atom_name(g) for g in word)
        for sign, scalar_text in coeff.monomial_strings():
            if scalar_text == "1" and body:
                pieces.append((sign, body))
            else:
                pieces.append((sign, f"{scalar_text} {body}".strip()))
    out = []
    for idx, (sign, text) in enumerate(pieces):
        if idx == 0:
            out.append(("-" + text) if sign < 0 else text)
        else:
            out.append(("- " if sign < 0 else "+ ") + text)
    return " ".join(out)
