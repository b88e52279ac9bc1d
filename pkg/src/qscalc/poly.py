"""Formal linear combinations of ordered generator words.

A :class:`Poly` maps words (tuples of atoms from one alphabet) to exact
:class:`~qscalc.scalars.ScalarExpr` coefficients.  Zero coefficients are
pruned on construction, so two polynomials are equal exactly when their
canonical dictionaries coincide.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Tuple

from .scalars import ScalarExpr

Word = Tuple


class Poly:
    __slots__ = ("words",)

    def __init__(self, words: Mapping[Word, ScalarExpr] | None = None):
        clean = {w: c for w, c in (words or {}).items() if not c.is_zero}
        object.__setattr__(self, "words", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # --------------------------------------------------------- constructors

    @staticmethod
    def zero() -> "Poly":
        return Poly({})

    @staticmethod
    def one() -> "Poly":
        return Poly({(): ScalarExpr.one()})

    @staticmethod
    def scalar(c: ScalarExpr) -> "Poly":
        return Poly({(): c})

    @staticmethod
    def atom(g, coeff: ScalarExpr | None = None) -> "Poly":
        return Poly({(g,): coeff if coeff is not None else ScalarExpr.one()})

    @staticmethod
    def word(gens: Iterable, coeff: ScalarExpr | None = None) -> "Poly":
        return Poly({tuple(gens): coeff if coeff is not None else ScalarExpr.one()})

    # ----------------------------------------------------------- arithmetic

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.words)
        for w, c in other.words.items():
            acc = out.get(w)
            val = c if acc is None else acc + c
            if val.is_zero:
                out.pop(w, None)
            else:
                out[w] = val
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return Poly({w: -c for w, c in self.words.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict = {}
        for w1, c1 in self.words.items():
            for w2, c2 in other.words.items():
                w = w1 + w2
                c = c1 * c2
                acc = out.get(w)
                val = c if acc is None else acc + c
                if val.is_zero:
                    out.pop(w, None)
                else:
                    out[w] = val
        return Poly(out)

    def scaled(self, c: ScalarExpr) -> "Poly":
        return Poly({w: coeff * c for w, coeff in self.words.items()})

    def map_coeffs(self, fn: Callable[[ScalarExpr], ScalarExpr]) -> "Poly":
        return Poly({w: fn(c) for w, c in self.words.items()})

    def map_words(self, fn: Callable[[Word], Word]) -> "Poly":
        out: dict = {}
        for w, c in self.words.items():
            nw = fn(w)
            acc = out.get(nw)
            val = c if acc is None else acc + c
            if not val.is_zero:
                out[nw] = val
            else:
                out.pop(nw, None)
        return Poly(out)

    def substitute_atoms(self, fn: Callable[[object], "Poly"]) -> "Poly":
        """Replace each atom by a polynomial and multiply out (linear substitution)."""
        total = Poly.zero()
        for w, c in self.words.items():
            prod = Poly.scalar(c)
            for g in w:
                prod = prod * fn(g)
            total = total + prod
        return total

    # ----------------------------------------------------------- inspection

    @property
    def is_zero(self) -> bool:
        return not self.words

    def coefficient(self, word: Word) -> ScalarExpr:
        return self.words.get(word, ScalarExpr.zero())

    def atoms(self):
        for w in self.words:
            yield from w

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.words == other.words

    def __hash__(self) -> int:
        return hash(frozenset((w, c._key()) for w, c in self.words.items()))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        chunks = []
        for w in sorted(self.words, key=lambda word: (len(word), tuple(str(g) for g in word))):
            c = self.words[w]
            body = " ".join(str(g) for g in w) if w else "1"
            chunks.append(f"({c}) {body}" if not c.is_one else body)
        return " + ".join(chunks)

    def __repr__(self) -> str:
        return f"Poly({self})"
