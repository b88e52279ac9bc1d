"""Terminating rewrite engine for normal ordering.

Words are rewritten by repeatedly fixing the leftmost adjacent defect.  A
defect is either a pair out of canonical block order, a pair out of sort
order inside a block, or an adjacent identical pair that collapses (J_k^2 =
1, tau^2 = sigma, nilpotent fermion modes).  Every swap strictly lowers the
number of inversions with respect to the target order and every collapse or
contraction strictly shortens the word, so the lexicographic measure
(word length, inversions) proves termination.

Level-0 canonical order: creators < reflections < tau < annihilators, each
block sorted by (tilde, slot).  The exchange rules implement the lattice
algebra exactly:

* same-sector slot modes: a_k a_l^dag = sigma a_l^dag a_k + delta_kl,
  equal-kind swaps carry sigma, fermion squares vanish;
* opposite-sector slot modes commute plainly;
* J_k x_l = u(k,l) x_l J_k with u = sigma when l <= k (same sector), else 1;
* tau picks up sigma against every slot mode and commutes with reflections.
"""

from __future__ import annotations

from typing import Callable, Tuple

from .atoms import Generator, Kind, QuasiKind, QuasiOp, StatisticsFlag
from .poly import Poly, Word
from .scalars import ScalarExpr

# swap result: (sign, contraction); `sign` may be 0 meaning "word vanishes"
SwapRule = Callable[[object, object], Tuple[int, bool]]


class RewriteRules:
    """Block order, sort keys and exchange relations for one alphabet."""

    def block(self, g) -> int:
        raise NotImplementedError

    def key(self, g):
        raise NotImplementedError

    def swap(self, g1, g2):
        """Rewrite g1 g2 -> sign * g2 g1 (+ contraction * 1 when told so).

        Returns (sign: int, contract: bool).
        """
        raise NotImplementedError

    def collapse(self, g):
        """Handle an adjacent identical pair g g.

        Returns None to keep the pair (boson repeats), or an integer scalar
        s meaning g g -> s * (empty), with s = 0 killing the word.
        """
        raise NotImplementedError


class LevelZeroRules(RewriteRules):
    _BLOCK = {Kind.AD: 0, Kind.TAD: 0, Kind.J: 1, Kind.TJ: 1,
              Kind.TAU: 2, Kind.A: 3, Kind.TA: 3}

    def __init__(self, flag: StatisticsFlag):
        self.sigma = flag.sigma

    def block(self, g: Generator) -> int:
        return self._BLOCK[g.kind]

    def key(self, g: Generator):
        if g.is_tau:
            return ()
        return (g.tilde, g.slot)

    def swap(self, g1: Generator, g2: Generator):
        s = self.sigma
        if g1.is_tau or g2.is_tau:
            other = g2 if g1.is_tau else g1
            return (s if other.is_a_type else 1), False
        if g1.is_reflection or g2.is_reflection:
            if g1.is_reflection and g2.is_reflection:
                return 1, False
            j, x = (g1, g2) if g1.is_reflection else (g2, g1)
            if j.tilde != x.tilde:
                return 1, False
            return (s if x.slot <= j.slot else 1), False
        # both slot modes
        if g1.tilde != g2.tilde:
            return 1, False
        sign = s
        contract = (g1.is_annihilator and g2.is_creator and g1.slot == g2.slot)
        return sign, contract

    def collapse(self, g: Generator):
        if g.is_reflection:
            return 1
        if g.is_tau:
            return self.sigma
        if g.is_a_type and self.sigma == -1:
            return 0
        return None


class QuasiParticleRules(RewriteRules):
    """Abstract canonical-pair algebra of the thermal quasiparticles.

    All atoms carry the same grade, every swap costs sigma, and the only
    contractions pair an annihilator with its conjugate-marked partner in
    the same sector and slot.  This is the continuum calculus algebra; see
    :func:`qscalc.thermal.wick_expectation` for where it is valid on the
    lattice.
    """

    def __init__(self, flag: StatisticsFlag):
        self.sigma = flag.sigma

    def block(self, g: QuasiOp) -> int:
        return 1 if g.kills_ket else 0

    def key(self, g: QuasiOp):
        return (g.tilde, g.slot)

    def swap(self, g1: QuasiOp, g2: QuasiOp):
        contract = (g1.kills_ket and not g2.kills_ket
                    and g1.tilde == g2.tilde and g1.slot == g2.slot)
        return self.sigma, contract

    def collapse(self, g: QuasiOp):
        return 0 if self.sigma == -1 else None


def _first_defect(word: Word, rules: RewriteRules):
    for i in range(len(word) - 1):
        g1, g2 = word[i], word[i + 1]
        if g1 == g2:
            if rules.collapse(g1) is not None:
                return i
            continue
        b1, b2 = rules.block(g1), rules.block(g2)
        if b1 > b2 or (b1 == b2 and rules.key(g1) > rules.key(g2)):
            return i
    return None


def normal_order_poly(p: Poly, rules: RewriteRules) -> Poly:
    """Rewrite every word of ``p`` to canonical form."""
    out: dict = {}
    stack = list(p.words.items())
    while stack:
        word, coeff = stack.pop()
        i = _first_defect(word, rules)
        if i is None:
            acc = out.get(word)
            val = coeff if acc is None else acc + coeff
            if val.is_zero:
                out.pop(word, None)
            else:
                out[word] = val
            continue
        g1, g2 = word[i], word[i + 1]
        head, tail = word[:i], word[i + 2:]
        if g1 == g2:
            scalar = rules.collapse(g1)
            if scalar == 0:
                continue
            stack.append((head + tail, coeff * ScalarExpr.integer(scalar)))
            continue
        sign, contract = rules.swap(g1, g2)
        if sign:
            stack.append((head + (g2, g1) + tail,
                          coeff * ScalarExpr.integer(sign)))
        if contract:
            stack.append((head + tail, coeff))
    return Poly(out)
