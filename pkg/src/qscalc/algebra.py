"""Level-0 operator algebra: normal ordering, brackets, expectations.

The generators live on a discrete time lattice of dimensionless slot modes:
the continuum field at time t corresponds to a_k / sqrt(dt) and the process
increment to sqrt(dt) * J_k a_k.  All identities below are exact lattice
statements; no limits are taken.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .atoms import (FERMION, Generator, Kind, StatisticsFlag, TAU)
from .poly import Poly, Word
from .rewrite import LevelZeroRules, normal_order_poly
from .scalars import ScalarExpr


class ConfigurationError(ValueError):
    """Operands belong to different algebra sessions (flag/lattice mismatch)."""


class UnsupportedExpectationError(ValueError):
    """The requested expectation depends on a convention the algebra leaves open."""


def _check_level0(p: Poly):
    for g in p.atoms():
        if not isinstance(g, Generator):
            raise TypeError(f"expected level-0 generators, found {g!r}")


def normal_order(p: Poly, flag: StatisticsFlag) -> Poly:
    """Canonical form: creators, reflections, tau power, annihilators.

    Idempotent, value-preserving, and terminating; see
    :class:`qscalc.rewrite.LevelZeroRules` for the exchange relations.
    """
    _check_level0(p)
    return normal_order_poly(p, LevelZeroRules(flag))


def word_grade(word: Word, flag: StatisticsFlag) -> int:
    """Fermion parity of a word (0 for bosons)."""
    return sum(g.grade(flag) for g in word) % 2


def graded_commutator(x: Poly, y: Poly, flag: StatisticsFlag) -> Poly:
    """The statistics bracket [x, y] = x y - sigma * y x, normal ordered.

    sigma = +1 gives the commutator, sigma = -1 the anticommutator; the sign
    is fixed by the statistics, not by operand grades.
    """
    _check_level0(x)
    _check_level0(y)
    bracket = x * y - (y * x).scaled(flag.sigma_scalar)
    return normal_order(bracket, flag)


def commutator(x: Poly, y: Poly, flag: StatisticsFlag) -> Poly:
    """Plain commutator x y - y x, normal ordered (mixed-sector relations)."""
    _check_level0(x)
    _check_level0(y)
    return normal_order(x * y - y * x, flag)


def vacuum_expectation(p: Poly, flag: StatisticsFlag) -> ScalarExpr:
    """Fock vacuum expectation of a level-0 polynomial.

    Words with surviving slot modes vanish; reflections act trivially on the
    vacuum.  The Klein factor tau has no defined vacuum action, so its
    presence in the input is rejected.
    """
    _check_level0(p)
    for g in p.atoms():
        if g.is_tau:
            raise UnsupportedExpectationError(
                "tau has no defined action on the bare vacuum; "
                "normal-order first so even tau powers collapse")
    total = ScalarExpr.zero()
    for word, coeff in normal_order(p, flag):
        if all(g.is_reflection for g in word):
            total = total + coeff
    return total


def solve_reflection_constraints(flag: StatisticsFlag):
    """Search sigma_<, sigma_> in {+-1}^2 for the reflection weights.

    Equal-time compatibility requires 1 - sigma*sigma_< = 0 and canonicity of
    the dressed modes requires sigma_> * sigma_< - sigma = 0.  Exactly one of
    the four candidates survives: (sigma, +1).
    """
    solutions = [
        (lt, gt)
        for lt, gt in product((1, -1), repeat=2)
        if 1 - flag.sigma * lt == 0 and gt * lt - flag.sigma == 0
    ]
    if len(solutions) != 1:
        raise AssertionError(f"expected a unique solution, got {solutions}")
    return solutions[0]


def tilde_conjugate(p: Poly, flag: StatisticsFlag) -> Poly:
    """Antilinear thermal-double conjugation of a level-0 polynomial.

    Coefficients are complex conjugated, every generator is swapped with its
    tilde partner factor by factor (order preserved), and tau maps to its
    adjoint sigma*tau.
    """
    _check_level0(p)
    out: dict = {}
    for word, coeff in p:
        new_coeff = coeff.conjugate()
        tau_count = sum(1 for g in word if g.is_tau)
        if tau_count % 2 and flag.sigma == -1:
            new_coeff = -new_coeff
        new_word = tuple(g.tilde_partner() for g in word)
        acc = out.get(new_word)
        val = new_coeff if acc is None else acc + new_coeff
        if not val.is_zero:
            out[new_word] = val
        else:
            out.pop(new_word, None)
    return Poly(out)


def exp_vector_matrix_element(f: np.ndarray, g: np.ndarray, p: Poly,
                              flag: StatisticsFlag, dt: float,
                              nbar: float = 0.0) -> complex:
    """Matrix element of ``p`` between exponential (coherent) vectors.

    ``f`` and ``g`` are slot-sampled amplitudes of length N.  The slot mode
    a_k acts on |e(g)> with eigenvalue g[k-1]*sqrt(dt), its adjoint acts on
    the bra with f[k-1].conj()*sqrt(dt), and the overlap is
    exp(sum f* g dt).  Boson statistics only; reflections are the identity
    there, and tilde factors are not representable in a single-sector family.
    """
    if flag.sigma != 1:
        raise UnsupportedExpectationError(
            "exponential vectors with numeric amplitudes are boson-only")
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.ndim != 1:
        raise ConfigurationError("f and g must be equal-length 1-d arrays")
    n_slots = f.size
    sq = dt ** 0.5
    total = 0j
    for word, coeff in normal_order(p, flag):
        factor = coeff.evaluate(nbar=nbar, dt=dt)
        for gen in word:
            if gen.is_reflection:
                continue  # boson reflection is the identity
            if gen.tilde or gen.is_tau:
                raise UnsupportedExpectationError(
                    "tilde/tau factors have no single-sector exponential action")
            if gen.slot > n_slots:
                raise ConfigurationError(
                    f"slot {gen.slot} outside the sampled lattice (N={n_slots})")
            amp = np.conj(f[gen.slot - 1]) if gen.is_creator else g[gen.slot - 1]
            factor *= amp * sq
        total += factor
    overlap = np.exp(np.sum(np.conj(f) * g) * dt)
    return complex(total * overlap)
