"""Exact scalar coefficients for the symbolic layer.

The coefficient ring is

    Q(i)[nbar, sqdt] / ((1 + s*nbar)^m denominators),

i.e. polynomials in the occupation symbol ``nbar`` and the half-power lattice
step ``sqdt`` (with ``sqdt**2 == dt``) over Gaussian rationals, divided by a
power of the thermal base ``1 + s*nbar`` (s = +1 bosons, s = -1 fermions).
Every value is kept in a unique reduced canonical form, so equality is
structural and printing is deterministic.  No floating point enters until
:meth:`ScalarExpr.evaluate`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

RationalLike = Union[int, Fraction]


class GaussianRational:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!r}, {self.im!r})"


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)

# monomial key: (power of nbar, power of sqdt); dt == sqdt**2


def _poly_mul(a: Mapping[tuple, GaussianRational],
              b: Mapping[tuple, GaussianRational]) -> dict:
    out: dict = {}
    for (n1, h1), c1 in a.items():
        for (n2, h2), c2 in b.items():
            key = (n1 + n2, h1 + h2)
            acc = out.get(key)
            val = c1 * c2 if acc is None else acc + c1 * c2
            if val.is_zero:
                out.pop(key, None)
            else:
                out[key] = val
    return out


def _poly_add(a: Mapping[tuple, GaussianRational],
              b: Mapping[tuple, GaussianRational]) -> dict:
    out = dict(a)
    for key, c in b.items():
        acc = out.get(key)
        val = c if acc is None else acc + c
        if val.is_zero:
            out.pop(key, None)
        else:
            out[key] = val
    return out


def _poly_mul_base(terms: Mapping[tuple, GaussianRational], sigma: int) -> dict:
    """Multiply by (1 + sigma*nbar)."""
    shifted = {(n + 1, h): (c if sigma == 1 else -c) for (n, h), c in terms.items()}
    return _poly_add(terms, shifted)


def _poly_div_base(terms: Mapping[tuple, GaussianRational], sigma: int):
    """Exact division by (1 + sigma*nbar); returns None when not divisible."""
    # Work slice-by-slice in the sqdt power; divide each nbar polynomial.
    by_h: dict = {}
    for (n, h), c in terms.items():
        by_h.setdefault(h, {})[n] = c
    out: dict = {}
    s = Fraction(sigma)
    for h, coeffs in by_h.items():
        if not coeffs:
            continue
        deg = max(coeffs)
        rem = {j: coeffs.get(j, GR_ZERO) for j in range(deg + 1)}
        quot: dict = {}
        for j in range(deg, 0, -1):
            qj = GaussianRational(rem[j].re / s, rem[j].im / s)
            if not qj.is_zero:
                quot[j - 1] = qj
            rem[j - 1] = rem[j - 1] - qj
            rem[j] = GR_ZERO
        if not rem[0].is_zero:
            return None
        for j, c in quot.items():
            out[(j, h)] = c
    return out


class ScalarExpr:
    """Canonical exact coefficient: polynomial over (1 + sigma*nbar)^m."""

    __slots__ = ("terms", "den_sigma", "den_pow")

    def __init__(self, terms: Mapping[tuple, GaussianRational] | None = None,
                 den_sigma: int = 1, den_pow: int = 0):
        clean = {k: v for k, v in (terms or {}).items() if not v.is_zero}
        if den_pow < 0:
            raise ValueError("denominator power must be nonnegative")
        if den_sigma not in (1, -1):
            raise ValueError("denominator sigma must be +1 or -1")
        # reduce the fraction and normalise the trivial denominator
        while den_pow > 0 and clean:
            reduced = _poly_div_base(clean, den_sigma)
            if reduced is None:
                break
            clean = reduced
            den_pow -= 1
        if not clean:
            den_pow = 0
        if den_pow == 0:
            den_sigma = 1
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "den_sigma", den_sigma)
        object.__setattr__(self, "den_pow", den_pow)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarExpr is immutable")

    # ---------------------------------------------------------- constructors

    @staticmethod
    def zero() -> "ScalarExpr":
        return _ZERO

    @staticmethod
    def one() -> "ScalarExpr":
        return _ONE

    @staticmethod
    def integer(n: int) -> "ScalarExpr":
        return ScalarExpr({(0, 0): GaussianRational(n)})

    @staticmethod
    def rational(value: RationalLike) -> "ScalarExpr":
        return ScalarExpr({(0, 0): GaussianRational(value)})

    @staticmethod
    def complex_rational(re: RationalLike, im: RationalLike) -> "ScalarExpr":
        return ScalarExpr({(0, 0): GaussianRational(re, im)})

    @staticmethod
    def from_gr(c: GaussianRational) -> "ScalarExpr":
        return ScalarExpr({(0, 0): c})

    @staticmethod
    def i() -> "ScalarExpr":
        return _I

    @staticmethod
    def nbar(power: int = 1) -> "ScalarExpr":
        return ScalarExpr({(power, 0): GR_ONE})

    @staticmethod
    def dt(power: int = 1) -> "ScalarExpr":
        return ScalarExpr({(0, 2 * power): GR_ONE})

    @staticmethod
    def sqdt(half_power: int = 1) -> "ScalarExpr":
        return ScalarExpr({(0, half_power): GR_ONE})

    @staticmethod
    def thermal_base(sigma: int, power: int = 1) -> "ScalarExpr":
        """(1 + sigma*nbar)**power as a polynomial."""
        out = {(0, 0): GR_ONE}
        for _ in range(power):
            out = _poly_mul_base(out, sigma)
        return ScalarExpr(out)

    @staticmethod
    def over_thermal_base(numer: "ScalarExpr", sigma: int, power: int = 1) -> "ScalarExpr":
        """numer / (1 + sigma*nbar)**power."""
        if numer.den_pow and numer.den_sigma != sigma:
            _raise_mixed(numer.den_sigma, sigma)
        return ScalarExpr(numer.terms, den_sigma=sigma,
                          den_pow=numer.den_pow + power)

    # ---------------------------------------------------------- arithmetic

    def _common_den(self, other: "ScalarExpr"):
        if self.den_pow and other.den_pow and self.den_sigma != other.den_sigma:
            _raise_mixed(self.den_sigma, other.den_sigma)
        sigma = self.den_sigma if self.den_pow else other.den_sigma
        return sigma

    def __add__(self, other: "ScalarExpr") -> "ScalarExpr":
        sigma = self._common_den(other)
        pow_ = max(self.den_pow, other.den_pow)
        a = self.terms
        for _ in range(pow_ - self.den_pow):
            a = _poly_mul_base(a, sigma)
        b = other.terms
        for _ in range(pow_ - other.den_pow):
            b = _poly_mul_base(b, sigma)
        return ScalarExpr(_poly_add(a, b), sigma, pow_)

    def __sub__(self, other: "ScalarExpr") -> "ScalarExpr":
        return self + (-other)

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr({k: -v for k, v in self.terms.items()},
                          self.den_sigma, self.den_pow)

    def __mul__(self, other: "ScalarExpr") -> "ScalarExpr":
        sigma = self._common_den(other)
        return ScalarExpr(_poly_mul(self.terms, other.terms), sigma,
                          self.den_pow + other.den_pow)

    def scale(self, c: GaussianRational) -> "ScalarExpr":
        return ScalarExpr({k: v * c for k, v in self.terms.items()},
                          self.den_sigma, self.den_pow)

    def times_i(self) -> "ScalarExpr":
        return self.scale(GR_I)

    def conjugate(self) -> "ScalarExpr":
        """Complex conjugation; nbar and dt are real symbols."""
        return ScalarExpr({k: v.conjugate() for k, v in self.terms.items()},
                          self.den_sigma, self.den_pow)

    # ---------------------------------------------------------- predicates

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return self.den_pow == 0 and self.terms == {(0, 0): GR_ONE}

    def __bool__(self) -> bool:
        return not self.is_zero

    def _key(self):
        return (tuple(sorted(self.terms.items(), key=lambda kv: kv[0])),
                self.den_sigma, self.den_pow)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    # ---------------------------------------------------------- dt grading

    def dt_half_orders(self) -> set:
        return {h for (_, h) in self.terms}

    def min_dt_half_order(self):
        return min(self.dt_half_orders(), default=None)

    def keep_dt_order(self, order: int) -> "ScalarExpr":
        """Keep only monomials of exact order dt**order (half power 2*order)."""
        kept = {k: v for k, v in self.terms.items() if k[1] == 2 * order}
        return ScalarExpr(kept, self.den_sigma, self.den_pow)

    def drop_above_dt_half_order(self, half_order: int) -> "ScalarExpr":
        kept = {k: v for k, v in self.terms.items() if k[1] <= half_order}
        return ScalarExpr(kept, self.den_sigma, self.den_pow)

    # ---------------------------------------------------------- substitution

    def substitute_nbar(self, value: RationalLike) -> "ScalarExpr":
        """Exact substitution of a rational occupation number."""
        v = Fraction(value)
        out: dict = {}
        for (n, h), c in self.terms.items():
            factor = GaussianRational(v ** n) if n else GR_ONE
            key = (0, h)
            acc = out.get(key, GR_ZERO) + c * factor
            if acc.is_zero:
                out.pop(key, None)
            else:
                out[key] = acc
        if self.den_pow:
            base = 1 + self.den_sigma * v
            if base == 0:
                raise ZeroDivisionError(
                    "thermal base 1 + sigma*nbar vanishes at nbar=%s" % v)
            inv = GaussianRational(Fraction(1) / base ** self.den_pow)
            out = {k: c * inv for k, c in out.items()}
        return ScalarExpr(out)

    def evaluate(self, nbar: float = 0.0, dt: float = 1.0) -> complex:
        total = 0j
        sq = dt ** 0.5
        for (n, h), c in self.terms.items():
            total += complex(c) * (nbar ** n) * (sq ** h)
        if self.den_pow:
            total /= (1 + self.den_sigma * nbar) ** self.den_pow
        return total

    # ---------------------------------------------------------- printing

    def monomial_strings(self) -> list:
        """Grammar-compatible scalar factor strings, one per real/imag part
        of each monomial, each as (sign, text) with sign in {+1, -1}."""
        parts = []
        for (n, h) in sorted(self.terms):
            c = self.terms[(n, h)]
            for kind, val in (("re", c.re), ("im", c.im)):
                if val == 0:
                    continue
                sign = 1 if val > 0 else -1
                factors = []
                mag = abs(val)
                if mag != 1 or (n == 0 and h == 0 and kind == "re"):
                    factors.append(str(mag))
                if kind == "im":
                    factors.append("i")
                if n == 1:
                    factors.append("nbar")
                elif n > 1:
                    factors.append(f"nbar^{n}")
                full, half = divmod(h, 2)
                if full == 1:
                    factors.append("dt")
                elif full > 1:
                    factors.append(f"dt^{full}")
                if half:
                    factors.append("sqdt")
                if not factors:
                    factors.append("1")
                parts.append((sign, " ".join(factors)))
        return parts

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = self.monomial_strings()
        out = []
        for idx, (sign, text) in enumerate(parts):
            if idx == 0:
                out.append(("-" if sign < 0 else "") + text)
            else:
                out.append(("- " if sign < 0 else "+ ") + text)
        numer = " ".join(out)
        if not self.den_pow:
            return numer
        base = "(1 + nbar)" if self.den_sigma == 1 else "(1 - nbar)"
        if self.den_pow > 1:
            base += f"^{self.den_pow}"
        if len(parts) > 1:
            numer = f"({numer})"
        return f"{numer}/{base}"

    def __repr__(self) -> str:
        return f"ScalarExpr({self})"

    def latex(self) -> str:
        if self.is_zero:
            return "0"
        chunks = []
        for (n, h) in sorted(self.terms):
            c = self.terms[(n, h)]
            for kind, val in (("re", c.re), ("im", c.im)):
                if val == 0:
                    continue
                mag = abs(val)
                body = ""
                if mag != 1 or (n == 0 and h == 0 and kind == "re"):
                    body += (str(mag) if mag.denominator == 1
                             else r"\tfrac{%d}{%d}" % (mag.numerator, mag.denominator))
                if kind == "im":
                    body += "i"
                if n:
                    body += r"\bar{n}" + (f"^{{{n}}}" if n > 1 else "")
                full, half = divmod(h, 2)
                if full:
                    body += r"\,\Delta t" + (f"^{{{full}}}" if full > 1 else "")
                if half:
                    body += r"\,\sqrt{\Delta t}"
                chunks.append(("-" if val < 0 else "+") + (body or "1"))
        joined = " ".join(chunks).lstrip("+").strip()
        if self.den_pow:
            sgn = "+" if self.den_sigma == 1 else "-"
            den = r"(1 %s \bar{n})" % sgn
            if self.den_pow > 1:
                den += f"^{{{self.den_pow}}}"
            joined = r"\frac{%s}{%s}" % (joined, den)
        return joined


def _raise_mixed(a: int, b: int):
    raise ValueError(
        f"cannot combine thermal denominators with sigma={a} and sigma={b}")


_ZERO = ScalarExpr({})
_ONE = ScalarExpr({(0, 0): GR_ONE})
_I = ScalarExpr({(0, 0): GR_I})


def sum_exprs(items: Iterable[ScalarExpr]) -> ScalarExpr:
    total = _ZERO
    for item in items:
        total = total + item
    return total
