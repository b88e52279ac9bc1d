"""Statistics flag and the operator alphabets of the three symbolic levels.

Level 0 holds the raw lattice generators (slot modes, reflections, the Klein
factor ``tau``).  The noise level holds the reflection-dressed white-noise
modes that the stochastic calculus is built from, and the quasiparticle level
holds the thermal Bogoliubov operators.  Noise and quasiparticle atoms are
definitions: they expand into level-0 words (see :mod:`qscalc.thermal`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .scalars import GR_I, GR_ONE, GaussianRational, ScalarExpr


@dataclass(frozen=True)
class StatisticsFlag:
    """The particle statistics: sigma = +1 bosons, sigma = -1 fermions.

    tau is the matching unit (1 for bosons, i for fermions) with tau**2 == sigma.
    """

    sigma: int

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")

    @property
    def tau(self) -> GaussianRational:
        return GR_ONE if self.sigma == 1 else GR_I

    @property
    def tau_scalar(self) -> ScalarExpr:
        return ScalarExpr.from_gr(self.tau)

    @property
    def sigma_scalar(self) -> ScalarExpr:
        return ScalarExpr.integer(self.sigma)

    @property
    def name(self) -> str:
        return "boson" if self.sigma == 1 else "fermion"

    def __str__(self) -> str:
        return self.name


BOSON = StatisticsFlag(1)
FERMION = StatisticsFlag(-1)


def flag_from_name(name: str) -> StatisticsFlag:
    try:
        return {"boson": BOSON, "fermion": FERMION}[name]
    except KeyError:
        raise ValueError(f"unknown statistics {name!r}; use 'boson' or 'fermion'")


# --------------------------------------------------------------------- level 0

class Kind(enum.Enum):
    """Level-0 generator kinds."""

    A = "b"          # slot annihilator
    AD = "bd"        # slot creator
    TA = "tb"        # tilde slot annihilator
    TAD = "tbd"      # tilde slot creator
    J = "J"          # reflection up to (and including) the slot
    TJ = "tJ"        # tilde-sector reflection
    TAU = "tau"      # Klein factor: tau**2 = sigma, tau^dag = sigma*tau


_A_TYPE = {Kind.A, Kind.AD, Kind.TA, Kind.TAD}
_CREATORS = {Kind.AD, Kind.TAD}
_ANNIHILATORS = {Kind.A, Kind.TA}
_REFLECTIONS = {Kind.J, Kind.TJ}
_TILDE_KINDS = {Kind.TA, Kind.TAD, Kind.TJ}

_TILDE_MAP = {Kind.A: Kind.TA, Kind.TA: Kind.A,
              Kind.AD: Kind.TAD, Kind.TAD: Kind.AD,
              Kind.J: Kind.TJ, Kind.TJ: Kind.J,
              Kind.TAU: Kind.TAU}

_DAGGER_MAP = {Kind.A: Kind.AD, Kind.AD: Kind.A,
               Kind.TA: Kind.TAD, Kind.TAD: Kind.TA,
               Kind.J: Kind.J, Kind.TJ: Kind.TJ,
               Kind.TAU: Kind.TAU}


@dataclass(frozen=True, order=True)
class Generator:
    """One level-0 factor: a kind plus a slot (absent for tau)."""

    kind: Kind
    slot: int | None = None

    def __post_init__(self):
        if self.kind is Kind.TAU:
            if self.slot is not None:
                raise ValueError("tau carries no slot index")
        else:
            if self.slot is None or self.slot < 1:
                raise ValueError(f"slot index must be >= 1, got {self.slot}")

    @property
    def is_a_type(self) -> bool:
        return self.kind in _A_TYPE

    @property
    def is_creator(self) -> bool:
        return self.kind in _CREATORS

    @property
    def is_annihilator(self) -> bool:
        return self.kind in _ANNIHILATORS

    @property
    def is_reflection(self) -> bool:
        return self.kind in _REFLECTIONS

    @property
    def is_tau(self) -> bool:
        return self.kind is Kind.TAU

    @property
    def tilde(self) -> bool:
        return self.kind in _TILDE_KINDS

    def grade(self, flag: StatisticsFlag) -> int:
        """Fermion parity grade: 1 for slot modes and tau when sigma = -1."""
        if flag.sigma == 1:
            return 0
        return 1 if (self.is_a_type or self.is_tau) else 0

    def tilde_partner(self) -> "Generator":
        return Generator(_TILDE_MAP[self.kind], self.slot)

    def dagger(self) -> "Generator":
        return Generator(_DAGGER_MAP[self.kind], self.slot)

    def __str__(self) -> str:
        if self.kind is Kind.TAU:
            return "tau"
        return f"{self.kind.value}[{self.slot}]"


def a(slot: int) -> Generator:
    return Generator(Kind.A, slot)


def ad(slot: int) -> Generator:
    return Generator(Kind.AD, slot)


def ta(slot: int) -> Generator:
    return Generator(Kind.TA, slot)


def tad(slot: int) -> Generator:
    return Generator(Kind.TAD, slot)


def refl(slot: int) -> Generator:
    return Generator(Kind.J, slot)


def trefl(slot: int) -> Generator:
    return Generator(Kind.TJ, slot)


TAU = Generator(Kind.TAU, None)


# ------------------------------------------------------------------ noise level

class NoiseKind(enum.Enum):
    """Reflection-dressed white-noise modes (grammar names fb/fbd/tfb/tfbd)."""

    B = "fb"
    BD = "fbd"
    TB = "tfb"
    TBD = "tfbd"


_NOISE_TILDE = {NoiseKind.B: NoiseKind.TB, NoiseKind.TB: NoiseKind.B,
                NoiseKind.BD: NoiseKind.TBD, NoiseKind.TBD: NoiseKind.BD}


@dataclass(frozen=True, order=True)
class NoiseOp:
    kind: NoiseKind
    slot: int

    def __post_init__(self):
        if self.slot < 1:
            raise ValueError(f"slot index must be >= 1, got {self.slot}")

    @property
    def tilde(self) -> bool:
        return self.kind in (NoiseKind.TB, NoiseKind.TBD)

    @property
    def is_creator(self) -> bool:
        return self.kind in (NoiseKind.BD, NoiseKind.TBD)

    def tilde_partner(self) -> "NoiseOp":
        return NoiseOp(_NOISE_TILDE[self.kind], self.slot)

    def __str__(self) -> str:
        return f"{self.kind.value}[{self.slot}]"


# --------------------------------------------------------------- quasiparticle

class QuasiKind(enum.Enum):
    """Thermal quasiparticle operators; CV/TCV carry the conjugate mark."""

    C = "c"
    CV = "cv"
    TC = "tc"
    TCV = "tcv"


@dataclass(frozen=True, order=True)
class QuasiOp:
    kind: QuasiKind
    slot: int

    def __post_init__(self):
        if self.slot < 1:
            raise ValueError(f"slot index must be >= 1, got {self.slot}")

    @property
    def tilde(self) -> bool:
        return self.kind in (QuasiKind.TC, QuasiKind.TCV)

    @property
    def kills_ket(self) -> bool:
        return self.kind in (QuasiKind.C, QuasiKind.TC)

    def __str__(self) -> str:
        return f"{self.kind.value}[{self.slot}]"
