"""Ito multiplication tables for the noise increments, derived symbolically.

An increment over one lattice slot is sqrt(dt) times the dressed noise mode
(the scalar increment is dt itself).  Table entries are expectations of
same-slot pair products, truncated to exact first order in dt; the grading
of the scalar ring makes the truncation a filter, not an approximation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from .atoms import NoiseKind, NoiseOp, StatisticsFlag
from .poly import Poly
from .scalars import GaussianRational, ScalarExpr
from .thermal import ThermalParams, thermal_expectation, wick_expectation
from .algebra import vacuum_expectation

INCREMENT_LABELS: Tuple[str, ...] = ("dB", "dBd", "dtB", "dtBd", "dt")
VACUUM_LABELS: Tuple[str, ...] = ("dB", "dBd", "dt")

_NOISE_OF_LABEL = {"dB": NoiseKind.B, "dBd": NoiseKind.BD,
                   "dtB": NoiseKind.TB, "dtBd": NoiseKind.TBD}


def increment_poly(label: str, slot: int = 1) -> Poly:
    """The increment as a noise polynomial: sqrt(dt)*mode, or dt for 'dt'."""
    if label == "dt":
        return Poly.scalar(ScalarExpr.dt())
    try:
        kind = _NOISE_OF_LABEL[label]
    except KeyError:
        raise ValueError(f"unknown increment label {label!r}")
    return Poly.atom(NoiseOp(kind, slot), ScalarExpr.sqdt())


def tilde_label(label: str) -> str:
    return {"dB": "dtB", "dtB": "dB", "dBd": "dtBd", "dtBd": "dBd",
            "dt": "dt"}[label]


@dataclass
class ItoTable:
    """Grid of first-order products of increments."""

    statistics: str
    nbar: str
    rows: Tuple[str, ...]
    cols: Tuple[str, ...]
    entries: Dict[Tuple[str, str], ScalarExpr] = field(default_factory=dict)

    def entry(self, row: str, col: str) -> ScalarExpr:
        return self.entries[(row, col)]

    def nonzero(self) -> List[Tuple[str, str]]:
        return [key for key in self._ordered_keys() if not self.entries[key].is_zero]

    def _ordered_keys(self):
        return [(r, c) for r in self.rows for c in self.cols]

    def is_cross_sector(self, row: str, col: str) -> bool:
        tilde = {"dtB", "dtBd"}
        return (row in tilde) != (col in tilde)

    def to_json(self) -> str:
        payload = {
            "statistics": self.statistics,
            "nbar": self.nbar,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "entries": [
                {
                    "row": r,
                    "col": c,
                    "coeff_string": str(self.entries[(r, c)]),
                    "coeff_latex": self.entries[(r, c)].latex(),
                    "cross_sector": (not self.entries[(r, c)].is_zero
                                     and self.is_cross_sector(r, c)),
                }
                for (r, c) in self._ordered_keys()
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_text(self) -> str:
        cells = [[""] + list(self.cols)]
        for r in self.rows:
            cells.append([r] + [str(self.entries[(r, c)]) for c in self.cols])
        widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
        lines = []
        for idx, row in enumerate(cells):
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
            if idx == 0:
                lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
        return "\n".join(lines)

    def to_markdown(self) -> str:
        head = "| | " + " | ".join(self.cols) + " |"
        sep = "|" + "---|" * (len(self.cols) + 1)
        lines = [head, sep]
        for r in self.rows:
            lines.append("| " + r + " | "
                         + " | ".join(str(self.entries[(r, c)]) for c in self.cols)
                         + " |")
        return "\n".join(lines)


def vacuum_ito_table(flag: StatisticsFlag) -> ItoTable:
    """3x3 table over {dB, dBd, dt} against the Fock vacuum.

    Only (dB, dBd) survives at first order, with value dt, for both
    statistics.
    """
    table = ItoTable(statistics=flag.name, nbar="0",
                     rows=VACUUM_LABELS, cols=VACUUM_LABELS)
    for row in VACUUM_LABELS:
        for col in VACUUM_LABELS:
            prod = increment_poly(row) * increment_poly(col)
            level0 = _lower_mixed(prod, flag)
            value = vacuum_expectation(level0, flag)
            table.entries[(row, col)] = value.keep_dt_order(1)
    return table


def _lower_mixed(p: Poly, flag: StatisticsFlag) -> Poly:
    """Expand noise atoms inside a polynomial that may carry scalar words."""
    from .thermal import expand_noise_atom
    return p.substitute_atoms(expand_noise_atom)


def thermal_ito_table(flag: StatisticsFlag,
                      params: ThermalParams | None = None,
                      route: str = "lattice") -> ItoTable:
    """5x5 table over all increments against the thermal vacuums.

    ``route`` selects the expectation engine: "lattice" (default; the
    functional certified by the numeric oracle) or "quasiparticle" (the
    canonical-pair contraction).  Both give identical entries; the test
    suite asserts it.
    """
    params = params or ThermalParams()
    if params.nbar is not None and flag.sigma == -1 and params.nbar >= 1:
        raise ValueError("fermion occupation must satisfy 0 <= nbar < 1")
    expect = {"lattice": thermal_expectation,
              "quasiparticle": wick_expectation}[route]
    nbar_str = "nbar" if params.nbar is None else str(params.nbar)
    table = ItoTable(statistics=flag.name, nbar=nbar_str,
                     rows=INCREMENT_LABELS, cols=INCREMENT_LABELS)
    for row in INCREMENT_LABELS:
        for col in INCREMENT_LABELS:
            prod = increment_poly(row) * increment_poly(col)
            value = _mixed_thermal(prod, flag, expect)
            table.entries[(row, col)] = params.finalize(value.keep_dt_order(1))
    return table


def _mixed_thermal(p: Poly, flag: StatisticsFlag, expect) -> ScalarExpr:
    total = ScalarExpr.zero()
    for word, coeff in p:
        total = total + coeff * expect(Poly.word(word), flag)
    return total


def reference_thermal_entries(flag: StatisticsFlag) -> Dict[Tuple[str, str], ScalarExpr]:
    """The expected thermal grid: 8 nonzero entries, 17 zeros.

    Nonzero pattern (times dt):
      (dB, dBd) = 1+sigma*nbar      (dB, dtB)  = tau*nbar
      (dBd, dB) = nbar              (dBd, dtBd) = tau*(1+sigma*nbar)
      (dtB, dB) = sigma*tau*nbar    (dtB, dtBd) = 1+sigma*nbar
      (dtBd, dBd) = sigma*tau*(1+sigma*nbar)
      (dtBd, dtB) = nbar
    """
    from .scalars import GaussianRational

    s = flag.sigma
    tau = flag.tau_scalar
    dt = ScalarExpr.dt()
    nb = ScalarExpr.nbar()
    one_s_nb = ScalarExpr.thermal_base(s)
    s_tau = tau.scale(GaussianRational(s))
    grid: Dict[Tuple[str, str], ScalarExpr] = {
        (r, c): ScalarExpr.zero()
        for r in INCREMENT_LABELS for c in INCREMENT_LABELS}
    grid[("dB", "dBd")] = one_s_nb * dt
    grid[("dB", "dtB")] = tau * nb * dt
    grid[("dBd", "dB")] = nb * dt
    grid[("dBd", "dtBd")] = tau * one_s_nb * dt
    grid[("dtB", "dB")] = s_tau * nb * dt
    grid[("dtB", "dtBd")] = one_s_nb * dt
    grid[("dtBd", "dBd")] = s_tau * one_s_nb * dt
    grid[("dtBd", "dtB")] = nb * dt
    return grid


def brownian_commutator(p_slots: int, q_slots: int,
                        flag: StatisticsFlag) -> ScalarExpr:
    """Vacuum-sector value of [B_p, B_q^dag]_{-sigma} = min(p, q)*dt.

    B_p = sqrt(dt) * sum_{k<=p} b_k.  The statistics bracket is computed
    symbolically at level 0; its thermal expectation is min(p,q)*dt exactly
    (the residual lattice terms carry slot modes and annihilate the thermal
    pairing), and for p = 0 or q = 0 the process vanishes identically.
    """
    if p_slots < 0 or q_slots < 0:
        raise ValueError("slot counts must be nonnegative")
    sq = ScalarExpr.sqdt()
    bp = Poly.zero()
    for k in range(1, p_slots + 1):
        bp = bp + Poly.atom(NoiseOp(NoiseKind.B, k), sq)
    bq = Poly.zero()
    for k in range(1, q_slots + 1):
        bq = bq + Poly.atom(NoiseOp(NoiseKind.BD, k), sq)
    bracket = bp * bq - (bq * bp).scaled(flag.sigma_scalar)
    value = thermal_expectation(bracket, flag)
    expected = ScalarExpr.dt().scale(GaussianRational(min(p_slots, q_slots)))
    if value != expected:
        raise AssertionError(
            f"brownian bracket expectation {value} != {expected}")
    return value


def c_increment_moments(flag: StatisticsFlag,
                        params: ThermalParams | None = None) -> Dict[str, ScalarExpr]:
    """First and second moments of the quasiparticle increments.

    dC = sqrt(dt) c_k etc.  First moments vanish; the only nonzero second
    moments are <dC dCv> = <dtCv dtC> = dt.  Verified through both
    expectation routes.
    """
    from .atoms import QuasiKind, QuasiOp
    from .thermal import from_c_basis

    params = params or ThermalParams()
    sq = ScalarExpr.sqdt()
    atoms = {
        "dC": Poly.atom(QuasiOp(QuasiKind.C, 1), sq),
        "dCv": Poly.atom(QuasiOp(QuasiKind.CV, 1), sq),
        "dtC": Poly.atom(QuasiOp(QuasiKind.TC, 1), sq),
        "dtCv": Poly.atom(QuasiOp(QuasiKind.TCV, 1), sq),
    }
    out: Dict[str, ScalarExpr] = {}
    for name, p in atoms.items():
        noise = from_c_basis(p, flag)
        lattice_val = thermal_expectation(noise, flag).keep_dt_order(1)
        wick_val = wick_expectation(noise, flag).keep_dt_order(1)
        if lattice_val != wick_val:
            raise AssertionError(f"route mismatch on <{name}>")
        out[f"<{name}>"] = params.finalize(lattice_val)
    for n1, p1 in atoms.items():
        for n2, p2 in atoms.items():
            noise = from_c_basis(p1 * p2, flag)
            lattice_val = thermal_expectation(noise, flag).keep_dt_order(1)
            wick_val = wick_expectation(noise, flag).keep_dt_order(1)
            if lattice_val != wick_val:
                raise AssertionError(f"route mismatch on <{n1} {n2}>")
            out[f"<{n1} {n2}>"] = params.finalize(lattice_val)
    return out
