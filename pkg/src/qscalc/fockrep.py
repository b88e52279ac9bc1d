"""Explicit matrix representation of the algebra on a finite time lattice.

This is the independent numeric oracle: fermion slot modes are exact
Jordan-Wigner matrices (parity strings over preceding same-sector slots),
boson modes are truncated ladders, reflections are partial parity operators
(identity for bosons), and the Klein factor is i times the global parity.
The doubled (thermal) space is the tensor product of two independent sector
representations, so mixed-sector slot modes commute plainly, as required.

Operators are kept sparse; the dimension guard bounds desk-scale memory.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple

import numpy as np
import scipy.sparse as sp

from .atoms import (BOSON, FERMION, Generator, Kind, NoiseKind, NoiseOp,
                    QuasiKind, QuasiOp, StatisticsFlag)
from .poly import Poly
from .scalars import ScalarExpr

DEFAULT_DIM_GUARD = 1 << 15

INCREMENT_LABELS = ("dB", "dBd", "dtB", "dtBd", "dt")


class DimensionGuardError(ValueError):
    """The requested lattice exceeds the configured memory budget."""


class AmbiguousVacuumError(RuntimeError):
    """The thermal state conditions did not determine a unique vacuum."""


@dataclass(frozen=True)
class LatticeConfig:
    """Finite lattice: N slots of width dt, per-mode dimension, doubling."""

    n_slots: int
    dt: float
    flag: StatisticsFlag
    cutoff: int = 2
    doubled: bool = True
    dim_guard: int = DEFAULT_DIM_GUARD

    def __post_init__(self):
        if self.n_slots < 1:
            raise ValueError("need at least one slot")
        if self.dt <= 0:
            raise ValueError("slot width must be positive")
        if self.flag.sigma == -1 and self.cutoff != 2:
            raise ValueError("fermion modes are two-level; cutoff must be 2")
        if self.flag.sigma == 1 and self.cutoff < 2:
            raise ValueError("boson cutoff must be at least 2")
        if self.dim > self.dim_guard:
            raise DimensionGuardError(
                f"total dimension {self.dim} exceeds the guard {self.dim_guard}")

    @property
    def local_dim(self) -> int:
        return 2 if self.flag.sigma == -1 else self.cutoff

    @property
    def sector_dim(self) -> int:
        return self.local_dim ** self.n_slots

    @property
    def dim(self) -> int:
        return self.sector_dim ** 2 if self.doubled else self.sector_dim

    def as_dict(self) -> dict:
        return {
            "statistics": self.flag.name,
            "n_slots": self.n_slots,
            "dt": self.dt,
            "cutoff": self.local_dim,
            "doubled": self.doubled,
            "dimension": self.dim,
        }


class LatticeOperator:
    """A sparse operator tagged with its lattice configuration."""

    __slots__ = ("cfg", "mat")

    def __init__(self, cfg: LatticeConfig, mat):
        self.cfg = cfg
        self.mat = sp.csr_matrix(mat, dtype=complex)

    def _check(self, other: "LatticeOperator"):
        if self.cfg is not other.cfg and self.cfg != other.cfg:
            raise ValueError("operators belong to different lattice configs")

    def __matmul__(self, other):
        if isinstance(other, LatticeOperator):
            self._check(other)
            return LatticeOperator(self.cfg, self.mat @ other.mat)
        return self.mat @ other

    def __add__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return LatticeOperator(self.cfg, self.mat + other.mat)

    def __sub__(self, other: "LatticeOperator") -> "LatticeOperator":
        self._check(other)
        return LatticeOperator(self.cfg, self.mat - other.mat)

    def __mul__(self, scalar) -> "LatticeOperator":
        return LatticeOperator(self.cfg, self.mat * scalar)

    __rmul__ = __mul__

    def dagger(self) -> "LatticeOperator":
        return LatticeOperator(self.cfg, self.mat.conj().T)

    def max_abs(self) -> float:
        m = self.mat.tocoo()
        return float(np.abs(m.data).max()) if m.nnz else 0.0

    def restricted_max_abs(self, indices: np.ndarray) -> float:
        sub = self.mat[indices][:, indices]
        sub = sub.tocoo()
        return float(np.abs(sub.data).max()) if sub.nnz else 0.0


def _local_ladder(dim: int) -> sp.csr_matrix:
    return sp.csr_matrix(np.diag(np.sqrt(np.arange(1, dim)), k=1))


def _local_parity(dim: int) -> sp.csr_matrix:
    return sp.csr_matrix(np.diag([(-1.0) ** n for n in range(dim)]))


def _kron_chain(mats: Iterable) -> sp.csr_matrix:
    out = None
    for m in mats:
        out = m if out is None else sp.kron(out, m, format="csr")
    return sp.csr_matrix(out)


class Lattice:
    """All generator images for one configuration, built once."""

    def __init__(self, cfg: LatticeConfig):
        self.cfg = cfg
        d = cfg.local_dim
        n = cfg.n_slots
        lower = _local_ladder(d)
        ident = sp.identity(d, dtype=complex, format="csr")
        parity = _local_parity(d)
        fermion = cfg.flag.sigma == -1

        def sector_mode(k: int) -> sp.csr_matrix:
            string = parity if fermion else ident
            mats = [string] * (k - 1) + [lower] + [ident] * (n - k)
            return _kron_chain(mats)

        def sector_reflection(k: int) -> sp.csr_matrix:
            if not fermion:
                return sp.identity(d ** n, dtype=complex, format="csr")
            mats = [parity] * k + [ident] * (n - k)
            return _kron_chain(mats)

        sec_id = sp.identity(d ** n, dtype=complex, format="csr")
        sector_a = {k: sector_mode(k) for k in range(1, n + 1)}
        sector_j = {k: sector_reflection(k) for k in range(1, n + 1)}

        self._img: Dict[Generator, sp.csr_matrix] = {}
        if cfg.doubled:
            for k in range(1, n + 1):
                self._img[Generator(Kind.A, k)] = sp.kron(sector_a[k], sec_id, format="csr")
                self._img[Generator(Kind.TA, k)] = sp.kron(sec_id, sector_a[k], format="csr")
                self._img[Generator(Kind.J, k)] = sp.kron(sector_j[k], sec_id, format="csr")
                self._img[Generator(Kind.TJ, k)] = sp.kron(sec_id, sector_j[k], format="csr")
            if fermion:
                total_parity = _kron_chain([parity] * (2 * n))
                self._img[Generator(Kind.TAU, None)] = (1j * total_parity).tocsr()
            else:
                self._img[Generator(Kind.TAU, None)] = sp.identity(
                    cfg.dim, dtype=complex, format="csr")
        else:
            for k in range(1, n + 1):
                self._img[Generator(Kind.A, k)] = sector_a[k]
                self._img[Generator(Kind.J, k)] = sector_j[k]
        for gen in list(self._img):
            if gen.kind in (Kind.A, Kind.TA):
                self._img[gen.dagger()] = self._img[gen].conj().T.tocsr()

        self.identity = sp.identity(cfg.dim, dtype=complex, format="csr")
        vac = np.zeros(cfg.dim, dtype=complex)
        vac[0] = 1.0
        self.vacuum = vac

    # ------------------------------------------------------------- accessors

    def image(self, g, nbar: float = 0.0) -> sp.csr_matrix:
        """Sparse matrix of a level-0, noise, or quasiparticle atom."""
        if isinstance(g, Generator):
            try:
                return self._img[g]
            except KeyError:
                raise ValueError(f"{g} is not representable on this lattice "
                                 f"(doubled={self.cfg.doubled}, N={self.cfg.n_slots})")
        if isinstance(g, NoiseOp):
            return self._noise_image(g)
        if isinstance(g, QuasiOp):
            return self._quasi_image(g, nbar)
        raise TypeError(f"cannot represent atom {g!r}")

    def _noise_image(self, g: NoiseOp) -> sp.csr_matrix:
        k = g.slot
        A, AD = Generator(Kind.A, k), Generator(Kind.AD, k)
        J = Generator(Kind.J, k)
        if g.kind is NoiseKind.B:
            return self._img[J] @ self._img[A]
        if g.kind is NoiseKind.BD:
            return self._img[AD] @ self._img[J]
        TAUM = self._img[Generator(Kind.TAU, None)]
        TA, TAD = Generator(Kind.TA, k), Generator(Kind.TAD, k)
        TJ = Generator(Kind.TJ, k)
        if g.kind is NoiseKind.TB:
            return TAUM @ self._img[TJ] @ self._img[TA]
        return TAUM @ self._img[TAD] @ self._img[TJ]

    def _quasi_image(self, g: QuasiOp, nbar: float) -> sp.csr_matrix:
        sigma = self.cfg.flag.sigma
        tau = complex(self.cfg.flag.tau)
        k = g.slot
        B = self._noise_image(NoiseOp(NoiseKind.B, k))
        BD = self._noise_image(NoiseOp(NoiseKind.BD, k))
        TB = self._noise_image(NoiseOp(NoiseKind.TB, k))
        TBD = self._noise_image(NoiseOp(NoiseKind.TBD, k))
        if g.kind is QuasiKind.C:
            return (1 + sigma * nbar) * B - sigma * tau * nbar * TBD
        if g.kind is QuasiKind.TC:
            return (1 + sigma * nbar) * TB - tau * nbar * BD
        if g.kind is QuasiKind.CV:
            return BD - tau * TB
        return TBD - sigma * tau * B

    def noise_operator(self, kind: NoiseKind, slot: int) -> LatticeOperator:
        return LatticeOperator(self.cfg, self._noise_image(NoiseOp(kind, slot)))

    def brownian(self, upto: int, dagger: bool = False) -> sp.csr_matrix:
        """sqrt(dt) * sum of dressed modes over slots <= upto (zero for upto=0)."""
        total = sp.csr_matrix((self.cfg.dim, self.cfg.dim), dtype=complex)
        kind = NoiseKind.BD if dagger else NoiseKind.B
        for k in range(1, upto + 1):
            total = total + self._noise_image(NoiseOp(kind, k))
        return np.sqrt(self.cfg.dt) * total


def evaluate(p: Poly, lattice: Lattice, nbar: float = 0.0) -> LatticeOperator:
    """Representation functor: words map to matrix products, linearly."""
    cfg = lattice.cfg
    total = sp.csr_matrix((cfg.dim, cfg.dim), dtype=complex)
    for word, coeff in p:
        mat = lattice.identity
        for g in word:
            mat = mat @ lattice.image(g, nbar)
        total = total + complex(coeff.evaluate(nbar=nbar, dt=cfg.dt)) * mat
    return LatticeOperator(cfg, total)


def expectation(p: Poly, bra: np.ndarray, ket: np.ndarray,
                lattice: Lattice, nbar: float = 0.0) -> complex:
    """<bra| p |ket> by matrix-vector products (no operator products formed)."""
    total = 0j
    for word, coeff in p:
        vec = ket
        for g in reversed(word):
            vec = lattice.image(g, nbar) @ vec
        total += complex(coeff.evaluate(nbar=nbar, dt=lattice.cfg.dt)) * (bra @ vec)
    return total


def low_occupation_indices(cfg: LatticeConfig, margin: int = 2) -> np.ndarray:
    """Basis indices whose every mode occupation is <= cutoff - margin.

    The truncated ladder violates the commutation relation only at the top
    level, so identities are asserted on this subspace for bosons.
    """
    d = cfg.local_dim
    n_modes = cfg.n_slots * (2 if cfg.doubled else 1)
    cap = d - margin
    if cap < 0:
        return np.arange(cfg.dim)
    idx = []
    for i in range(cfg.dim):
        x = i
        ok = True
        for _ in range(n_modes):
            if x % d > cap:
                ok = False
                break
            x //= d
        if ok:
            idx.append(i)
    return np.asarray(idx, dtype=int)


# ----------------------------------------------------------- thermal vacuum


@dataclass
class ThermalVacuum:
    bra: np.ndarray
    ket: np.ndarray
    residual: float
    singular_gap: float
    truncation_estimate: float


def _null_vector(stack: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Smallest right singular vector, its singular value, and the next one."""
    _, s, vh = np.linalg.svd(stack, full_matrices=True)
    dim = stack.shape[1]
    if len(s) < dim:  # rows < cols: missing singular values are exact zeros
        raise AmbiguousVacuumError("underdetermined thermal state conditions")
    return vh[-1].conj(), float(s[-1]), float(s[-2] if len(s) > 1 else np.inf)


def _pair_annihilators(cfg: LatticeConfig, nbar: float):
    """Pair-local quasiparticle annihilators for the boson product solve."""
    d = cfg.local_dim
    lower = _local_ladder(d).toarray()
    ident = np.eye(d)
    raise_ = lower.conj().T
    b = np.kron(lower, ident)
    bd = np.kron(raise_, ident)
    tb = np.kron(ident, lower)
    tbd = np.kron(ident, raise_)
    c = (1 + nbar) * b - nbar * tbd
    tc = (1 + nbar) * tb - nbar * bd
    cv = bd - tb
    tcv = tbd - b
    return c, tc, cv, tcv


def build_thermal_vacuum(lattice: Lattice, nbar: float) -> ThermalVacuum:
    """Thermal bra/ket as joint null vectors of the quasiparticle stacks.

    Fermions: global dense SVD (exact nullspace, uniqueness checked).
    Bosons: the conditions are slot-local, so per-pair nullspaces are solved
    densely and tensored; the residual is then recomputed honestly against
    the full-space operators.  Normalisation: <bra|ket> = 1, ||ket||_2 = 1.
    """
    cfg = lattice.cfg
    if not cfg.doubled:
        raise ValueError("thermal vacuum needs the doubled lattice")
    _validate_nbar(cfg.flag, nbar)
    n = cfg.n_slots

    if cfg.flag.sigma == -1:
        kets = [lattice.image(QuasiOp(QuasiKind.C, k), nbar).toarray()
                for k in range(1, n + 1)]
        kets += [lattice.image(QuasiOp(QuasiKind.TC, k), nbar).toarray()
                 for k in range(1, n + 1)]
        ket, s_min, s_next = _null_vector(np.vstack(kets))
        bras = [lattice.image(QuasiOp(QuasiKind.CV, k), nbar).toarray().T
                for k in range(1, n + 1)]
        bras += [lattice.image(QuasiOp(QuasiKind.TCV, k), nbar).toarray().T
                 for k in range(1, n + 1)]
        bra, sb_min, sb_next = _null_vector(np.vstack(bras))
        gap = min(_gap(s_min, s_next), _gap(sb_min, sb_next))
        trunc = 0.0
    else:
        c, tc, cv, tcv = _pair_annihilators(cfg, nbar)
        pair_ket, s_min, s_next = _null_vector(np.vstack([c, tc]))
        pair_bra, sb_min, sb_next = _null_vector(np.vstack([cv.T, tcv.T]))
        gap = min(_gap(s_min, s_next), _gap(sb_min, sb_next))
        d = cfg.local_dim
        km = pair_ket.reshape(d, d)
        bm = pair_bra.reshape(d, d)
        ket_m, bra_m = km, bm
        for _ in range(n - 1):
            ket_m = np.kron(ket_m, km)
            bra_m = np.kron(bra_m, bm)
        ket = ket_m.reshape(-1)
        bra = bra_m.reshape(-1)
        trunc = (nbar / (1 + nbar)) ** cfg.local_dim

    if gap < 1e2:
        raise AmbiguousVacuumError(
            f"thermal state conditions look degenerate (singular gap {gap:.3g})")

    ket = ket / np.linalg.norm(ket)
    overlap = bra @ ket
    if abs(overlap) < 1e-12:
        raise AmbiguousVacuumError("thermal bra and ket pair to zero")
    bra = bra / overlap

    residual = 0.0
    bra_scale = np.linalg.norm(bra)
    for k in range(1, n + 1):
        for kind in (QuasiKind.C, QuasiKind.TC):
            op = lattice.image(QuasiOp(kind, k), nbar)
            residual = max(residual, float(np.linalg.norm(op @ ket)))
        for kind in (QuasiKind.CV, QuasiKind.TCV):
            op = lattice.image(QuasiOp(kind, k), nbar)
            residual = max(residual, float(np.linalg.norm(bra @ op)) / bra_scale)
    return ThermalVacuum(bra=bra, ket=ket, residual=residual,
                         singular_gap=gap, truncation_estimate=trunc)


def _gap(s_min: float, s_next: float) -> float:
    return s_next / max(s_min, 1e-300)


def _validate_nbar(flag: StatisticsFlag, nbar: float):
    if nbar < 0:
        raise ValueError("occupation nbar must be nonnegative")
    if flag.sigma == -1 and nbar >= 1:
        raise ValueError("fermion occupation must satisfy 0 <= nbar < 1")


# ------------------------------------------------------------ numeric tables


def _increment_matrix(lattice: Lattice, label: str, slot: int) -> sp.csr_matrix:
    sq = np.sqrt(lattice.cfg.dt)
    kinds = {"dB": NoiseKind.B, "dBd": NoiseKind.BD,
             "dtB": NoiseKind.TB, "dtBd": NoiseKind.TBD}
    if label == "dt":
        return lattice.cfg.dt * lattice.identity
    return sq * lattice._noise_image(NoiseOp(kinds[label], slot))


def numeric_ito_table(lattice: Lattice, bra: np.ndarray, ket: np.ndarray,
                      labels: Tuple[str, ...] = INCREMENT_LABELS,
                      nbar: float = 0.0) -> Dict[Tuple[str, str], complex]:
    """Entries <bra| dX_k dY_k |ket> / dt at the mid-lattice slot."""
    cfg = lattice.cfg
    slot = (cfg.n_slots + 1) // 2
    mats = {lab: _increment_matrix(lattice, lab, slot) for lab in labels}
    out = {}
    for row in labels:
        for col in labels:
            val = bra @ (mats[row] @ (mats[col] @ ket))
            out[(row, col)] = complex(val) / cfg.dt
    return out


def vacuum_numeric_table(lattice: Lattice,
                         labels: Tuple[str, ...] = ("dB", "dBd", "dt")):
    vac = lattice.vacuum
    return numeric_ito_table(lattice, vac, vac, labels=labels)


# ------------------------------------------------------------- verify suite


@dataclass
class CheckResult:
    name: str
    statement: str
    max_deviation: float
    tolerance: float
    passed: bool
    seconds: float = 0.0


@dataclass
class VerifyReport:
    config: dict
    nbar: float
    checks: List[CheckResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, include_timings: bool = False) -> str:
        payload = {
            "config": self.config,
            "nbar": self.nbar,
            "checks": [
                {
                    "name": c.name,
                    "statement": c.statement,
                    "max_deviation": c.max_deviation,
                    "tolerance": c.tolerance,
                    "pass": c.passed,
                    "seconds": c.seconds if include_timings else None,
                }
                for c in self.checks
            ],
            "wall_time": self.wall_time if include_timings else None,
            "pass": self.passed,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def summary_lines(self) -> List[str]:
        width = max(len(c.name) for c in self.checks) if self.checks else 10
        lines = []
        for c in self.checks:
            lines.append(
                f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  "
                f"max_dev={c.max_deviation:.3e}  tol={c.tolerance:.1e}  "
                f"({c.seconds * 1e3:.1f} ms)")
        lines.append(
            f"{'PASS' if self.passed else 'FAIL'}  overall  "
            f"wall_time={self.wall_time:.2f} s")
        return lines


def verify_suite(cfg: LatticeConfig, nbar: float,
                 algebra_tol: float | None = None,
                 thermal_tol: float | None = None,
                 rng_seed: int = 7) -> VerifyReport:
    """Run every numeric invariant and report deviations against tolerances.

    Failures are data, not exceptions.  Default tolerances: 1e-10 for exact
    (fermion/JW) algebra, max(1e-8, 10 * truncation estimate) for truncated
    boson thermal checks.
    """
    from . import ito, thermal  # local import keeps module load acyclic

    t0 = time.perf_counter()
    lattice = Lattice(cfg)
    fermion = cfg.flag.sigma == -1
    trunc = 0.0 if fermion else (nbar / (1 + nbar)) ** cfg.local_dim
    a_tol = algebra_tol if algebra_tol is not None else 1e-10
    t_tol = thermal_tol if thermal_tol is not None else max(1e-8, 10 * trunc)
    low = None if fermion else low_occupation_indices(cfg, margin=2)

    report = VerifyReport(config=cfg.as_dict(), nbar=nbar)

    def run(name: str, statement: str, fn, tol: float):
        tic = time.perf_counter()
        dev = float(fn())
        report.checks.append(CheckResult(
            name=name, statement=statement, max_deviation=dev,
            tolerance=tol, passed=dev <= tol,
            seconds=time.perf_counter() - tic))

    def op_dev(mat: sp.csr_matrix) -> float:
        if fermion or low is None:
            m = mat.tocoo()
            return float(np.abs(m.data).max()) if m.nnz else 0.0
        sub = mat[low][:, low].tocoo()
        return float(np.abs(sub.data).max()) if sub.nnz else 0.0

    sigma = cfg.flag.sigma
    n = cfg.n_slots
    img = lattice.image

    def slot_relations() -> float:
        dev = 0.0
        for k in range(1, n + 1):
            for m in range(1, n + 1):
                A, AD = img(Generator(Kind.A, k)), img(Generator(Kind.AD, m))
                br = A @ AD - sigma * (AD @ A)
                if k == m:
                    br = br - lattice.identity
                dev = max(dev, op_dev(br))
                B = img(Generator(Kind.A, m))
                dev = max(dev, op_dev(A @ B - sigma * (B @ A)))
        return dev

    run("slot_mode_relations",
        "[a_k, a_m^dag]_{-sigma} = delta_km, [a_k, a_m]_{-sigma} = 0",
        slot_relations, a_tol)

    if cfg.doubled:
        def mixed_sector() -> float:
            dev = 0.0
            for k in range(1, n + 1):
                for m in range(1, n + 1):
                    A = img(Generator(Kind.A, k))
                    for other in (Generator(Kind.TA, m), Generator(Kind.TAD, m)):
                        O = img(other)
                        dev = max(dev, op_dev(A @ O - O @ A))
            return dev

        run("mixed_sector_commutators",
            "[a_k, ta_m] = [a_k, ta_m^dag] = 0 (plain)",
            mixed_sector, a_tol)

    def reflection_props() -> float:
        dev = 0.0
        vac = lattice.vacuum
        for k in range(1, n + 1):
            J = img(Generator(Kind.J, k))
            dev = max(dev, op_dev(J @ J - lattice.identity))
            dev = max(dev, op_dev(J - J.conj().T))
            dev = max(dev, float(np.linalg.norm(J @ vac - vac)))
            for m in range(1, n + 1):
                Jm = img(Generator(Kind.J, m))
                dev = max(dev, op_dev(J @ Jm - Jm @ J))
                A = img(Generator(Kind.A, m))
                u = sigma if m <= k else 1
                dev = max(dev, op_dev(J @ A @ J - u * A))
        return dev

    run("reflection_properties",
        "J_k^2 = 1, J_k = J_k^dag, [J_k, J_m] = 0, J_k|0> = |0>, "
        "J_k a_m J_k = u(k,m) a_m",
        reflection_props, a_tol)

    def equal_time() -> float:
        dev = 0.0
        for k in range(1, n + 1):
            J, A = img(Generator(Kind.J, k)), img(Generator(Kind.A, k))
            dev = max(dev, op_dev(J @ A - sigma * (A @ J)))
        return dev

    run("equal_time_bracket", "[J_k, a_k]_{-sigma} = 0", equal_time, a_tol)

    if cfg.doubled:
        def tau_props() -> float:
            tau_m = img(Generator(Kind.TAU, None))
            dev = op_dev(tau_m @ tau_m - sigma * lattice.identity)
            dev = max(dev, op_dev(tau_m.conj().T - sigma * tau_m))
            for k in range(1, n + 1):
                J = img(Generator(Kind.J, k))
                dev = max(dev, op_dev(tau_m @ J - J @ tau_m))
                for kind in (Kind.A, Kind.TA):
                    A = img(Generator(kind, k))
                    dev = max(dev, op_dev(tau_m @ A - sigma * (A @ tau_m)))
            return dev

        run("klein_factor_properties",
            "tau^2 = sigma, tau^dag = sigma*tau, [tau, J_k] = 0, "
            "[tau, a_k]_{-sigma} = 0",
            tau_props, a_tol)

        def noise_cross_sector() -> float:
            dev = 0.0
            for k in range(1, n + 1):
                B = lattice._noise_image(NoiseOp(NoiseKind.B, k))
                for m in range(1, n + 1):
                    for kind in (NoiseKind.TB, NoiseKind.TBD):
                        T = lattice._noise_image(NoiseOp(kind, m))
                        dev = max(dev, op_dev(B @ T - sigma * (T @ B)))
            return dev

        run("noise_cross_sector",
            "[b_k, tb_m]_{-sigma} = [b_k, tb_m^dag]_{-sigma} = 0",
            noise_cross_sector, a_tol)

    def noise_equal_slot() -> float:
        dev = 0.0
        for k in range(1, n + 1):
            B = lattice._noise_image(NoiseOp(NoiseKind.B, k))
            BD = lattice._noise_image(NoiseOp(NoiseKind.BD, k))
            dev = max(dev, op_dev(B @ BD - sigma * (BD @ B) - lattice.identity))
        return dev

    run("noise_equal_slot_canonical",
        "[b_k, b_k^dag]_{-sigma} = 1 (dressed modes)",
        noise_equal_slot, a_tol)

    vacuum_obj = None
    if cfg.doubled:
        vacuum_obj = build_thermal_vacuum(lattice, nbar)

        def tsc() -> float:
            tau_c = complex(cfg.flag.tau)
            lam = tau_c * nbar / (1 + sigma * nbar)
            bra, ket = vacuum_obj.bra, vacuum_obj.ket
            scale = np.linalg.norm(bra)
            dev = vacuum_obj.residual
            for k in range(1, n + 1):
                TB = lattice._noise_image(NoiseOp(NoiseKind.TB, k))
                BD = lattice._noise_image(NoiseOp(NoiseKind.BD, k))
                dev = max(dev, float(np.linalg.norm(TB @ ket - lam * (BD @ ket))))
                TBD = lattice._noise_image(NoiseOp(NoiseKind.TBD, k))
                B = lattice._noise_image(NoiseOp(NoiseKind.B, k))
                dev = max(dev, float(
                    np.linalg.norm(bra @ TBD - np.conj(tau_c) * (bra @ B))) / scale)
            return dev

        run("thermal_state_conditions",
            "tb_k|> = [tau*nbar/(1+sigma*nbar)] b_k^dag|>, "
            "<|tb_k^dag = tau^* <|b_k, quasiparticle annihilation",
            tsc, t_tol if not fermion else a_tol)

        def uniqueness() -> float:
            return 0.0 if vacuum_obj.singular_gap > 1e2 else 1.0

        run("thermal_vacuum_unique",
            "the thermal state conditions have a one-dimensional solution",
            uniqueness, 0.5)

    def brownian() -> float:
        dev = 0.0
        vac = lattice.vacuum
        pairs = [(n, n), (1, n), (max(1, n // 2), n), (0, 1)]
        for p, q in pairs:
            Bp = lattice.brownian(p)
            Bq = lattice.brownian(q, dagger=True)
            br = Bp @ Bq - sigma * (Bq @ Bp)
            expected = min(p, q) * cfg.dt
            resid = br @ vac - expected * vac
            dev = max(dev, float(np.linalg.norm(resid)))
            if vacuum_obj is not None:
                val = vacuum_obj.bra @ (br @ vacuum_obj.ket)
                dev = max(dev, abs(complex(val) - expected))
            if not fermion and low is not None:
                diff = (br - expected * lattice.identity)[low][:, low].tocoo()
                if diff.nnz:
                    dev = max(dev, float(np.abs(diff.data).max()))
        return dev

    run("brownian_commutator",
        "[B_p, B_q^dag]_{-sigma} = min(p,q) dt on the vacuum sector",
        brownian, a_tol if fermion else t_tol)

    def vacuum_table() -> float:
        sym = ito.vacuum_ito_table(cfg.flag)
        num = vacuum_numeric_table(lattice)
        dev = 0.0
        for (row, col), val in num.items():
            want = sym.entry(row, col).evaluate(nbar=0.0, dt=cfg.dt) / cfg.dt
            dev = max(dev, abs(val - want))
        return dev

    run("vacuum_table_match",
        "numeric 3x3 increment table equals the symbolic vacuum table",
        vacuum_table, a_tol if fermion else t_tol)

    if cfg.doubled and vacuum_obj is not None:
        def thermal_table() -> float:
            params = thermal.ThermalParams(nbar=Fraction(nbar).limit_denominator(10 ** 12))
            sym = ito.thermal_ito_table(cfg.flag, params)
            num = numeric_ito_table(lattice, vacuum_obj.bra, vacuum_obj.ket,
                                    nbar=nbar)
            dev = 0.0
            for (row, col), val in num.items():
                want = sym.entry(row, col).evaluate(nbar=nbar, dt=cfg.dt) / cfg.dt
                dev = max(dev, abs(val - want))
            return dev

        run("thermal_table_match",
            "numeric 5x5 increment table equals the symbolic thermal table",
            thermal_table, t_tol)

    def normal_order_oracle() -> float:
        from .algebra import normal_order
        rng = np.random.default_rng(rng_seed)
        kinds = [Kind.A, Kind.AD, Kind.J]
        if cfg.doubled:
            kinds += [Kind.TA, Kind.TAD, Kind.TJ]
        margin_idx = None
        if not fermion:
            margin_idx = low_occupation_indices(cfg, margin=2 + 3)
        dev = 0.0
        for _ in range(8):
            words = {}
            for _ in range(rng.integers(1, 4)):
                length = int(rng.integers(1, 4))
                word = []
                for _ in range(length):
                    kind = kinds[rng.integers(0, len(kinds))]
                    word.append(Generator(kind, int(rng.integers(1, n + 1))))
                words[tuple(word)] = ScalarExpr.integer(int(rng.integers(-3, 4)) or 1)
            p = Poly(words)
            diff = (evaluate(p, lattice).mat
                    - evaluate(normal_order(p, cfg.flag), lattice).mat)
            if fermion:
                coo = diff.tocoo()
                dev = max(dev, float(np.abs(coo.data).max()) if coo.nnz else 0.0)
            else:
                sub = diff[margin_idx][:, margin_idx].tocoo()
                dev = max(dev, float(np.abs(sub.data).max()) if sub.nnz else 0.0)
        return dev

    run("normal_order_preserves_value",
        "matrix image of p equals matrix image of normal_order(p)",
        normal_order_oracle, a_tol if fermion else max(a_tol, 1e-9))

    report.wall_time = time.perf_counter() - t0
    return report
