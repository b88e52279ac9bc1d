"""Symbolic quantum stochastic calculus for boson/fermion noise with a
finite-lattice numeric verifier.

The symbolic layer derives the vacuum and finite-temperature Ito
multiplication tables as theorems of a discrete-time operator algebra
(slot modes, reflection dressing, thermal Bogoliubov quasiparticles); the
numeric layer represents everything as explicit matrices on a finite Fock
lattice and certifies every identity.
"""

from .atoms import (BOSON, FERMION, Generator, Kind, NoiseKind, NoiseOp,
                    QuasiKind, QuasiOp, StatisticsFlag, TAU, flag_from_name)
from .poly import Poly
from .scalars import GaussianRational, ScalarExpr
from .algebra import (ConfigurationError, UnsupportedExpectationError,
                      commutator, exp_vector_matrix_element, graded_commutator,
                      normal_order, solve_reflection_constraints,
                      tilde_conjugate, vacuum_expectation, word_grade)
from .thermal import (AlgebraInconsistencyError, ThermalParams,
                      bogoliubov_determinant, bogoliubov_inverse,
                      bogoliubov_matrix, check_tsc_residual, expand_noise,
                      from_c_basis, thermal_expectation, tilde_noise,
                      to_c_basis, verify_c_relations, wick_expectation)
from .ito import (ItoTable, brownian_commutator, c_increment_moments,
                  increment_poly, reference_thermal_entries,
                  thermal_ito_table, vacuum_ito_table)
from .fockrep import (AmbiguousVacuumError, DimensionGuardError, Lattice,
                      LatticeConfig, LatticeOperator, build_thermal_vacuum,
                      evaluate, expectation, low_occupation_indices,
                      numeric_ito_table, verify_suite)
from .exprparse import ParseError, lower_level0, parse_expr, print_poly

__version__ = "0.1.0"
