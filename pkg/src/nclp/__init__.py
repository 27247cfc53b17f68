"""Separating maps between finite-dimensional noncommutative L^p spaces.

Algebras are finite direct sums of ``L^inf(Omega_j; M_{n_j})``.  The package
computes L^p and S^1-valued norms, Yeadon factorizations, direct /
anti-direct splittings, and estimates of completely bounded and
S^1-bounded norms.
"""

__version__ = "0.1.0"

from .algebra import (AlgebraSpec, Block, Element, full_matrix_algebra, make_algebra, random_algebra,
                      subhomogeneous_degree, trace)
from .lp import (AmplifiedElement, amplified_norm, check_optr_cb, lp_norm, matrix_unit_family, polar,
                 spectral_projection, transpose_outer)
from .maps import LinearMap, embed_matrix_block
from .separating import (BijectiveSplit, JordanSplit, NotSeparatingError, YeadonTriple, build_yeadon_map,
                         decompose_bijective, extract_yeadon, inverse_analysis, is_separating, jordan_split,
                         kernel_summand, separating_norm)
from .valued import (Factorization, NormEstimate, amplify_map, analytic_upper, cb_norm_estimate,
                     check_special_identities, s1_bounded_norm_estimate, s1_norm_lower, s1_norm_upper)
from .suites import (ExampleParams, SuiteReport, run_example, suite_degree_detection, suite_direct_maps,
                     suite_main_theorems, suite_subhomogeneous_bounds)

__all__ = [
    "AlgebraSpec", "Block", "Element", "full_matrix_algebra", "make_algebra", "random_algebra",
    "subhomogeneous_degree", "trace",
    "AmplifiedElement", "amplified_norm", "check_optr_cb", "lp_norm", "matrix_unit_family", "polar",
    "spectral_projection", "transpose_outer",
    "LinearMap", "embed_matrix_block",
    "BijectiveSplit", "JordanSplit", "NotSeparatingError", "YeadonTriple", "build_yeadon_map",
    "decompose_bijective", "extract_yeadon", "inverse_analysis", "is_separating", "jordan_split",
    "kernel_summand", "separating_norm",
    "Factorization", "NormEstimate", "amplify_map", "analytic_upper", "cb_norm_estimate",
    "check_special_identities", "s1_bounded_norm_estimate", "s1_norm_lower", "s1_norm_upper",
    "ExampleParams", "SuiteReport", "run_example", "suite_degree_detection", "suite_direct_maps",
    "suite_main_theorems", "suite_subhomogeneous_bounds",
]
