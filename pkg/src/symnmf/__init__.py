"""Symmetric nonnegative matrix factorization through a penalized nonsymmetric
problem with an adaptively tuned penalty."""
from .anls import (
    IterationTrace,
    PenaltyState,
    SymConfig,
    SymResult,
    ada_update,
    anls_nmf,
    geometric_update,
    initial_factors,
    penalized_subproblem,
    sym_anls,
)
from .core import (
    NnlsSubproblem,
    RankDeficientError,
    build_subproblem,
    degree_of_symmetry,
    frobenius_norm,
    max_entry,
    read_matrix_market,
    relative_nonsym_error,
    relative_sym_error,
    write_matrix_market,
)
from .nnls_bpp import BppConfig, IndexPartition, bpp_solve_column, bpp_solve_matrix
from .nnls_gcd import GcdConfig, compute_mu, gcd_solve_matrix

__version__ = "0.1.0"
