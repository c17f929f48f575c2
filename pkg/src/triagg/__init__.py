"""Trilinear-aggregation fast matrix multiplication: construction,
verification, analysis and execution of bilinear algorithms with exact
rational coefficients."""

from .analysis import (
    additive_complexity,
    exponent,
    leading_coefficient,
    optimal_base,
    stats,
    t_new,
    t_new25b,
    t_pan,
)
from .composite import CompositeAlgorithm, gen_new25b
from .core import (
    BilinearAlgorithm,
    MMTensor,
    TraceCell,
    apply_bilinear,
    compose,
    degroote_transform,
    find_kin_pairs,
    matricize,
    merge_kin,
    rotate,
    substitute_subalgorithm,
    symmetrize,
    trilinear_value,
    vectorize,
)
from .engine import count_operations, recursive_multiply
from .errors import (
    BudgetExceeded,
    DegenerateError,
    DimensionError,
    FormatError,
    NotKinError,
    PrimeError,
    SingularMatrixError,
    SubstitutionError,
    TriaggError,
)
from .generator import (
    AggregationContext,
    DecomposedAlgorithm,
    build_phi,
    gen_new25,
    gen_new25_decomposed,
    gen_pan,
)
from .io import load, load_bundled_replacement, save
from .sparse import SparseMatrix
from .strassen import strassen, with_first_row_U, with_prescribed_rows
from .verify import (
    certify,
    expand_tensor,
    mm_tensor,
    verify_brent,
    verify_exact,
    verify_multiply,
    verify_random,
)

__version__ = "0.1.0"
