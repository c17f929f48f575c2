"""<2,2,2;7> algorithms: Strassen's instance and members of its orbit with
prescribed first encoding rows."""

from __future__ import annotations

from fractions import Fraction

from .core import (
    BilinearAlgorithm,
    Cancellation,
    _dense_inverse,
    as_rational_matrix,
    degroote_transform,
    rotate,
)
from .errors import DimensionError, SingularMatrixError
from .sparse import SparseMatrix

U_STRASSEN = (
    (1, 0, 0, 1),
    (0, 0, 0, 1),
    (0, 1, 0, 1),
    (1, -1, 0, 0),
    (1, 0, 1, 0),
    (1, 0, 0, 0),
    (0, 0, 1, -1),
)
V_STRASSEN = (
    (1, 0, 0, 1),
    (1, 0, 1, 0),
    (0, 0, -1, 1),
    (0, 0, 0, 1),
    (1, -1, 0, 0),
    (0, -1, 0, -1),
    (1, 0, 0, 0),
)
W_STRASSEN = (
    (1, 0, 0, 1),
    (-1, 1, 0, 0),
    (-1, 0, 0, 0),
    (-1, 0, -1, 0),
    (0, 0, 0, -1),
    (0, 0, -1, 1),
    (0, 1, 0, 1),
)


def strassen() -> BilinearAlgorithm:
    mats = [SparseMatrix.from_dense(M) for M in (U_STRASSEN, V_STRASSEN, W_STRASSEN)]
    return BilinearAlgorithm((2, 2, 2), *mats, name="strassen")


def row_as_matrix(row) -> list[list[Fraction]]:
    """Inverse vectorization of a length-4 row to a 2x2 matrix."""
    row = [Fraction(x) for x in row]
    if len(row) != 4:
        raise DimensionError("expected a row of length 4")
    return [row[0:2], row[2:4]]


def _first_row(M: SparseMatrix) -> list[Fraction]:
    dense = [Fraction(0)] * M.ncols
    for c, v in M.row_dict(0).items():
        dense[c] = v
    return dense


def _matmul2(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(2)), Fraction(0)) for j in range(2)] for i in range(2)]


def _transpose(a):
    return [list(r) for r in zip(*a)]


def _det2(a) -> Fraction:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


def with_first_row_U(alg: BilinearAlgorithm, K) -> BilinearAlgorithm:
    """Move ``alg`` within its orbit so that the first row of U is ``vec(K)``.

    W is left unchanged.  Uses the sandwich matrix ``K^T T^{-T}`` where T is
    the current first row of U read as a 2x2 matrix.
    """
    if alg.dims[1] != 2 or alg.U.ncols != 4:
        raise DimensionError("expected a <2,2,2> algorithm")
    K = as_rational_matrix(K)
    if _det2(K) == 0:
        raise SingularMatrixError("K is singular")
    T = row_as_matrix(_first_row(alg.U))
    if _det2(T) == 0:
        raise SingularMatrixError("first row of U is not an invertible 2x2 matrix")
    R = _matmul2(_transpose(K), _transpose(_dense_inverse(T)))
    return degroote_transform(alg, R)


def with_prescribed_rows(K_U, K_V, base: BilinearAlgorithm | None = None) -> BilinearAlgorithm:
    """A <2,2,2;7> whose first rows of U and V are ``vec(K_U)`` and ``vec(K_V)``."""
    alg = strassen() if base is None else base
    step = with_first_row_U(alg, K_U)
    step = with_first_row_U(rotate(step), K_V)
    out = rotate(rotate(step))
    return BilinearAlgorithm(out.dims, *out.working, tags=alg.tags, verified=out.verified, name="prescribed")


def cell_tags(cell: tuple[int, int]) -> tuple:
    return tuple(Cancellation(cell, s) for s in range(7))
