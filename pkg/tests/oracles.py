"""Independent reference computations used by the tests.

Nothing here calls the package's own expansion, verification or counting
code: tensors are expanded with plain Python loops over dense rows, ranks
are counted from the index sets directly and exponents use float logs.
"""

from __future__ import annotations

import math
from fractions import Fraction


def dense_rows(M) -> list[list[Fraction]]:
    out = [[Fraction(0)] * M.ncols for _ in range(M.nrows)]
    for r, c, v in M.entries():
        out[r][c] = v
    return out


def tensor_by_loops(U, V, W) -> dict:
    """sum_r u_r (x) v_r (x) w_r with dense Python loops."""
    acc: dict = {}
    for u, v, w in zip(dense_rows(U), dense_rows(V), dense_rows(W)):
        nu = [(a, x) for a, x in enumerate(u) if x]
        nv = [(b, y) for b, y in enumerate(v) if y]
        nw = [(c, z) for c, z in enumerate(w) if z]
        for a, x in nu:
            for b, y in nv:
                for c, z in nw:
                    acc[(a, b, c)] = acc.get((a, b, c), 0) + x * y * z
    return {k: v for k, v in acc.items() if v}


def mm_tensor_by_loops(m: int, n: int, p: int) -> dict:
    """Coefficients of tr(A B C) with A (m x n), B (n x p), C (p x m)."""
    out = {}
    for i in range(m):
        for j in range(n):
            for k in range(p):
                out[(n * i + j, p * j + k, m * k + i)] = Fraction(1)
    return out


def is_mm_algorithm(alg) -> bool:
    return tensor_by_loops(alg.U, alg.V, alg.W) == mm_tensor_by_loops(*alg.dims)


def naive_product(A, B):
    return [[sum((A[i][j] * B[j][k] for j in range(len(B))), Fraction(0)) for k in range(len(B[0]))] for i in range(len(A))]


def rank_pan_by_counting(n0: int) -> int:
    """Aggregation rows of both tables plus seven rows per cell (all cells)."""
    d = n0 // 2 + 1
    trip = [(i, j, k) for i in range(d) for j in range(d) for k in range(d)]
    table1 = 2 * sum(1 for (i, j, k) in trip if i <= j < k or k < j <= i)
    table2 = 2 * len(trip)
    return table1 + table2 + 7 * d * d


def rank_new_by_counting(n0: int) -> int:
    return rank_pan_by_counting(n0) - (n0 // 2 + 1)


def exponent_float(n0: int, t: int) -> float:
    return math.log(t) / math.log(n0)
