"""Trilinear-aggregation algorithms for even base sizes.

All rows are produced in the coordinates of the transformed operands
``A* = P A Q`` (size ``(n0+2) x (n0+2)``, index ``(n0+2)*r + c``) and the
algorithms are returned in factored form with transforms ``(phi, phi, phi)``.
Because ``Q P = I`` the trace ``tr(A* B* C*)`` equals ``tr(A B C)``, and the
quadrant structure of ``P`` and ``Q`` makes every row and column of each
``d x d`` quadrant of ``A*`` sum to zero, where ``d = n0/2 + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

from .core import (
    Aggregation,
    BilinearAlgorithm,
    Cancellation,
    CorrectionDiag,
    TraceCell,
    merge_kin,
)
from .errors import DegenerateError, DimensionError
from .sparse import SparseMatrix
from .strassen import strassen, with_prescribed_rows

ONE = Fraction(1)


def check_base(n0: int) -> None:
    if not isinstance(n0, int) or n0 < 2 or n0 % 2:
        raise DegenerateError(f"base size must be an even integer >= 2, got {n0!r}")
    if n0 == 16:
        raise DegenerateError("base size 16 gives gamma = 0; the construction is undefined")


class AggregationContext:
    """Index bookkeeping for base size ``n0``.

    ``d = n0/2 + 1``, ``gamma = 1 - 9/d`` and ``bar(i) = (i + d) mod 2d``.
    Triples are ``(triple, barred)`` pairs; a barred triple stands for
    ``(bar(i), bar(j), bar(k))``.
    """

    def __init__(self, n0: int):
        check_base(n0)
        self.n0 = n0
        self.h = n0 // 2
        self.d = self.h + 1
        self.N = n0 + 2
        self.s0 = self.N**2
        self.gamma = 1 - Fraction(9, self.d)

    def bar(self, i: int) -> int:
        return (i + self.d) % self.N

    def coord(self, r: int, c: int) -> int:
        return self.N * r + c

    def _all(self):
        d = self.d
        return [(i, j, k) for i in range(d) for j in range(d) for k in range(d)]

    @cached_property
    def S_dot(self) -> list:
        return [(t, b) for t in self._all() for b in (False, True)]

    @cached_property
    def S_dot1(self) -> list:
        return [((i, i, i), False) for i in range(self.d)]

    @cached_property
    def S_hat(self) -> list:
        base = [(i, j, k) for (i, j, k) in self._all() if i <= j < k or k < j <= i]
        return [(t, b) for t in base for b in (False, True)]

    @cached_property
    def S_tilde(self) -> list:
        return [(i, j) for i in range(self.d) for j in range(self.d) if i != j]

    @cached_property
    def S_tilde1(self) -> list:
        return [(i, i) for i in range(self.d)]

    def second_table(self, include_diagonal: bool) -> list:
        if include_diagonal:
            return list(self.S_dot)
        skip = set(self.S_dot1)
        return [x for x in self.S_dot if x not in skip]


@dataclass
class RowBlock:
    """Rows over the transformed coordinates, with tags."""

    U: list
    V: list
    W: list
    tags: list

    @classmethod
    def empty(cls) -> "RowBlock":
        return cls([], [], [], [])

    def add(self, u: dict, v: dict, w: dict, tag) -> None:
        self.U.append(u)
        self.V.append(v)
        self.W.append(w)
        self.tags.append(tag)

    def extend(self, other: "RowBlock") -> None:
        self.U += other.U
        self.V += other.V
        self.W += other.W
        self.tags += other.tags

    def __len__(self) -> int:
        return len(self.tags)

    def matrices(self, s0: int):
        return tuple(SparseMatrix.from_rows(s0, rows) for rows in (self.U, self.V, self.W))


def _form(ctx: AggregationContext, *terms) -> dict:
    out: dict[int, Fraction] = {}
    for coef, (r, c) in terms:
        key = ctx.coord(r, c)
        out[key] = out.get(key, 0) + Fraction(coef)
    return {k: v for k, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# Transformation
# ---------------------------------------------------------------------------


def build_phi(n0: int):
    """Return ``(L, R, phi)``.

    ``L = [I; -1^T]`` is ``d x h`` and ``R = [I - J/d | -1/d]`` is ``h x d``;
    ``phi`` maps row-major ``vec(X)`` to ``vec((I2 (x) L) X (I2 (x) R))``.
    """
    check_base(n0)
    h = n0 // 2
    d = h + 1
    L = SparseMatrix.from_entries(
        (d, h), [(r, r, 1) for r in range(h)] + [(h, c, -1) for c in range(h)]
    )
    R = SparseMatrix.from_entries(
        (h, d),
        [(r, c, Fraction(int(r == c)) - Fraction(1, d)) for r in range(h) for c in range(h)]
        + [(r, h, Fraction(-1, d)) for r in range(h)],
    )
    I2 = SparseMatrix.identity(2)
    P = I2.kron(L)
    Q = I2.kron(R)
    phi = P.kron(Q.transpose())
    return L, R, phi


# ---------------------------------------------------------------------------
# Row families
# ---------------------------------------------------------------------------


def _resolve(ctx, triple, barred):
    if barred:
        return tuple(ctx.bar(x) for x in triple)
    return triple


def aggregation_rows(ctx: AggregationContext, include_diagonal: bool = False) -> RowBlock:
    """Rows of both aggregation tables.

    The second table omits the unbarred diagonal triples unless
    ``include_diagonal`` is set (those rows are otherwise absorbed into the
    correction blocks).
    """
    block = RowBlock.empty()
    for triple, barred in sorted(ctx.S_hat):
        i, j, k = _resolve(ctx, triple, barred)
        block.add(
            _form(ctx, (1, (i, j)), (1, (j, k)), (1, (k, i))),
            _form(ctx, (1, (j, k)), (1, (k, i)), (1, (i, j))),
            _form(ctx, (1, (k, i)), (1, (i, j)), (1, (j, k))),
            Aggregation(1, triple, barred),
        )
    bar = ctx.bar
    for triple, barred in sorted(ctx.second_table(include_diagonal)):
        i, j, k = _resolve(ctx, triple, barred)
        block.add(
            _form(ctx, (-1, (i, j)), (1, (bar(j), k)), (1, (k, bar(i)))),
            _form(ctx, (1, (j, bar(k))), (1, (k, i)), (1, (bar(i), j))),
            _form(ctx, (-1, (bar(k), i)), (1, (i, bar(j))), (1, (j, k))),
            Aggregation(2, triple, barred),
        )
    return block


def correction_block(ctx: AggregationContext, i: int) -> RowBlock:
    """The seven products handling the diagonal cell ``(i, i)``.

    Slot 0 carries the diagonal second-table aggregation term merged with
    the first product of the cell's trace.
    """
    if not 0 <= i < ctx.d:
        raise DimensionError(f"index {i} outside [0, {ctx.d})")
    d, g = Fraction(ctx.d), ctx.gamma
    ii, bb, bi, ib = (i, i), (ctx.bar(i), ctx.bar(i)), (ctx.bar(i), i), (i, ctx.bar(i))
    f = lambda *terms: _form(ctx, *terms)  # noqa: E731
    rows = [
        (
            f((1, bi), (1, ib), (-1, ii)),
            f((1, bi), (1, ib), (1, ii)),
            f((d * (1 - g) / g, bb), (-(g - d) / g, bi), (-(d - g) / g, ib), (1 - d, ii)),
        ),
        (
            f((1, ib)),
            f(((-g - 1) / g, bb), (-1 / g, bi), (1 - 1 / g**2, ib), ((g - 1) / g, ii)),
            f((d, bb), (d, bi), (d / g, ib), (d, ii)),
        ),
        (
            f((1, ib), (g, ii)),
            f(((g + 1) / g, bb), ((g + 1) / g, bi), (1 / g**2, ib), (1 / g, ii)),
            f((d / g, ib), (d, ii)),
        ),
        (
            f((1, bi), (-g - 1, ii)),
            f((1, bb), (1, bi), (1 / g, ib), (1, ii)),
            f((d / g**2, ib), (d + d / g, ii)),
        ),
        (
            f((1, bb), (1, bi), (-1 / g, ib), (-1, ii)),
            f((-g - 1, bb), (-1 / g, ib)),
            f((d * (g - 1) / g, bb), (-d / g, bi)),
        ),
        (
            f((1, bi), (-1, ii)),
            f((-g - 1, bb), (-1, bi), ((-g - 1) / g, ib), (-1, ii)),
            f((d * (1 - g) / g, bb), (d / g, bi), (-d * (g - 1) / g**2, ib), (d / g, ii)),
        ),
        (
            f((1, bb), ((-g - 1) / g, ib)),
            f((-1, bb), ((g - 1) / g, ib)),
            f((d / g, bb), (d + d / g, bi)),
        ),
    ]
    block = RowBlock.empty()
    for slot, (u, v, w) in enumerate(rows):
        block.add(u, v, w, CorrectionDiag(i, slot))
    return block


def diagonal_kernels(ctx: AggregationContext):
    """``(K_U, K_V)`` prescribing the first rows of a diagonal cell's <2,2,2;7>."""
    g = ctx.gamma
    return [[-1 / g, ONE], [ONE, Fraction(0)]], [[ONE, g], [ONE, Fraction(0)]]


def cell_embeddings(ctx: AggregationContext, cell: tuple[int, int]):
    """4 x s0 matrices producing the row-major entries of the cell's X, Y, Z."""
    i, j = cell
    bi, bj = ctx.bar(i), ctx.bar(j)
    d = Fraction(ctx.d)
    pos = [(i, j), (bi, j), (i, bj), (bi, bj)]
    if i == j:
        g = ctx.gamma
        sa = [g, ONE, ONE, ONE]
        sb = [ONE, 1 / g, ONE, ONE]
        sc = [-d, d, d, -d * g]
    else:
        sa = sb = [ONE] * 4
        sc = [-d, d, d, -d]
    make = lambda sc_: SparseMatrix.from_entries(  # noqa: E731
        (4, ctx.s0), [(q, ctx.coord(*pos[q]), sc_[q]) for q in range(4)]
    )
    return make(sa), make(sb), make(sc)


def default_chooser(ctx: AggregationContext) -> Callable:
    base = strassen()
    K_U, K_V = diagonal_kernels(ctx)
    diag = with_prescribed_rows(K_U, K_V)

    def choose(cell):
        return diag if cell[0] == cell[1] else base

    return choose


def cancellation_cells(ctx: AggregationContext, chooser: Callable | None = None, cells=None, offset: int = 0):
    """Seven rows per cell from the cell's local <2,2,2;7>.

    ``cells`` defaults to the off-diagonal cells in row-major order.  Returns
    the rows and the list of :class:`TraceCell` records, whose offsets are
    counted from ``offset``.
    """
    chooser = chooser or default_chooser(ctx)
    cells = ctx.S_tilde if cells is None else cells
    block = RowBlock.empty()
    records = []
    for cell in cells:
        local = chooser(cell)
        if local.dims != (2, 2, 2) or local.t != 7:
            raise DimensionError(f"chooser returned {local!r} for cell {cell}; need a <2,2,2;7>")
        local = local.expanded()
        E_A, E_B, E_C = cell_embeddings(ctx, cell)
        rec = TraceCell(cell, E_A, E_B, E_C, local, offset + len(block))
        U, V, W = rec.rows()
        for s in range(7):
            block.add(U.row_dict(s), V.row_dict(s), W.row_dict(s), Cancellation(cell, s))
        records.append(rec)
    return block, records


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _assemble(ctx, block: RowBlock, cells, name) -> BilinearAlgorithm:
    _, _, phi = build_phi(ctx.n0)
    U, V, W = block.matrices(ctx.s0)
    n0 = ctx.n0
    alg = BilinearAlgorithm((n0, n0, n0), U, V, W, block.tags, (phi, phi, phi), name=name)
    alg.cells = tuple(cells)
    alg.context = ctx
    return alg


def gen_pan(n0: int, chooser: Callable | None = None) -> BilinearAlgorithm:
    """Variant without kin merging: every cell, diagonal ones included, is a
    separate 7-product trace and the diagonal second-table rows are kept."""
    ctx = AggregationContext(n0)
    block = aggregation_rows(ctx, include_diagonal=True)
    all_cells = [(i, j) for i in range(ctx.d) for j in range(ctx.d)]
    cell_block, records = cancellation_cells(ctx, chooser, all_cells, offset=len(block))
    block.extend(cell_block)
    off = [r for r in records if r.cell[0] != r.cell[1]]
    return _assemble(ctx, block, off, f"pan-{n0}")


def targeted_pairs(alg: BilinearAlgorithm) -> list[tuple[int, int]]:
    """Pairs (diagonal second-table row, slot 0 of diagonal cell) in ``alg``."""
    agg, first = {}, {}
    for r, tag in enumerate(alg.tags):
        if isinstance(tag, Aggregation) and tag.table == 2 and not tag.barred:
            i, j, k = tag.triple
            if i == j == k:
                agg[i] = r
        elif isinstance(tag, Cancellation) and tag.slot == 0 and tag.cell[0] == tag.cell[1]:
            first[tag.cell[0]] = r
    return [(agg[i], first[i]) for i in sorted(agg) if i in first]


def gen_new25(n0: int, path: str = "literal", chooser: Callable | None = None) -> BilinearAlgorithm:
    """Aggregation algorithm with the diagonal kin pairs merged.

    ``path="literal"`` emits the correction blocks directly;
    ``path="merge"`` builds :func:`gen_pan` and merges its targeted kin pairs.
    """
    if path == "merge":
        pan = gen_pan(n0, chooser)
        merged = merge_kin(pan, targeted_pairs(pan))
        dropped = {b for _, b in targeted_pairs(pan)}
        shift = sorted(dropped)
        cells = []
        for rec in pan.cells:
            off = rec.offset - sum(1 for x in shift if x < rec.offset)
            cells.append(TraceCell(rec.cell, rec.E_A, rec.E_B, rec.E_C, rec.local, off))
        merged.cells = tuple(cells)
        merged.context = pan.context
        merged.name = f"new25-{n0}"
        return merged
    if path != "literal":
        raise ValueError(f"unknown path {path!r}")
    ctx = AggregationContext(n0)
    block = aggregation_rows(ctx, include_diagonal=False)
    for i in range(ctx.d):
        block.extend(correction_block(ctx, i))
    cell_block, records = cancellation_cells(ctx, chooser, offset=len(block))
    block.extend(cell_block)
    return _assemble(ctx, block, records, f"new25-{n0}")


@dataclass
class DecomposedAlgorithm:
    """``phi`` with ``U_phi``, ``V_phi``, ``W_phi`` such that ``U = U_phi @ phi``."""

    phi: SparseMatrix
    U_phi: SparseMatrix
    V_phi: SparseMatrix
    W_phi: SparseMatrix
    algorithm: BilinearAlgorithm

    @property
    def t0(self) -> int:
        return self.U_phi.nrows

    @property
    def s0(self) -> int:
        return self.phi.nrows

    @classmethod
    def from_algorithm(cls, alg: BilinearAlgorithm) -> "DecomposedAlgorithm":
        if alg.transforms is None:
            raise ValueError("algorithm is not in factored form")
        tA, tB, tC = alg.transforms
        if not (tA == tB and tB == tC):
            raise ValueError("decomposition needs a single shared transform")
        return cls(tA, *alg.working, alg)


def gen_new25_decomposed(n0: int) -> DecomposedAlgorithm:
    return DecomposedAlgorithm.from_algorithm(gen_new25(n0))
