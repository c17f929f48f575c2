"""Two-level self-composition of an aggregation algorithm with cell-pair
substitution, kept in implicit form.

Composing an algorithm with ``t'`` rows with itself gives ``t'^2`` rows
``(r, r')``.  When both ``r`` and ``r'`` belong to off-diagonal trace cells
``c`` and ``c'``, the 49 rows of the pair form a <4,4,4;49> acting on the
4x4 operand built from the two cells' embeddings; each such block can be
replaced by a <4,4,4> algorithm with fewer rows.  The rank is then
``t'^2 - h^2 (49 - r)`` with ``h`` the number of cells.
"""

from __future__ import annotations

import numpy as np

from .core import (
    BilinearAlgorithm,
    Composed,
    Replacement,
    block_to_rowmajor,
    compose,
    composed_block,
)
from .errors import SubstitutionError
from .modp import PrimeField
from .sparse import SparseMatrix

ROW_CHUNK = 512


def check_replacement(rep: BilinearAlgorithm, verify: bool = True) -> BilinearAlgorithm:
    if rep.dims != (4, 4, 4):
        raise SubstitutionError(f"replacement has dims {rep.dims}, expected (4, 4, 4)")
    if rep.t > 49:
        raise SubstitutionError(f"replacement has {rep.t} rows; at most 49 are useful")
    if rep.verified is None and verify:
        from .verify import certify

        rep, report = certify(rep, "exact")
        if not report.result:
            raise SubstitutionError("replacement fails exact verification")
    return rep


class CompositeAlgorithm:
    """Implicit ``compose(base, base)`` with optional cell-pair substitution."""

    def __init__(
        self,
        base: BilinearAlgorithm,
        replacement: BilinearAlgorithm | None = None,
        verify=True,
        pairs=None,
    ):
        if base.cells is None:
            raise ValueError("base algorithm carries no trace cells")
        if replacement is not None:
            replacement = check_replacement(replacement, verify)
        self.base = base
        self.replacement = replacement
        self.cells = tuple(base.cells)
        h = len(self.cells)
        if pairs is None:
            self.pairs = None
        else:
            self.pairs = tuple(sorted(set((int(a), int(b)) for a, b in pairs)))
            if any(not (0 <= a < h and 0 <= b < h) for a, b in self.pairs):
                raise SubstitutionError("cell-pair index out of range")
        m, n, p = base.dims
        self.dims = (m * m, n * n, p * p)
        self.name = f"{base.name}-squared" + ("-substituted" if replacement is not None else "")
        self.verified = None
        for c in self.cells:
            if c.local.t != 7:
                raise SubstitutionError("every trace cell must use a 7-row local algorithm")

    # -- bookkeeping --------------------------------------------------------
    @property
    def h(self) -> int:
        return len(self.cells)

    @property
    def blocks(self) -> int:
        """Number of 49-row cell-pair blocks (``h^2``)."""
        return self.h**2

    @property
    def substituted_blocks(self) -> int:
        if self.replacement is None:
            return 0
        return self.blocks if self.pairs is None else len(self.pairs)

    def _pair_mask(self) -> np.ndarray:
        mask = np.zeros((self.h, self.h), dtype=bool)
        if self.pairs is None:
            mask[:] = True
        else:
            for a, b in self.pairs:
                mask[a, b] = True
        return mask

    @property
    def t_prime(self) -> int:
        return self.base.t

    @property
    def substituted(self) -> bool:
        return self.replacement is not None

    @property
    def t(self) -> int:
        full = self.t_prime**2
        if self.replacement is None:
            return full
        return full - self.substituted_blocks * (49 - self.replacement.t)

    rank = t

    def __repr__(self) -> str:
        m, n, p = self.dims
        return f"CompositeAlgorithm(<{m},{n},{p};{self.t}>, blocks={self.blocks})"

    def with_verified(self, meta) -> "CompositeAlgorithm":
        out = CompositeAlgorithm(self.base, self.replacement, verify=False, pairs=self.pairs)
        out.verified = meta
        return out

    def cell_rows(self) -> np.ndarray:
        return np.concatenate([np.arange(c.offset, c.offset + 7) for c in self.cells]).astype(np.int64)

    def block_rows(self, a: int, b: int) -> list[int]:
        """Composed row indices of block ``(cell a, cell b)`` in slot order."""
        tp = self.t_prime
        ca, cb = self.cells[a], self.cells[b]
        return [(ca.offset + s) * tp + cb.offset + s2 for s in range(7) for s2 in range(7)]

    # -- evaluation -----------------------------------------------------------
    def _operand_grid(self, X: np.ndarray, rows: int, cols: int) -> np.ndarray:
        """Rearrange a big operand so entry ``[a, a']`` pairs the outer and
        inner row-major indices of the two composition levels."""
        return X.reshape(rows, rows, cols, cols).transpose(0, 2, 1, 3).reshape(rows * cols, rows * cols)

    def trilinear_mod(self, field: PrimeField, A, B, C) -> np.ndarray:
        out = []
        m, n, p = self.base.dims
        shapes = ((m, n), (n, p), (p, m))
        Us = self.base.working
        Ts = self.base.transforms or tuple(SparseMatrix.identity(X.ncols) for X in Us)
        Es = [SparseMatrix.vstack([getattr(c, f"E_{k}") for c in self.cells]) for k in "ABC"]
        S = self.cell_rows()
        perm = block_to_rowmajor(2, 2, 2, 2)
        rep = self.replacement
        for trial in range(A.shape[0]):
            cores, enc, cellg = [], [], []
            for X, (r, c), Wk, Tk, Ek in zip((A[trial], B[trial], C[trial]), shapes, Us, Ts, Es):
                G = self._operand_grid(X, r, c)
                Gs = field.sparse_matmul(Tk, field.sparse_matmul(Tk, G.T).T)
                Y = field.sparse_matmul(Wk, Gs)
                cores.append(Wk)
                enc.append(Y)
                if rep is not None:
                    cellg.append(field.sparse_matmul(Ek, field.sparse_matmul(Ek, Gs.T).T))
            total = 0
            tp = self.t_prime
            for lo in range(0, tp, ROW_CHUNK):
                hi = min(tp, lo + ROW_CHUNK)
                prod = None
                for Wk, Y in zip(cores, enc):
                    Xk = field.sparse_matmul(Wk, Y[lo:hi].T).T
                    prod = Xk if prod is None else field.mul(prod, Xk)
                total = (total + field.sum(prod)) % field.p
            if rep is not None:
                h = self.h
                keep = self._pair_mask().reshape(-1)
                prod = None
                for Wk, Y in zip(cores, enc):
                    sub = field.sparse_matmul(Wk.take_rows(S), Y[S].T).T
                    prod = sub if prod is None else field.mul(prod, sub)
                # rows of S come in groups of 7 per cell; sum each 7x7 block
                per_pair = prod.reshape(h, 7, h, 7).transpose(0, 2, 1, 3).reshape(h * h, 49)
                total = (total - field.sum(per_pair[keep])) % field.p
                prod = None
                for g, R in zip(cellg, (rep.U, rep.V, rep.W)):
                    blocks = g.reshape(h, 4, h, 4).transpose(0, 2, 1, 3).reshape(h * h, 16)
                    rm = np.empty_like(blocks)
                    rm[:, perm] = blocks
                    vals = field.sparse_matmul(R, rm.T)
                    prod = vals if prod is None else field.mul(prod, vals)
                total = (total + field.sum(prod[:, keep])) % field.p
            out.append(total)
        return np.array(out, dtype=object)

    # -- explicit form ------------------------------------------------------
    def materialize(self) -> BilinearAlgorithm:
        """Explicit algorithm (only sensible for small base sizes).

        Row ``r * t' + r'`` of the composition is kept unless it lies in a
        substituted block; there the first ``r`` rows of the block receive
        the replacement rows and the rest are removed.
        """
        alg = compose(self.base, self.base)
        if self.replacement is None:
            return alg
        rep = self.replacement
        updates: list[dict] = [{}, {}, {}]
        drop: list[int] = []
        tags = list(alg.tags)
        mask = self._pair_mask()
        for a, ca in enumerate(self.cells):
            for b, cb in enumerate(self.cells):
                if not mask[a, b]:
                    continue
                rows = self.block_rows(a, b)
                new = composed_block(ca, cb, rep)
                for q, r in enumerate(rows[: rep.t]):
                    for k in range(3):
                        updates[k][r] = new[k].row_dict(q)
                    tags[r] = Replacement((ca.cell, cb.cell), q)
                drop.extend(rows[rep.t :])
        mats = [X.replace_rows(u).delete_rows(drop) for X, u in zip(alg.working, updates)]
        dropped = set(drop)
        tags = tuple(tg for r, tg in enumerate(tags) if r not in dropped)
        return BilinearAlgorithm(alg.dims, *mats, tags, alg.transforms, None, self.name)

    def block_tags(self):
        """Iterate over the cell pairs of the substitution blocks."""
        for ca in self.cells:
            for cb in self.cells:
                yield Composed(ca.cell, cb.cell)


def gen_new25b(
    m0: int,
    replacement: BilinearAlgorithm | None = None,
    verify_replacement: bool = True,
    pairs=None,
):
    """Two levels of the merged aggregation algorithm, with every pair of
    off-diagonal cells (or only ``pairs``) replaced by ``replacement`` when
    one is given."""
    from .generator import gen_new25

    return CompositeAlgorithm(gen_new25(m0), replacement, verify_replacement, pairs)
