"""Bilinear algorithms and their algebra.

Conventions.  Operands are flattened row-major: ``A`` (m x n) at index
``n*i + j``, ``B`` (n x p) at ``p*j + k`` and ``C`` (p x m) at ``m*k + i``.
An algorithm ``(U, V, W)`` is correct when

    sum_r (U vec A)_r (V vec B)_r (W vec C)_r = tr(A B C)

for all operands, equivalently ``vec(C^T) = W^T ((U vec A) * (V vec B))``
where ``C = A B`` is ``m x p``.  The product therefore comes out transposed
and is un-transposed in :func:`apply_bilinear`.

An algorithm may be stored in factored form: working matrices over an
intermediate basis plus per-operand transforms ``(phi_A, phi_B, phi_C)``,
so that the effective encoding is ``U_work @ phi_A``.  Everything below
works on the factored form when it exists and only expands on request.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import DimensionError, NotKinError, SingularMatrixError, SubstitutionError
from .sparse import SparseMatrix, as_fraction


# ---------------------------------------------------------------------------
# Row provenance tags
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Aggregation:
    table: int
    triple: tuple[int, int, int]
    barred: bool = False


@dataclass(frozen=True)
class CorrectionDiag:
    i: int
    slot: int


@dataclass(frozen=True)
class Cancellation:
    cell: tuple[int, int]
    slot: int


@dataclass(frozen=True)
class Replacement:
    """Row of a sub-algorithm substituted for a block of composed cell rows."""

    cells: tuple[tuple[int, int], tuple[int, int]]
    slot: int


@dataclass(frozen=True)
class Composed:
    left: Any
    right: Any


@dataclass(frozen=True)
class Untagged:
    pass


UNTAGGED = Untagged()
RowTag = Aggregation | CorrectionDiag | Cancellation | Replacement | Composed | Untagged


# ---------------------------------------------------------------------------
# Vectorization
# ---------------------------------------------------------------------------


def _block_levels(shape, block) -> int:
    rows, cols = shape
    m0, n0 = block
    cands = []
    for size, base in ((rows, m0), (cols, n0)):
        if base > 1:
            lv, s = 0, 1
            while s < size:
                s *= base
                lv += 1
            cands.append(lv)
    lv = cands[0] if cands else 1
    if m0**lv != rows or n0**lv != cols or lv < 1:
        raise DimensionError(f"shape {tuple(shape)} is not a power of the block {tuple(block)}")
    return lv


def vectorize(A, block: tuple[int, int]) -> np.ndarray:
    """Recursive block-row-major flattening of ``A``.

    ``A`` must be ``m0^l x n0^l`` for ``block = (m0, n0)``; the result lists
    the blocks in row-major order, each block flattened the same way.
    """
    A = A if isinstance(A, np.ndarray) else np.asarray(A, dtype=object)
    m0, n0 = block
    lv = _block_levels(A.shape, block)
    t = A.reshape((m0,) * lv + (n0,) * lv)
    order = [ax for k in range(lv) for ax in (k, lv + k)]
    return t.transpose(order).reshape(-1)


def matricize(v, block: tuple[int, int], levels: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=object) if not isinstance(v, np.ndarray) else v
    m0, n0 = block
    if v.size != (m0 * n0) ** levels:
        raise DimensionError(f"vector of length {v.size} does not match block {block} at {levels} levels")
    t = v.reshape(tuple(x for _ in range(levels) for x in (m0, n0)))
    order = [2 * k for k in range(levels)] + [2 * k + 1 for k in range(levels)]
    return t.transpose(order).reshape(m0**levels, n0**levels)


def block_to_rowmajor(m1: int, n1: int, m2: int, n2: int) -> np.ndarray:
    """Permutation sending a one-level block index to the row-major index.

    Block index ``(n1*i1 + j1) * m2*n2 + n2*i2 + j2`` refers to entry
    ``(i1*m2 + i2, j1*n2 + j2)`` of an ``m1*m2 x n1*n2`` matrix.
    """
    i1, j1, i2, j2 = np.meshgrid(np.arange(m1), np.arange(n1), np.arange(m2), np.arange(n2), indexing="ij")
    return ((i1 * m2 + i2) * (n1 * n2) + (j1 * n2 + j2)).reshape(-1).astype(np.int64)


# ---------------------------------------------------------------------------
# Algorithm container
# ---------------------------------------------------------------------------


class BilinearAlgorithm:
    """An ``<m, n, p; t>`` bilinear algorithm with row tags.

    ``working`` holds the stored matrices; ``transforms`` (or ``None``) holds
    ``(phi_A, phi_B, phi_C)``.  ``U``, ``V``, ``W`` are always the effective
    encoding/decoding matrices over the row-major operand coordinates.
    """

    def __init__(self, dims, U, V, W, tags=None, transforms=None, verified=None, name=None):
        self.dims = tuple(int(x) for x in dims)
        m, n, p = self.dims
        self.working = (U, V, W)
        t = U.nrows
        if V.nrows != t or W.nrows != t:
            raise DimensionError("U, V, W must have the same number of rows")
        expected = (m * n, n * p, p * m)
        if transforms is not None:
            transforms = tuple(transforms)
            for X, T, size in zip(self.working, transforms, expected):
                if X.ncols != T.nrows or T.ncols != size:
                    raise DimensionError(f"transform shape {T.shape} inconsistent with {X.shape} and {size}")
        else:
            for X, size in zip(self.working, expected):
                if X.ncols != size:
                    raise DimensionError(f"matrix has {X.ncols} columns, expected {size}")
        self.transforms = transforms
        if tags is None:
            tags = (UNTAGGED,) * t
        tags = tuple(tags)
        if len(tags) != t:
            raise DimensionError(f"{len(tags)} tags for {t} rows")
        self.tags = tags
        self.verified = verified
        self.name = name
        self.cells = None
        self.context = None
        self._full = None

    # -- shape ------------------------------------------------------------
    @property
    def t(self) -> int:
        return self.working[0].nrows

    @property
    def rank(self) -> int:
        return self.t

    @property
    def m(self) -> int:
        return self.dims[0]

    @property
    def n(self) -> int:
        return self.dims[1]

    @property
    def p(self) -> int:
        return self.dims[2]

    @property
    def factored(self) -> bool:
        return self.transforms is not None

    def __repr__(self) -> str:
        m, n, p = self.dims
        extra = ", factored" if self.factored else ""
        return f"BilinearAlgorithm(<{m},{n},{p};{self.t}>{extra})"

    # -- effective matrices ---------------------------------------------------
    def _effective(self):
        if self._full is None:
            if self.transforms is None:
                self._full = self.working
            else:
                self._full = tuple(X @ T for X, T in zip(self.working, self.transforms))
        return self._full

    @property
    def U(self) -> SparseMatrix:
        return self._effective()[0]

    @property
    def V(self) -> SparseMatrix:
        return self._effective()[1]

    @property
    def W(self) -> SparseMatrix:
        return self._effective()[2]

    def expanded(self) -> "BilinearAlgorithm":
        """Same algorithm with the transforms folded into U, V, W."""
        if not self.factored:
            return self
        U, V, W = self._effective()
        return BilinearAlgorithm(self.dims, U, V, W, self.tags, None, self.verified, self.name)

    def with_verified(self, meta) -> "BilinearAlgorithm":
        out = BilinearAlgorithm(self.dims, *self.working, self.tags, self.transforms, meta, self.name)
        out._full = self._full
        out.cells, out.context = self.cells, self.context
        return out

    def same_as(self, other: "BilinearAlgorithm") -> bool:
        """Bit-identical effective matrices, dims and tags."""
        return (
            self.dims == other.dims
            and self.tags == other.tags
            and all(a == b for a, b in zip(self._effective(), other._effective()))
        )


def _derived(op: str, *sources: BilinearAlgorithm):
    metas = [s.verified for s in sources]
    if any(m is None for m in metas):
        return None
    return {"mode": "derived", "operation": op, "sources": metas}


def identity_algorithm() -> BilinearAlgorithm:
    one = SparseMatrix.identity(1)
    return BilinearAlgorithm((1, 1, 1), one, one, one, verified={"mode": "by-definition"}, name="identity")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _apply_rows(S: SparseMatrix, vec: Sequence) -> list:
    out: list = [0] * S.nrows
    for r, c, v in S.entries():
        out[r] = out[r] + v * vec[c]
    return out


def _as_grid(M, rows: int, cols: int, what: str):
    M = [list(r) for r in M]
    if len(M) != rows or any(len(r) != cols for r in M):
        raise DimensionError(f"{what} must be {rows}x{cols}")
    return M


def apply_bilinear(alg: BilinearAlgorithm, A, B) -> list[list]:
    """Multiply ``A`` (m x n) by ``B`` (n x p) with one application of ``alg``."""
    m, n, p = alg.dims
    A = _as_grid(A, m, n, "A")
    B = _as_grid(B, n, p, "B")
    a = [x for row in A for x in row]
    b = [x for row in B for x in row]
    prods = [x * y for x, y in zip(_apply_rows(alg.U, a), _apply_rows(alg.V, b))]
    vct = _apply_rows(alg.W.transpose(), prods)
    return [[vct[m * k + i] for k in range(p)] for i in range(m)]


def trilinear_value(alg: BilinearAlgorithm, A, B, C):
    """``<U vec A, V vec B, W vec C>``; equals tr(ABC) for a correct algorithm."""
    m, n, p = alg.dims
    A = _as_grid(A, m, n, "A")
    B = _as_grid(B, n, p, "B")
    C = _as_grid(C, p, m, "C")
    ua = _apply_rows(alg.U, [x for r in A for x in r])
    vb = _apply_rows(alg.V, [x for r in B for x in r])
    wc = _apply_rows(alg.W, [x for r in C for x in r])
    total = 0
    for x, y, z in zip(ua, vb, wc):
        total = total + x * y * z
    return total


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------


def rotate(alg: BilinearAlgorithm) -> BilinearAlgorithm:
    """Cyclic rotation ``(U, V, W) -> (V, W, U)`` with dims ``(n, p, m)``."""
    m, n, p = alg.dims
    U, V, W = alg.working
    tr = None if alg.transforms is None else (alg.transforms[1], alg.transforms[2], alg.transforms[0])
    out = BilinearAlgorithm((n, p, m), V, W, U, alg.tags, tr, _derived("rotate", alg), alg.name)
    if alg._full is not None:
        out._full = (alg._full[1], alg._full[2], alg._full[0])
    return out


def compose(alg1: BilinearAlgorithm, alg2: BilinearAlgorithm) -> BilinearAlgorithm:
    """Kronecker product of two algorithms: ``<m1 m2, n1 n2, p1 p2; t1 t2>``.

    Row ``r1 * t2 + r2`` is the product of row ``r1`` of ``alg1`` with row
    ``r2`` of ``alg2``.  Columns are re-indexed so the result again uses
    row-major operand coordinates.
    """
    m1, n1, p1 = alg1.dims
    m2, n2, p2 = alg2.dims
    perms = (
        block_to_rowmajor(m1, n1, m2, n2),
        block_to_rowmajor(n1, p1, n2, p2),
        block_to_rowmajor(p1, m1, p2, m2),
    )
    mats = [X.kron(Y) for X, Y in zip(alg1.working, alg2.working)]
    if alg1.transforms is None and alg2.transforms is None:
        mats = [X.permute_columns(pm) for X, pm in zip(mats, perms)]
        transforms = None
    else:
        t1 = alg1.transforms or tuple(SparseMatrix.identity(X.ncols) for X in alg1.working)
        t2 = alg2.transforms or tuple(SparseMatrix.identity(X.ncols) for X in alg2.working)
        transforms = tuple(a.kron(b).permute_columns(pm) for a, b, pm in zip(t1, t2, perms))
    tags = tuple(Composed(a, b) for a in alg1.tags for b in alg2.tags)
    return BilinearAlgorithm(
        (m1 * m2, n1 * n2, p1 * p2), *mats, tags, transforms, _derived("compose", alg1, alg2)
    )


def symmetrize(alg: BilinearAlgorithm) -> BilinearAlgorithm:
    """``compose(alg, compose(rotate(alg), rotate(rotate(alg))))``."""
    r1 = rotate(alg)
    r2 = rotate(r1)
    return compose(alg, compose(r1, r2))


def _dense_inverse(K: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(K)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(K)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def as_rational_matrix(K) -> list[list[Fraction]]:
    return [[as_fraction(x) for x in row] for row in K]


def degroote_transform(alg: BilinearAlgorithm, K) -> BilinearAlgorithm:
    """Sandwich the middle dimension: ``U' = U (I_m x K^T)``, ``V' = V (K^-1 x I_p)``.

    The result computes ``(A K)(K^-1 B)``; ``W`` is untouched.  Applying
    ``K1`` and then ``K2`` equals a single transform by ``K2 @ K1``.
    """
    m, n, p = alg.dims
    K = as_rational_matrix(K)
    if len(K) != n or any(len(r) != n for r in K):
        raise DimensionError(f"K must be {n}x{n}")
    Kinv = _dense_inverse(K)
    KT = SparseMatrix.from_dense(K).transpose()
    left = SparseMatrix.identity(m).kron(KT)
    right = SparseMatrix.from_dense(Kinv).kron(SparseMatrix.identity(p))
    U, V, W = alg.working
    if alg.transforms is None:
        U2, V2, tr = U @ left, V @ right, None
    else:
        tA, tB, tC = alg.transforms
        U2, V2, tr = U, V, (tA @ left, tB @ right, tC)
    return BilinearAlgorithm(alg.dims, U2, V2, W, alg.tags, tr, _derived("degroote", alg), alg.name)


# ---------------------------------------------------------------------------
# Kin rows
# ---------------------------------------------------------------------------

_AGREEMENTS = ((0, 1, 2), (1, 2, 0), (2, 0, 1))  # (agree, agree, summed)


def find_kin_pairs(alg: BilinearAlgorithm) -> list[tuple[int, int]]:
    """Greedy disjoint pairs of rows agreeing in at least two of U, V, W.

    Rows are scanned in order; each unmatched row is paired with the
    lowest-indexed later unmatched row it is kin to.  Comparison is on the
    stored (working) rows.
    """
    t = alg.t
    keys = [[X.row_key(r) for r in range(t)] for X in alg.working]
    buckets: list[dict] = [{}, {}, {}]
    for a, b, _ in _AGREEMENTS:
        bucket = buckets[a]
        for r in range(t):
            bucket.setdefault((keys[a][r], keys[b][r]), []).append(r)
    matched = np.zeros(t, dtype=bool)
    cursors: list[dict] = [{}, {}, {}]
    pairs = []
    for r in range(t):
        if matched[r]:
            continue
        best = None
        for a, b, _ in _AGREEMENTS:
            key = (keys[a][r], keys[b][r])
            lst = buckets[a][key]
            pos = cursors[a].get(key, 0)
            while pos < len(lst) and (lst[pos] <= r or matched[lst[pos]]):
                pos += 1
            cursors[a][key] = pos
            if pos < len(lst) and (best is None or lst[pos] < best):
                best = lst[pos]
        if best is not None:
            matched[r] = matched[best] = True
            pairs.append((r, best))
    return pairs


def merge_kin(alg: BilinearAlgorithm, pairs) -> BilinearAlgorithm:
    """Merge each kin pair into one row, summing the disagreeing matrix.

    The earlier row keeps its position and tag; the later one is removed.
    """
    pairs = [(min(a, b), max(a, b)) for a, b in pairs]
    seen: set[int] = set()
    for a, b in pairs:
        if a == b or a in seen or b in seen:
            raise NotKinError(f"pairs overlap at ({a}, {b})")
        if not (0 <= a < alg.t and 0 <= b < alg.t):
            raise DimensionError(f"row index out of range in ({a}, {b})")
        seen.update((a, b))
    mats = list(alg.working)
    updates: list[dict[int, dict]] = [{}, {}, {}]
    for a, b in pairs:
        for x, y, s in _AGREEMENTS:
            if mats[x].row_key(a) == mats[x].row_key(b) and mats[y].row_key(a) == mats[y].row_key(b):
                row = mats[s].row_dict(a)
                for c, v in mats[s].row_dict(b).items():
                    row[c] = row.get(c, 0) + v
                updates[s][a] = row
                break
        else:
            raise NotKinError(f"rows {a} and {b} agree in fewer than two matrices")
    drop = [b for _, b in pairs]
    mats = [X.replace_rows(u).delete_rows(drop) for X, u in zip(mats, updates)]
    dropped = set(drop)
    tags = tuple(tg for r, tg in enumerate(alg.tags) if r not in dropped)
    return BilinearAlgorithm(alg.dims, *mats, tags, alg.transforms, _derived("merge-kin", alg), alg.name)


# ---------------------------------------------------------------------------
# Trace cells and sub-algorithm substitution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceCell:
    """One 2x2 trace ``tr(X Y Z)`` of the cancellation step.

    ``E_A``, ``E_B``, ``E_C`` are 4 x s0 embeddings producing the row-major
    entries of X, Y, Z (scaling included) from the working coordinates;
    ``local`` is the <2,2,2;7> used for the cell, whose rows start at
    ``offset`` in the generated algorithm.
    """

    cell: tuple[int, int]
    E_A: SparseMatrix
    E_B: SparseMatrix
    E_C: SparseMatrix
    local: BilinearAlgorithm = field(compare=False)
    offset: int = 0

    def rows(self):
        return tuple(X @ E for X, E in zip(self.local.working, (self.E_A, self.E_B, self.E_C)))


def composed_block(cell1: TraceCell, cell2: TraceCell, sub: BilinearAlgorithm):
    """Rows of ``sub`` (a <4,4,4> over row-major 4x4 operands) acting on the
    pair ``cell1 (x) cell2`` in the composed working basis."""
    perm = block_to_rowmajor(2, 2, 2, 2)
    out = []
    mats = (sub.U, sub.V, sub.W)
    embeds = ((cell1.E_A, cell2.E_A), (cell1.E_B, cell2.E_B), (cell1.E_C, cell2.E_C))
    inv = np.argsort(perm)
    for X, (E1, E2) in zip(mats, embeds):
        # columns of X are row-major 4x4 indices; bring them to block order
        out.append(X.permute_columns(inv) @ E1.kron(E2))
    return tuple(out)


def substitute_subalgorithm(
    alg: BilinearAlgorithm,
    rows: Sequence[int],
    cells: tuple[TraceCell, TraceCell],
    replacement: BilinearAlgorithm,
) -> BilinearAlgorithm:
    """Replace a 49-row composed cell block by the rows of ``replacement``.

    ``rows`` lists the block rows in order ``(s1, s2)`` row-major over the
    two cells' local slots.  The first ``replacement.t`` positions receive
    the new rows and the remainder are deleted.
    """
    c1, c2 = cells
    rows = list(rows)
    t1, t2 = c1.local.t, c2.local.t
    if len(rows) != t1 * t2 or len(set(rows)) != len(rows):
        raise SubstitutionError(f"expected {t1 * t2} distinct rows")
    if replacement.dims != (4, 4, 4):
        raise SubstitutionError(f"replacement has dims {replacement.dims}, expected (4, 4, 4)")
    if replacement.t > len(rows):
        raise SubstitutionError("replacement has more rows than the block it replaces")
    local = compose(c1.local, c2.local)
    expected = composed_block(c1, c2, local)
    for X, E in zip(alg.working, expected):
        if not (X.take_rows(rows) == E):
            raise SubstitutionError("rows do not factor through the given trace cells")
    if replacement.verified is None:
        from .verify import verify_exact

        if not verify_exact(replacement):
            raise SubstitutionError("replacement fails verification")
    new = composed_block(c1, c2, replacement)
    keep = rows[: replacement.t]
    drop = rows[replacement.t :]
    mats = []
    for X, N in zip(alg.working, new):
        upd = {r: N.row_dict(q) for q, r in enumerate(keep)}
        mats.append(X.replace_rows(upd).delete_rows(drop))
    tags = list(alg.tags)
    for q, r in enumerate(keep):
        tags[r] = Replacement((c1.cell, c2.cell), q)
    dropped = set(drop)
    tags = tuple(tg for r, tg in enumerate(tags) if r not in dropped)
    verified = _derived("substitute", alg, replacement)
    return BilinearAlgorithm(alg.dims, *mats, tags, alg.transforms, verified, alg.name)


# ---------------------------------------------------------------------------
# Matrix multiplication tensor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MMTensor:
    """Support of the <m, n, p> matrix multiplication tensor.

    Triples are ``(n*i + j, p*j + k, m*k + i)``, aligned with (U, V, W).
    """

    m: int
    n: int
    p: int
    support: frozenset

    @classmethod
    def build(cls, m: int, n: int, p: int) -> "MMTensor":
        if min(m, n, p) < 1:
            raise DimensionError("dimensions must be positive")
        sup = frozenset(
            (n * i + j, p * j + k, m * k + i) for i in range(m) for j in range(n) for k in range(p)
        )
        return cls(m, n, p, sup)

    def as_dict(self) -> dict:
        return {key: Fraction(1) for key in self.support}
