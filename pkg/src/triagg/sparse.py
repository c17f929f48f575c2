"""Exact sparse matrices over the rationals.

A ``SparseMatrix`` stores coordinate triples in canonical row-major order,
with no duplicate coordinates and no explicit zeros.  Values are
``fractions.Fraction`` objects held in a numpy object array; indices are
int64 arrays.  Instances are treated as immutable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, FormatError, PrimeError

_INT64_SAFE = 2.0**62


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floating-point coefficients are not accepted; use Fraction or str")
    return Fraction(x)


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if not s or any(ch in s for ch in "ijIJ"):
        raise FormatError(f"not a rational literal: {s!r}")
    try:
        num, _, den = s.partition("/")
        if "." in num or "e" in num.lower():
            raise ValueError
        return Fraction(int(num), int(den)) if den else Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational literal: {s!r}") from None


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class SparseMatrix:
    """Exact coordinate-form matrix with canonical ordering."""

    __slots__ = ("shape", "rows", "cols", "vals", "_indptr", "_residues", "_float")

    def __init__(self, shape, rows, cols, vals, *, _canonical=False):
        self.shape = (int(shape[0]), int(shape[1]))
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        vals = _object_array(vals)
        if not (len(rows) == len(cols) == len(vals)):
            raise DimensionError("rows, cols and vals must have equal length")
        if not _canonical:
            rows, cols, vals = _canonicalize(self.shape, rows, cols, vals)
        self.rows, self.cols, self.vals = rows, cols, vals
        self._indptr = None
        self._residues = {}
        self._float = None

    # -- constructors -------------------------------------------------
    @classmethod
    def from_entries(cls, shape, entries: Iterable, *, accumulate: bool = True) -> "SparseMatrix":
        """Build from ``(row, col, value)`` triples.

        With ``accumulate`` duplicate coordinates are summed; otherwise they
        raise ``FormatError``.
        """
        acc: dict[tuple[int, int], Fraction] = {}
        nr, nc = shape
        for r, c, v in entries:
            r, c = int(r), int(c)
            if not (0 <= r < nr and 0 <= c < nc):
                raise FormatError(f"index ({r}, {c}) out of range for shape {tuple(shape)}")
            v = as_fraction(v)
            if (r, c) in acc:
                if not accumulate:
                    raise FormatError(f"duplicate coordinate ({r}, {c})")
                acc[(r, c)] += v
            else:
                acc[(r, c)] = v
        return cls._from_dict(shape, acc)

    @classmethod
    def from_rows(cls, ncols: int, rows: Sequence[dict]) -> "SparseMatrix":
        """Build from a list of ``{col: value}`` dictionaries, one per row."""
        acc = {}
        for r, row in enumerate(rows):
            for c, v in row.items():
                acc[(r, c)] = as_fraction(v)
        return cls._from_dict((len(rows), ncols), acc)

    @classmethod
    def _from_dict(cls, shape, acc) -> "SparseMatrix":
        items = sorted((k, v) for k, v in acc.items() if v != 0)
        rows = np.fromiter((k[0] for k, _ in items), dtype=np.int64, count=len(items))
        cols = np.fromiter((k[1] for k, _ in items), dtype=np.int64, count=len(items))
        vals = _object_array([v for _, v in items])
        if len(items):
            if rows.min() < 0 or cols.min() < 0 or rows.max() >= shape[0] or cols.max() >= shape[1]:
                raise FormatError("index out of range")
        return cls(shape, rows, cols, vals, _canonical=True)

    @classmethod
    def from_dense(cls, mat) -> "SparseMatrix":
        mat = [list(r) for r in mat]
        ncols = len(mat[0]) if mat else 0
        entries = ((i, j, v) for i, r in enumerate(mat) for j, v in enumerate(r))
        return cls.from_entries((len(mat), ncols), entries)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls((n, n), idx, idx, [Fraction(1)] * n, _canonical=True)

    @classmethod
    def zeros(cls, shape) -> "SparseMatrix":
        return cls(shape, [], [], [], _canonical=True)

    # -- basic properties ----------------------------------------------
    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @property
    def nns(self) -> int:
        """Number of stored entries outside {-1, 0, 1}."""
        one = Fraction(1)
        return sum(1 for v in self.vals if v != one and v != -one)

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            counts = np.bincount(self.rows, minlength=self.nrows)
            self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return self._indptr

    def row(self, i: int):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.cols[lo:hi], self.vals[lo:hi]

    def row_dict(self, i: int) -> dict[int, Fraction]:
        cols, vals = self.row(i)
        return dict(zip(cols.tolist(), vals))

    def row_key(self, i: int) -> tuple:
        cols, vals = self.row(i)
        return tuple(zip(cols.tolist(), vals))

    def entries(self):
        return zip(self.rows.tolist(), self.cols.tolist(), self.vals)

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.entries():
            out[r][c] = v
        return out

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and all(a == b for a, b in zip(self.vals, other.vals))
        )

    __hash__ = None

    # -- algebra ----------------------------------------------------------
    def transpose(self) -> "SparseMatrix":
        return SparseMatrix((self.ncols, self.nrows), self.cols, self.rows, self.vals)

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def __neg__(self) -> "SparseMatrix":
        return SparseMatrix(self.shape, self.rows, self.cols, -self.vals, _canonical=True)

    def scale(self, c) -> "SparseMatrix":
        c = as_fraction(c)
        if c == 0:
            return SparseMatrix.zeros(self.shape)
        return SparseMatrix(self.shape, self.rows, self.cols, self.vals * c, _canonical=True)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return SparseMatrix(
            self.shape,
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.vals, other.vals]),
        )

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        fast = _matmul_scaled(self, other)
        if fast is not None:
            return fast
        return _matmul_dict(self, other)

    def kron(self, other: "SparseMatrix") -> "SparseMatrix":
        br, bc = other.shape
        rows = (self.rows[:, None] * br + other.rows[None, :]).reshape(-1)
        cols = (self.cols[:, None] * bc + other.cols[None, :]).reshape(-1)
        vals = np.multiply.outer(self.vals, other.vals).reshape(-1)
        shape = (self.nrows * br, self.ncols * bc)
        order = np.lexsort((cols, rows))
        return SparseMatrix(shape, rows[order], cols[order], vals[order], _canonical=True)

    def permute_columns(self, perm) -> "SparseMatrix":
        """Move column ``c`` to column ``perm[c]``."""
        perm = np.asarray(perm, dtype=np.int64)
        cols = perm[self.cols]
        order = np.lexsort((cols, self.rows))
        return SparseMatrix(self.shape, self.rows[order], cols[order], self.vals[order], _canonical=True)

    def take_rows(self, idx) -> "SparseMatrix":
        idx = np.asarray(idx, dtype=np.int64).reshape(-1)
        ptr = self.indptr
        starts, ends = ptr[idx], ptr[idx + 1]
        lens = ends - starts
        if lens.sum() == 0:
            return SparseMatrix.zeros((len(idx), self.ncols))
        new_rows = np.repeat(np.arange(len(idx), dtype=np.int64), lens)
        offs = np.arange(lens.sum(), dtype=np.int64) - np.repeat(np.cumsum(lens) - lens, lens)
        src = np.repeat(starts, lens) + offs
        return SparseMatrix((len(idx), self.ncols), new_rows, self.cols[src], self.vals[src], _canonical=True)

    def delete_rows(self, idx) -> "SparseMatrix":
        keep = np.ones(self.nrows, dtype=bool)
        keep[np.asarray(list(idx), dtype=np.int64)] = False
        return self.take_rows(np.flatnonzero(keep))

    def replace_rows(self, updates: dict[int, dict]) -> "SparseMatrix":
        """Return a copy with the given rows replaced by ``{col: value}`` maps."""
        if not updates:
            return self
        mask = ~np.isin(self.rows, np.fromiter(updates, dtype=np.int64))
        extra = [(r, c, as_fraction(v)) for r, row in updates.items() for c, v in row.items() if v != 0]
        rows = np.concatenate([self.rows[mask], np.array([e[0] for e in extra], dtype=np.int64)])
        cols = np.concatenate([self.cols[mask], np.array([e[1] for e in extra], dtype=np.int64)])
        vals = np.concatenate([self.vals[mask], _object_array([e[2] for e in extra])])
        return SparseMatrix(self.shape, rows, cols, vals)

    @staticmethod
    def vstack(mats: Sequence["SparseMatrix"]) -> "SparseMatrix":
        if not mats:
            raise DimensionError("vstack of an empty list")
        ncols = mats[0].ncols
        offset = 0
        rows, cols, vals = [], [], []
        for m in mats:
            if m.ncols != ncols:
                raise DimensionError("vstack column mismatch")
            rows.append(m.rows + offset)
            cols.append(m.cols)
            vals.append(m.vals)
            offset += m.nrows
        return SparseMatrix(
            (offset, ncols), np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), _canonical=True
        )

    # -- numeric projections ---------------------------------------------
    def residues(self, p: int) -> np.ndarray:
        """Values reduced mod ``p`` as an int64 array (cached per prime)."""
        cached = self._residues.get(p)
        if cached is not None:
            return cached
        table = {}
        for v in set(self.vals.tolist()):
            if v.denominator % p == 0:
                raise PrimeError(f"coefficient {v} has denominator divisible by {p}; choose another prime")
            table[v] = v.numerator * pow(v.denominator, -1, p) % p
        res = np.fromiter((table[v] for v in self.vals), dtype=np.int64, count=self.nnz)
        self._residues[p] = res
        return res

    def to_scipy(self) -> sp.csr_matrix:
        """Floating-point CSR copy (for the float execution domain)."""
        if self._float is None:
            data = np.fromiter((float(v) for v in self.vals), dtype=np.float64, count=self.nnz)
            self._float = sp.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)
        return self._float

    def common_denominator(self) -> int:
        den = 1
        for d in {v.denominator for v in self.vals.tolist()}:
            den = den * d // np.gcd(den, d) if den < 2**62 else _lcm(den, d)
        return int(den)


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def _object_array(vals) -> np.ndarray:
    if isinstance(vals, np.ndarray) and vals.dtype == object:
        return vals
    vals = [as_fraction(v) for v in vals]
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def _canonicalize(shape, rows, cols, vals):
    nr, nc = shape
    if len(rows):
        if rows.min() < 0 or cols.min() < 0 or rows.max() >= nr or cols.max() >= nc:
            raise FormatError("index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows) > 1:
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if dup.any():
            starts = np.flatnonzero(np.concatenate([[True], ~dup]))
            summed = [sum(vals[a:b], Fraction(0)) for a, b in zip(starts, np.append(starts[1:], len(vals)))]
            rows, cols = rows[starts], cols[starts]
            vals = _object_array(summed)
    nz = np.fromiter((v != 0 for v in vals), dtype=bool, count=len(vals))
    if not nz.all():
        rows, cols, vals = rows[nz], cols[nz], vals[nz]
    return rows, cols, vals


def _integer_form(m: SparseMatrix):
    """(integer values, common denominator) or None if they do not fit int64."""
    den = m.common_denominator()
    if den > 2**40:
        return None
    ints = [v.numerator * (den // v.denominator) for v in m.vals]
    if ints and max(abs(x) for x in ints) > 2**40:
        return None
    return np.array(ints, dtype=np.int64), den


def _matmul_scaled(a: SparseMatrix, b: SparseMatrix):
    if a.nnz == 0 or b.nnz == 0:
        return SparseMatrix.zeros((a.nrows, b.ncols))
    fa, fb = _integer_form(a), _integer_form(b)
    if fa is None or fb is None:
        return None
    ia, da = fa
    ib, db = fb
    abs_a = sp.csr_matrix((np.abs(ia).astype(np.float64), (a.rows, a.cols)), shape=a.shape)
    abs_b = sp.csr_matrix((np.abs(ib).astype(np.float64), (b.rows, b.cols)), shape=b.shape)
    bound = (abs_a @ abs_b).max() if abs_a.nnz and abs_b.nnz else 0.0
    if bound >= _INT64_SAFE:
        return None
    sa = sp.csr_matrix((ia, (a.rows, a.cols)), shape=a.shape)
    sb = sp.csr_matrix((ib, (b.rows, b.cols)), shape=b.shape)
    prod = (sa @ sb).tocoo()
    keep = prod.data != 0
    rows = prod.row[keep].astype(np.int64)
    cols = prod.col[keep].astype(np.int64)
    data = prod.data[keep].astype(np.int64)
    den = da * db
    g = np.gcd(np.abs(data), den)
    nums, dens = data // g, den // g
    cache: dict[tuple[int, int], Fraction] = {}
    vals = np.empty(len(data), dtype=object)
    for k, key in enumerate(zip(nums.tolist(), dens.tolist())):
        f = cache.get(key)
        if f is None:
            f = cache[key] = Fraction(*key)
        vals[k] = f
    order = np.lexsort((cols, rows))
    return SparseMatrix((a.nrows, b.ncols), rows[order], cols[order], vals[order], _canonical=True)


def _matmul_dict(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    brows = [b.row(i) for i in range(b.nrows)]
    acc: dict[tuple[int, int], Fraction] = {}
    for r, c, v in a.entries():
        bc, bv = brows[c]
        for cc, w in zip(bc.tolist(), bv):
            key = (r, cc)
            acc[key] = acc.get(key, 0) + v * w
    return SparseMatrix._from_dict((a.nrows, b.ncols), acc)


def dense_to_fraction_matrix(rows) -> list[list[Fraction]]:
    return [[as_fraction(x) for x in r] for r in rows]
