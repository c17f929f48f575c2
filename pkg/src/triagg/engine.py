"""Recursive execution of bilinear algorithms over several scalar domains.

Two independent code paths are provided:

* ``plain``: block recursion on matrices using the effective U, V, W;
* ``decomposed``: transform each operand once with ``phi`` along every
  recursion axis, run the recursive bilinear part with the working
  matrices, then apply ``phi_C^T`` along every axis of the result.

Both return ``A @ B`` and agree exactly on the exact domains.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BilinearAlgorithm, matricize, vectorize
from .errors import DimensionError
from .modp import MERSENNE61, PrimeField
from .sparse import SparseMatrix, as_fraction

CHUNK_ELEMENTS = int(os.environ.get("TRIAGG_CHUNK", 1 << 22))


# ---------------------------------------------------------------------------
# Scalar domains
# ---------------------------------------------------------------------------


class RationalDomain:
    name = "rational"

    def prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=object)
        out = np.empty(X.shape, dtype=object)
        out.reshape(-1)[:] = [as_fraction(v) for v in X.reshape(-1)]
        return out

    def random(self, rng, shape, low=-9, high=9):
        vals = rng.integers(low, high + 1, size=shape)
        den = rng.integers(1, 4, size=shape)
        out = np.empty(shape, dtype=object)
        out.reshape(-1)[:] = [Fraction(int(a), int(b)) for a, b in zip(vals.reshape(-1), den.reshape(-1))]
        return out

    def apply(self, S: SparseMatrix, X: np.ndarray) -> np.ndarray:
        out = np.empty((S.nrows, X.shape[1]), dtype=object)
        out[:] = Fraction(0)
        if S.nnz:
            np.add.at(out, S.rows, S.vals[:, None] * X[S.cols])
        return out

    def mul(self, x, y):
        return x * y

    def naive(self, A, B):
        return np.dot(A, B)

    def equal(self, X, Y) -> bool:
        return X.shape == Y.shape and bool(np.all(X == Y))


class PrimeDomain:
    name = "prime"

    def __init__(self, p: int = MERSENNE61):
        self.field = PrimeField(p)

    def prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=object)
        return self.field.from_fractions(X) if X.size else X.astype(self.field.dtype)

    def random(self, rng, shape):
        return self.field.random(rng, shape)

    def apply(self, S: SparseMatrix, X: np.ndarray) -> np.ndarray:
        return self.field.sparse_matmul(S, X)

    def mul(self, x, y):
        return self.field.mul(x, y)

    def naive(self, A, B):
        return self.field.matmul(A, B)

    def equal(self, X, Y) -> bool:
        return X.shape == Y.shape and bool(np.all(X == Y))


class FloatDomain:
    name = "float"

    def __init__(self, rtol: float = 1e-6):
        self.rtol = rtol

    def prepare(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64)

    def random(self, rng, shape):
        return rng.standard_normal(shape)

    def apply(self, S: SparseMatrix, X: np.ndarray) -> np.ndarray:
        return np.asarray(S.to_scipy() @ X)

    def mul(self, x, y):
        return x * y

    def naive(self, A, B):
        return A @ B

    def equal(self, X, Y) -> bool:
        scale = max(np.abs(Y).max(), 1.0)
        return X.shape == Y.shape and float(np.abs(X - Y).max()) <= self.rtol * scale


def make_domain(domain="rational", prime: int = MERSENNE61):
    if not isinstance(domain, str):
        return domain
    if domain == "rational":
        return RationalDomain()
    if domain == "prime":
        return PrimeDomain(prime)
    if domain == "float":
        return FloatDomain()
    raise ValueError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Operation counting
# ---------------------------------------------------------------------------


@dataclass
class OperationCount:
    multiplications: int = 0
    linear_ops: int = 0

    def __iter__(self):
        return iter((self.multiplications, self.linear_ops))


def _q_rows(S: SparseMatrix) -> int:
    return S.nnz + S.nns - S.nrows


class _Counted:
    """Sparse operators with their per-application linear-operation cost."""

    def __init__(self, S: SparseMatrix, q: int):
        self.S, self.q = S, q


def _encoders(alg: BilinearAlgorithm, decomposed: bool):
    if decomposed:
        U, V, W = alg.working
    else:
        U, V, W = alg.U, alg.V, alg.W
    WT = W.transpose()
    q_w = W.nnz + W.nns - W.ncols
    return _Counted(U, _q_rows(U)), _Counted(V, _q_rows(V)), _Counted(WT, q_w)


def count_operations(alg: BilinearAlgorithm, levels: int, path: str = "plain") -> OperationCount:
    """Multiplications and additions/scalings of :func:`recursive_multiply`
    (with ``base_threshold = 0``), computed from the recursion structure."""
    if levels < 1:
        raise DimensionError("levels must be >= 1")
    m, n, p = alg.dims
    dec = path == "decomposed"
    eu, ev, ew = _encoders(alg, dec)
    t = alg.t
    if dec:
        sa, sb, sc = (X.ncols for X in alg.working)
    else:
        sa, sb, sc = m * n, n * p, p * m
    mults, lin = 1, 0
    for lv in range(1, levels + 1):
        lin = t * lin + eu.q * sa ** (lv - 1) + ev.q * sb ** (lv - 1) + ew.q * sc ** (lv - 1)
        mults *= t
    if dec and alg.transforms is not None:
        tA, tB, tC = alg.transforms
        for T, s_out, s_in in ((tA, sa, m * n), (tB, sb, n * p)):
            q = _q_rows(T)
            lin += q * sum(s_out**k * s_in ** (levels - 1 - k) for k in range(levels))
        q = tC.nnz + tC.nns - tC.ncols
        lin += q * sum(sc**k * (p * m) ** (levels - 1 - k) for k in range(levels))
    return OperationCount(mults, lin)


# ---------------------------------------------------------------------------
# Plain path
# ---------------------------------------------------------------------------


def _check_shapes(alg, A, B, levels):
    if levels < 1:
        raise DimensionError("levels must be >= 1")
    m, n, p = alg.dims
    if A.shape != (m**levels, n**levels) or B.shape != (n**levels, p**levels):
        raise DimensionError(
            f"operands {A.shape} x {B.shape} do not match <{m},{n},{p}> at {levels} levels"
        )


def _naive_batch(dom, Ab, Bb):
    if Ab.shape[1:] == (1, 1) and Bb.shape[1] == 1:
        return dom.mul(Ab, Bb)
    return np.stack([dom.naive(a, b) for a, b in zip(Ab, Bb)])


def _plain(enc, dims, t, Ab, Bb, levels, thr, dom, counter):
    batch, M, N = Ab.shape
    P = Bb.shape[2]
    if levels <= thr or levels == 0:
        if counter is not None:
            counter.multiplications += batch * M * N * P
            counter.linear_ops += batch * M * (N - 1) * P
        return _naive_batch(dom, Ab, Bb)
    m, n, p = dims
    Ms, Ns, Ps = M // m, N // n, P // p
    per_item = t * max(Ms * Ns, Ns * Ps, Ms * Ps)
    chunk = max(1, CHUNK_ELEMENTS // max(per_item, 1))
    if batch > chunk:
        parts = [
            _plain(enc, dims, t, Ab[s : s + chunk], Bb[s : s + chunk], levels, thr, dom, counter)
            for s in range(0, batch, chunk)
        ]
        return np.concatenate(parts)
    eu, ev, ew = enc
    xa = Ab.reshape(batch, m, Ms, n, Ns).transpose(1, 3, 0, 2, 4).reshape(m * n, -1)
    xb = Bb.reshape(batch, n, Ns, p, Ps).transpose(1, 3, 0, 2, 4).reshape(n * p, -1)
    ya = dom.apply(eu.S, xa).reshape(t * batch, Ms, Ns)
    yb = dom.apply(ev.S, xb).reshape(t * batch, Ns, Ps)
    if counter is not None:
        counter.linear_ops += eu.q * batch * Ms * Ns + ev.q * batch * Ns * Ps + ew.q * batch * Ms * Ps
    prods = _plain(enc, dims, t, ya, yb, levels - 1, thr, dom, counter)
    z = dom.apply(ew.S, prods.reshape(t, -1))
    # row m*k + i of the decoder holds block (i, k) of the product
    z = z.reshape(p, m, batch, Ms, Ps).transpose(2, 1, 3, 0, 4)
    return z.reshape(batch, M, P)


# ---------------------------------------------------------------------------
# Decomposed path
# ---------------------------------------------------------------------------


def _along_axes(dom, S: SparseMatrix, x: np.ndarray, first_axis: int, q: int, counter):
    """Apply ``S`` along every axis from ``first_axis`` on, innermost first."""
    for ax in range(x.ndim - 1, first_axis - 1, -1):
        y = np.moveaxis(x, ax, 0)
        rest = y.shape[1:]
        if counter is not None:
            counter.linear_ops += q * int(np.prod(rest, dtype=object))
        y = dom.apply(S, y.reshape(y.shape[0], -1)).reshape((S.nrows,) + rest)
        x = np.moveaxis(y, 0, ax)
    return x


def _bilinear(enc, t, xa, xb, dom, counter):
    """Recursive bilinear part; ``xa`` has shape ``(batch, s, s, ...)``."""
    batch = xa.shape[0]
    if xa.ndim == 1:
        if counter is not None:
            counter.multiplications += batch
        return dom.mul(xa, xb)
    eu, ev, ew = enc
    rest_a, rest_b = xa.shape[2:], xb.shape[2:]
    size = int(np.prod(rest_a, dtype=np.int64)) if rest_a else 1
    chunk = max(1, CHUNK_ELEMENTS // max(t * size, 1))
    if batch > chunk:
        parts = [_bilinear(enc, t, xa[s : s + chunk], xb[s : s + chunk], dom, counter) for s in range(0, batch, chunk)]
        return np.concatenate(parts)
    ya = dom.apply(eu.S, np.moveaxis(xa, 1, 0).reshape(xa.shape[1], -1))
    yb = dom.apply(ev.S, np.moveaxis(xb, 1, 0).reshape(xb.shape[1], -1))
    rest_sz_b = int(np.prod(rest_b, dtype=np.int64)) if rest_b else 1
    if counter is not None:
        counter.linear_ops += (eu.q * size + ev.q * rest_sz_b) * batch
    ya = ya.reshape((t * batch,) + rest_a)
    yb = yb.reshape((t * batch,) + rest_b)
    prods = _bilinear(enc, t, ya, yb, dom, counter)
    rest_c = prods.shape[1:]
    z = dom.apply(ew.S, prods.reshape(t, -1))
    if counter is not None:
        counter.linear_ops += ew.q * batch * (int(np.prod(rest_c, dtype=np.int64)) if rest_c else 1)
    z = z.reshape((ew.S.nrows, batch) + rest_c)
    return np.moveaxis(z, 0, 1)


def _decomposed(alg, A, B, levels, dom, counter):
    m, n, p = alg.dims
    enc = _encoders(alg, True)
    transforms = alg.transforms or tuple(SparseMatrix.identity(X.ncols) for X in alg.working)
    tA, tB, tC = transforms
    a = vectorize(A, (m, n)).reshape((1,) + (m * n,) * levels)
    b = vectorize(B, (n, p)).reshape((1,) + (n * p,) * levels)
    a = _along_axes(dom, tA, a, 1, _q_rows(tA), counter)
    b = _along_axes(dom, tB, b, 1, _q_rows(tB), counter)
    c = _bilinear(enc, alg.t, a, b, dom, counter)
    tCT = tC.transpose()
    c = _along_axes(dom, tCT, c, 1, tC.nnz + tC.nns - tC.ncols, counter)
    Z = matricize(c.reshape(-1), (p, m), levels)
    return Z.T.copy()


def recursive_multiply(
    alg: BilinearAlgorithm,
    A,
    B,
    levels: int = 1,
    base_threshold: int = 0,
    domain="rational",
    path: str = "plain",
    counter: OperationCount | None = None,
) -> np.ndarray:
    """Compute ``A @ B`` by ``levels`` recursive applications of ``alg``.

    The last ``base_threshold`` levels use the naive product (plain path
    only).  ``domain`` is ``"rational"``, ``"prime"``, ``"float"`` or a
    domain object.
    """
    dom = make_domain(domain)
    A = dom.prepare(A)
    B = dom.prepare(B)
    _check_shapes(alg, A, B, levels)
    if path == "plain":
        enc = _encoders(alg, False)
        out = _plain(enc, alg.dims, alg.t, A[None], B[None], levels, base_threshold, dom, counter)
        return out[0]
    if path == "decomposed":
        if base_threshold:
            raise ValueError("base_threshold is only supported on the plain path")
        return _decomposed(alg, A, B, levels, dom, counter)
    raise ValueError(f"unknown path {path!r}")
