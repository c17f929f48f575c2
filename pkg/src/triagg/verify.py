"""Exact and randomized correctness checks for bilinear algorithms."""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .core import BilinearAlgorithm, MMTensor
from .errors import BudgetExceeded
from .modp import MERSENNE61, PrimeField
from .sparse import SparseMatrix

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
DEFAULT_TRIALS = 20
DEFAULT_PRIME = MERSENNE61
_SAFE = 2**62


def mm_tensor(m: int, n: int, p: int) -> MMTensor:
    return MMTensor.build(m, n, p)


def estimate_terms(alg: BilinearAlgorithm) -> int:
    """Number of scalar triple products in the full expansion."""
    nu, nv, nw = (np.diff(X.indptr) for X in (alg.U, alg.V, alg.W))
    return int((nu.astype(object) * nv * nw).sum()) if alg.t else 0


def _khatri_rao(V: SparseMatrix, W: SparseMatrix, vals_v, vals_w):
    """Row-wise Kronecker product of V and W as a CSR matrix."""
    nw = np.diff(W.indptr)
    reps = nw[V.rows]
    total = int(reps.sum())
    ev = np.repeat(np.arange(V.nnz), reps)
    starts = np.repeat(W.indptr[V.rows], reps)
    offs = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
    ew = starts + offs
    rows = V.rows[ev]
    cols = V.cols[ev] * W.ncols + W.cols[ew]
    data = vals_v[ev] * vals_w[ew]
    return sp.csr_matrix((data, (rows, cols)), shape=(V.nrows, V.ncols * W.ncols))


def _scaled_ints(M: SparseMatrix):
    den = M.common_denominator()
    ints = [v.numerator * (den // v.denominator) for v in M.vals]
    return ints, den


def expand_tensor(alg: BilinearAlgorithm, budget: int = DEFAULT_BUDGET) -> dict:
    """Exact sum of ``u_r (x) v_r (x) w_r``, as ``{(a, b, c): Fraction}``.

    Raises ``BudgetExceeded`` when the expansion has more than ``budget``
    scalar terms.
    """
    terms = estimate_terms(alg)
    if terms > budget:
        raise BudgetExceeded(
            f"exact expansion needs {terms} terms (budget {budget}); use verify_random instead"
        )
    U, V, W = alg.U, alg.V, alg.W
    iu, du = _scaled_ints(U)
    iv, dv = _scaled_ints(V)
    iw, dw = _scaled_ints(W)
    bound = 0
    if alg.t:
        l1 = []
        for X, ints in ((U, iu), (V, iv), (W, iw)):
            absrow = np.zeros(X.nrows, dtype=object)
            np.add.at(absrow, X.rows, np.array([abs(x) for x in ints], dtype=object))
            l1.append(absrow)
        bound = sum(l1[0] * l1[1] * l1[2])
    den = du * dv * dw
    ncw = W.ncols
    out: dict = {}
    if bound < _SAFE:
        kr = _khatri_rao(V, W, np.array(iv, dtype=np.int64), np.array(iw, dtype=np.int64))
        ut = sp.csr_matrix((np.array(iu, dtype=np.int64), (U.cols, U.rows)), shape=(U.ncols, U.nrows))
        T = (ut @ kr).tocoo()
        for a, bc, x in zip(T.row.tolist(), T.col.tolist(), T.data.tolist()):
            if x:
                out[(a, bc // ncw, bc % ncw)] = Fraction(x, den)
        return out
    acc: dict = {}
    rows = [(U.row_dict(r), V.row_dict(r), W.row_dict(r)) for r in range(alg.t)]
    for ur, vr, wr in rows:
        for a, x in ur.items():
            for b, y in vr.items():
                xy = x * y
                for c, z in wr.items():
                    acc[(a, b, c)] = acc.get((a, b, c), 0) + xy * z
    return {k: v for k, v in acc.items() if v != 0}


def verify_exact(alg: BilinearAlgorithm, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff the expanded tensor equals the matrix multiplication tensor."""
    return expand_tensor(alg, budget) == mm_tensor(*alg.dims).as_dict()


def _dense_rows(M: SparseMatrix):
    out = np.zeros(M.shape, dtype=object)
    out[:] = Fraction(0)
    for r, c, v in M.entries():
        out[r, c] = v
    return out


def brent_violations(alg: BilinearAlgorithm, budget: int = DEFAULT_BUDGET, limit: int = 10) -> list:
    """Sextuples ``((i, j), (j2, k), (k2, i2))`` whose Brent equation fails.

    Every combination of entries of A, B and C is checked against the
    product of Kronecker deltas.
    """
    m, n, p = alg.dims
    cost = (m * n * p) ** 2 * alg.t
    if cost > budget:
        raise BudgetExceeded(f"Brent check needs {cost} terms (budget {budget})")
    U, V, W = (_dense_rows(X) for X in (alg.U, alg.V, alg.W))
    bad = []
    for (i, j), (j2, k) in itertools.product(
        itertools.product(range(m), range(n)), itertools.product(range(n), range(p))
    ):
        uv = U[:, n * i + j] * V[:, p * j2 + k]
        vals = uv @ W if alg.t else np.zeros(p * m, dtype=object)
        for k2, i2 in itertools.product(range(p), range(m)):
            want = 1 if (j == j2 and k == k2 and i == i2) else 0
            if vals[m * k2 + i2] != want:
                bad.append(((i, j), (j2, k), (k2, i2)))
                if len(bad) >= limit:
                    return bad
    return bad


def verify_brent(alg: BilinearAlgorithm, budget: int = DEFAULT_BUDGET) -> bool:
    bad = brent_violations(alg, budget, limit=1)
    if bad:
        log.info("Brent equation violated at %s", bad[0])
    return not bad


# ---------------------------------------------------------------------------
# Randomized verification
# ---------------------------------------------------------------------------


def trace_product_mod(field: PrimeField, A, B, C) -> np.ndarray:
    """tr(A_t B_t C_t) for stacked residue matrices (leading axis = trial)."""
    out = []
    for a, b, c in zip(A, B, C):
        ab = field.matmul(a, b)
        out.append(field.sum(field.mul(ab, c.T)))
    return np.array(out, dtype=object)


def trilinear_mod(alg, field: PrimeField, A, B, C) -> np.ndarray:
    """``<U vec A, V vec B, W vec C>`` mod p for each stacked trial."""
    if hasattr(alg, "trilinear_mod"):
        return alg.trilinear_mod(field, A, B, C)
    trials = A.shape[0]
    vecs = [X.reshape(trials, -1).T for X in (A, B, C)]
    transforms = alg.transforms or (None, None, None)
    enc = []
    for X, T, v in zip(alg.working, transforms, vecs):
        if T is not None:
            v = field.sparse_matmul(T, v)
        enc.append(field.sparse_matmul(X, v))
    prod = field.mul(field.mul(enc[0], enc[1]), enc[2])
    return np.array([field.sum(prod[:, k]) for k in range(trials)], dtype=object)


def _random_operands(alg, field: PrimeField, trials: int, seed: int):
    m, n, p = alg.dims
    rng = np.random.default_rng(seed)
    return (
        field.random(rng, (trials, m, n)),
        field.random(rng, (trials, n, p)),
        field.random(rng, (trials, p, m)),
    )


def verify_random(
    alg, trials: int = DEFAULT_TRIALS, prime: int = DEFAULT_PRIME, seed: int = 0, batch: int = 5
) -> bool:
    """Schwartz-Zippel test of the trilinear identity over GF(prime).

    Raises ``PrimeError`` if a coefficient denominator is divisible by the
    prime.  A wrong algorithm passes one trial with probability at most
    ``3 / prime``.
    """
    field = PrimeField(prime)
    A, B, C = _random_operands(alg, field, trials, seed)
    for lo in range(0, trials, batch):
        sl = slice(lo, lo + batch)
        got = trilinear_mod(alg, field, A[sl], B[sl], C[sl])
        want = trace_product_mod(field, A[sl], B[sl], C[sl])
        if any(int(x) != int(y) for x, y in zip(got, want)):
            log.info("random trial in batch starting at %d failed", lo)
            return False
    return True


def verify_multiply(
    alg: BilinearAlgorithm, samples: int = 2, levels: int = 1, domain: str = "rational", seed: int = 0
) -> bool:
    """Run the recursive engine on random operands and compare with the
    naive product exactly."""
    from . import engine

    rng = np.random.default_rng(seed)
    m, n, p = alg.dims
    dom = engine.make_domain(domain)
    for _ in range(samples):
        A = dom.random(rng, (m**levels, n**levels))
        B = dom.random(rng, (n**levels, p**levels))
        got = engine.recursive_multiply(alg, A, B, levels, domain=dom)
        if not dom.equal(got, dom.naive(A, B)):
            return False
    return True


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    mode: str
    result: bool
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    seconds: float | None = None
    dims: tuple | None = None
    rank: int | None = None

    def metadata(self) -> dict:
        """The part stored with an algorithm (no timing)."""
        meta = {"mode": self.mode, "parameters": dict(self.parameters)}
        if self.seed is not None:
            meta["seed"] = self.seed
        return meta

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims) if self.dims else None
        if not include_timing:
            d.pop("seconds")
        return d


def certify(alg, mode: str = "random", *, trials=DEFAULT_TRIALS, prime=DEFAULT_PRIME, seed=0,
            budget=DEFAULT_BUDGET, samples=2, levels=1, domain="rational"):
    """Run one verification mode and return ``(algorithm, report)``.

    On success the returned algorithm carries the report's metadata as its
    verified flag; on failure the input is returned unchanged.
    """
    start = time.perf_counter()
    if mode == "exact":
        params = {"budget": budget}
        ok = verify_exact(alg, budget)
        seed_used = None
    elif mode == "brent":
        params = {"budget": budget}
        ok = verify_brent(alg, budget)
        seed_used = None
    elif mode == "random":
        params = {"trials": trials, "prime": prime}
        ok = verify_random(alg, trials, prime, seed)
        seed_used = seed
    elif mode == "multiply":
        params = {"samples": samples, "levels": levels, "domain": domain}
        ok = verify_multiply(alg, samples, levels, domain, seed)
        seed_used = seed
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    report = VerificationReport(
        mode, bool(ok), params, seed_used, time.perf_counter() - start, tuple(alg.dims), alg.t
    )
    if ok and hasattr(alg, "with_verified"):
        alg = alg.with_verified(report.metadata())
    return alg, report
