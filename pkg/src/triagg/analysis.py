"""Closed-form counts, exponents and additive-complexity analysis."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

from .errors import DegenerateError, DimensionError
from .generator import DecomposedAlgorithm, check_base
from .sparse import SparseMatrix

SEARCH_LIMIT = 243


def _integral(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise DegenerateError(f"{what} is not an integer ({x}); base size is invalid")
    return x.numerator


def t_pan(n0: int) -> int:
    """Rank of the un-merged aggregation algorithm."""
    check_base(n0)
    n = Fraction(n0)
    return _integral(n**3 / 3 + Fraction(15, 4) * n**2 + Fraction(32, 3) * n + 9, "t_pan")


def t_new(n0: int) -> int:
    """Rank after merging the diagonal kin pairs: ``t_pan(n0) - n0/2 - 1``."""
    check_base(n0)
    n = Fraction(n0)
    return _integral(n**3 / 3 + Fraction(15, 4) * n**2 + Fraction(61, 6) * n + 8, "t_new")


def cell_count(m0: int) -> int:
    """Number of off-diagonal cancellation cells, ``m0^2/4 + m0/2``."""
    check_base(m0)
    d = m0 // 2 + 1
    return d * d - d


def t_new25b(m0: int) -> int:
    """Rank of two composed levels after replacing every pair of cells."""
    return t_new(m0) ** 2 - cell_count(m0) ** 2


def exponent_exact(n0: int, t: int, digits: int = 40) -> Decimal:
    """``log t / log n0`` to ``digits`` significant digits."""
    if n0 < 2 or t < 1:
        raise DimensionError("need n0 >= 2 and t >= 1")
    with localcontext() as ctx:
        ctx.prec = digits + 10
        val = Decimal(t).ln() / Decimal(n0).ln()
        ctx.prec = digits
        return +val


def round6(x: Decimal) -> float:
    return float(Decimal(x).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def exponent(n0: int, t: int) -> float:
    """Exponent ``log_{n0} t`` as a float (about 16 significant digits)."""
    return float(exponent_exact(n0, t))


def family_rank(family: str, n0: int) -> tuple[int, int]:
    """``(base size, rank)`` for a family at parameter ``n0`` (``m0`` for new25b)."""
    if family == "new25":
        return n0, t_new(n0)
    if family == "pan":
        return n0, t_pan(n0)
    if family == "new25b":
        return n0 * n0, t_new25b(n0)
    raise ValueError(f"unknown family {family!r}")


@dataclass
class BaseSearch:
    family: str
    n0: int
    exponent: float
    parameter: int
    candidates: int
    tail_bound: float
    tail_ok: bool


def search_base(family: str = "new25", limit: int = SEARCH_LIMIT) -> BaseSearch:
    """Exhaustive search over even parameters below ``limit`` (16 excluded).

    Beyond ``limit`` the rank exceeds ``n0^3/3`` (``m0^6/9`` for new25b),
    so the exponent exceeds ``3 - log_limit 3``; ``tail_ok`` records that
    this bound is above the minimum found.
    """
    best = None
    count = 0
    for m in range(2, limit, 2):
        if m == 16:
            continue
        count += 1
        base, t = family_rank(family, m)
        e = exponent_exact(base, t)
        if best is None or e < best[0]:
            best = (e, base, m)
    e, base, m = best
    tail = 3 - exponent_exact(limit, 3)
    return BaseSearch(family, base, round6(e), m, count, round6(tail), tail > e)


def optimal_base(family: str = "new25") -> tuple[int, float]:
    res = search_base(family)
    return res.n0, res.exponent


# ---------------------------------------------------------------------------
# Sparsity statistics and additive complexity
# ---------------------------------------------------------------------------


@dataclass
class MatrixStats:
    nnz: int
    nns: int
    nrows: int
    ncols: int

    @classmethod
    def of(cls, M: SparseMatrix) -> "MatrixStats":
        return cls(M.nnz, M.nns, M.nrows, M.ncols)


@dataclass
class AlgorithmStats:
    t: int
    U: MatrixStats
    V: MatrixStats
    W: MatrixStats
    q_U: int
    q_V: int
    q_W: int
    s0: int | None = None
    phi: MatrixStats | None = None
    q_phi: int | None = None
    q_phiT: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def q_encode(s: MatrixStats) -> int:
    return s.nnz + s.nns - s.nrows


def q_decode(s: MatrixStats) -> int:
    return s.nnz + s.nns - s.ncols


def stats(obj) -> AlgorithmStats:
    """Operation-count statistics of an algorithm or a decomposition.

    For a :class:`DecomposedAlgorithm` the statistics refer to ``U_phi``,
    ``V_phi``, ``W_phi`` and also cover ``phi``.
    """
    if isinstance(obj, DecomposedAlgorithm):
        mats = (obj.U_phi, obj.V_phi, obj.W_phi)
    else:
        mats = (obj.U, obj.V, obj.W)
    su, sv, sw = (MatrixStats.of(M) for M in mats)
    out = AlgorithmStats(mats[0].nrows, su, sv, sw, q_encode(su), q_encode(sv), q_decode(sw))
    if isinstance(obj, DecomposedAlgorithm):
        sp_ = MatrixStats.of(obj.phi)
        out.s0 = obj.s0
        out.phi = sp_
        out.q_phi = q_encode(sp_)
        out.q_phiT = sp_.nnz + sp_.nns - sp_.ncols
    return out


def leading_coefficient_from_counts(q_U: int, q_V: int, q_W: int, t0: int, s0: int) -> Fraction:
    if t0 == s0:
        raise DimensionError("t0 equals s0; the leading coefficient is undefined")
    return Fraction(q_U + q_V + q_W, t0 - s0) + 1


def leading_coefficient(dec: DecomposedAlgorithm) -> Fraction:
    """``(q_U + q_V + q_W) / (t0 - s0) + 1`` for the decomposition."""
    st = stats(dec)
    return leading_coefficient_from_counts(st.q_U, st.q_V, st.q_W, dec.t0, dec.s0)


@dataclass
class AdditiveComplexity:
    """``F(n) = a n^w0 + b n^{log_n0 s0} + c n^2`` evaluated exactly at ``n``."""

    coeff_main: Fraction
    coeff_transform: Fraction
    coeff_square: Fraction
    value: Fraction


def additive_complexity(dec: DecomposedAlgorithm, n: int) -> AdditiveComplexity:
    """Exact arithmetic-operation count of the decomposed recursive algorithm
    on ``n x n`` inputs (``n`` a power of the base size)."""
    n0 = dec.algorithm.dims[0]
    levels, size = 0, 1
    while size < n:
        size *= n0
        levels += 1
    if size != n or levels < 1:
        raise DimensionError(f"{n} is not a positive power of {n0}")
    st = stats(dec)
    t0, s0 = dec.t0, dec.s0
    q = st.q_U + st.q_V + st.q_W
    qt = 2 * st.q_phi + st.q_phiT
    a = Fraction(q, t0 - s0) + 1
    tr = Fraction(qt, s0 - n0 * n0)
    b = tr - Fraction(q, t0 - s0)
    c = -tr
    value = a * t0**levels + b * s0**levels + c * n * n
    return AdditiveComplexity(a, b, c, value)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def rank_table(bases=(28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 60)) -> list[dict]:
    """Ranks and exponents of both one-level families and two-level variants."""
    rows = []
    for n0 in bases:
        tp, tn = t_pan(n0), t_new(n0)
        tb = t_new25b(n0)
        rows.append(
            {
                "n0": n0,
                "t_pan": tp,
                "t_new": tn,
                "omega_pan": round6(exponent_exact(n0, tp)),
                "omega_new": round6(exponent_exact(n0, tn)),
                "n0_squared": n0 * n0,
                "t_pan_2": tp * tp,
                "t_new_2": tn * tn,
                "t_new25b": tb,
                "omega_pan_2": round6(exponent_exact(n0 * n0, tp * tp)),
                "omega_new_2": round6(exponent_exact(n0 * n0, tn * tn)),
                "omega_new25b": round6(exponent_exact(n0 * n0, tb)),
            }
        )
    return rows


def format_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in keys}
    lines = ["  ".join(k.rjust(widths[k]) for k in keys)]
    for r in rows:
        lines.append("  ".join(str(r[k]).rjust(widths[k]) for k in keys))
    return "\n".join(lines)
