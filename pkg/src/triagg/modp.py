"""Arithmetic over a prime field, vectorized with numpy.

Residues are stored as int64 arrays with values in ``[0, p)``.  For the
Mersenne prime 2^61 - 1 products are formed with 32-bit limbs in uint64 and
multiplication by a power of two is a 61-bit rotation.  Any other prime is
handled with Python integers in object arrays, which is exact but slow.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import PrimeError

MERSENNE61 = (1 << 61) - 1
_M61 = np.uint64(MERSENNE61)
_LIMB = 21
_LIMB_MASK = (1 << _LIMB) - 1


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeFieldElement:
    """A single residue; convenient for scalar work and tests."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.p = p
        self.value = value % p

    @classmethod
    def from_rational(cls, x, p: int) -> "PrimeFieldElement":
        x = Fraction(x)
        if x.denominator % p == 0:
            raise PrimeError(f"denominator of {x} is divisible by {p}")
        return cls(x.numerator * pow(x.denominator, -1, p), p)

    def _coerce(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.p != self.p:
                raise PrimeError("mixing residues of different primes")
            return other.value
        return PrimeFieldElement.from_rational(other, self.p).value

    def __add__(self, other):
        return PrimeFieldElement(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return PrimeFieldElement(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return PrimeFieldElement(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return PrimeFieldElement(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElement(-self.value, self.p)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v == 0:
            raise ZeroDivisionError("division by zero in prime field")
        return PrimeFieldElement(self.value * pow(v, -1, self.p), self.p)

    def __eq__(self, other):
        try:
            return self.value == self._coerce(other)
        except (PrimeError, TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"PrimeFieldElement({self.value}, p={self.p})"


def _mulmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64).astype(np.uint64, copy=False)
    b = np.asarray(b, dtype=np.int64).astype(np.uint64, copy=False)
    lo32 = np.uint64(0xFFFFFFFF)
    a1, a0 = a >> np.uint64(32), a & lo32
    b1, b0 = b >> np.uint64(32), b & lo32
    mid = a1 * b0 + a0 * b1
    low = a0 * b0
    r = (a1 * b1) << np.uint64(3)
    r += mid >> np.uint64(29)
    r += (mid & np.uint64((1 << 29) - 1)) << np.uint64(32)
    r += (low & _M61) + (low >> np.uint64(61))
    r = (r & _M61) + (r >> np.uint64(61))
    r = (r & _M61) + (r >> np.uint64(61))
    r[r >= _M61] -= _M61
    return r.astype(np.int64)


def _rot61(x: np.ndarray, k: int) -> np.ndarray:
    """x * 2^k mod 2^61 - 1 for x in [0, p)."""
    k %= 61
    if k == 0:
        return x
    u = x.astype(np.uint64)
    r = ((u << np.uint64(k)) & _M61) | (u >> np.uint64(61 - k))
    r[r == _M61] = 0
    return r.astype(np.int64)


class PrimeField:
    """Vectorized arithmetic modulo ``p``."""

    def __init__(self, p: int = MERSENNE61):
        p = int(p)
        if not is_probable_prime(p):
            raise PrimeError(f"{p} is not prime")
        self.p = p
        self.fast = p == MERSENNE61
        self.dtype = np.int64 if self.fast else object

    def __repr__(self):
        return f"PrimeField({self.p})"

    # -- element-wise ---------------------------------------------------
    def asarray(self, x) -> np.ndarray:
        if self.fast:
            return np.mod(np.asarray(x, dtype=np.int64), self.p)
        arr = np.array(x, dtype=object)
        return np.vectorize(lambda v: int(v) % self.p, otypes=[object])(arr) if arr.size else arr

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.fast:
            return rng.integers(0, self.p, size=shape, dtype=np.int64)
        size = int(np.prod(shape))
        words = (self.p.bit_length() + 63) // 64 + 1
        raw = rng.integers(0, 1 << 62, size=(size, words), dtype=np.int64)
        vals = [sum(int(w) << (62 * k) for k, w in enumerate(row)) % self.p for row in raw]
        out = np.empty(size, dtype=object)
        out[:] = vals
        return out.reshape(shape)

    def add(self, a, b):
        if self.fast:
            s = a + b
            return np.where(s >= self.p, s - self.p, s)
        return (a + b) % self.p

    def sub(self, a, b):
        if self.fast:
            s = a - b
            return np.where(s < 0, s + self.p, s)
        return (a - b) % self.p

    def neg(self, a):
        return self.sub(np.zeros_like(a), a)

    def mul(self, a, b):
        if self.fast:
            a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            return _mulmod61(a.reshape(-1), b.reshape(-1)).reshape(a.shape)
        return (a * b) % self.p

    def scale(self, a, c: int):
        return self.mul(a, np.int64(c % self.p) if self.fast else c % self.p)

    def sum(self, a, axis=None):
        """Sum of residues reduced mod p (exact)."""
        if self.fast:
            a = np.asarray(a, dtype=np.int64)
            hi = (a >> 32).sum(axis=axis, dtype=np.int64)
            lo = (a & 0xFFFFFFFF).sum(axis=axis, dtype=np.int64)
            if np.ndim(hi) == 0:
                return (int(hi) * (1 << 32) + int(lo)) % self.p
            return np.mod(np.mod(hi, self.p).astype(object) * (1 << 32) + lo.astype(object), self.p).astype(np.int64)
        s = np.sum(a, axis=axis)
        return s % self.p if np.ndim(s) == 0 else np.vectorize(lambda v: v % self.p, otypes=[object])(s)

    def from_rational(self, x) -> int:
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise PrimeError(f"denominator of {x} is divisible by {self.p}; choose another prime")
        return x.numerator * pow(x.denominator, -1, self.p) % self.p

    def from_fractions(self, arr) -> np.ndarray:
        arr = np.asarray(arr, dtype=object)
        cache = {}
        out = np.empty(arr.shape, dtype=self.dtype)
        flat = out.reshape(-1)
        for k, v in enumerate(arr.reshape(-1)):
            r = cache.get(v)
            if r is None:
                r = cache[v] = self.from_rational(v)
            flat[k] = r
        return out

    # -- products -----------------------------------------------------------
    def _limbs(self, x: np.ndarray):
        return [(x >> (_LIMB * k)) & _LIMB_MASK for k in range(3)]

    def _combine(self, parts: dict[int, np.ndarray]) -> np.ndarray:
        acc = None
        for shift, val in parts.items():
            term = _rot61(np.mod(val, self.p), shift)
            acc = term if acc is None else self.add(acc, term)
        return acc

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Dense residue matrix product."""
        if not self.fast:
            return np.vectorize(lambda v: v % self.p, otypes=[object])(np.dot(a, b))
        inner = a.shape[-1]
        if inner > (1 << 20):
            raise ValueError("inner dimension too large for limb accumulation")
        la, lb = self._limbs(a), self._limbs(b)
        parts: dict[int, np.ndarray] = {}
        for i, x in enumerate(la):
            for j, y in enumerate(lb):
                prod = x @ y
                k = _LIMB * (i + j)
                parts[k] = parts[k] + np.mod(prod, self.p) if k in parts else np.mod(prod, self.p)
        return self._combine(parts)

    def sparse_matmul(self, s, x: np.ndarray) -> np.ndarray:
        """Product of an exact ``SparseMatrix`` (projected mod p) with residues ``x``.

        ``x`` is a 1-D or 2-D residue array with ``s.ncols`` rows.
        """
        vec = x.ndim == 1
        if vec:
            x = x[:, None]
        if not self.fast:
            out = np.zeros((s.nrows, x.shape[1]), dtype=object)
            res = s.residues(self.p)
            for r, c, v in zip(s.rows.tolist(), s.cols.tolist(), res.tolist()):
                out[r] = (out[r] + v * x[c]) % self.p
            return out[:, 0] if vec else out
        res = s.residues(self.p)
        signed = np.where(res > self.p // 2, res - self.p, res)
        sign = np.sign(signed)
        mag = np.abs(signed)
        xl = self._limbs(x)
        parts: dict[int, np.ndarray] = {}
        for i in range(3):
            limb = (mag >> (_LIMB * i)) & _LIMB_MASK
            keep = limb != 0
            if not keep.any():
                continue
            m = sp.csr_matrix(
                ((sign * limb)[keep], (s.rows[keep], s.cols[keep])), shape=s.shape, dtype=np.int64
            )
            for j, y in enumerate(xl):
                prod = np.mod(np.asarray(m @ y), self.p)
                k = _LIMB * (i + j)
                parts[k] = parts[k] + prod if k in parts else prod
        if not parts:
            out = np.zeros((s.nrows, x.shape[1]), dtype=np.int64)
        else:
            out = self._combine(parts)
        return out[:, 0] if vec else out

    def dense_sparse_t(self, y: np.ndarray, s) -> np.ndarray:
        """``y @ s.T`` for residue matrix ``y`` and exact ``SparseMatrix`` ``s``."""
        return self.sparse_matmul(s, y.T).T
