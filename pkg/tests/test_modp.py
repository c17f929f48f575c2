from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagg.errors import PrimeError
from triagg.modp import MERSENNE61, PrimeField, PrimeFieldElement, is_probable_prime
from triagg.sparse import SparseMatrix

P = MERSENNE61
residues = st.integers(0, P - 1)


def test_known_primes():
    assert is_probable_prime(MERSENNE61)
    assert is_probable_prime(1000003)
    assert not is_probable_prime(2**61 + 1)
    assert not is_probable_prime(1)
    with pytest.raises(PrimeError):
        PrimeField(100)


@given(st.lists(st.tuples(residues, residues), min_size=1, max_size=30))
def test_fast_mul_add_sub_match_python_ints(pairs):
    F = PrimeField()
    a = np.array([x for x, _ in pairs], dtype=np.int64)
    b = np.array([y for _, y in pairs], dtype=np.int64)
    assert F.mul(a, b).tolist() == [x * y % P for x, y in pairs]
    assert F.add(a, b).tolist() == [(x + y) % P for x, y in pairs]
    assert F.sub(a, b).tolist() == [(x - y) % P for x, y in pairs]
    assert F.sum(a) == sum(x for x, _ in pairs) % P


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32))
def test_dense_matmul_matches_python(r, k, c, seed):
    F = PrimeField()
    rng = np.random.default_rng(seed)
    a, b = F.random(rng, (r, k)), F.random(rng, (k, c))
    want = [[sum(int(a[i, t]) * int(b[t, j]) for t in range(k)) % P for j in range(c)] for i in range(r)]
    assert F.matmul(a, b).tolist() == want


@settings(max_examples=25)
@given(st.integers(0, 2**32))
def test_sparse_matmul_matches_fraction_arithmetic(seed):
    F = PrimeField()
    rng = np.random.default_rng(seed)
    dense = [[Fraction(int(rng.integers(-50, 50)), int(rng.integers(1, 9))) if rng.random() < 0.5 else Fraction(0)
              for _ in range(5)] for _ in range(4)]
    S = SparseMatrix.from_dense(dense)
    x = F.random(rng, (5, 3))
    got = F.sparse_matmul(S, x)
    for i in range(4):
        for j in range(3):
            acc = sum(F.from_rational(dense[i][t]) * int(x[t, j]) for t in range(5)) % P
            assert int(got[i, j]) == acc
    vec = F.sparse_matmul(S, x[:, 0])
    assert vec.tolist() == got[:, 0].tolist()


def test_generic_prime_path():
    F = PrimeField(1000003)
    assert not F.fast
    rng = np.random.default_rng(1)
    a, b = F.random(rng, (3, 3)), F.random(rng, (3, 3))
    want = [[sum(int(a[i, t]) * int(b[t, j]) for t in range(3)) % 1000003 for j in range(3)] for i in range(3)]
    assert F.matmul(a, b).tolist() == want
    S = SparseMatrix.from_dense([[Fraction(1, 2), 0, 3]])
    assert F.sparse_matmul(S, a)[0].tolist() == [
        (F.from_rational(Fraction(1, 2)) * int(a[0, j]) + 3 * int(a[2, j])) % 1000003 for j in range(3)
    ]


def test_field_element():
    x = PrimeFieldElement.from_rational(Fraction(1, 3), 7)
    assert int(x * 3) == 1
    assert int(x / x) == 1
    assert x - x == PrimeFieldElement(0, 7)
