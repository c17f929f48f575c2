"""Acceptance criteria.

Each test records a PASS/FAIL line for its criterion; the lines are
collected into an "acceptance criteria" section of the pytest summary.
Tolerances and runtime limits are the ones the criteria state.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from triagg import io
from triagg.analysis import exponent_exact, leading_coefficient, optimal_base, stats
from triagg.composite import CompositeAlgorithm, gen_new25b
from triagg.core import BilinearAlgorithm, compose, find_kin_pairs, merge_kin, rotate, symmetrize
from triagg.engine import count_operations, make_domain, recursive_multiply
from triagg.generator import gen_new25, gen_new25_decomposed, gen_pan, targeted_pairs
from triagg.strassen import strassen, with_prescribed_rows
from triagg.verify import certify, verify_brent, verify_exact, verify_random

from conftest import criterion, new25, pan, record
from printed_values import (
    LEADING_COEFFICIENT,
    OPTIMAL,
    ONE_LEVEL,
    ONE_LEVEL_PREVIOUS_FROM_OTHER_SOURCE,
    TWO_LEVEL,
    SPARSITY,
    WORKED_EXAMPLE_44,
)

pytestmark = pytest.mark.slow

P61 = 2**61 - 1
ELAPSED: dict = {}


def timed(key, fn, *args, **kw):
    start = time.perf_counter()
    out = fn(*args, **kw)
    ELAPSED[key] = ELAPSED.get(key, 0.0) + time.perf_counter() - start
    return out


# -- 1 -----------------------------------------------------------------------


@pytest.mark.parametrize("n0", sorted(ONE_LEVEL))
def test_ac1_rank_reproduction(n0):
    prev_t, new_t, _, _ = ONE_LEVEL[n0]
    with criterion("AC1", "rank reproduction", f"n0={n0}"):
        start = time.perf_counter()
        got_new = gen_new25(n0).t
        got_pan = gen_pan(n0).t
        seconds = time.perf_counter() - start
        assert got_new == new_t
        if n0 not in ONE_LEVEL_PREVIOUS_FROM_OTHER_SOURCE:
            assert got_pan == prev_t
        assert seconds < 60


@pytest.mark.xfail(strict=True, reason="printed value belongs to a different construction")
def test_ac1_previous_column_at_28():
    # the un-merged family has rank 10565 at n0=28 (its closed form, and the
    # square 111619225 in the two-level table); 10556 is another algorithm's
    record("AC1", "rank reproduction", None, "n0=28 previous column: printed 10556, family gives 10565")
    assert gen_pan(28).t == ONE_LEVEL[28][0]


# -- 2 -----------------------------------------------------------------------


def close(n0, t, printed):
    return abs(float(exponent_exact(n0, t)) - printed) <= 1e-6


def test_ac2_exponents():
    with criterion("AC2", "exponent reproduction", "tables"):
        for n0, (prev_t, new_t, prev_w, new_w) in ONE_LEVEL.items():
            assert close(n0, prev_t, prev_w), n0
            assert close(n0, new_t, new_w), n0
        for m0, (t_p, t_n, t_b, w_p, w_n, w_b) in TWO_LEVEL.items():
            assert t_n == gen_new25b(m0).t
            for t, w in ((t_p, w_p), (t_n, w_n), (t_b, w_b)):
                assert close(m0 * m0, t, w), (m0, t)
        assert close(2, 7, 2.807355)


def test_ac2_optimal_base():
    with criterion("AC2", "exponent reproduction", "optimal base"):
        for family, want in OPTIMAL.items():
            assert optimal_base(family) == want


# -- 3 -----------------------------------------------------------------------


def test_ac3_exact():
    with criterion("AC3", "exact correctness"):
        start = time.perf_counter()
        S = strassen()
        SS = compose(S, S)
        sym = symmetrize(S)
        for alg in (S, SS, sym):
            assert verify_exact(alg)
        for n0 in (6, 8, 10, 12):
            assert verify_exact(pan(n0)), n0
            assert verify_exact(new25(n0)), n0
        g = 1 - Fraction(9, 23)
        small = [
            S,
            SS,
            rotate(S),
            rotate(SS),
            with_prescribed_rows([[-1 / g, 1], [1, 0]], [[1, g], [1, 0]]),
            io.load_bundled_replacement(),
        ]
        for alg in small:
            assert max(alg.dims) <= 4
            assert verify_brent(alg), alg
        assert time.perf_counter() - start < 300


# -- 4 -----------------------------------------------------------------------


def flip_bit(alg: BilinearAlgorithm, which: int, rng) -> BilinearAlgorithm:
    """Flip the lowest bit of the numerator of one stored coefficient."""
    mats = list(alg.working)
    X = mats[which]
    entries = list(X.entries())
    r, c, v = entries[int(rng.integers(len(entries)))]
    row = dict(X.row_dict(r))
    row[c] = Fraction(v.numerator ^ 1, v.denominator)
    mats[which] = X.replace_rows({r: row})
    return BilinearAlgorithm(alg.dims, *mats, alg.tags, alg.transforms, name="corrupted")


@pytest.mark.parametrize("n0", [44, 20])
def test_ac4_new25(n0):
    with criterion("AC4", "probabilistic correctness", f"new25({n0})"):
        assert timed("ac4", verify_random, new25(n0), trials=20, prime=P61, seed=0)


def test_ac4_compose_with_strassen():
    with criterion("AC4", "probabilistic correctness", "compose(S, new25(44))"):
        alg = timed("ac4", compose, strassen(), new25(44))
        assert alg.t == 252770
        assert timed("ac4", verify_random, alg, trials=20, prime=P61, seed=0)


def test_ac4_new25b_20(replacement48):
    with criterion("AC4", "probabilistic correctness", "new25b(20) with <4,4,4;48>"):
        comp = timed("ac4", gen_new25b, 20, replacement48)
        assert comp.t == 19154784 == 4378**2 - 110**2
        assert timed("ac4", verify_random, comp, trials=20, prime=P61, seed=0)


def test_ac4_corruption_detected():
    with criterion("AC4", "probabilistic correctness", "single-bit corruption"):
        rng = np.random.default_rng(2024)
        for base in (new25(20), compose(strassen(), new25(6))):
            for which in range(3):
                bad = flip_bit(base, which, rng)
                assert not timed("ac4", verify_random, bad, trials=20, prime=P61, seed=0)
        assert ELAPSED["ac4"] < 600


# -- 5 -----------------------------------------------------------------------


def test_ac5_new25b_bookkeeping(replacement48):
    with criterion("AC5", "two-level accounting"):
        start = time.perf_counter()
        plain = gen_new25b(44)
        assert isinstance(plain, CompositeAlgorithm)
        assert plain.t == 1303932100
        assert plain.blocks == 256036 == sum(1 for _ in plain.block_tags())
        sub = gen_new25b(44, replacement48)
        assert sub.t == 1303676064 and sub.substituted_blocks == 256036
        assert time.perf_counter() - start < 1800


# -- 6 -----------------------------------------------------------------------


@pytest.mark.parametrize("n0", sorted(LEADING_COEFFICIENT))
def test_ac6_leading_coefficient(n0):
    with criterion("AC6", "leading coefficient", f"n0={n0}"):
        dec = gen_new25_decomposed(n0)
        c = float(leading_coefficient(dec))
        if n0 in SPARSITY:
            got = [(m.nnz, m.nns) for m in (stats(dec).U, stats(dec).V, stats(dec).W)]
            if got != SPARSITY[n0]:
                print(f"sparsity deviation at n0={n0}: {got} vs {SPARSITY[n0]}")
        assert abs(c - LEADING_COEFFICIENT[n0]) <= 0.05


def test_ac6_worked_example():
    with criterion("AC6", "leading coefficient", "worked example"):
        dec = gen_new25_decomposed(44)
        s = stats(dec)
        got = [(m.nnz, m.nns) for m in (s.U, s.V, s.W)]
        assert got == SPARSITY[44]
        assert (s.q_U, s.q_V, s.q_W) == tuple(WORKED_EXAMPLE_44[k] for k in ("q_U", "q_V", "q_W"))
        assert s.q_W == 110285 - 2116
        assert abs(float(leading_coefficient(dec)) - WORKED_EXAMPLE_44["c"]) <= 0.05


# -- 7 -----------------------------------------------------------------------


def test_ac7_execution():
    with criterion("AC7", "recursive execution"):
        start = time.perf_counter()
        dom = make_domain("prime")
        rng = np.random.default_rng(7)
        A = dom.random(rng, (400, 400))
        B = dom.random(rng, (400, 400))
        alg = new25(20)
        assert dom.equal(recursive_multiply(alg, A, B, levels=2, domain=dom), dom.naive(A, B))
        assert count_operations(alg, 2).multiplications == alg.t**2

        rat = make_domain("rational")
        A = rat.random(rng, (8, 8))
        B = rat.random(rng, (8, 8))
        assert rat.equal(recursive_multiply(strassen(), A, B, levels=3), rat.naive(A, B))
        assert count_operations(strassen(), 3).multiplications == 7**3
        assert time.perf_counter() - start < 300


# -- 8 -----------------------------------------------------------------------


def test_ac8_kin():
    with criterion("AC8", "kin machinery"):
        pre = pan(44)
        pairs = find_kin_pairs(pre)
        targeted = targeted_pairs(pre)
        assert len(targeted) == 23
        assert set(targeted) <= set(pairs)
        merged = merge_kin(pre, targeted)
        assert merged.t == 36110
        assert verify_random(pre, trials=20, prime=P61)
        assert verify_random(merged, trials=20, prime=P61)


# -- 9 -----------------------------------------------------------------------


def test_ac9_roundtrip_and_determinism(tmp_path, replacement48):
    with criterion("AC9", "round-trip and determinism"):
        for obj in (strassen(), new25(44), replacement48, CompositeAlgorithm(new25(4), replacement48)):
            a = tmp_path / "a.json"
            io.save(obj, a)
            b = tmp_path / "b.json"
            io.save(io.load(a), b)
            assert a.read_bytes() == b.read_bytes()

        def run():
            alg, rep = certify(gen_new25(20), "random", trials=3, seed=11)
            return io.dumps(io.document_of(alg)), io.dumps(rep.to_dict())

        assert run() == run()
