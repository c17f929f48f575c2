import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagg.core import BilinearAlgorithm, compose
from triagg.errors import BudgetExceeded, PrimeError
from triagg.sparse import SparseMatrix
from triagg.strassen import strassen
from triagg.verify import (
    brent_violations,
    certify,
    expand_tensor,
    mm_tensor,
    verify_brent,
    verify_exact,
    verify_multiply,
    verify_random,
)

from conftest import new25
from oracles import mm_tensor_by_loops, tensor_by_loops


def corrupt(alg: BilinearAlgorithm, row: int = 0, factor=-1) -> BilinearAlgorithm:
    """Scale the first stored entry of one working U row."""
    U = alg.working[0]
    r = dict(U.row_dict(row))
    col = min(r)
    r[col] = r[col] * factor
    return BilinearAlgorithm(
        alg.dims, U.replace_rows({row: r}), *alg.working[1:], alg.tags, alg.transforms, name="corrupt"
    )


def test_mm_tensor_support():
    assert len(mm_tensor(2, 2, 2).as_dict()) == 8
    assert mm_tensor(1, 1, 1).as_dict() == {(0, 0, 0): 1}
    assert len(mm_tensor(2, 3, 4).as_dict()) == 24
    assert mm_tensor(2, 3, 4).as_dict() == mm_tensor_by_loops(2, 3, 4)


def test_expansion_matches_loops():
    S = strassen()
    assert expand_tensor(S) == tensor_by_loops(S.U, S.V, S.W) == mm_tensor(2, 2, 2).as_dict()
    SS = compose(S, S)
    assert expand_tensor(SS) == mm_tensor(4, 4, 4).as_dict()


def test_corrupted_strassen_detected_by_every_route():
    bad = corrupt(strassen(), 3)
    assert expand_tensor(bad) != mm_tensor(2, 2, 2).as_dict()
    assert not verify_exact(bad)
    assert not verify_brent(bad)
    assert brent_violations(bad)
    assert not verify_random(bad, trials=5)
    assert not verify_multiply(bad, samples=2)


def test_brent_on_composition():
    assert verify_brent(compose(strassen(), strassen()))


def test_budget_refusal():
    with pytest.raises(BudgetExceeded):
        verify_exact(new25(20), budget=1000)
    with pytest.raises(BudgetExceeded):
        verify_brent(new25(6), budget=1000)


def test_random_single_trial_strassen():
    assert verify_random(strassen(), trials=1, prime=101)


def test_prime_dividing_denominator():
    # gamma = 1 - 9/4 at n0 = 6 puts 5 in the denominators
    with pytest.raises(PrimeError):
        verify_random(new25(6), trials=1, prime=5)


def test_corrupted_new25_20_fails():
    alg = new25(20)
    bad = corrupt(alg, alg.t // 2, factor=2)
    assert not verify_random(bad, trials=20)


def test_multiply_routes():
    assert verify_multiply(new25(20), samples=1, levels=1)
    assert verify_multiply(new25(6), samples=1, levels=2, domain="prime")
    assert verify_multiply(strassen(), samples=2, levels=3)


@settings(max_examples=20, deadline=None)
@given(st.permutations(list(range(7))))
def test_row_permutation_invariance(perm):
    S = strassen()
    P = [S.U.take_rows(perm), S.V.take_rows(perm), S.W.take_rows(perm)]
    alg = BilinearAlgorithm(S.dims, *P)
    assert expand_tensor(alg) == expand_tensor(S)


@pytest.mark.parametrize("n0", [6, 8])
def test_routes_agree(n0):
    alg = new25(n0)
    assert verify_exact(alg) and verify_random(alg, trials=3) and verify_multiply(alg, samples=1)


def test_certify_records_metadata():
    alg, rep = certify(strassen(), "random", trials=4, seed=9)
    assert rep.result and alg.verified == {"mode": "random", "parameters": {"trials": 4, "prime": 2**61 - 1}, "seed": 9}
    assert "seconds" not in rep.to_dict() and "seconds" in rep.to_dict(include_timing=True)
    same, fail = certify(corrupt(strassen()), "exact")
    assert not fail.result and same.verified is None


def test_seeded_random_is_deterministic():
    a = certify(new25(6), "random", trials=3, seed=1)[1].to_dict()
    b = certify(new25(6), "random", trials=3, seed=1)[1].to_dict()
    assert a == b


def test_zero_rank_algorithm_is_not_mm():
    Z = SparseMatrix.zeros((0, 4))
    alg = BilinearAlgorithm((2, 2, 2), Z, Z, Z)
    assert not verify_exact(alg) and not verify_brent(alg)
