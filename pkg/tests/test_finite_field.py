import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ergodic_alignment.finite_field import (FieldElement, FieldMatrix, add, check_modulus,
                                            complement_array, complement_matrix,
                                            diagonal_pair, inv, matrices_from_codes,
                                            matrix_codes, mul, neg, rank_mod_p)
from oracles import mod_inverse_by_search

SMALL_PRIMES = [3, 5, 7, 11, 13]


def F(v, q):
    return FieldElement(v, q)


@pytest.mark.parametrize("q,a,b,expected", [(5, 3, 4, 2), (5, 0, 2, 2), (7, 6, 1, 0)])
def test_add_examples(q, a, b, expected):
    assert add(F(a, q), F(b, q)) == F(expected, q)


def test_neg_mul_inv_examples():
    assert neg(F(3, 5)) == F(2, 5)
    assert inv(F(3, 5)) == F(2, 5)
    assert mul(F(3, 7), F(5, 7)) == F(1, 7)


def test_modulus_mismatch():
    with pytest.raises(ValueError, match="modulus mismatch"):
        add(F(1, 5), F(1, 7))


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        inv(F(0, 5))


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_field_axioms_exhaustive(q):
    els = [F(v, q) for v in range(q)]
    zero, one = F(0, q), F(1, q)
    for a in els:
        assert a + zero == a and a * one == a
        assert a + neg(a) == zero
        if a.value:
            assert a * inv(a) == one
            assert inv(a).value == mod_inverse_by_search(a.value, q)
    for a, b, c in itertools.product(els, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("q,a,expected", [(5, 3, 3), (5, 1, 1), (7, 4, 4)])
def test_diagonal_pair_examples(q, a, expected):
    s = diagonal_pair(F(a, q))
    assert s == F(expected, q)
    assert (F(a, q) + s).value in (1, 2)


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_diagonal_pair_is_permutation_of_nonzero(q):
    image = [diagonal_pair(F(a, q)).value for a in range(1, q)]
    assert sorted(image) == list(range(1, q))
    assert all(diagonal_pair(F(s, q)).value == a for a, s in zip(range(1, q), image))


def test_diagonal_pair_rejects_zero():
    with pytest.raises(ValueError):
        diagonal_pair(F(0, 5))


def test_complement_example():
    H = FieldMatrix(((2, 3), (4, 1)), 5)
    G = complement_matrix(H)
    assert G.entries == ((4, 2), (1, 1))
    assert (H + G).entries == ((1, 0), (0, 2))
    assert complement_matrix(G) == H


@pytest.mark.parametrize("q", [3, 5])
def test_complement_bijection_exhaustive_k2(q):
    mats = list(itertools.product(range(1, q), repeat=4))
    images = set()
    for flat in mats:
        H = FieldMatrix((flat[:2], flat[2:]), q)
        G = complement_matrix(H)
        assert G.is_channel_valid()
        assert G != H
        S = (H + G).entries
        assert S[0][1] == S[1][0] == 0 and S[0][0] in (1, 2) and S[1][1] in (1, 2)
        assert complement_matrix(G) == H
        images.add(G.entries)
    assert len(images) == len(mats)


def test_complement_rejects_zero_entries():
    with pytest.raises(ValueError):
        complement_matrix(FieldMatrix(((0, 1), (1, 1)), 5))


@pytest.mark.parametrize("q", [2, 4, 9, 1, 0, -3])
def test_check_modulus_rejects(q):
    with pytest.raises(ValueError, match="q must be an odd prime"):
        check_modulus(q)


def test_json_round_trip():
    H = FieldMatrix(((2, 3, 1), (4, 1, 2), (1, 1, 3)), 5)
    text = H.to_json()
    assert FieldMatrix.from_json(text) == H
    assert '"q": 5' in text


@given(st.sampled_from(SMALL_PRIMES), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_complement_array_matches_matrix_version(q, K, seed):
    H = np.random.default_rng(seed).integers(1, q, size=(K, K))
    assert complement_matrix(FieldMatrix.from_array(H, q)) == \
        FieldMatrix.from_array(complement_array(H, q), q)


def test_matrix_codes_round_trip():
    q, K = 5, 3
    codes = np.arange(0, (q - 1) ** (K * K), 997)
    H = matrices_from_codes(codes, q, K)
    assert H.min() >= 1 and H.max() <= q - 1
    np.testing.assert_array_equal(matrix_codes(H, q), codes)


def test_rank_mod_p():
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_p([[1, 2], [2, 4]], 3) == 1
    assert rank_mod_p([[1, 2], [3, 4]], 5) == 2
    assert rank_mod_p([[1, 2], [3, 1]], 5) == 1  # 3*(1,2) = (3,6) = (3,1)
    assert rank_mod_p(np.eye(4, dtype=int), 7) == 4
