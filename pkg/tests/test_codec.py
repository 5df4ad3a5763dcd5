import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergodic_alignment.channels import FiniteFieldNoiseModel, sample_ff_noise_array, stream
from ergodic_alignment.codec import (LinearCode, ProtocolConfig, all_messages, decode_batch,
                                     decode_function, encode, max_message_length,
                                     random_generator, run_protocol)
from ergodic_alignment.finite_field import sigma_array


def systematic(q, m, n, seed=0):
    P = np.random.default_rng(seed).integers(0, q, size=(m, n - m))
    return LinearCode(np.hstack([np.eye(m, dtype=int), P]), q)


def test_encode_zero_and_systematic():
    code = systematic(5, 2, 6)
    assert not encode(code, [0, 0]).any()
    w = np.array([3, 1])
    np.testing.assert_array_equal(encode(code, w)[:2], w)
    with pytest.raises(ValueError):
        encode(code, [1, 2, 3])


def test_rank_deficient_generator_rejected():
    with pytest.raises(ValueError):
        LinearCode([[1, 2, 3], [2, 4, 6]], 5)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_superposition(q, K, seed):
    rng = np.random.default_rng(seed)
    code = LinearCode(random_generator(rng, q, 2, 5), q)
    W = rng.integers(0, q, size=(K, 2))
    h = rng.integers(0, q, size=K)
    lhs = sum(h[k] * encode(code, W[k]) for k in range(K)) % q
    np.testing.assert_array_equal(lhs, encode(code, h @ W % q))


def test_noiseless_decoding_exact_for_all_messages():
    q, m = 5, 3
    code = LinearCode(random_generator(np.random.default_rng(1), q, m, 5), q)
    for u in all_messages(q, m):
        np.testing.assert_array_equal(decode_function(code, encode(code, u), 0.0), u)


def test_decoder_is_min_distance_with_lexicographic_ties():
    q = 3
    code = LinearCode([[1, 1]], q)          # codewords 00, 11, 22
    # y = 01 is at distance 1 from 00 and 11: tie resolves to u = 0
    assert decode_function(code, [0, 1], 0.1).tolist() == [0]
    assert decode_function(code, [1, 2], 0.1).tolist() == [1]


def test_decoder_matches_brute_force_likelihood():
    q, m, n, rho = 5, 2, 5, 0.3
    rng = np.random.default_rng(7)
    code = LinearCode(random_generator(rng, q, m, n), q)
    cands = list(itertools.product(range(q), repeat=m))
    for _ in range(200):
        y = rng.integers(0, q, size=n)

        def loglik(u):
            d = int(np.count_nonzero((y - np.array(u) @ code.generator) % q))
            return d * math.log(rho / (q - 1)) + (n - d) * math.log(1 - rho)

        best = max(loglik(u) for u in cands)
        first = next(u for u in cands if loglik(u) == best)
        assert tuple(decode_function(code, y, rho)) == first


def test_batch_decoder_agrees_with_single():
    q, m, n = 5, 2, 6
    rng = np.random.default_rng(2)
    code = LinearCode(random_generator(rng, q, m, n), q)
    y = rng.integers(0, q, size=(30, 4, n))
    cb = np.broadcast_to(code.codebook(), (30,) + code.codebook().shape)
    idx = decode_batch(cb, y, q, 0.05)
    msgs = all_messages(q, m)
    for p in range(30):
        for r in range(4):
            np.testing.assert_array_equal(msgs[idx[p, r]], decode_function(code, y[p, r], 0.05))


def test_short_code_error_rate():
    q, m, n, rho, trials = 5, 2, 8, 0.05, 10_000
    rng = stream(11, "code")
    G = random_generator(rng, q, m, n)
    code = LinearCode(G, q)
    U = rng.integers(0, q, size=(trials, m))
    Z = sample_ff_noise_array(stream(11, "noise"), FiniteFieldNoiseModel(q, rho), (trials, n))
    Y = (U @ G + Z) % q
    cb = np.broadcast_to(code.codebook(), (trials,) + code.codebook().shape)
    U_hat = all_messages(q, m)[decode_batch(cb, Y[:, None, :], q, rho)[:, 0]]
    assert np.mean(np.any(U_hat != U, axis=1)) < 1e-2


def test_error_rate_degrades_above_capacity():
    q, rho, n = 5, 0.2, 6
    cap = math.log2(q) - (-(1 - rho) * math.log2(1 - rho) - rho * math.log2(rho / (q - 1)))
    rates = []
    for m in (1, 3, 5):                 # code rates 0.39, 1.16, 1.93 vs cap 1.26
        rng = stream(m, "code")
        G = random_generator(rng, q, m, n)
        U = rng.integers(0, q, size=(3000, m))
        Z = sample_ff_noise_array(stream(m, "noise"), FiniteFieldNoiseModel(q, rho), (3000, n))
        cb = np.broadcast_to(LinearCode(G, q).codebook(), (3000, q**m, n))
        U_hat = all_messages(q, m)[decode_batch(cb, ((U @ G + Z) % q)[:, None], q, rho)[:, 0]]
        rates.append(np.mean(np.any(U_hat != U, axis=1)))
    assert m / n * math.log2(q) > cap
    assert rates[0] < rates[1] < rates[2]


@pytest.mark.parametrize("q", [3, 5, 7])
def test_alignment_identity_exhaustive(q):
    # u + v = (h_kk + sigma(h_kk)) w_k for every valid 2x2 H and messages
    K = 2
    for flat in itertools.product(range(1, q), repeat=K * K):
        H = np.array(flat).reshape(K, K)
        from ergodic_alignment.finite_field import complement_array
        G = complement_array(H, q)
        for w in itertools.product(range(q), repeat=K):
            w = np.array(w)
            s = (H @ w + G @ w) % q
            expected = ((H.diagonal() + sigma_array(H.diagonal(), q)) * w) % q
            np.testing.assert_array_equal(s, expected)


def test_noiseless_uncoded_protocol():
    rep = run_protocol(ProtocolConfig(5, 3, 0.0, 2, 2), 10**4, 3)
    assert rep.block_errors == 0 and sum(rep.u_errors) == 0 and sum(rep.v_errors) == 0
    assert rep.achieved_rate[0] == pytest.approx(rep.matched_fraction * 0.5 * math.log2(5))
    assert rep.pairs > 0


def test_protocol_with_given_states_and_trace():
    q, K = 3, 2
    states = np.array([[[1, 2], [2, 1]], [[1, 1], [1, 1]], [[1, 1], [2, 1]]])
    # complement of [[1,2],[2,1]] over GF(3) is [[1,1],[1,1]]
    rep = run_protocol(ProtocolConfig(q, K, 0.0), 3, 0, trace=True, states=states)
    assert rep.pairs == 1 and rep.matched_fraction == pytest.approx(2 / 3)
    assert rep.trace_csv().splitlines()[0] == "t1,t2,user,u_ok,v_ok,w_ok"
    assert len(rep.trace) == K


def test_protocol_rate_accounting():
    rep = run_protocol(ProtocolConfig(3, 2, 0.1, 1, 3), 4000, 1)
    assert rep.symmetric_rate == pytest.approx(0.5 * rep.capacity)
    total_loss = rep.symmetric_rate - rep.achieved_rate[0]
    assert rep.coding_backoff + rep.matching_loss == pytest.approx(total_loss)
    assert all(r <= math.log2(3) for r in rep.achieved_rate)


def test_error_rate_nonincreasing_in_block_length():
    # code rate 0.53 against capacity 1.02
    errs = [run_protocol(ProtocolConfig(3, 2, 0.1, m, nb), 20_000, 5).block_error_rate
            for m, nb in [(1, 3), (2, 6), (4, 12)]]
    assert errs[0] >= errs[1] >= errs[2]


@pytest.mark.parametrize("kwargs", [dict(q=4, K=2, rho=0.0), dict(q=5, K=1, rho=0.0),
                                    dict(q=5, K=2, rho=2.0), dict(q=5, K=2, rho=0.0, m=3,
                                                                 block_length=2),
                                    dict(q=5, K=2, rho=0.0, m=9, block_length=9)])
def test_protocol_config_validation(kwargs):
    with pytest.raises(ValueError):
        ProtocolConfig(**kwargs)


def test_protocol_too_short():
    with pytest.raises(ValueError, match="too small"):
        run_protocol(ProtocolConfig(5, 3, 0.0), 5, 0)


def test_max_message_length():
    assert max_message_length(5, 3, 0.8677655688857) == 1
    assert max_message_length(5, 12, 0.8677655688857) == 4
    assert max_message_length(5, 10, math.log2(5)) == 10
