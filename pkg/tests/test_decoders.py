import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codebooknet.channel import awgn, bpsk_map, hard_decision, stream
from codebooknet.decoders import (
    alpha_of,
    bdd_decode,
    bdd_decode_batch,
    hd_decode_batch,
    map_decode,
    map_decode_batch,
    ml_decode,
    ml_decode_batch,
    oracle_map_batch,
    oracle_ml,
    oracle_ml_batch,
    syndrome_table,
    trellis_map_batch,
    trellis_ml_batch,
)
from codebooknet.gf2 import encode, get_code, index_to_message, message_to_index, pack_bits

R_FIXED = np.array([0.9, -1.1, 0.2, 1.0, -0.8, -1.0, 1.0])
POST_FIXED = [0.995498435675845, 0.00406505203506143, 0.0146783273109881, 0.99284796984647]


def noisy(code, sigma, frames, seed):
    rng = stream(seed, 99)
    msgs = rng.integers(0, 2, (frames, code.k), dtype=np.uint8)
    return msgs, awgn(bpsk_map(encode(code, msgs)), sigma, rng)


def test_ml_reference(hamming):
    out = ml_decode(hamming, R_FIXED)
    assert out.message.tolist() == [1, 0, 0, 1]
    assert out.metric == pytest.approx(2.9)
    assert oracle_ml(hamming, R_FIXED, 0.8).message.tolist() == [1, 0, 0, 1]


def test_map_reference(hamming):
    out = map_decode(hamming, R_FIXED, 0.8)
    assert np.allclose(out.metric, POST_FIXED, rtol=1e-11)
    assert out.message.tolist() == [1, 0, 0, 1]


@settings(max_examples=25)
@given(st.sampled_from(["hamming74", "polar168"]), st.sampled_from([0.4, 0.8, 1.5]), st.integers(0, 10**6))
def test_fast_paths_match_oracles(name, sigma, seed):
    code = get_code(name)
    _, R = noisy(code, sigma, 64, seed)
    idx, _ = ml_decode_batch(code, R)
    assert np.array_equal(idx, oracle_ml_batch(code, R, sigma))
    bits, post = map_decode_batch(code, R, sigma)
    obits, opost = oracle_map_batch(code, R, sigma)
    assert np.allclose(post, opost, atol=1e-12)
    assert np.array_equal(bits, obits)


def test_ml_matches_exhaustive_argmax(polar, rng):
    R = rng.normal(size=(30, 16))
    book = np.array([encode(polar, m) for m in itertools.product([0, 1], repeat=8)])
    idx, score = ml_decode_batch(polar, R)
    assert np.array_equal(idx, (R @ book.T).argmax(axis=1))
    assert np.allclose(score, (R @ book.T).max(axis=1))


def test_gray_walk_debug_on_long_code(bch):
    _, R = noisy(bch, 0.7, 2, 5)
    a, s = ml_decode_batch(bch, R, debug=True)
    b, t = trellis_ml_batch(bch, R)
    assert np.array_equal(index_to_message(a, 21), b)
    assert np.allclose(s, t)


def test_map_pruning_is_harmless_at_high_snr(polar):
    # alpha = 200 prunes almost every codeword
    _, R = noisy(polar, 0.1, 50, 8)
    bits, post = map_decode_batch(polar, R, 0.1)
    obits, _ = oracle_map_batch(polar, R, 0.1)
    tb, tpost = trellis_map_batch(polar, R, 0.1)
    assert np.array_equal(bits, obits)
    assert np.allclose(post, tpost, atol=1e-12)


def test_map_tie_decides_zero(hamming):
    bits, post = map_decode_batch(hamming, np.zeros((1, 7)), 1.0)
    assert np.allclose(post, 0.5)
    assert bits.tolist() == [[0, 0, 0, 0]]


def test_alpha_requires_positive_sigma():
    with pytest.raises(ValueError):
        alpha_of(0.0)
    assert alpha_of(0.5) == 8.0


def test_oracle_size_limit(bch):
    with pytest.raises(ValueError):
        oracle_ml_batch(bch, np.zeros((1, 31)), 1.0)


@pytest.mark.parametrize("name", ["hamming74", "polar168"])
def test_bdd_corrects_every_single_error(name):
    code = get_code(name)
    msg = index_to_message(np.arange(2**code.k), code.k)
    cw = encode(code, msg)
    for i in range(code.n):
        bad = cw.copy()
        bad[:, i] ^= 1
        out, cws, fail = bdd_decode_batch(code, bad)
        assert not fail.any()
        assert np.array_equal(out, msg)
        assert np.array_equal(cws, pack_bits(cw))


def test_bch_bdd_double_errors(bch, rng):
    msg = rng.integers(0, 2, (200, 21), dtype=np.uint8)
    cw = encode(bch, msg)
    for pos in itertools.combinations(range(0, 31, 3), 2):
        bad = cw.copy()
        bad[:, list(pos)] ^= 1
        out, _, fail = bdd_decode_batch(bch, bad)
        assert not fail.any() and np.array_equal(out, msg)


def test_bch_bdd_beyond_radius(bch, rng):
    # weight-3 error patterns are never decoded back to the sent codeword
    msg = rng.integers(0, 2, (300, 21), dtype=np.uint8)
    cw = encode(bch, msg)
    bad = cw.copy()
    for row in bad:
        row[rng.choice(31, 3, replace=False)] ^= 1
    out, cws, fail = bdd_decode_batch(bch, bad)
    ok = ~fail
    assert fail.any() and ok.any()
    # a decoded word sits within 2 of the received one, hence not the sent one
    assert (out[ok] != msg[ok]).any(axis=1).all()
    # a declared failure keeps the straight projection of the hard word
    fallback = bdd_decode(bch, bad[fail][0])
    assert fallback.bdd_failure and fallback.codeword is None


def test_syndrome_table_radius(hamming):
    assert (syndrome_table(hamming, 1).patterns >= 0).all()
    with pytest.raises(ValueError):
        syndrome_table(hamming, 2)


def test_search_and_syndrome_agree(polar, rng):
    _, R = noisy(polar, 0.8, 300, 2)
    hard = hard_decision(R)
    a = bdd_decode_batch(polar, hard, method="search")
    b = bdd_decode_batch(polar, hard, method="syndrome")
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_hard_decision_decoder(hamming):
    msg = np.array([[1, 0, 1, 1]], dtype=np.uint8)
    R = bpsk_map(encode(hamming, msg))
    assert np.array_equal(hd_decode_batch(hamming, R), msg)


def test_trellis_matches_oracles(polar):
    _, R = noisy(polar, 0.9, 200, 3)
    tb, _ = trellis_ml_batch(polar, R)
    assert np.array_equal(message_to_index(tb), oracle_ml_batch(polar, R, 0.9))
    mb, mp = trellis_map_batch(polar, R, 0.9)
    ob, op = oracle_map_batch(polar, R, 0.9)
    assert np.array_equal(mb, ob)
    assert np.allclose(mp, op, atol=1e-12)


def test_trellis_map_overflow_guard(hamming):
    with pytest.raises(ValueError):
        trellis_map_batch(hamming, np.full((1, 7), 50.0), 0.1)
