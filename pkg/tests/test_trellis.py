import numpy as np

from codebooknet.channel import awgn, bpsk_map, stream
from codebooknet.decoders import map_sums_batch, ml_decode_batch
from codebooknet.gf2 import encode, index_to_message
from codebooknet.trellis import span_trellis, trellis_ml, trellis_posteriors


def test_bch_state_space(bch):
    tr = span_trellis(bch)
    assert tr.max_states == 2**10
    assert tr.state_ptr[0] == 0 and np.diff(tr.state_ptr)[0] == 1
    assert np.diff(tr.state_ptr)[-1] == 1


def test_rows_enter_at_their_first_coordinate(polar):
    tr = span_trellis(polar)
    first = [(r & -r).bit_length() - 1 for r in polar.rows]
    assert tr.intro_t.tolist() == first


def test_bch_trellis_equals_gray_walk(bch):
    rng = stream(11)
    msgs = rng.integers(0, 2, (3, 21), dtype=np.uint8)
    R = awgn(bpsk_map(encode(bch, msgs)), 1.0, rng)
    idx, score = ml_decode_batch(bch, R)
    bits, best = trellis_ml(bch, R)
    assert np.array_equal(index_to_message(idx, 21), bits)
    assert np.allclose(best, score, atol=1e-9)
    ones, totals, _ = map_sums_batch(bch, R, 2.0)
    p1, p0 = trellis_posteriors(bch, R, 2.0)
    assert np.allclose(p1, ones / totals[:, None], atol=1e-11)
    assert np.allclose(p0, 1 - p1, atol=1e-11)
