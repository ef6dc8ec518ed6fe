import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from codebooknet import _kernels
from codebooknet.gf2 import CODE_NAMES, CodewordStream, GeneratorMatrix, get_code
from codebooknet.network import (
    build_mlnn,
    build_slnn,
    describe,
    edge_count,
    fixed_alpha,
    forward_mlnn,
    forward_slnn,
    scaled_softmax,
)

EDGES = {"hamming74": (56, 88), "polar168": (2048, 3072), "bch3121": (32_505_856, 54_525_952)}

# P(b_i = 1 | r) for Hamming(7,4), sigma = 0.8, straight from the Gaussian
# likelihoods at 30 digits
R_FIXED = np.array([0.9, -1.1, 0.2, 1.0, -0.8, -1.0, 1.0])
POST_FIXED = [0.995498435675845, 0.00406505203506143, 0.0146783273109881, 0.99284796984647]


@pytest.mark.parametrize("name", CODE_NAMES)
def test_edge_counts(name):
    cws = CodewordStream(get_code(name))
    assert edge_count(build_slnn(cws))["total"] == EDGES[name][0]
    assert edge_count(build_mlnn(cws))["total"] == EDGES[name][1]


def test_weight_matrices(hamming):
    cws = CodewordStream(hamming)
    w1 = build_slnn(cws).weights[0].dense()
    assert w1.shape == (7, 16)
    assert np.array_equal(w1.T, cws.codewords())
    w1b, w2 = (w.dense() for w in build_mlnn(cws).weights)
    assert np.array_equal(w1b, w1)
    assert np.array_equal(w2, cws.messages())


def test_slnn_scores_are_correlations(hamming, rng):
    net = build_slnn(hamming)
    R = rng.normal(size=(50, 7))
    out = forward_slnn(net, R)
    assert np.allclose(out.scores, R @ net.weights[0].dense(), atol=1e-12)
    assert np.array_equal(out.index, out.scores.argmax(axis=1))


def test_slnn_ties_take_lowest_index(hamming):
    out = forward_slnn(build_slnn(hamming), np.zeros(7))
    assert out.index == 0


def test_table_path_matches_dense(rng):
    # 2^11 columns exceeds the direct-path size, exercising the byte tables
    g = rng.integers(0, 2, (11, 20)).astype(np.uint8)
    g[:, :11] = np.eye(11, dtype=np.uint8)
    code = GeneratorMatrix.from_matrix("rand", g)
    net = build_slnn(code)
    assert net.weights[0].shape[1] > _kernels.SMALL_BOOK
    R = rng.normal(size=(5, 20))
    out = forward_slnn(net, R)
    assert np.allclose(out.scores, R @ net.weights[0].dense(), atol=1e-12)
    mo = forward_mlnn(build_mlnn(code), R, 0.9)
    h = scaled_softmax(R @ net.weights[0].dense(), 2 / 0.81)
    assert np.allclose(mo.posteriors, h @ CodewordStream(code).messages(), atol=1e-12)


def test_mlnn_posteriors_reference(hamming):
    out = forward_mlnn(build_mlnn(hamming), R_FIXED, sigma=0.8, keep_hidden=True)
    assert np.allclose(out.posteriors, POST_FIXED, rtol=1e-11)
    assert out.bits.tolist() == [1, 0, 0, 1]
    assert np.allclose(out.posteriors + out.posteriors0, 1.0)
    assert out.hidden.sum() == pytest.approx(1.0)
    assert np.allclose(out.hidden @ build_mlnn(hamming).weights[1].dense(), out.posteriors)


def test_mlnn_zero_sigma_is_one_hot(hamming):
    net = build_mlnn(hamming)
    out = forward_mlnn(net, R_FIXED, sigma=0.0)
    assert out.posteriors.tolist() == [1.0, 0.0, 0.0, 1.0]


def test_mlnn_fixed_alpha(hamming):
    a = fixed_alpha(4.0, hamming.rate)
    assert a == pytest.approx(2 / 0.590206552178396**2, rel=1e-12)
    net = build_mlnn(hamming, a)
    o1 = forward_mlnn(net, R_FIXED, sigma=0.3)
    o2 = forward_mlnn(net, R_FIXED, sigma=2.0)
    assert np.array_equal(o1.posteriors, o2.posteriors)
    with pytest.raises(ValueError):
        build_mlnn(hamming, -1.0)


def test_matched_net_needs_sigma(hamming):
    with pytest.raises(ValueError):
        forward_mlnn(build_mlnn(hamming), R_FIXED)
    with pytest.raises(ValueError):
        forward_slnn(build_slnn(hamming), np.zeros(6))


@given(arrays(np.float64, 9, elements=st.floats(-50, 50)), st.floats(0.01, 20), st.floats(-100, 100))
def test_scaled_softmax_properties(v, alpha, shift):
    p = scaled_softmax(v, alpha)
    assert p.sum() == pytest.approx(1.0)
    assert (p >= 0).all()
    assert np.allclose(p, scaled_softmax(v + shift, alpha), atol=1e-9)
    assert p.argmax() == v.argmax() or np.isclose(p.max(), p[v.argmax()])


def test_scaled_softmax_infinite_alpha():
    assert scaled_softmax([1.0, 3.0, 3.0], np.inf).tolist() == [0.0, 1.0, 0.0]


def test_describe(polar):
    d = describe(build_mlnn(polar))
    assert d["layer_sizes"] == [16, 256, 8]
    assert d["total_edges"] == 3072
    assert d["training"] == "No" and d["weights"] == "binary"
