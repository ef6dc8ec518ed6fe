import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from codebooknet.channel import (
    ChannelParams,
    ReceivedVector,
    awgn,
    bpsk_map,
    ebn0_to_sigma,
    hard_decision,
    prefec_rates,
    qfunc,
    sigma_to_ebn0,
    stream,
)


def test_sigma_values():
    # sigma^2 = 1 / (2 R 10^(dB/10)), evaluated at 30 digits
    assert ebn0_to_sigma(4.0, 4 / 7) == pytest.approx(0.590206552178396, rel=1e-13)
    assert ebn0_to_sigma(10.0, 4 / 7) == pytest.approx(0.295803989154981, rel=1e-13)
    assert ebn0_to_sigma(0.0, 1.0) == pytest.approx(math.sqrt(0.5))
    assert ebn0_to_sigma(math.inf, 0.5) == 0.0


@given(st.floats(-5, 20), st.floats(0.05, 1.0))
def test_sigma_ebn0_roundtrip(db, rate):
    assert sigma_to_ebn0(ebn0_to_sigma(db, rate), rate) == pytest.approx(db, abs=1e-9)


def test_bad_rate():
    with pytest.raises(ValueError):
        ebn0_to_sigma(3.0, 0.0)
    with pytest.raises(ValueError):
        ChannelParams(3.0, 1.5)


def test_bpsk_and_hard_decision():
    assert bpsk_map([0, 1, 1]).tolist() == [-1.0, 1.0, 1.0]
    assert hard_decision([-0.1, 0.0, 2.0]).tolist() == [0, 0, 1]


def test_received_vector_must_be_finite():
    with pytest.raises(ValueError):
        ReceivedVector(np.array([0.0, np.nan]), 1.0)


def test_prefec_reference_values():
    # mpmath: Q(1/sigma) and 1 - (1 - p)^7 for Hamming(7,4)
    r4 = prefec_rates(ebn0_to_sigma(4.0, 4 / 7), 7)
    r10 = prefec_rates(ebn0_to_sigma(10.0, 4 / 7), 7)
    assert r4["ber"] == pytest.approx(0.0451020474336215, rel=1e-12)
    assert r4["fer"] == pytest.approx(0.276066398282075, rel=1e-12)
    assert r10["fer"] == pytest.approx(0.00252857006776052, rel=1e-12)


@given(st.floats(-6, 6))
def test_qfunc_symmetry(x):
    assert qfunc(x) + qfunc(-x) == pytest.approx(1.0)


def test_streams_are_reproducible_and_distinct():
    a = stream(7, 1, 2).standard_normal(5)
    assert np.array_equal(a, stream(7, 1, 2).standard_normal(5))
    assert not np.array_equal(a, stream(7, 2, 1).standard_normal(5))
    assert not np.array_equal(a, stream(8, 1, 2).standard_normal(5))


def test_awgn_zero_sigma_consumes_draws():
    s = bpsk_map(np.ones(4))
    r1 = stream(1, 0)
    assert np.array_equal(awgn(s, 0.0, r1), s)
    r2 = stream(1, 0)
    r2.standard_normal(4)
    assert r1.standard_normal() == r2.standard_normal()


def test_awgn_statistics():
    w = awgn(np.zeros(200_000), 0.7, stream(3))
    assert abs(w.mean()) < 0.01
    assert w.std() == pytest.approx(0.7, rel=0.01)
