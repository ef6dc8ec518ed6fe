"""Equivalence checks between the network forward passes and the decoders.

Disagreements are tolerated only on numerical near-ties: two codewords
whose correlations differ by less than TIE_EPS, or a posterior within
TIE_EPS of 1/2.
"""

from __future__ import annotations

import numpy as np

from .channel import awgn, bpsk_map, stream
from .decoders import map_decode_batch, ml_decode_batch, oracle_map_batch, oracle_ml_batch
from .gf2 import CodewordStream, GeneratorMatrix, codebook_words, encode, unpack_bits
from .network import build_mlnn, build_slnn, edge_count, forward_mlnn, forward_slnn

TIE_EPS = 1e-9
ORACLE_K = 8
MAX_DISAGREEMENT = 1e-4


def random_received(code: GeneratorMatrix, sigma: float, frames: int, seed: int, tag: int = 0) -> np.ndarray:
    """Noisy BPSK images of uniformly drawn codewords."""
    rng = stream(seed, tag, int(round(sigma * 1e6)))
    msgs = rng.integers(0, 2, size=(frames, code.k), dtype=np.uint8)
    return awgn(bpsk_map(encode(code, msgs)), sigma, rng)


def _correlation(code: GeneratorMatrix, R: np.ndarray, idx: np.ndarray) -> np.ndarray:
    cw = unpack_bits(codebook_words(code)[idx], code.n)
    return np.einsum("ij,ij->i", R, cw)


def _summary(name, code, sigma, frames, disagree, ties) -> dict:
    violations = int((disagree & ~ties).sum())
    rate = disagree.sum() / frames
    return {
        "check": name,
        "code": code.name,
        "sigma": sigma,
        "frames": frames,
        "disagreements": int(disagree.sum()),
        "near_ties": int((disagree & ties).sum()),
        "violations": violations,
        "rate": float(rate),
        "ok": violations == 0 and rate < MAX_DISAGREEMENT,
    }


def check_ml(code: GeneratorMatrix, R: np.ndarray, sigma: float, oracle: bool | None = None) -> dict:
    """forward_slnn argmax vs ml_decode (vs the likelihood oracle for small k)."""
    if oracle is None:
        oracle = code.k <= ORACLE_K
    net = build_slnn(CodewordStream(code))
    a = forward_slnn(net, R, keep_scores=False).index
    b, _ = ml_decode_batch(code, R)
    picks = [a, b]
    if oracle:
        picks.append(oracle_ml_batch(code, R, sigma))
    disagree = np.zeros(len(R), dtype=bool)
    ties = np.ones(len(R), dtype=bool)
    ref = _correlation(code, R, a)
    for other in picks[1:]:
        d = other != a
        disagree |= d
        gap = np.abs(_correlation(code, R, other) - ref)
        ties &= ~d | (gap < TIE_EPS)
    return _summary("ml-equivalence" + ("+oracle" if oracle else ""), code, sigma, len(R), disagree, ties)


def check_map(code: GeneratorMatrix, R: np.ndarray, sigma: float, oracle: bool | None = None) -> dict:
    """forward_mlnn bits vs map_decode (vs the likelihood oracle for small k)."""
    if oracle is None:
        oracle = code.k <= ORACLE_K
    net = build_mlnn(CodewordStream(code))
    out = forward_mlnn(net, R, sigma)
    bits, post = map_decode_batch(code, R, sigma)
    decisions = [out.bits, bits]
    posts = [out.posteriors, post]
    if oracle:
        ob, op = oracle_map_batch(code, R, sigma)
        decisions.append(ob)
        posts.append(op)
    diff = np.zeros(R.shape[:1] + (code.k,), dtype=bool)
    for d in decisions[1:]:
        diff |= d != decisions[0]
    near = np.zeros_like(diff)
    for p in posts:
        near |= np.abs(p - 0.5) < TIE_EPS
    disagree = diff.any(axis=1)
    ties = ~(diff & ~near).any(axis=1)
    return _summary("map-equivalence" + ("+oracle" if oracle else ""), code, sigma, len(R), disagree, ties)


def check_edges(code: GeneratorMatrix) -> dict:
    cws = CodewordStream(code)
    weight_sum = int(np.bitwise_count(cws.words).sum(dtype=np.int64))
    slnn = edge_count(build_slnn(cws))["total"]
    mlnn = edge_count(build_mlnn(cws))["total"]
    expect2 = weight_sum + code.k * (1 << (code.k - 1))
    return {
        "check": "edges",
        "code": code.name,
        "slnn": slnn,
        "mlnn": mlnn,
        "ok": slnn == weight_sum and mlnn == expect2,
    }


def run_checks(code: GeneratorMatrix, trials: int, seed: int = 0, sigmas=(0.5, 1.0, 2.0)) -> list[dict]:
    results = [check_edges(code)]
    for s in sigmas:
        R = random_received(code, s, trials, seed)
        results.append(check_ml(code, R, s))
        results.append(check_map(code, R, s))
    return results
