"""Soft- and hard-decision decoders plus brute-force reference decoders.

``ml_decode`` and ``map_decode`` stream the whole codebook in Gray-code
order.  ``oracle_ml`` and ``oracle_map`` evaluate the Gaussian likelihoods
literally and exist only to check the fast paths.  ``bdd_decode`` corrects
up to t hard-decision errors.

Batch variants take a (B, n) array of received rows and return arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .channel import hard_decision
from .gf2 import (
    CodewordStream,
    GeneratorMatrix,
    bdd_radius,
    codebook_words,
    encode,
    error_patterns,
    index_to_message,
    pack_bits,
    parity_check_matrix,
    recover_message,
    unpack_bits,
)
from .trellis import trellis_ml, trellis_posteriors

ORACLE_MAX_K = 12
# exp(-PRUNE) bounds the relative weight of a skipped codeword in map_decode;
# with at most 2^24 codewords the skipped mass stays below 1e-18.
PRUNE = 60.0


@dataclass
class DecodeOutcome:
    message: np.ndarray
    codeword: np.ndarray | None
    bdd_failure: bool = False
    metric: float | np.ndarray | None = None


def _code(source) -> GeneratorMatrix:
    return source.code if isinstance(source, CodewordStream) else source


def _rows2d(code: GeneratorMatrix, r) -> np.ndarray:
    R = np.ascontiguousarray(np.atleast_2d(np.asarray(r, dtype=np.float64)))
    if R.shape[-1] != code.n:
        raise ValueError(f"received length {R.shape[-1]} does not match n={code.n}")
    return R


def alpha_of(sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive for soft bit-wise decoding")
    return 2.0 / (sigma * sigma)


@lru_cache(maxsize=16)
def _supports(code: GeneratorMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = [[i for i in range(code.n) if (row >> i) & 1] for row in code.rows]
    indptr = np.cumsum([0] + [len(s) for s in idx]).astype(np.int64)
    indices = np.array([i for s in idx for i in s], dtype=np.int64)
    rows = np.array(code.rows, dtype=np.uint64).view(np.int64)
    return rows, indptr, indices


# ----------------------------------------------------------------------
# codeword-wise ML
# ----------------------------------------------------------------------


def ml_decode_batch(source, R, debug: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Canonical indices of the ML codewords and their correlations r . c."""
    code = _code(source)
    R = _rows2d(code, R)
    rows, indptr, indices = _supports(code)
    return _kernels.gray_ml(R, rows, indptr, indices, code.k, code.n, debug)


def ml_decode(source, r, debug: bool = False) -> DecodeOutcome:
    """argmax_j r . c_j over the codebook (ties -> lowest index)."""
    code = _code(source)
    idx, score = ml_decode_batch(code, r, debug)
    msg = index_to_message(idx[0], code.k)
    return DecodeOutcome(message=msg, codeword=encode(code, msg), metric=float(score[0]))


# ----------------------------------------------------------------------
# bit-wise MAP
# ----------------------------------------------------------------------


def map_sums_batch(source, R, alpha) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Streaming sums: (ones-side sums, grand totals, ML indices), max-normalised."""
    code = _code(source)
    R = _rows2d(code, R)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (R.shape[0],)).copy()
    rows, indptr, indices = _supports(code)
    return _kernels.gray_map(R, rows, indptr, indices, code.k, code.n, alpha, PRUNE)


def _map_bits(ones: np.ndarray, totals: np.ndarray) -> np.ndarray:
    # log(sum_{b=1}) > log(sum_{b=0}); an exact tie decides 0
    with np.errstate(divide="ignore"):
        log1 = np.log(ones)
        log0 = np.log(totals[:, None] - ones)
    return (log1 > log0).astype(np.uint8)


def map_decode_batch(source, R, sigma=None, alpha=None) -> tuple[np.ndarray, np.ndarray]:
    """(bits, P(b_i = 1 | r)) for a batch; give either sigma or alpha."""
    if alpha is None:
        alpha = alpha_of(sigma)
    ones, totals, _ = map_sums_batch(source, R, alpha)
    return _map_bits(ones, totals), ones / totals[:, None]


def map_decode(source, r, sigma: float) -> DecodeOutcome:
    code = _code(source)
    bits, post = map_decode_batch(code, r, sigma)
    return DecodeOutcome(message=bits[0], codeword=encode(code, bits[0]), metric=post[0])


# ----------------------------------------------------------------------
# brute-force references
# ----------------------------------------------------------------------


def _check_oracle(code: GeneratorMatrix):
    if code.k > ORACLE_MAX_K:
        raise ValueError(f"oracle decoders are limited to k <= {ORACLE_MAX_K}, got k={code.k}")


def _likelihoods(code: GeneratorMatrix, R, sigma: float) -> np.ndarray:
    """p(r | s_j) for every frame and codeword, straight from the Gaussian density."""
    symbols = 2.0 * CodewordStream(code).codewords().astype(np.float64) - 1.0
    diff = R[:, None, :] - symbols[None, :, :]
    pdf = np.exp(-(diff**2) / (2.0 * sigma * sigma)) / math.sqrt(2.0 * math.pi * sigma * sigma)
    return pdf.prod(axis=-1)


def oracle_ml_batch(source, R, sigma: float, chunk: int = 2048) -> np.ndarray:
    code = _code(source)
    _check_oracle(code)
    R = _rows2d(code, R)
    out = np.empty(R.shape[0], dtype=np.int64)
    for a in range(0, R.shape[0], chunk):
        out[a : a + chunk] = _likelihoods(code, R[a : a + chunk], sigma).argmax(axis=1)
    return out


def oracle_ml(source, r, sigma: float) -> DecodeOutcome:
    code = _code(source)
    idx = oracle_ml_batch(code, r, sigma)[0]
    msg = index_to_message(idx, code.k)
    return DecodeOutcome(message=msg, codeword=encode(code, msg))


def oracle_map_batch(source, R, sigma: float, chunk: int = 2048) -> tuple[np.ndarray, np.ndarray]:
    """(bits, p(r | b_i = 1) / (p(r | b_i = 0) + p(r | b_i = 1)))."""
    code = _code(source)
    _check_oracle(code)
    R = _rows2d(code, R)
    msgs = CodewordStream(code).messages().astype(bool)
    bits = np.empty((R.shape[0], code.k), dtype=np.uint8)
    post = np.empty((R.shape[0], code.k))
    for a in range(0, R.shape[0], chunk):
        lik = _likelihoods(code, R[a : a + chunk], sigma)
        p1 = np.stack([lik[:, msgs[:, i]].sum(axis=1) for i in range(code.k)], axis=1)
        p0 = np.stack([lik[:, ~msgs[:, i]].sum(axis=1) for i in range(code.k)], axis=1)
        bits[a : a + chunk] = p1 > p0
        post[a : a + chunk] = p1 / (p0 + p1)
    return bits, post


def oracle_map(source, r, sigma: float) -> np.ndarray:
    return oracle_map_batch(source, r, sigma)[0][0]


# ----------------------------------------------------------------------
# trellis evaluation of the same two rules
# ----------------------------------------------------------------------


def trellis_ml_batch(source, R) -> tuple[np.ndarray, np.ndarray]:
    code = _code(source)
    return trellis_ml(code, _rows2d(code, R))


def trellis_map_batch(source, R, sigma=None, alpha=None) -> tuple[np.ndarray, np.ndarray]:
    code = _code(source)
    R = _rows2d(code, R)
    if alpha is None:
        alpha = alpha_of(sigma)
    if np.max(np.abs(R)) * np.max(alpha) > 700.0:
        raise ValueError("alpha * |r| too large for the scaled trellis recursion")
    ones, zeros = trellis_posteriors(code, R, alpha)
    return (ones > zeros).astype(np.uint8), ones


# ----------------------------------------------------------------------
# bounded distance decoding
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SyndromeTable:
    t: int
    hcols: np.ndarray  # packed parity-check columns, one per coordinate
    patterns: np.ndarray  # syndrome -> packed error pattern, -1 if none within t

    def syndromes(self, hard_words: np.ndarray) -> np.ndarray:
        bits = unpack_bits(hard_words, self.hcols.size).astype(bool)
        return np.bitwise_xor.reduce(np.where(bits, self.hcols, np.int64(0)), axis=-1)


@lru_cache(maxsize=16)
def syndrome_table(code: GeneratorMatrix, t: int) -> SyndromeTable:
    h = parity_check_matrix(code)
    hcols = pack_bits(h.T).astype(np.int64)
    patterns = np.full(1 << h.shape[0], -1, dtype=np.int64)
    for e in error_patterns(code.n, t):
        syn = 0
        for i in range(code.n):
            if (e >> i) & 1:
                syn ^= int(hcols[i])
        if patterns[syn] != -1:
            raise ValueError(f"t={t} exceeds the unique-decoding radius of {code.name}")
        patterns[syn] = e
    return SyndromeTable(t=t, hcols=hcols, patterns=patterns)


def default_bdd_method(code: GeneratorMatrix) -> str:
    return "search" if code.meta.get("family") == "polar" else "syndrome"


def bdd_decode_batch(code: GeneratorMatrix, hard_bits, t: int | None = None, method: str | None = None):
    """(messages, packed codewords, failure flags) for a batch of hard words.

    On failure the message is the linear projection of the hard word and the
    codeword entry is meaningless.
    """
    hard_bits = np.atleast_2d(np.asarray(hard_bits, dtype=np.uint8))
    if t is None:
        t = bdd_radius(code)
    method = method or default_bdd_method(code)
    words = pack_bits(hard_bits).view(np.int64)
    if method == "syndrome":
        table = syndrome_table(code, t)
        err = table.patterns[table.syndromes(words.view(np.uint64))]
        fail = err < 0
        cw = np.where(fail, words, words ^ err)
    elif method == "search":
        book = codebook_words(code).view(np.int64)
        idx = _kernels.nearest_codeword(words, book, t)
        fail = idx < 0
        cw = np.where(fail, words, book[np.maximum(idx, 0)])
    else:
        raise ValueError(f"unknown BDD method {method!r}")
    msgs = recover_message(code, unpack_bits(cw.view(np.uint64), code.n))
    return msgs, cw.view(np.uint64), fail


def bdd_decode(code: GeneratorMatrix, hard_bits, t: int | None = None, method: str | None = None) -> DecodeOutcome:
    msgs, cw, fail = bdd_decode_batch(code, hard_bits, t, method)
    codeword = None if fail[0] else unpack_bits(cw[0], code.n)
    return DecodeOutcome(message=msgs[0], codeword=codeword, bdd_failure=bool(fail[0]))


def hd_decode_batch(code: GeneratorMatrix, R) -> np.ndarray:
    """Hard decisions projected straight to a message, no correction."""
    return recover_message(code, hard_decision(_rows2d(code, R)))
