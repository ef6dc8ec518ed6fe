"""Codebook-defined single- and multi-label decoding networks.

The single-label net has one weight matrix W1 (n x 2^k) whose column j is
codeword j; its argmax output is the codeword-wise ML decision.  The
multi-label net appends W2 (2^k x k), whose row j is message j, behind a
scaled-softmax hidden layer; thresholding its outputs at 1/2 gives the
bit-wise MAP decision when alpha = 2 / sigma^2.

Weights are kept packed.  W1 stores one n-bit word per column, W2 one k-bit
word per row, so even the 2^21-unit BCH nets fit in a few megabytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import ebn0_to_sigma
from .gf2 import CodewordStream, GeneratorMatrix, unpack_bits

DENSE_MAX_K = 16


@dataclass(frozen=True)
class BinaryMatrix:
    """Binary matrix stored as packed words along its short dimension.

    ``packed="columns"``: words[j] holds column j, bit i = entry (i, j).
    ``packed="rows"``: words[j] holds row j, bit i = entry (j, i).
    """

    shape: tuple[int, int]
    words: np.ndarray
    packed: str

    def dense(self) -> np.ndarray:
        if self.packed == "columns":
            return unpack_bits(self.words, self.shape[0]).T.copy()
        return unpack_bits(self.words, self.shape[1])

    def nnz(self) -> int:
        return int(np.bitwise_count(self.words).sum(dtype=np.int64))


@dataclass(frozen=True)
class LayeredNet:
    layer_sizes: tuple[int, ...]
    weights: tuple[BinaryMatrix, ...]
    activations: tuple[str, ...]
    alpha_mode: str = "none"  # "matched" (2 / sigma^2), "fixed", or "none" for the SLNN
    alpha: float | None = None
    code: GeneratorMatrix | None = None

    @property
    def kind(self) -> str:
        return "slnn" if len(self.weights) == 1 else "mlnn"

    def alpha_for(self, sigma) -> np.ndarray:
        if self.alpha_mode == "fixed":
            return np.broadcast_to(np.float64(self.alpha), np.shape(sigma)).copy()
        sigma = np.asarray(sigma, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return 2.0 / (sigma * sigma)


def _w1(stream: CodewordStream) -> BinaryMatrix:
    return BinaryMatrix((stream.code.n, len(stream)), stream.words, "columns")


def _w2(stream: CodewordStream) -> BinaryMatrix:
    k = stream.code.k
    idx = np.arange(len(stream), dtype=np.uint64)
    # row j = message j with b_1 first: bit i of the row word is bit k-1-i of j
    words = np.zeros_like(idx)
    for i in range(k):
        words |= ((idx >> np.uint64(k - 1 - i)) & np.uint64(1)) << np.uint64(i)
    return BinaryMatrix((len(stream), k), words, "rows")


def build_slnn(stream) -> LayeredNet:
    if isinstance(stream, GeneratorMatrix):
        stream = CodewordStream(stream)
    code = stream.code
    return LayeredNet(
        layer_sizes=(code.n, len(stream)),
        weights=(_w1(stream),),
        activations=("identity+argmax",),
        code=code,
    )


def fixed_alpha(ebn0_db: float, rate: float) -> float:
    """The matched alpha of a given operating point, for use at every SNR."""
    s = ebn0_to_sigma(ebn0_db, rate)
    return 2.0 / (s * s)


def build_mlnn(stream, alpha_mode="matched") -> LayeredNet:
    """alpha_mode: "matched", a float (fixed alpha), or ("fixed", value)."""
    if isinstance(stream, GeneratorMatrix):
        stream = CodewordStream(stream)
    code = stream.code
    if isinstance(alpha_mode, tuple):
        alpha_mode = alpha_mode[1]
    if alpha_mode == "matched":
        mode, alpha = "matched", None
    else:
        mode, alpha = "fixed", float(alpha_mode)
        if not alpha > 0:
            raise ValueError("fixed alpha must be positive")
    return LayeredNet(
        layer_sizes=(code.n, len(stream), code.k),
        weights=(_w1(stream), _w2(stream)),
        activations=("scaled_softmax", "threshold(0.5)"),
        alpha_mode=mode,
        alpha=alpha,
        code=code,
    )


@dataclass
class SlnnOutput:
    scores: np.ndarray | None
    index: np.ndarray  # 0-based column of the winning output neuron (== message index)
    best_score: np.ndarray


@dataclass
class MlnnOutput:
    posteriors: np.ndarray  # P(b_i = 1 | r)
    posteriors0: np.ndarray  # P(b_i = 0 | r), accumulated separately
    bits: np.ndarray
    hidden: np.ndarray | None = None


def _as_batch(net: LayeredNet, r) -> tuple[np.ndarray, bool]:
    r = np.asarray(r, dtype=np.float64)
    single = r.ndim == 1
    R = np.ascontiguousarray(np.atleast_2d(r))
    if R.shape[-1] != net.layer_sizes[0]:
        raise ValueError(f"input length {R.shape[-1]} does not match {net.layer_sizes[0]} input neurons")
    return R, single


def forward_slnn(net: LayeredNet, r, keep_scores: bool | None = None) -> SlnnOutput:
    """Scores r . W1 and their argmax (ties -> lowest index).

    ``keep_scores`` defaults to True when 2^k <= 2^16; otherwise the output
    layer is streamed and only the winner is returned.
    """
    R, single = _as_batch(net, r)
    w1 = net.weights[0]
    if keep_scores is None:
        keep_scores = w1.shape[1] <= 1 << DENSE_MAX_K
    scores, idx, best = _kernels.slnn_forward(R, w1.words.view(np.int64), w1.shape[0], keep_scores)
    out = SlnnOutput(scores if keep_scores else None, idx, best)
    if single:
        out = SlnnOutput(None if out.scores is None else out.scores[0], idx[0], best[0])
    return out


def scaled_softmax(v, alpha: float) -> np.ndarray:
    """exp(alpha v_j) / sum_l exp(alpha v_l) over the last axis, max-subtracted.

    alpha = inf gives the one-hot vector of the first maximum.
    """
    v = np.asarray(v, dtype=np.float64)
    if math.isinf(alpha):
        out = np.zeros_like(v)
        np.put_along_axis(out, v.argmax(axis=-1)[..., None], 1.0, axis=-1)
        return out
    z = alpha * (v - v.max(axis=-1, keepdims=True))
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_mlnn(net: LayeredNet, r, sigma=None, keep_hidden: bool = False) -> MlnnOutput:
    """Hidden h = scaled softmax(alpha r . W1), outputs h . W2, threshold 1/2.

    The hidden layer is streamed; ``keep_hidden`` materialises it (k <= 16).
    A matched net needs sigma; sigma = 0 is the alpha -> inf limit.
    """
    if net.kind != "mlnn":
        raise ValueError("forward_mlnn needs a multi-label net")
    R, single = _as_batch(net, r)
    if net.alpha_mode == "matched":
        if sigma is None:
            raise ValueError("a matched-alpha net needs sigma")
        if np.any(np.asarray(sigma) < 0):
            raise ValueError("sigma must be non-negative")
    alpha = np.broadcast_to(net.alpha_for(0.0 if sigma is None else sigma), (R.shape[0],)).copy()
    w1, w2 = net.weights
    k = w2.shape[1]
    ones = np.empty((R.shape[0], k))
    zeros = np.empty((R.shape[0], k))
    finite = np.isfinite(alpha)
    if finite.any():
        o, z, _ = _kernels.mlnn_forward(R[finite], w1.words.view(np.int64), w1.shape[0], w2.words.view(np.int64), k, alpha[finite])
        ones[finite], zeros[finite] = o, z
    if not finite.all():
        _, idx, _ = _kernels.slnn_forward(R[~finite], w1.words.view(np.int64), w1.shape[0], False)
        hot = unpack_bits(w2.words[idx], k).astype(np.float64)
        ones[~finite], zeros[~finite] = hot, 1.0 - hot
    bits = (ones > 0.5).astype(np.uint8)
    hidden = None
    if keep_hidden:
        if w1.shape[1] > 1 << DENSE_MAX_K:
            raise ValueError("hidden layer too wide to materialise")
        scores = _kernels.slnn_forward(R, w1.words.view(np.int64), w1.shape[0], True)[0]
        hidden = np.stack([scaled_softmax(s, a) for s, a in zip(scores, alpha)])
    if single:
        return MlnnOutput(ones[0], zeros[0], bits[0], None if hidden is None else hidden[0])
    return MlnnOutput(ones, zeros, bits, hidden)


def edge_count(net: LayeredNet) -> dict:
    per_layer = [w.nnz() for w in net.weights]
    return {"per_layer": per_layer, "total": sum(per_layer)}


def describe(net: LayeredNet) -> dict:
    edges = edge_count(net)
    return {
        "code": net.code.name if net.code else None,
        "kind": net.kind,
        "layer_sizes": list(net.layer_sizes),
        "edges_per_layer": edges["per_layer"],
        "total_edges": edges["total"],
        "weights": "binary",
        "training": "No",
        "alpha_mode": net.alpha_mode if net.alpha is None else f"fixed({net.alpha:.6g})",
    }
