"""Compiled inner loops over the 2^k codebook.

Packed words are passed as int64 views (n <= 64, only bit operations are
applied).  All kernels loop over frames in the outer dimension and are
deterministic: summation order is fixed by the codebook order.
"""

import numba as nb
import numpy as np

_JIT = dict(cache=True, nogil=True)


@nb.njit(**_JIT)
def _byte_tables(r, n):
    """T[q, v] = sum of r[8q + i] over the set bits i of byte value v."""
    nq = (n + 7) // 8
    t = np.zeros((nq, 256))
    for q in range(nq):
        for v in range(1, 256):
            low = v & (-v)
            i = 0
            while (low >> i) != 1:
                i += 1
            pos = 8 * q + i
            t[q, v] = t[q, v & (v - 1)] + (r[pos] if pos < n else 0.0)
    return t


@nb.njit(**_JIT)
def _gather(t, w, nq):
    s = 0.0
    for q in range(nq):
        s += t[q, (w >> (8 * q)) & 255]
    return s


# below this many columns the per-frame byte tables cost more than they save
SMALL_BOOK = 1 << 10


@nb.njit(**_JIT)
def _direct(r, w, n):
    s = 0.0
    for i in range(n):
        s += r[i] * ((w >> i) & 1)
    return s


@nb.njit(**_JIT)
def _scores(r, words, n):
    ncol = words.shape[0]
    out = np.empty(ncol)
    if ncol <= SMALL_BOOK:
        for j in range(ncol):
            out[j] = _direct(r, words[j], n)
    else:
        nq = (n + 7) // 8
        t = _byte_tables(r, n)
        for j in range(ncol):
            out[j] = _gather(t, words[j], nq)
    return out


@nb.njit(**_JIT)
def slnn_forward(R, words, n, keep):
    """Scores r . W1[:, j] by sign-select gather sums; argmax with lowest-index ties."""
    nf = R.shape[0]
    ncol = words.shape[0]
    scores = np.empty((nf if keep else 0, ncol if keep else 0))
    best = np.empty(nf, dtype=np.int64)
    best_s = np.empty(nf)
    for f in range(nf):
        sc = _scores(R[f], words, n)
        bj = 0
        bs = -np.inf
        for j in range(ncol):
            s = sc[j]
            if keep:
                scores[f, j] = s
            if s > bs:
                bs = s
                bj = j
        best[f] = bj
        best_s[f] = bs
    return scores, best, best_s


@nb.njit(**_JIT)
def _mlnn_small(R, words, n, words2, k, alpha, ones, zeros, best):
    ncol = words.shape[0]
    acc = np.empty(k)
    for f in range(R.shape[0]):
        sc = _scores(R[f], words, n)
        a = alpha[f]
        m = -np.inf
        bj = 0
        for j in range(ncol):
            if sc[j] > m:
                m = sc[j]
                bj = j
        acc[:] = 0.0
        total = 0.0
        for j in range(ncol):
            e = np.exp(a * (sc[j] - m))
            total += e
            w2 = words2[j]
            for i in range(k):
                acc[i] += e * ((w2 >> i) & 1)
        for i in range(k):
            ones[f, i] = acc[i] / total
            zeros[f, i] = (total - acc[i]) / total
        best[f] = bj


@nb.njit(**_JIT)
def mlnn_forward(R, words, n, words2, k, alpha):
    """Streamed scaled-softmax hidden layer followed by h . W2.

    Returns per-frame sums over hidden units of h_j * W2[j, i] (ones side) and
    h_j * (1 - W2[j, i]) (zeros side), both normalised by sum_j h_j, plus the
    winning hidden unit.  The running maximum is subtracted before every
    exponential and accumulators are rescaled when it moves.
    """
    nf = R.shape[0]
    ncol = words.shape[0]
    nq = (n + 7) // 8
    nq2 = (k + 7) // 8
    ones = np.zeros((nf, k))
    zeros = np.zeros((nf, k))
    best = np.empty(nf, dtype=np.int64)
    if ncol <= SMALL_BOOK:
        _mlnn_small(R, words, n, words2, k, alpha, ones, zeros, best)
        return ones, zeros, best
    for f in range(nf):
        t = _byte_tables(R[f], n)
        a = alpha[f]
        acc = np.zeros((nq2, 256))
        m = -np.inf
        bj = 0
        for j in range(ncol):
            s = _gather(t, words[j], nq)
            if s > m:
                if m > -np.inf:
                    scale = np.exp(a * (m - s))
                    for q in range(nq2):
                        for v in range(256):
                            acc[q, v] *= scale
                m = s
                bj = j
            e = np.exp(a * (s - m))
            w2 = words2[j]
            for q in range(nq2):
                acc[q, (w2 >> (8 * q)) & 255] += e
        total = 0.0
        for v in range(256):
            total += acc[0, v]
        for i in range(k):
            q = i // 8
            b = i % 8
            s1 = 0.0
            s0 = 0.0
            for v in range(256):
                if (v >> b) & 1:
                    s1 += acc[q, v]
                else:
                    s0 += acc[q, v]
            ones[f, i] = s1 / total
            zeros[f, i] = s0 / total
        best[f] = bj
    return ones, zeros, best


@nb.njit(**_JIT)
def _ctz(t):
    i = 0
    while (t & 1) == 0:
        t >>= 1
        i += 1
    return i


@nb.njit(**_JIT)
def _score_from_scratch(r, cw, n):
    s = 0.0
    for i in range(n):
        if (cw >> i) & 1:
            s += r[i]
    return s


@nb.njit(fastmath={"reassoc", "contract"}, **_JIT)
def _flip(u, indptr, indices, row):
    """Score change for XOR-ing a generator row into the codeword.

    u[i] = r[i] * (1 - 2 c[i]) is the gain of setting bit i; the flipped
    positions change sign.
    """
    d = 0.0
    for p in range(indptr[row], indptr[row + 1]):
        i = indices[p]
        d += u[i]
        u[i] = -u[i]
    return d


@nb.njit(**_JIT)
def gray_ml(R, rows, indptr, indices, k, n, debug):
    """Codeword-wise ML by walking all messages in binary-reflected Gray order.

    Step t visits message index g = t ^ (t >> 1); the flipped index bit is
    ctz(t), which selects generator row k - 1 - ctz(t).  The correlation is
    updated by +/- the received values on that row's support.
    """
    nf = R.shape[0]
    best = np.empty(nf, dtype=np.int64)
    best_s = np.empty(nf)
    total = np.int64(1) << k
    for f in range(nf):
        r = R[f]
        u = r.copy()
        cw = np.int64(0)
        s = 0.0
        bg = np.int64(0)
        bs = 0.0
        for t in range(1, total):
            row = k - 1 - _ctz(t)
            s += _flip(u, indptr, indices, row)
            cw ^= rows[row]
            g = t ^ (t >> 1)
            if s > bs or (s == bs and g < bg):
                bs = s
                bg = g
            if debug and (t & 1023) == 0:
                ref = _score_from_scratch(r, cw, n)
                if abs(ref - s) > 1e-9:
                    raise ValueError("incremental Gray-code score drifted from the direct correlation")
        best[f] = bg
        best_s[f] = bs
    return best, best_s


@nb.njit(**_JIT)
def gray_map(R, rows, indptr, indices, k, n, alpha, prune):
    """Bit-wise MAP sums over the Gray-ordered codebook.

    Keeps k + 1 accumulators per frame: sum of exp(alpha * (s - M)) over
    codewords whose message bit i is 1, and the grand total.  M is the
    running maximum (online rescaling).  Terms below exp(-prune) relative to
    the running maximum are skipped.
    """
    nf = R.shape[0]
    ones = np.zeros((nf, k))
    totals = np.zeros(nf)
    best = np.empty(nf, dtype=np.int64)
    total_cw = np.int64(1) << k
    for f in range(nf):
        u = R[f].copy()
        a = alpha[f]
        acc = np.zeros(k)
        s = 0.0
        m = 0.0
        bg = np.int64(0)
        tot = 1.0  # the all-zero codeword, score 0 == m
        for t in range(1, total_cw):
            row = k - 1 - _ctz(t)
            s += _flip(u, indptr, indices, row)
            g = t ^ (t >> 1)
            if s > m:
                scale = np.exp(a * (m - s))
                tot *= scale
                for i in range(k):
                    acc[i] *= scale
                m = s
                bg = g
            elif s == m and g < bg:
                bg = g
            x = a * (s - m)
            if x < -prune:
                continue
            e = np.exp(x)
            tot += e
            for i in range(k):
                acc[i] += e * ((g >> (k - 1 - i)) & 1)
        for i in range(k):
            ones[f, i] = acc[i]
        totals[f] = tot
        best[f] = bg
    return ones, totals, best


@nb.njit(**_JIT)
def nearest_codeword(hard, words, t):
    """Index of the codeword within Hamming distance t of each hard word, or -1."""
    nf = hard.shape[0]
    out = np.full(nf, -1, dtype=np.int64)
    for f in range(nf):
        h = hard[f]
        for j in range(words.shape[0]):
            x = h ^ words[j]
            c = 0
            while x and c <= t:
                x &= x - 1
                c += 1
            if c <= t:
                out[f] = j
                break
    return out
