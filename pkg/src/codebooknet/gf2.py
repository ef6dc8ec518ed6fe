"""Binary linear block codes: construction, encoding and codebook scans.

Codewords are packed into unsigned machine words with coordinate ``i``
(0-based) stored in bit ``i``.  Messages use the canonical index order in
which message index ``v`` (0-based) carries bit ``b_1`` in its MSB, so row
``i`` of the generator matrix is the codeword of message index
``1 << (k - 1 - i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterator

import numpy as np

MAX_N = 64
MAX_ENUM_K = 24
MAX_ENUMERATOR_K = 16


# ----------------------------------------------------------------------
# bit packing helpers
# ----------------------------------------------------------------------


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into uint64 words (bit i = column i)."""
    bits = np.asarray(bits, dtype=np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(bits.shape[-1], dtype=np.uint64))
    return (bits * weights).sum(axis=-1, dtype=np.uint64)


def unpack_bits(words, width: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    words = np.asarray(words, dtype=np.uint64)
    shifts = np.arange(width, dtype=np.uint64)
    return ((words[..., None] >> shifts) & np.uint64(1)).astype(np.uint8)


def index_to_message(index, k: int) -> np.ndarray:
    """Message bits (MSB-first) for 0-based canonical message indices."""
    index = np.asarray(index, dtype=np.uint64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint64)
    return ((index[..., None] >> shifts) & np.uint64(1)).astype(np.uint8)


def message_to_index(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint64)
    k = bits.shape[-1]
    weights = np.left_shift(np.uint64(1), np.arange(k - 1, -1, -1, dtype=np.uint64))
    return (bits * weights).sum(axis=-1, dtype=np.uint64)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


# ----------------------------------------------------------------------
# GF(2) linear algebra on dense uint8 matrices
# ----------------------------------------------------------------------


def gf2_rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (rref, pivot columns)."""
    a = (np.array(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(mat: np.ndarray) -> int:
    return len(gf2_rref(mat)[1])


def gf2_inv(mat: np.ndarray) -> np.ndarray:
    k = mat.shape[0]
    aug = np.concatenate([np.asarray(mat, np.uint8) & 1, np.eye(k, dtype=np.uint8)], axis=1)
    red, piv = gf2_rref(aug)
    if piv[:k] != list(range(k)):
        raise ValueError("matrix is singular over GF(2)")
    return red[:, k:]


def gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {x : mat @ x = 0} over GF(2)."""
    red, piv = gf2_rref(mat)
    cols = red.shape[1]
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(piv):
            basis[i, p] = red[r, f]
    return basis


# ----------------------------------------------------------------------
# code objects
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorMatrix:
    """A k x n binary generator matrix with packed rows.

    ``meta`` carries construction details (polar frozen set, BCH generator
    polynomial, ...) and does not take part in equality or hashing.
    """

    name: str
    k: int
    n: int
    rows: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)
    baseline: bool = field(default=False, compare=False, hash=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}], got {self.n}")
        upper = self.n if self.baseline else self.n - 1
        if not 1 <= self.k <= upper:
            raise ValueError(f"k must satisfy 1 <= k < n, got k={self.k}, n={self.n}")
        if len(self.rows) != self.k:
            raise ValueError(f"expected {self.k} rows, got {len(self.rows)}")
        if any(r < 0 or r >> self.n for r in self.rows):
            raise ValueError(f"row does not fit in n={self.n} bits")
        if gf2_rank(self.matrix) != self.k:
            raise ValueError(f"rows of {self.name!r} are linearly dependent over GF(2)")

    @classmethod
    def from_matrix(cls, name: str, mat, **kwargs) -> "GeneratorMatrix":
        mat = np.asarray(mat, dtype=np.uint8)
        if mat.ndim != 2:
            raise ValueError("generator matrix must be 2-D")
        rows = tuple(int(w) for w in pack_bits(mat))
        return cls(name=name, k=mat.shape[0], n=mat.shape[1], rows=rows, **kwargs)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def matrix(self) -> np.ndarray:
        return unpack_bits(np.array(self.rows, dtype=np.uint64), self.n)

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "k": self.k, "rate": self.rate, **self.meta}


@dataclass(frozen=True)
class CodewordStream:
    """All 2^k (index, message, codeword) triples of a code in canonical order."""

    code: GeneratorMatrix

    def __len__(self) -> int:
        return 1 << self.code.k

    def __iter__(self) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        # j is 1-based, as in the W1 column numbering
        k, n = self.code.k, self.code.n
        for v, w in enumerate(self.words):
            yield v + 1, index_to_message(v, k), unpack_bits(w, n)

    @cached_property
    def words(self) -> np.ndarray:
        """Packed codewords; entry v is the codeword of message index v."""
        return codebook_words(self.code)

    def messages(self) -> np.ndarray:
        return index_to_message(np.arange(len(self), dtype=np.uint64), self.code.k)

    def codewords(self) -> np.ndarray:
        return unpack_bits(self.words, self.code.n)


@lru_cache(maxsize=16)
def codebook_words(code: GeneratorMatrix) -> np.ndarray:
    if code.k > MAX_ENUM_K:
        raise ValueError(f"k={code.k} too large to enumerate (max {MAX_ENUM_K})")
    words = np.zeros(1, dtype=np.uint64)
    # index bit p (LSB first) selects row k-1-p
    for row in reversed(code.rows):
        words = np.concatenate([words, words ^ np.uint64(row)])
    words.setflags(write=False)
    return words


def encode(code: GeneratorMatrix, m) -> np.ndarray:
    """m . G over GF(2); accepts a single message or a (..., k) batch."""
    m = np.asarray(m)
    if m.shape[-1:] != (code.k,):
        raise ValueError(f"message length {m.shape[-1:]} does not match k={code.k}")
    return ((m.astype(np.int64) @ code.matrix.astype(np.int64)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class MessageRecovery:
    """Right inverse of G: an n x k matrix with G @ rinv = I_k."""

    rinv: np.ndarray
    info_set: tuple[int, ...]

    def __call__(self, c) -> np.ndarray:
        c = np.asarray(c)
        return ((c.astype(np.int64) @ self.rinv.astype(np.int64)) & 1).astype(np.uint8)


@lru_cache(maxsize=16)
def message_recovery(code: GeneratorMatrix) -> MessageRecovery:
    g = code.matrix
    _, piv = gf2_rref(g)
    inv = gf2_inv(g[:, piv])
    rinv = np.zeros((code.n, code.k), dtype=np.uint8)
    rinv[piv] = inv
    return MessageRecovery(rinv=rinv, info_set=tuple(piv))


def recover_message(code: GeneratorMatrix, c) -> np.ndarray:
    c = np.asarray(c)
    if c.shape[-1:] != (code.n,):
        raise ValueError(f"word length {c.shape[-1:]} does not match n={code.n}")
    return message_recovery(code)(c)


@lru_cache(maxsize=16)
def parity_check_matrix(code: GeneratorMatrix) -> np.ndarray:
    return gf2_nullspace(code.matrix)


def code_stats(code: GeneratorMatrix, enumerator: bool | None = None) -> dict:
    """Minimum distance, total codebook weight and (small k) weight enumerator."""
    if code.k > MAX_ENUM_K:
        raise ValueError(f"k={code.k} too large to enumerate (max {MAX_ENUM_K})")
    weights = np.bitwise_count(codebook_words(code))
    stats = {
        "name": code.name,
        "n": code.n,
        "k": code.k,
        "dmin": int(weights[1:].min()),
        "weight_sum": int(weights.sum(dtype=np.int64)),
    }
    if enumerator is None:
        enumerator = code.k <= MAX_ENUMERATOR_K
    if enumerator:
        stats["weight_enumerator"] = np.bincount(weights, minlength=code.n + 1).tolist()
    return stats


def covered_coordinates(code: GeneratorMatrix) -> int:
    """OR of all rows; equals 2^n - 1 iff no coordinate is identically zero."""
    acc = 0
    for r in code.rows:
        acc |= r
    return acc


# ----------------------------------------------------------------------
# the three codes
# ----------------------------------------------------------------------

_HAMMING_PARITY = ((1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1))


def build_hamming_7_4() -> GeneratorMatrix:
    g = np.concatenate([np.eye(4, dtype=np.uint8), np.array(_HAMMING_PARITY, dtype=np.uint8)], axis=1)
    return GeneratorMatrix.from_matrix("hamming74", g, meta={"family": "hamming", "form": "systematic [I|P]"})


def bhattacharyya_parameters(n_log: int, design_ebn0_db: float, rate: float) -> np.ndarray:
    """Bhattacharyya parameter of each synthetic channel of F^{(x)n_log}.

    The outermost Kronecker factor corresponds to the MSB of the channel
    index, so the transforms are applied from MSB to LSB.
    """
    z0 = np.exp(-rate * 10.0 ** (design_ebn0_db / 10.0))
    n = 1 << n_log
    z = np.empty(n)
    for i in range(n):
        v = z0
        for level in range(n_log - 1, -1, -1):
            v = v * v if (i >> level) & 1 else 2.0 * v - v * v
        z[i] = v
    return z


def polar_frozen_set(n_log: int, k: int, design_ebn0_db: float) -> tuple[int, ...]:
    n = 1 << n_log
    z = bhattacharyya_parameters(n_log, design_ebn0_db, k / n)
    # worst channels first, equal Z -> lower index frozen first
    order = sorted(range(n), key=lambda i: (-z[i], i))
    return tuple(sorted(order[: n - k]))


def build_polar_16_8(design_ebn0_db: float = 0.0) -> GeneratorMatrix:
    if not np.isfinite(design_ebn0_db):
        raise ValueError("design Eb/N0 must be finite")
    kernel = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    gn = np.ones((1, 1), dtype=np.uint8)
    for _ in range(4):
        gn = np.kron(gn, kernel)
    frozen = polar_frozen_set(4, 8, design_ebn0_db)
    info = tuple(i for i in range(16) if i not in frozen)
    meta = {
        "family": "polar",
        "design_ebn0_db": float(design_ebn0_db),
        "frozen_set": list(frozen),
        "info_set": list(info),
    }
    return GeneratorMatrix.from_matrix("polar168", gn[list(info)], meta=meta)


# GF(2^m) polynomials over GF(2) are ints with bit i = coefficient of x^i.


def _gf_tables(m: int, prim_poly: int) -> tuple[list[int], list[int]]:
    size = (1 << m) - 1
    exp = [0] * (2 * size)
    log = [0] * (1 << m)
    x = 1
    for i in range(size):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= prim_poly
    if x != 1:
        raise ValueError("polynomial is not primitive")
    for i in range(size, 2 * size):
        exp[i] = exp[i - size]
    return exp, log


def _minimal_polynomial(e: int, m: int, exp: list[int], log: list[int]) -> int:
    size = (1 << m) - 1
    coset = sorted({(e << j) % size for j in range(m)})
    # coefficients in GF(2^m), index = degree
    poly = [1]
    for c in coset:
        root = exp[c]
        nxt = [0] * (len(poly) + 1)
        for d, a in enumerate(poly):
            nxt[d + 1] ^= a
            if a:
                nxt[d] ^= exp[log[a] + log[root]]
        poly = nxt
    if any(a not in (0, 1) for a in poly):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return sum(a << d for d, a in enumerate(poly))


def poly_mul(a: int, b: int) -> int:
    res = 0
    while b:
        if b & 1:
            res ^= a
        a <<= 1
        b >>= 1
    return res


def poly_mod(a: int, b: int) -> int:
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def bch_generator_polynomial(m: int, prim_poly: int, t: int) -> int:
    """Narrow-sense binary BCH generator: lcm of minimal polys of alpha^1..alpha^(2t)."""
    exp, log = _gf_tables(m, prim_poly)
    size = (1 << m) - 1
    seen: set[int] = set()
    g = 1
    for e in range(1, 2 * t + 1):
        rep = min((e << j) % size for j in range(m))
        if rep in seen:
            continue
        seen.add(rep)
        g = poly_mul(g, _minimal_polynomial(e, m, exp, log))
    return g


BCH_PRIMITIVE_POLY = 0b100101  # x^5 + x^2 + 1


def build_bch_31_21() -> GeneratorMatrix:
    g = bch_generator_polynomial(5, BCH_PRIMITIVE_POLY, 2)
    n, k = 31, 31 - (g.bit_length() - 1)
    rows = tuple(g << i for i in range(k))
    meta = {
        "family": "bch",
        "primitive_poly": bin(BCH_PRIMITIVE_POLY),
        "generator_poly": bin(g),
        "t_design": 2,
    }
    return GeneratorMatrix(name="bch3121", k=k, n=n, rows=rows, meta=meta)


def build_uncoded(n: int) -> GeneratorMatrix:
    """Identity 'code' used as an uncoded BPSK baseline."""
    return GeneratorMatrix.from_matrix(f"uncoded{n}", np.eye(n, dtype=np.uint8), baseline=True, meta={"family": "uncoded"})


CODE_NAMES = ("hamming74", "polar168", "bch3121")


@lru_cache(maxsize=None)
def get_code(name: str) -> GeneratorMatrix:
    if name == "hamming74":
        return build_hamming_7_4()
    if name == "polar168":
        return build_polar_16_8()
    if name == "bch3121":
        return build_bch_31_21()
    if name.startswith("uncoded") and name[7:].isdigit():
        return build_uncoded(int(name[7:]))
    raise KeyError(f"unknown code {name!r}; choose from {', '.join(CODE_NAMES)} or uncoded<n>")


def load_generator(path, name: str = "custom") -> GeneratorMatrix:
    """Read a generator matrix written as one 0/1 row string per line."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().replace(" ", "")
            if line:
                if set(line) - {"0", "1"}:
                    raise ValueError(f"non-binary entry in row {line!r}")
                rows.append([int(ch) for ch in line])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("generator rows must be non-empty and of equal length")
    return GeneratorMatrix.from_matrix(name, np.array(rows, dtype=np.uint8))


def bdd_radius(code: GeneratorMatrix) -> int:
    return (code_stats(code, enumerator=False)["dmin"] - 1) // 2


def error_patterns(n: int, t: int) -> Iterator[int]:
    for w in range(t + 1):
        for pos in combinations(range(n), w):
            yield sum(1 << p for p in pos)
