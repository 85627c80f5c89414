"""Exact GF(2^L) linear algebra for checking decodability of computed IVs.

Elements are plain integers in ``[0, 2^L)``; vectors and matrices are
``numpy`` int64 arrays. Addition is XOR, multiplication goes through
log/antilog tables built from a fixed irreducible polynomial per L.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# x^4+x+1, x^8+x^4+x^3+x+1, x^16+x^12+x^3+x+1
POLYNOMIALS = {4: 0x13, 8: 0x11B, 16: 0x1100B}


class FieldTooSmallError(ValueError):
    pass


class SingularError(ArithmeticError):
    pass


def clmul(a: int, b: int, L: int) -> int:
    """Shift-and-add product modulo the field polynomial (no tables)."""
    poly = POLYNOMIALS[L]
    top = 1 << L
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


class GF:
    def __init__(self, L: int = 8):
        if L not in POLYNOMIALS:
            raise ValueError(f"unsupported field size 2^{L}; choose L in {sorted(POLYNOMIALS)}")
        self.L = L
        self.order = 1 << L
        self.poly = POLYNOMIALS[L]
        self.generator = self._find_generator()
        n = self.order - 1
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = clmul(x, self.generator, L)
        exp[n:] = exp[:n]
        self.exp = exp
        self.log = log

    def _find_generator(self) -> int:
        # 2 is not primitive for the L=8 polynomial, so search
        n = self.order - 1
        for g in range(2, self.order):
            x, k = g, 1
            while x != 1:
                x = clmul(x, g, self.L)
                k += 1
            if k == n:
                return g
        raise RuntimeError("no primitive element found")

    # elementwise ops on ints or arrays
    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse in GF(2^L)")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp[(int(self.log[a]) * e) % (self.order - 1)])

    def matmul(self, A, B) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
        if A.shape[1] == 0:
            return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        prod = self.mul(A[:, :, None], B[None, :, :])
        return np.bitwise_xor.reduce(prod, axis=1)

    def rank(self, M) -> int:
        M = np.array(M, dtype=np.int64, copy=True)
        rows, cols = M.shape
        rank = 0
        for c in range(cols):
            if rank == rows:
                break
            pivots = np.flatnonzero(M[rank:, c])
            if len(pivots) == 0:
                continue
            p = rank + int(pivots[0])
            M[[rank, p]] = M[[p, rank]]
            M[rank] = self.mul(M[rank], self.inv(M[rank, c]))
            others = np.flatnonzero(M[:, c])
            others = others[others != rank]
            if len(others):
                M[others] ^= self.mul(M[others, c][:, None], M[rank][None, :])
            rank += 1
        return rank

    def solve(self, A, B) -> np.ndarray:
        """Solve A X = B for square invertible A (Gauss-Jordan)."""
        A = np.array(A, dtype=np.int64, copy=True)
        B = np.array(B, dtype=np.int64, copy=True)
        n = A.shape[0]
        if A.shape != (n, n) or B.shape[0] != n:
            raise ValueError(f"shape mismatch: {A.shape}, {B.shape}")
        for c in range(n):
            pivots = np.flatnonzero(A[c:, c])
            if len(pivots) == 0:
                raise SingularError("matrix is singular over GF(2^L)")
            p = c + int(pivots[0])
            A[[c, p]] = A[[p, c]]
            B[[c, p]] = B[[p, c]]
            s = self.inv(A[c, c])
            A[c] = self.mul(A[c], s)
            B[c] = self.mul(B[c], s)
            others = np.flatnonzero(A[:, c])
            others = others[others != c]
            if len(others):
                f = A[others, c][:, None]
                A[others] ^= self.mul(f, A[c][None, :])
                B[others] ^= self.mul(f, B[c][None, :])
        return B

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.order, size=shape, dtype=np.int64)


@lru_cache(maxsize=None)
def field(L: int) -> GF:
    return GF(L)


@dataclass(frozen=True)
class CodingMatrix:
    G: np.ndarray
    L: int

    @property
    def m(self) -> int:
        return self.G.shape[1]

    @property
    def mprime(self) -> int:
        return self.G.shape[0]

    @property
    def gf(self) -> GF:
        return field(self.L)


def identity_code(m: int, L: int = 8) -> CodingMatrix:
    return CodingMatrix(np.eye(m, dtype=np.int64), L)


def mds_generator(mprime: int, m: int, L: int = 8) -> CodingMatrix:
    """Vandermonde G[i, j] = alpha_i^j with alpha_i = i (all distinct)."""
    gf = field(L)
    if mprime > gf.order:
        raise FieldTooSmallError(
            f"need {mprime} distinct evaluation points but GF(2^{L}) has only {gf.order}"
        )
    if mprime < m:
        raise ValueError(f"mprime={mprime} must be >= m={m}")
    G = np.array([[gf.pow(a, j) for j in range(m)] for a in range(mprime)], dtype=np.int64)
    return CodingMatrix(G, L)


def encode_model(code: CodingMatrix, W) -> np.ndarray:
    """Coded rows G W."""
    W = np.asarray(W, dtype=np.int64)
    if W.ndim != 2 or W.shape[0] != code.m:
        raise ValueError(f"W must have {code.m} rows, got shape {W.shape}")
    return code.gf.matmul(code.G, W)


def feasible(computed, code: CodingMatrix) -> bool:
    """True iff the computed coded rows determine every output."""
    idx = sorted(set(int(i) for i in computed))
    if len(idx) < code.m:
        return False
    return code.gf.rank(code.G[idx]) == code.m


def _independent_rows(code: CodingMatrix, idx: list[int]) -> list[int]:
    gf = code.gf
    chosen: list[int] = []
    for i in idx:
        trial = chosen + [i]
        if gf.rank(code.G[trial]) == len(trial):
            chosen = trial
            if len(chosen) == code.m:
                break
    return chosen


def decode_outputs(computed: dict, code: CodingMatrix) -> np.ndarray:
    """Recover Y = W X from computed IVs ``{coded row index: c_i X}``."""
    idx = sorted(computed)
    chosen = _independent_rows(code, idx)
    if len(chosen) < code.m:
        raise SingularError(
            f"computed rows span rank {len(chosen)} < m={code.m}; outputs not recoverable"
        )
    A = code.G[chosen]
    B = np.array([computed[i] for i in chosen], dtype=np.int64)
    return code.gf.solve(A, B)
