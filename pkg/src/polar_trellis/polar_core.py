"""Binary linear encoding machinery for polar codes.

Supports two code structures:

* ``Conventional``: generator G_N = B_N F^{xn}, where F = [[1,0],[1,1]] is the
  polar kernel and B_N the bit-reversal permutation.
* ``LastPairSwapping``: a modified structure where the last kernel of every
  butterfly layer is replaced by the swap matrix F_r = [[0,1],[1,0]].  The
  generator obeys the recursion

      Gbar_N = blockdiag(I_{N/2-1} (x) F, F_r) . R_N . (I_2 (x) Gbar_{N/2})

  with base case Gbar_2 = F_r, where R_N is the reverse shuffle (even indices
  first, odd indices second).

Encoding is done structurally in O(N log N); dense generator matrices are also
available for tests and small-N work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Variant(str, Enum):
    CONVENTIONAL = "conventional"
    LAST_PAIR_SWAPPING = "lps"


@dataclass(frozen=True)
class CodeSpec:
    """Code length, rate, frozen set, and structure variant."""

    n: int
    K: int
    frozen_set: frozenset = field(default_factory=frozenset)
    variant: Variant = Variant.CONVENTIONAL

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        N = 1 << self.n
        fs = frozenset(int(i) for i in self.frozen_set)
        object.__setattr__(self, "frozen_set", fs)
        if not all(0 <= i < N for i in fs):
            raise ValueError("frozen indices out of range")
        if len(fs) != N - self.K:
            raise ValueError("|frozen_set| must equal N - K")

    @property
    def N(self) -> int:
        return 1 << self.n


def kernel_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Return (F, F_r): the polar kernel and the swap kernel."""
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    Fr = np.array([[0, 1], [1, 0]], dtype=np.uint8)
    return F, Fr


def reverse_shuffle(v):
    """[v0,v1,v2,v3,...] -> [v0,v2,...,v1,v3,...] (even indices then odd)."""
    v = np.asarray(v)
    if v.shape[0] % 2 != 0:
        raise ValueError("reverse_shuffle needs even length")
    return np.concatenate([v[0::2], v[1::2]], axis=0)


def bit_reversal_perm(N: int) -> np.ndarray:
    """Permutation p with p[i] = bit-reversal of i in log2(N) bits."""
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError("N must be a power of two")
    n = N.bit_length() - 1
    perm = np.zeros(N, dtype=np.int64)
    for i in range(N):
        r = 0
        for b in range(n):
            r = (r << 1) | ((i >> b) & 1)
        perm[i] = r
    return perm


def gen_matrix(spec: CodeSpec) -> np.ndarray:
    """Dense generator matrix over GF(2) for the spec's variant."""
    N = spec.N
    F, Fr = kernel_matrices()
    if spec.variant == Variant.CONVENTIONAL:
        G = F.copy()
        while G.shape[0] < N:
            G = np.kron(F, G) % 2
        perm = bit_reversal_perm(N)
        B = np.zeros((N, N), dtype=np.uint8)
        B[np.arange(N), perm] = 1
        return (B @ G) % 2
    # LastPairSwapping recursion
    G = Fr.copy()
    while G.shape[0] < N:
        m = G.shape[0]
        M = 2 * m
        lower = np.kron(np.eye(2, dtype=np.uint8), G) % 2
        # reverse-shuffle matrix: (u R)_j picks even indices first
        R = np.zeros((M, M), dtype=np.uint8)
        for i in range(M):
            j = i // 2 if i % 2 == 0 else m + i // 2
            R[i, j] = 1
        blk = np.zeros((M, M), dtype=np.uint8)
        for p in range(m - 1):
            blk[2 * p : 2 * p + 2, 2 * p : 2 * p + 2] = F
        blk[M - 2 :, M - 2 :] = Fr
        G = (blk @ R @ lower) % 2
    return G


def encode(u, spec: CodeSpec) -> np.ndarray:
    """Codeword x = u . G over GF(2), computed structurally in O(N log N)."""
    u = np.asarray(u, dtype=np.uint8)
    N = spec.N
    if u.shape != (N,):
        raise ValueError(f"expected length-{N} input")
    swapped = spec.variant == Variant.LAST_PAIR_SWAPPING
    return _encode_rec(u, swapped)


def _encode_rec(u: np.ndarray, swapped: bool) -> np.ndarray:
    # Row-vector form of the generator recursion: kernel layer on adjacent
    # pairs (last pair swapped in the LPS variant), reverse shuffle, then the
    # two halves pass through the length-N/2 code.
    N = u.shape[0]
    if N == 2:
        if swapped:
            return u[::-1].copy()
        return np.array([u[0] ^ u[1], u[1]], dtype=np.uint8)
    v = np.empty(N, dtype=np.uint8)
    v[0::2] = u[0::2] ^ u[1::2]
    v[1::2] = u[1::2]
    if swapped:
        v[N - 2], v[N - 1] = u[N - 1], u[N - 2]
    w = np.concatenate([v[0::2], v[1::2]])
    half = N // 2
    return np.concatenate(
        [_encode_rec(w[:half], swapped), _encode_rec(w[half:], swapped)]
    )


def gf2_inv(G: np.ndarray) -> np.ndarray:
    """Inverse of a binary matrix over GF(2) via Gauss-Jordan."""
    n = G.shape[0]
    A = np.concatenate([G.astype(np.uint8) % 2, np.eye(n, dtype=np.uint8)], axis=1)
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, n):
            if A[r, col]:
                piv = r
                break
        if piv is None:
            raise ValueError("matrix is singular over GF(2)")
        A[[row, piv]] = A[[piv, row]]
        for r in range(n):
            if r != row and A[r, col]:
                A[r] ^= A[row]
        row += 1
    return A[:, n:]


def assemble_source(info, spec: CodeSpec) -> np.ndarray:
    """Place K info bits at non-frozen indices (increasing order), zeros elsewhere."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (spec.K,):
        raise ValueError(f"expected {spec.K} info bits")
    N = spec.N
    u = np.zeros(N, dtype=np.uint8)
    idx = [i for i in range(N) if i not in spec.frozen_set]
    u[idx] = info
    return u


def info_indices(spec: CodeSpec) -> np.ndarray:
    return np.array([i for i in range(spec.N) if i not in spec.frozen_set], dtype=np.int64)
