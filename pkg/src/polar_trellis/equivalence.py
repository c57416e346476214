"""CPM waveforms and front-end equivalence checks.

`cpm_modulate` produces the per-symbol complex sample vectors of a binary CPM
scheme.  For the three built-in instances the waveform factors through the
corresponding trellis modulator and state mapper; for the partial-response
cases (theta2, theta3) the factorization is an exact sample-by-sample
identity, while for MSK the waveform decomposes over a family of shifted
half-sine pulses phi_(n):

    join(msk(x)) = A * psi + sum_n A exp(j pi s_n) phi_(n),

where each phi_(n) spans two symbol periods (offset nK) and psi is the known
initial half-pulse contributed by the fixed zero initial phase (the n = -1
term of the overlap structure).  Because each phi_(n) extends one symbol
period beyond its own symbol, the final pulse is cut off by a finite
transmission window; `msk_terminated` appends the natural half-pulse tail
block so that every phi_(n) is fully supported.  On that window the
projection front end D_phi is information-lossless and the a-posteriori
probabilities of the waveform channel and of the (M1, G1) trellis channel
coincide exactly.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .channel import phi_vector, theta1
from .trellis import make_m1


def _pulse_g(t, L: int):
    """CPM phase pulse: 0 for t<0, t/(2L) on [0, L], 1/2 beyond (T = 1)."""
    return np.clip(t / (2.0 * L), 0.0, 0.5)


def cpm_modulate(M: int, h, L: int, x, K: int, A: float = 1.0) -> np.ndarray:
    """Per-symbol sample vectors of binary CPM, shape (N, K).

    Vector n holds A exp(j 2 pi h [R_P(sum_{i<=n-L} x_i)
    + 2 sum_{i<L} x_{n-i} g_i]), with g_i[k] = g(k/K + i) for k = 1..K and
    x at negative indices taken as 0.
    """
    if M != 2:
        raise ValueError("only binary CPM is supported")
    x = np.asarray(x, dtype=np.int64)
    if np.any((x != 0) & (x != 1)):
        raise ValueError("CPM input symbols must be binary")
    h = Fraction(h)
    P = h.denominator
    N = len(x)
    k = np.arange(1, K + 1) / K
    g = np.stack([_pulse_g(k + i, L) for i in range(L)])  # (L, K)
    out = np.empty((N, K), dtype=np.complex128)
    csum = np.concatenate([[0], np.cumsum(x)])
    for n in range(N):
        acc = csum[n - L + 1] % P if n - L + 1 >= 0 else 0
        phase = float(acc) + np.zeros(K)
        for i in range(L):
            if n - i >= 0:
                phase = phase + 2.0 * x[n - i] * g[i]
        out[n] = A * np.exp(2j * np.pi * float(h) * phase)
    return out


def join_V(vectors) -> np.ndarray:
    """Concatenate a vector sequence into one flat complex sequence."""
    vectors = np.asarray(vectors)
    if vectors.ndim != 2:
        raise ValueError("expected a uniform sequence of vectors")
    return vectors.reshape(-1).copy()


def real_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product of the real-scalar linear space: Re{a . conj(b)}."""
    return float(np.real(np.vdot(b, a)))


def phi_shifted(n: int, K: int, total_len: int) -> np.ndarray:
    """phi zero-padded to total_len and right-shifted by nK (truncated if the
    window ends inside its two-symbol support)."""
    phi = phi_vector(K)
    out = np.zeros(total_len, dtype=np.complex128)
    lo = n * K
    hi = min(lo + 2 * K, total_len)
    out[lo:hi] = phi[: hi - lo]
    return out


def phi_offset(K: int, total_len: int) -> np.ndarray:
    """The known n = -1 boundary term: the second half of phi at block 0."""
    phi = phi_vector(K)
    out = np.zeros(total_len, dtype=np.complex128)
    out[:K] = phi[K:]
    return out


def project_Dphi(c: np.ndarray, K: int, N: int) -> np.ndarray:
    """Per-slot projections (<c, phi_(n)> / ||phi||^2) phi, shape (N, 2K).

    Accepts windows of length N*K or longer (e.g. (N+1)*K for terminated
    MSK waveforms); phi_(n) is truncated to the window.
    """
    c = np.asarray(c, dtype=np.complex128)
    if len(c) < N * K:
        raise ValueError("sequence shorter than N*K")
    phi = phi_vector(K)
    norm2 = float(np.sum(np.abs(phi) ** 2))  # == K
    out = np.empty((N, 2 * K), dtype=np.complex128)
    for n in range(N):
        pn = phi_shifted(n, K, len(c))
        out[n] = (real_inner(c, pn) / norm2) * phi
    return out


def msk_waveform(x, K: int, A: float = 1.0) -> np.ndarray:
    """MSK sample vectors, shape (N, K): cpm_modulate at (2, 1/2, 1)."""
    return cpm_modulate(2, Fraction(1, 2), 1, x, K, A)


def msk_terminated(x, K: int, A: float = 1.0) -> np.ndarray:
    """MSK waveform plus the final half-pulse tail block, shape (N+1, K).

    The tail is A exp(j pi s_{N-1}) phi[K:2K] restricted to one symbol
    period: exactly the trailing support of the last basis pulse, so the
    terminated waveform lies in span{psi, phi_(0..N-1)} with all pulses
    fully inside the window.
    """
    blocks = msk_waveform(x, K, A)
    s = make_m1().modulate(x)
    phi = phi_vector(K)
    tail = A * np.exp(1j * np.pi * s[-1]) * phi[K:]
    return np.concatenate([blocks, tail[None, :]], axis=0)


def msk_decomposition(x, K: int, A: float = 1.0, terminated: bool = True) -> np.ndarray:
    """Right-hand side of the pulse decomposition of the MSK waveform."""
    x = np.asarray(x, dtype=np.int64)
    N = len(x)
    total = (N + 1) * K if terminated else N * K
    s = make_m1().modulate(x)
    out = A * phi_offset(K, total)
    for n in range(N):
        out = out + A * np.exp(1j * np.pi * s[n]) * phi_shifted(n, K, total)
    return out


def _instance_waveform(i: int, x, K: int, A: float):
    if i == 1:
        return msk_terminated(x, K, A)
    if i == 2:
        return cpm_modulate(2, Fraction(1, 4), 1, x, K, A)
    if i == 3:
        return cpm_modulate(2, Fraction(1, 1), 2, x, K, A)
    raise ValueError("instance must be 1, 2 or 3")


def _instance_points(i: int, K: int, A: float):
    from .channel import theta2, theta3
    from .trellis import make_m2, make_m3

    if i == 1:
        return make_m1(), np.stack([theta1(s, K, A) for s in range(2)])
    if i == 2:
        return make_m2(), np.stack([theta2(s, K, A) for s in range(8)])
    return make_m3(), np.stack([theta3(s, K, A) for s in range(4)])


def verify_prop1(i: int, x, K: int, sigma2: float, seed: int) -> float:
    """Max |posterior difference| between the waveform channel and its
    trellis-channel model over all candidate inputs x'.

    The waveform channel transmits the CPM waveform of the true x plus
    complex AWGN (variance sigma2 per real dimension); its posterior is
    compared against the (M_i, G_i) posterior computed from the transformed
    observation: the D_phi projections for i = 1 (on the terminated MSK
    window), the identity for i = 2, 3.
    """
    x = np.asarray(x, dtype=np.int64)
    N = len(x)
    if N > 8:
        raise ValueError("posterior enumeration limited to N <= 8")
    A = 1.0
    m, pts = _instance_points(i, K, A)
    rng = np.random.default_rng(seed)
    flat = join_V(_instance_waveform(i, x, K, A))
    sd = np.sqrt(sigma2)
    y = flat + rng.normal(0, sd, flat.shape) + 1j * rng.normal(0, sd, flat.shape)

    cands = np.array([[(w >> (N - 1 - j)) & 1 for j in range(N)]
                      for w in range(2**N)], dtype=np.int64)
    ll_wave = np.array([
        -np.sum(np.abs(y - join_V(_instance_waveform(i, c, K, A))) ** 2)
        / (2 * sigma2)
        for c in cands
    ])
    z = project_Dphi(y, K, N) if i == 1 else y.reshape(N, K)
    ll_trellis = np.array([
        -np.sum(np.abs(z - pts[m.modulate(c)]) ** 2) / (2 * sigma2)
        for c in cands
    ])

    def posterior(ll):
        p = np.exp(ll - ll.max())
        return p / p.sum()

    return float(np.max(np.abs(posterior(ll_wave) - posterior(ll_trellis))))
