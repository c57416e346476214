"""State-emission channels: Gaussian mappers for the CPM instances, and
discrete channels for exact oracles.

A state-emission channel observes only the modulator state: y_n ~ W(.|s_n).
The Gaussian case emits a complex vector Theta(s_n) plus AWGN with variance
sigma2 per real dimension (N0 = 2 sigma2); snr is Es/N0 with Es the
state-averaged symbol energy ||Theta(s)||^2.

Mappers (sampling factor K, amplitude A):

* theta1 (2 states, length 2K): A exp(j pi s) phi, with
  phi[m-1] = (1 - exp(j pi m / K)) / 2 for m = 1..2K.
* theta2 (8 states, length K): A exp(j pi/2 (2 (s mod 2) g + floor(s/2))),
  g[m-1] = m/(2K) for m = 1..K.
* theta3 (4 states, length K): A exp(j 4 pi ((s mod 2) g0 + floor(s/2) g1)),
  g0[m-1] = m/(4K) for m = 1..K, g1[m-1] = (m+K)/(4K).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_K = 16


def phi_vector(K: int, A: float = 1.0) -> np.ndarray:
    """Length-2K pulse underlying the MSK mapper (and its projection basis)."""
    m = np.arange(1, 2 * K + 1)
    return A * 0.5 * (1.0 - np.exp(1j * np.pi * m / K))


def theta1(s, K: int = DEFAULT_K, A: float = 1.0) -> np.ndarray:
    if not 0 <= s < 2:
        raise ValueError("theta1 state out of range")
    return A * np.exp(1j * np.pi * s) * phi_vector(K)


def theta2(s, K: int = DEFAULT_K, A: float = 1.0) -> np.ndarray:
    if not 0 <= s < 8:
        raise ValueError("theta2 state out of range")
    g = np.arange(1, K + 1) / (2 * K)
    return A * np.exp(1j * (np.pi / 2) * (2 * (s % 2) * g + s // 2))


def theta3(s, K: int = DEFAULT_K, A: float = 1.0) -> np.ndarray:
    if not 0 <= s < 4:
        raise ValueError("theta3 state out of range")
    g0 = np.arange(1, K + 1) / (4 * K)
    g1 = np.arange(K + 1, 2 * K + 1) / (4 * K)
    return A * np.exp(1j * 4 * np.pi * ((s % 2) * g0 + (s // 2) * g1))


@dataclass
class GaussianEmission:
    """Complex AWGN around per-state signal points.

    points: (num_states, D) complex array; sigma2: noise variance per real
    dimension.  sigma2 = 0 means noiseless transmission.
    """

    points: np.ndarray
    sigma2: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.complex128)

    @property
    def num_states(self) -> int:
        return self.points.shape[0]

    @property
    def es(self) -> float:
        return float(np.mean(np.sum(np.abs(self.points) ** 2, axis=1)))

    def transmit(self, states, rng: np.random.Generator) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        y = self.points[states]
        if self.sigma2 > 0:
            sd = np.sqrt(self.sigma2)
            y = y + rng.normal(0.0, sd, y.shape) + 1j * rng.normal(0.0, sd, y.shape)
        return y

    def loglik(self, y: np.ndarray) -> np.ndarray:
        """log W(y_n|s) up to a constant shared across states.

        y: (..., D) complex; returns (..., num_states).
        """
        y = np.asarray(y, dtype=np.complex128)
        d = y[..., None, :] - self.points  # (..., S, D)
        sq = np.sum(d.real**2 + d.imag**2, axis=-1)
        if self.sigma2 == 0:
            out = np.where(sq <= 1e-20, 0.0, -np.inf)
            return out
        return -sq / (2.0 * self.sigma2)


@dataclass
class DiscreteEmission:
    """Finite-alphabet emission: pmf[s][y], rows summing to 1."""

    pmf: np.ndarray

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=np.float64)
        if self.pmf.ndim != 2 or np.any(self.pmf < 0):
            raise ValueError("pmf must be a nonnegative 2-D table")
        if np.max(np.abs(self.pmf.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("pmf rows must sum to 1")

    @property
    def num_states(self) -> int:
        return self.pmf.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.pmf.shape[1]

    def transmit(self, states, rng: np.random.Generator) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        u = rng.random(states.shape)
        cdf = np.cumsum(self.pmf, axis=1)
        return (u[..., None] > cdf[states][..., :-1]).sum(axis=-1).astype(np.int64)

    def loglik(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.int64)
        with np.errstate(divide="ignore"):
            return np.log(self.pmf.T[y])  # (..., S)


def snr_to_sigma2(snr_db: float, emission_points: np.ndarray) -> float:
    """Noise variance per real dimension for a target Es/N0 in dB."""
    pts = np.asarray(emission_points, dtype=np.complex128)
    es = float(np.mean(np.sum(np.abs(pts) ** 2, axis=1)))
    return es / (2.0 * 10.0 ** (snr_db / 10.0))


def gaussian_emission(instance: str, snr_db: float, K: int = DEFAULT_K,
                      A: float = 1.0) -> GaussianEmission:
    """Build the Gaussian emission for 'g1'/'g2'/'g3' (trellis instances) or
    'bpsk' (the two-point memoryless channel using theta1's signal set)."""
    if K < 2:
        raise ValueError("sampling factor K must be >= 2")
    if instance in ("g1", "bpsk"):
        pts = np.stack([theta1(s, K, A) for s in range(2)])
    elif instance == "g2":
        pts = np.stack([theta2(s, K, A) for s in range(8)])
    elif instance == "g3":
        pts = np.stack([theta3(s, K, A) for s in range(4)])
    else:
        raise ValueError(f"unknown Gaussian emission instance {instance!r}")
    return GaussianEmission(pts, snr_to_sigma2(snr_db, pts))


def load_pmf(path) -> DiscreteEmission:
    """Read a PMF table: one row of whitespace-separated probabilities per state."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append([float(t) for t in line.split()])
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("malformed pmf file")
    return DiscreteEmission(np.array(rows))


def random_discrete_emission(num_states: int, num_outputs: int,
                             rng: np.random.Generator) -> DiscreteEmission:
    """Random PMF rows with full support, so 0 < I(W) < 1 (noisy, informative)."""
    p = rng.random((num_states, num_outputs)) + 0.1
    return DiscreteEmission(p / p.sum(axis=1, keepdims=True))
