"""Capacity analysis and error-rate experiments.

Contains the Monte-Carlo sub-channel capacity estimator (genie-aided SCTD),
an exact small-N capacity oracle by full enumeration, variance/average (V-A)
curve sweeps, the variance decomposition identity, the closed-form capacity
layout of conventional coding on bijective trellises, frozen-set
construction, FER experiments, and the CSV writers used by the CLI.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (DEFAULT_K, DiscreteEmission, GaussianEmission,
                      gaussian_emission, load_pmf)
from .decoder import SctdDecoder
from .polar_core import CodeSpec, Variant, gen_matrix, info_indices
from .trellis import TrellisModulator, make_m1, make_m2, make_m3, make_memoryless

CAPACITY_CSV_HEADER = "snr_db,i,estimate,stderr,M,variant,channel,N"
VA_CSV_HEADER = "snr_db,avg,var,variant,channel,N,M"
FER_CSV_HEADER = "snr_db,N,K,variant,channel,list,trials,errors,fer,ci_lo,ci_hi,seed"


def _seed_key(seed) -> tuple:
    """Normalize an int or tuple seed to a flat tuple of ints."""
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def max_workers() -> int:
    """Worker cap from POLAR_TRELLIS_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("POLAR_TRELLIS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class CapacityVector:
    """Per-index capacity estimates with their Monte-Carlo standard errors."""

    raw: np.ndarray          # unclamped estimates (diagnostics)
    stderr: np.ndarray
    M: int

    @property
    def estimates(self) -> np.ndarray:
        return np.clip(self.raw, 0.0, 1.0)

    @property
    def avg(self) -> float:
        return float(np.mean(self.estimates))

    @property
    def var(self) -> float:
        return float(np.var(self.estimates))


@dataclass(frozen=True)
class VAPoint:
    snr_db: float
    avg: float
    var: float


@dataclass(frozen=True)
class FerRecord:
    snr_db: float
    N: int
    K: int
    variant: str
    channel: str
    list_size: int
    trials: int
    errors: int
    seed: int

    @property
    def fer(self) -> float:
        return self.errors / self.trials

    def ci95(self) -> tuple[float, float]:
        """Wilson score interval for the error proportion."""
        z = 1.959963984540054
        n, p = self.trials, self.fer
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        lo = 0.0 if self.errors == 0 else max(0.0, center - half)
        hi = 1.0 if self.errors == n else min(1.0, center + half)
        return lo, hi


@dataclass
class ChannelConfig:
    """A named (modulator, emission) pair; Gaussian emissions depend on snr.

    kind: 'm1g' | 'm2g' | 'm3g' | 'g1' | 'discrete'.  'g1' is the memoryless
    pi/2-BPSK channel (theta1 signal set with state = current bit).  Discrete
    configs carry their own modulator and PMF and ignore snr.
    """

    kind: str
    K: int = DEFAULT_K
    A: float = 1.0
    pmf_path: str | None = None
    discrete_modulator: TrellisModulator | None = None
    discrete_emission: DiscreteEmission | None = None

    def modulator(self) -> TrellisModulator:
        if self.kind == "m1g":
            return make_m1()
        if self.kind == "m2g":
            return make_m2()
        if self.kind == "m3g":
            return make_m3()
        if self.kind == "g1":
            return make_memoryless()
        if self.kind == "discrete":
            if self.discrete_modulator is None:
                raise ValueError("discrete config needs a modulator")
            return self.discrete_modulator
        raise ValueError(f"unknown channel kind {self.kind!r}")

    def emission(self, snr_db: float):
        if self.kind == "discrete":
            if self.discrete_emission is not None:
                return self.discrete_emission
            if self.pmf_path is None:
                raise ValueError("discrete config needs a pmf")
            return load_pmf(self.pmf_path)
        inst = {"m1g": "g1", "m2g": "g2", "m3g": "g3", "g1": "bpsk"}[self.kind]
        return gaussian_emission(inst, snr_db, self.K, self.A)


# ---------------------------------------------------------------------------
# Monte-Carlo capacity estimation (genie-aided SCTD)
# ---------------------------------------------------------------------------

def mc_capacity(spec: CodeSpec, m: TrellisModulator, emission, M: int, seed,
                batch: int = 512) -> CapacityVector:
    """Estimate all sub-channel capacities from M genie-aided decodes.

    For each frame: draw u uniform, encode, modulate, transmit; the decoder
    conditions each phase on the true prefix and records the surprisal
    eta_i = -log2 p(u_i | y, u_0^{i-1}).  Then I_N^{(i)} ~ 1 - mean(eta_i).
    Deterministic for a fixed (seed, batch) pair; batches use derived seeds,
    so the worker count never changes results.
    """
    N = spec.N
    G = gen_matrix(CodeSpec(spec.n, N, frozenset(), spec.variant))
    dec = SctdDecoder(spec, m)
    # compensated (Kahan) accumulation of eta and eta^2 per index
    s1 = np.zeros(N)
    c1 = np.zeros(N)
    s2 = np.zeros(N)
    c2 = np.zeros(N)
    done = 0
    chunk = 0
    while done < M:
        B = min(batch, M - done)
        rng = np.random.default_rng(_seed_key(seed) + (chunk,))
        U = rng.integers(0, 2, (B, N))
        X = (U @ G) % 2
        states = m.modulate_batch(X)
        y = emission.transmit(states, rng)
        eta = dec.genie_entropies(y, emission, U)
        for s, c, vals in ((s1, c1, eta.sum(axis=0)), (s2, c2, (eta * eta).sum(axis=0))):
            t = vals - c
            tot = s + t
            c[:] = (tot - s) - t
            s[:] = tot
        done += B
        chunk += 1
    mean = s1 / M
    var = np.maximum(s2 / M - mean**2, 0.0)
    stderr = np.sqrt(var / M)
    return CapacityVector(raw=1.0 - mean, stderr=stderr, M=M)


# ---------------------------------------------------------------------------
# Exact capacity oracle (small N, discrete channels)
# ---------------------------------------------------------------------------

def exact_capacity(m: TrellisModulator, emission: DiscreteEmission, n: int,
                   variant: Variant = Variant.CONVENTIONAL) -> CapacityVector:
    """Exact I(W_N^{(i)}) for all i, by enumerating every (u, y) pair.

    I^{(i)} = E[ log2( 2 W^{(i)}(Y, U_0^{i-1} | U_i)
                       / (W^{(i)}(..|0) + W^{(i)}(..|1)) ) ].
    Supports n = 0 (N = 1: the raw first-symbol channel).
    """
    N = 1 << n
    Ny = emission.num_outputs
    if Ny**N * 2**N > 40_000_000:
        raise ValueError("exact_capacity enumeration too large")
    # source words, u_0 as the most significant bit -> contiguous prefixes
    w = np.arange(2**N)
    U = (w[:, None] >> (N - 1 - np.arange(N))) & 1
    if n == 0:
        X = U
    else:
        G = gen_matrix(CodeSpec(n, N, frozenset(), variant))
        X = (U @ G) % 2
    Sarr = m.modulate_batch(X)  # (2^N, N)
    yw = np.arange(Ny**N)
    Y = (yw[:, None] // Ny ** (N - 1 - np.arange(N))) % Ny
    lik = np.ones((2**N, Ny**N))
    for ncol in range(N):
        lik *= emission.pmf[Sarr[:, ncol]][:, Y[:, ncol]]
    caps = np.zeros(N)
    for i in range(N):
        Wsum = lik.reshape(2 ** (i + 1), -1, Ny**N).sum(axis=1) * 2.0 ** (-(N - 1))
        W0 = Wsum[0::2]
        W1 = Wsum[1::2]
        tot = W0 + W1
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where(W0 > 0, W0 * np.log2(2 * W0 / tot), 0.0)
            t1 = np.where(W1 > 0, W1 * np.log2(2 * W1 / tot), 0.0)
        caps[i] = 0.5 * np.sum(t0 + t1)
    return CapacityVector(raw=caps, stderr=np.zeros(N), M=0)


def comparison_channel(m: TrellisModulator, emission: DiscreteEmission) -> DiscreteEmission:
    """The memoryless binary channel seen through the first symbol: W(y|F(0,b))."""
    rows = np.stack([emission.pmf[m.step(0, b)] for b in (0, 1)])
    return DiscreteEmission(rows)


def exact_capacity_memoryless(w: DiscreteEmission, n: int) -> CapacityVector:
    """Exact sub-channel capacities of conventional coding on memoryless W^N."""
    return exact_capacity(make_memoryless(), w, n, Variant.CONVENTIONAL)


def binary_channel_capacity(w: DiscreteEmission) -> float:
    """I(W) for a binary-input channel with uniform inputs."""
    return float(exact_capacity_memoryless(w, 0).raw[0])


def random_bijective_modulator(num_states: int, rng: np.random.Generator) -> TrellisModulator:
    """Random modulator whose transition is bijective in each argument.

    For |S| = 2 these are exactly F(s, x) = s xor x xor c.  For |S| = 4 we use
    xor-translations on 2-bit state labels, F(s, x) = s xor t_x with
    {t_0, t_1} = {0, d}: each argument acts injectively and the reachable
    dynamics are a relabeled copy of the two-state case.
    """
    if num_states == 2:
        c = int(rng.integers(0, 2))
        table = tuple((s ^ 0 ^ c, s ^ 1 ^ c) for s in range(2))
        return TrellisModulator(2, table)
    if num_states == 4:
        d = int(rng.integers(1, 4))
        t = [0, d] if rng.integers(0, 2) == 0 else [d, 0]
        table = tuple((s ^ t[0], s ^ t[1]) for s in range(4))
        return TrellisModulator(4, table)
    raise ValueError("random bijective modulators support |S| in {2, 4}")


# ---------------------------------------------------------------------------
# Capacity layout of conventional coding on bijective trellises
# ---------------------------------------------------------------------------

def prop2_predict(i: int) -> tuple[int, int]:
    """Map sub-channel index i to the (block length, index) of the memoryless
    layout it reproduces: i <= 1 -> (1, 0); else (<i>, i - <i>) with <i> the
    largest power of two <= i."""
    if i < 0:
        raise ValueError("index must be nonnegative")
    if i <= 1:
        return 1, 0
    p = 1 << (i.bit_length() - 1)
    return p, i - p


# ---------------------------------------------------------------------------
# V-A curves and variance decomposition
# ---------------------------------------------------------------------------

def va_curve(cfg: ChannelConfig, spec: CodeSpec, snr_grid, M: int, seed,
             batch: int = 512) -> list[VAPoint]:
    m = cfg.modulator()
    out = []
    for k, snr_db in enumerate(snr_grid):
        em = cfg.emission(snr_db)
        cap = mc_capacity(spec, m, em, M, (int(seed), k), batch=batch)
        out.append(VAPoint(float(snr_db), cap.avg, cap.var))
    return out


def variance_stderr(cap: CapacityVector) -> float:
    """Delta-method standard error of var(estimates) from per-index stderrs:
    sigma^2 = (1/N) sum (I_i - Ibar)^2, d sigma^2/d I_i = 2 (I_i - Ibar)/N."""
    est = cap.estimates
    g = 2.0 * (est - est.mean()) / len(est)
    return float(np.sqrt(np.sum((g * cap.stderr) ** 2)))


def default_snr_grid():
    return np.arange(-30.0, 20.0 + 1e-9, 0.5)


def variance_decompose(values, blocks) -> tuple[float, float]:
    """Split sigma^2(values) into between-block and within-block parts.

    Returns (between, within) with weights r_k = |block|/len(values):
    between = sum_k r_k (mean_k - mean)^2, within = sum_k r_k var_k, and
    between + within = var(values) exactly.
    """
    values = np.asarray(values, dtype=np.float64)
    idx = [np.asarray(sorted(b), dtype=np.int64) for b in blocks]
    if any(len(b) == 0 for b in idx):
        raise ValueError("empty block")
    covered = np.sort(np.concatenate(idx))
    if not np.array_equal(covered, np.arange(len(values))):
        raise ValueError("blocks must partition the index range")
    mean = values.mean()
    between = 0.0
    within = 0.0
    for b in idx:
        r = len(b) / len(values)
        between += r * (values[b].mean() - mean) ** 2
        within += r * values[b].var()
    return between, within


# ---------------------------------------------------------------------------
# Frozen sets and FER experiments
# ---------------------------------------------------------------------------

def frozen_set_from_capacities(cap: CapacityVector, K: int) -> frozenset:
    """Freeze the N-K lowest-capacity indices; ties freeze the lower index."""
    est = cap.estimates
    N = len(est)
    if K > N:
        raise ValueError("K > N")
    order = np.lexsort((np.arange(N), est))  # by estimate, then index
    return frozenset(int(i) for i in order[: N - K])


def _fer_chunk(spec, m, emission, G, dec, list_size, B, seed, chunk):
    rng = np.random.default_rng(_seed_key(seed) + (int(chunk),))
    N = spec.N
    info_idx = info_indices(spec)
    U = np.zeros((B, N), dtype=np.int64)
    U[:, info_idx] = rng.integers(0, 2, (B, len(info_idx)))
    X = (U @ G) % 2
    states = m.modulate_batch(X)
    y = emission.transmit(states, rng)
    uhat, _ = dec.decode(y, emission, list_size)
    return int(np.any(uhat[:, info_idx] != U[:, info_idx], axis=1).sum())


def fer_experiment(spec: CodeSpec, m: TrellisModulator, emission,
                   list_size: int, trials: int, seed, snr_db: float = float("nan"),
                   channel: str = "", batch: int = 64,
                   workers: int | None = None) -> FerRecord:
    """Monte-Carlo frame error rate of SCL decoding.

    A frame error is any info-bit mismatch (frozen bits are known).  Work is
    split into fixed batches with derived seeds, so results are identical for
    any worker count.
    """
    G = gen_matrix(CodeSpec(spec.n, spec.N, frozenset(), spec.variant))
    dec = SctdDecoder(spec, m)
    if workers is None:
        workers = max_workers()
    chunks = []
    done = 0
    c = 0
    while done < trials:
        B = min(batch, trials - done)
        chunks.append((B, c))
        done += B
        c += 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_fer_chunk, spec, m, emission, G,
                              SctdDecoder(spec, m), list_size, B, seed, c)
                    for B, c in chunks]
            errors = sum(f.result() for f in futs)
    else:
        errors = sum(_fer_chunk(spec, m, emission, G, dec, list_size, B, seed, c)
                     for B, c in chunks)
    return FerRecord(snr_db=float(snr_db), N=spec.N, K=spec.K,
                     variant=spec.variant.value, channel=channel,
                     list_size=list_size, trials=trials, errors=errors,
                     seed=_seed_key(seed)[0])


# ---------------------------------------------------------------------------
# CSV writers (bit-exact headers)
# ---------------------------------------------------------------------------

def write_capacities_csv(path, rows) -> None:
    """rows: iterables matching the capacities header; estimate written raw."""
    with open(path, "w", newline="") as f:
        f.write(CAPACITY_CSV_HEADER + "\n")
        w = csv.writer(f)
        for r in rows:
            w.writerow(list(r))


def capacity_rows(snr_db, cap: CapacityVector, variant: str, channel: str, N: int):
    return [
        [_fmt(snr_db), i, _fmt(cap.raw[i]), _fmt(cap.stderr[i]), cap.M, variant, channel, N]
        for i in range(len(cap.raw))
    ]


def write_va_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        f.write(VA_CSV_HEADER + "\n")
        w = csv.writer(f)
        for r in rows:
            w.writerow(list(r))


def va_rows(points, variant: str, channel: str, N: int, M: int):
    return [[_fmt(p.snr_db), _fmt(p.avg), _fmt(p.var), variant, channel, N, M]
            for p in points]


def write_fer_csv(path, records) -> None:
    with open(path, "w", newline="") as f:
        f.write(FER_CSV_HEADER + "\n")
        w = csv.writer(f)
        for r in records:
            lo, hi = r.ci95()
            w.writerow([_fmt(r.snr_db), r.N, r.K, r.variant, r.channel, r.list_size,
                        r.trials, r.errors, _fmt(r.fer), _fmt(lo), _fmt(hi), r.seed])


def _fmt(x) -> str:
    return repr(float(x))
