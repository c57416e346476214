"""Successive cancellation decoding over trellis channels (SCTD).

Messages carry the pair (initial state, final state): the phase-i message of a
sub-block is a table L[u][s_in][s_out] proportional to

    W^{(i)}(y_block, v_0^{i-1}, s_out | v_i = u, s_in),

stored in the linear domain with a per-message log normalizer.  The two
recursions follow the standard polar factor graph, except that in the
last-pair-swapping variant each sub-block's final kernel pair is the swap
(v_0, v_1) = (u_{2i+1}, u_{2i}) instead of (u_{2i} xor u_{2i+1}, u_{2i+1}).
Combining two half-block messages is a matrix product over the shared middle
state; a factor 1/2 per combine matches the definitional normalization
W_N^{(i)} = sum_tail 2^{-(N-1)} prod_n W(y_n|s_n).

The decoder is batched: a decode call processes B frames and up to L list
paths simultaneously, all vectorized over (B, L).
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .polar_core import CodeSpec, Variant, encode
from .trellis import TrellisModulator

LOG_HALF = np.log(0.5)
_TINY = np.finfo(np.float64).tiny


def channel_layer(y, m: TrellisModulator, emission):
    """Leaf messages L[x][s_in][s_out] = W(y_n|s_out) * [s_out == F(s_in, x)].

    Returns (msg, lognorm): msg with shape (..., N, 2, S, S) max-normalized per
    symbol, lognorm with shape (..., N).
    """
    ll = emission.loglik(y)  # (..., N, S)
    return _leaf_messages(ll, m)


def _leaf_messages(ll: np.ndarray, m: TrellisModulator):
    S = m.num_states
    tab = m.table_array()
    mx = ll.max(axis=-1)
    w = np.exp(ll - mx[..., None])
    msg = np.zeros(ll.shape[:-1] + (2, S, S))
    for x in (0, 1):
        msg[..., x, np.arange(S), tab[:, x]] = w[..., tab[:, x]]
    return msg, mx


class SctdDecoder:
    """SC / SCL trellis decoder for one (spec, modulator) pair.

    The instance is immutable after construction; every decode call owns its
    scratch arrays, so independent calls may run concurrently.
    """

    def __init__(self, spec: CodeSpec, modulator: TrellisModulator, prior=None):
        self.spec = spec
        self.m = modulator
        self.N = spec.N
        self.S = modulator.num_states
        self.swapped_variant = spec.variant == Variant.LAST_PAIR_SWAPPING
        if prior is None:
            prior = np.zeros(self.S)
            prior[0] = 1.0
        self.prior = np.asarray(prior, dtype=np.float64)
        # node k of the heap covers N >> depth(k) symbols
        self.size = np.zeros(2 * self.N, dtype=np.int64)
        for k in range(1, 2 * self.N):
            self.size[k] = self.N >> (k.bit_length() - 1)
        self.frozen_mask = np.zeros(self.N, dtype=bool)
        for i in spec.frozen_set:
            self.frozen_mask[i] = True

    # -- per-call scratch ---------------------------------------------------

    def _reset(self, leaf_msg, leaf_lognorm, L):
        B = leaf_msg.shape[0]
        N, S = self.N, self.S
        self._B, self._L = B, L
        self.msg = np.zeros((B, L, 2 * N, 2, S, S))
        self.lognorm = np.zeros((B, L, 2 * N))
        self.msg[:, :, N:] = leaf_msg[:, None]
        self.lognorm[:, :, N:] = leaf_lognorm[:, None]
        self.evenbit = np.zeros((B, L, 2 * N), dtype=np.int64)
        self.lastphase = np.full(2 * N, -1, dtype=np.int64)
        self.fedcount = np.zeros(2 * N, dtype=np.int64)

    def _swap_at(self, k: int, pair: int) -> bool:
        return self.swapped_variant and pair == self.size[k] // 2 - 1

    def _compute(self, k: int, i: int):
        if k >= self.N or self.lastphase[k] == i:
            return
        j, par = divmod(i, 2)
        mL = self.msg[:, :, 2 * k]
        mR = self.msg[:, :, 2 * k + 1]
        swap = self._swap_at(k, j)
        if par == 0:
            self._compute(2 * k, j)
            self._compute(2 * k + 1, j)
            mL = self.msg[:, :, 2 * k]
            mR = self.msg[:, :, 2 * k + 1]
            prod = np.einsum("blaij,blcjk->blacik", mL, mR, optimize=True)
            out = np.empty_like(mL)
            if swap:
                # free bit is v_0; hypothesis u_{2j} enters through v_1
                out[:, :, 0] = prod[:, :, 0, 0] + prod[:, :, 1, 0]
                out[:, :, 1] = prod[:, :, 0, 1] + prod[:, :, 1, 1]
            else:
                out[:, :, 0] = prod[:, :, 0, 0] + prod[:, :, 1, 1]
                out[:, :, 1] = prod[:, :, 1, 0] + prod[:, :, 0, 1]
        else:
            a = self.evenbit[:, :, k]
            if swap:
                # v_0 = u_{2j+1} free hypothesis, v_1 = decided u_{2j}
                mRg = np.take_along_axis(mR, a[:, :, None, None, None], axis=2)
                out = mL @ mRg
            else:
                idx = np.stack([a, 1 - a], axis=2)
                mLg = np.take_along_axis(mL, idx[..., None, None], axis=2)
                out = mLg @ mR
        mx = out.max(axis=(2, 3, 4))
        mx = np.maximum(mx, _TINY)
        out /= mx[:, :, None, None, None]
        self.msg[:, :, k] = out
        self.lognorm[:, :, k] = (
            self.lognorm[:, :, 2 * k] + self.lognorm[:, :, 2 * k + 1]
            + LOG_HALF + np.log(mx)
        )
        self.lastphase[k] = i

    def _feed(self, k: int, bits: np.ndarray):
        if k >= self.N:
            return
        i = self.fedcount[k]
        self.fedcount[k] = i + 1
        j, par = divmod(i, 2)
        if par == 0:
            self.evenbit[:, :, k] = bits
            return
        a = self.evenbit[:, :, k]
        if self._swap_at(k, j):
            v0, v1 = bits, a
        else:
            v0, v1 = a ^ bits, bits
        self._feed(2 * k, v0)
        self._feed(2 * k + 1, v1)

    def _root_likelihoods(self):
        """Decision-layer values D[u] = sum_{s0,sT} prior(s0) L[u][s0][sT]."""
        return np.einsum("bluij,i->blu", self.msg[:, :, 1], self.prior)

    def _gather_paths(self, parent):
        B = self._B
        bidx = np.arange(B)[:, None]
        self.msg[: , :, : self.N] = self.msg[bidx, parent, : self.N]
        self.lognorm[:, :, : self.N] = self.lognorm[bidx, parent, : self.N]
        self.evenbit[:, :, : self.N] = self.evenbit[bidx, parent, : self.N]

    # -- public entry points ------------------------------------------------

    def prepare(self, y, emission):
        """Leaf messages for a batch of received frames y of shape (B, N, ...)."""
        ll = emission.loglik(y)
        if ll.ndim == 2:
            ll = ll[None]
        return _leaf_messages(ll, self.m)

    def decode(self, y, emission, list_size: int = 1):
        """SCL decode a batch; returns (uhat, metric) of the best path.

        uhat: (B, N) hard decisions with frozen bits zero; metric: (B,)
        accumulated log posterior of the returned path.
        """
        leaf_msg, leaf_ln = self.prepare(y, emission)
        B = leaf_msg.shape[0]
        L = int(list_size)
        N = self.N
        self._reset(leaf_msg, leaf_ln, L)
        uhat = np.zeros((B, L, N), dtype=np.int64)
        metric = np.full((B, L), -np.inf)
        metric[:, 0] = 0.0
        bidx = np.arange(B)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(N):
                self._compute(1, i)
                D = self._root_likelihoods()
                logpost = np.log(D) - np.log(D.sum(axis=2, keepdims=True))
                if self.frozen_mask[i]:
                    bits = np.zeros((B, L), dtype=np.int64)
                    metric = metric + logpost[:, :, 0]
                else:
                    # candidates ordered bit-major: index = bit * L + path
                    cand = np.concatenate(
                        [metric + logpost[:, :, 0], metric + logpost[:, :, 1]], axis=1
                    )
                    cand = np.where(np.isnan(cand), -np.inf, cand)
                    sel = np.argsort(-cand, axis=1, kind="stable")[:, :L]
                    parent = sel % L
                    bits = sel // L
                    self._gather_paths(parent)
                    uhat = uhat[bidx, parent]
                    metric = cand[bidx, sel]
                uhat[:, :, i] = bits
                self._feed(1, bits)
        best = np.argmax(metric, axis=1)
        b = np.arange(B)
        return uhat[b, best], metric[b, best]

    def sc_decode(self, y, emission):
        uhat, _ = self.decode(y, emission, list_size=1)
        return uhat

    def genie_entropies(self, y, emission, u_true):
        """Genie-aided pass: decisions forced to the true source bits.

        Returns eta of shape (B, N): eta[.., i] = -log2 p(u_i | y, u_0^{i-1}),
        the per-phase conditional surprisal used by the capacity estimator.
        """
        leaf_msg, leaf_ln = self.prepare(y, emission)
        B = leaf_msg.shape[0]
        u_true = np.asarray(u_true, dtype=np.int64)
        if u_true.ndim == 1:
            u_true = u_true[None]
        self._reset(leaf_msg, leaf_ln, 1)
        eta = np.empty((B, self.N))
        bidx = np.arange(B)
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(self.N):
                self._compute(1, i)
                D = self._root_likelihoods()[:, 0]  # (B, 2)
                bits = u_true[:, i]
                post = D[bidx, bits] / D.sum(axis=1)
                eta[:, i] = -np.log2(post)
                self._feed(1, bits[:, None])
        return eta

    def phase_log_likelihoods(self, y, emission, u_true):
        """Exact decision-layer log likelihoods for oracle comparison.

        Returns (B, N, 2): log W^{(i)}(y, u_0^{i-1} | u_i = b) for both b,
        conditioning each phase on the true prefix.
        """
        leaf_msg, leaf_ln = self.prepare(y, emission)
        B = leaf_msg.shape[0]
        u_true = np.asarray(u_true, dtype=np.int64)
        if u_true.ndim == 1:
            u_true = u_true[None]
        self._reset(leaf_msg, leaf_ln, 1)
        out = np.empty((B, self.N, 2))
        with np.errstate(divide="ignore"):
            for i in range(self.N):
                self._compute(1, i)
                D = self._root_likelihoods()[:, 0]
                out[:, i] = np.log(D) + self.lognorm[:, 0, 1][:, None]
                self._feed(1, u_true[:, i][:, None])
        return out


def sc_decode(y, spec, m, emission):
    """One-shot SC decode of a single frame."""
    dec = SctdDecoder(spec, m)
    return dec.sc_decode(np.asarray(y)[None], emission)[0]


def scl_decode(y, spec, m, emission, list_size: int):
    """One-shot SCL decode of a single frame."""
    dec = SctdDecoder(spec, m)
    uhat, _ = dec.decode(np.asarray(y)[None], emission, list_size)
    return uhat[0]


def brute_force_joint(y, spec: CodeSpec, m: TrellisModulator, emission,
                      u_prefix, u_i: int, prior=None) -> float:
    """W_N^{(i)}(y, u_0^{i-1} | u_i) by enumeration of the free tail bits."""
    N = spec.N
    if N > 16:
        raise ValueError("brute force limited to N <= 16")
    i = len(u_prefix)
    if prior is None:
        prior = np.zeros(m.num_states)
        prior[0] = 1.0
    ll = emission.loglik(np.asarray(y))  # (N, S)
    lik = np.exp(ll)
    total = 0.0
    tab = m.table
    for tail in product((0, 1), repeat=N - i - 1):
        u = np.array(list(u_prefix) + [u_i] + list(tail), dtype=np.uint8)
        x = encode(u, spec)
        for s0, p0 in enumerate(prior):
            if p0 == 0:
                continue
            s = s0
            w = p0
            for n in range(N):
                s = tab[s][x[n]]
                w *= lik[n, s]
            total += w
    return total * 2.0 ** (-(N - 1))
