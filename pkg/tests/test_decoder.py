import numpy as np
import pytest

from polar_trellis.channel import DiscreteEmission, random_discrete_emission
from polar_trellis.decoder import (SctdDecoder, brute_force_joint, sc_decode,
                                   scl_decode)
from polar_trellis.polar_core import CodeSpec, Variant, encode
from polar_trellis.trellis import (TrellisModulator, make_m1, make_m2,
                                   make_memoryless)


def full_spec(n, variant=Variant.CONVENTIONAL):
    return CodeSpec(n, 1 << n, frozenset(), variant)


# -- independent memoryless SC reference (textbook probability recursions) --

def ref_memoryless_joint(lik, u_prefix, u_i):
    """W_N^{(i)}(y, u_0^{i-1} | u_i) on a memoryless channel, recursively.

    lik: (N, 2) array of W(y_n | x_n).
    """

    def rec(lik, i, u):
        N = lik.shape[0]
        if N == 1:
            return lik[0, u[0]]
        half = N // 2
        j = i // 2
        # left sub-code sees the XORed pairs, right sub-code the odd bits
        ul = [u[2 * t] ^ u[2 * t + 1] for t in range(j)]
        ur = [u[2 * t + 1] for t in range(j)]
        if i % 2 == 0:
            tot = 0.0
            for b in (0, 1):
                tot += rec(lik[:half], j, ul + [u[i] ^ b]) * \
                    rec(lik[half:], j, ur + [b])
            return 0.5 * tot
        return 0.5 * rec(lik[:half], j, ul + [u[i - 1] ^ u[i]]) * \
            rec(lik[half:], j, ur + [u[i]])

    u = np.array(list(u_prefix) + [u_i], dtype=np.int64)
    return rec(lik, len(u_prefix), u)


def test_sctd_matches_memoryless_reference():
    rng = np.random.default_rng(5)
    for n in (1, 2, 3):
        N = 1 << n
        pmf = rng.random((2, 3)) + 0.1
        em = DiscreteEmission(pmf / pmf.sum(axis=1, keepdims=True))
        m = make_memoryless()
        spec = full_spec(n)
        dec = SctdDecoder(spec, m)
        u = rng.integers(0, 2, N)
        y = em.transmit(m.modulate(encode(u.astype(np.uint8), spec)), rng)
        ll = dec.phase_log_likelihoods(y, em, u)[0]
        lik = np.exp(em.loglik(y))
        for i in range(N):
            for b in (0, 1):
                ref = ref_memoryless_joint(lik, list(u[:i]), b)
                assert np.isclose(np.exp(ll[i, b]), ref, rtol=1e-10)


@pytest.mark.parametrize("variant", list(Variant))
def test_sctd_matches_brute_force(variant):
    rng = np.random.default_rng(11)
    for _ in range(15):
        n = int(rng.integers(1, 4))
        N = 1 << n
        S = int(rng.integers(2, 5))
        tab = tuple(tuple(int(v) for v in rng.integers(0, S, 2)) for _ in range(S))
        m = TrellisModulator(S, tab)
        em = random_discrete_emission(S, 3, rng)
        spec = full_spec(n, variant)
        dec = SctdDecoder(spec, m)
        u = rng.integers(0, 2, N)
        y = em.transmit(m.modulate(encode(u.astype(np.uint8), spec)), rng)
        ll = dec.phase_log_likelihoods(y, em, u)[0]
        i = int(rng.integers(0, N))
        b = int(rng.integers(0, 2))
        ref = brute_force_joint(y, spec, m, em, list(u[:i]), b)
        assert np.isclose(np.exp(ll[i, b]), ref, rtol=1e-9)


def test_genie_entropies_consistent_with_likelihoods():
    rng = np.random.default_rng(2)
    m = make_m2()
    em = random_discrete_emission(8, 4, rng)
    spec = full_spec(3, Variant.LAST_PAIR_SWAPPING)
    dec = SctdDecoder(spec, m)
    u = rng.integers(0, 2, 8)
    y = em.transmit(m.modulate(encode(u.astype(np.uint8), spec)), rng)
    eta = dec.genie_entropies(y, em, u)[0]
    ll = dec.phase_log_likelihoods(y, em, u)[0]
    w = np.exp(ll)
    post = w[np.arange(8), u] / w.sum(axis=1)
    assert np.allclose(eta, -np.log2(post))


@pytest.mark.parametrize("variant", list(Variant))
def test_noiseless_decode_recovers_source(variant):
    m = make_m1()
    em = DiscreteEmission(np.eye(2))
    spec = CodeSpec(3, 5, frozenset({0, 1, 2}), variant)
    rng = np.random.default_rng(7)
    u = np.zeros(8, dtype=np.uint8)
    u[[3, 4, 5, 6, 7]] = rng.integers(0, 2, 5)
    y = em.transmit(m.modulate(encode(u, spec)), rng)
    uhat = sc_decode(y, spec, m, em)
    assert np.array_equal(uhat, u)


def test_frozen_bits_forced_zero():
    m = make_m1()
    em = random_discrete_emission(2, 3, np.random.default_rng(0))
    spec = CodeSpec(3, 4, frozenset({0, 1, 2, 4}))
    dec = SctdDecoder(spec, m)
    rng = np.random.default_rng(1)
    y = em.transmit(rng.integers(0, 2, (6, 8)), rng)
    uhat, _ = dec.decode(y, em, list_size=4)
    assert not uhat[:, [0, 1, 2, 4]].any()


def test_batch_decode_matches_single_frames():
    m = make_m2()
    em = random_discrete_emission(8, 3, np.random.default_rng(4))
    spec = CodeSpec(3, 4, frozenset({0, 1, 2, 4}), Variant.LAST_PAIR_SWAPPING)
    dec = SctdDecoder(spec, m)
    rng = np.random.default_rng(5)
    y = em.transmit(rng.integers(0, 8, (5, 8)) % 8, rng)
    batch, _ = dec.decode(y, em, list_size=2)
    for b in range(5):
        single = scl_decode(y[b], spec, m, em, 2)
        assert np.array_equal(batch[b], single)


def test_list_one_equals_sc():
    m = make_m1()
    em = random_discrete_emission(2, 3, np.random.default_rng(8))
    spec = CodeSpec(4, 8, frozenset(range(8)))
    dec = SctdDecoder(spec, m)
    rng = np.random.default_rng(9)
    y = em.transmit(rng.integers(0, 2, (4, 16)), rng)
    uhat1, _ = dec.decode(y, em, list_size=1)
    assert np.array_equal(uhat1, dec.sc_decode(y, em))


def test_uniform_prior_changes_likelihoods():
    m = make_m2()
    em = random_discrete_emission(8, 3, np.random.default_rng(12))
    spec = full_spec(2)
    rng = np.random.default_rng(13)
    u = rng.integers(0, 2, 4)
    y = em.transmit(m.modulate(encode(u.astype(np.uint8), spec)), rng)
    point = SctdDecoder(spec, m).phase_log_likelihoods(y, em, u)
    uni = SctdDecoder(spec, m, prior=np.full(8, 1 / 8)).phase_log_likelihoods(y, em, u)
    assert not np.allclose(point, uni)


def test_brute_force_size_guard():
    spec = full_spec(5)
    with pytest.raises(ValueError):
        brute_force_joint(np.zeros(32, dtype=int), spec, make_m1(),
                          DiscreteEmission(np.eye(2)), [], 0)
