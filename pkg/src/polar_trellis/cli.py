"""Command-line front end.

Subcommands: classify, encode, capacity, va, fer, verify.  Options may come
from a JSON config file (flat key/value object); command-line flags override
file values.  All stochastic commands require an explicit --seed.  snr ranges
use inclusive start:step:end notation.  Exit codes: 0 ok, 1 verification
failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import analysis as an
from . import equivalence as eq
from .channel import DEFAULT_K, DiscreteEmission, random_discrete_emission
from .decoder import SctdDecoder, brute_force_joint
from .polar_core import CodeSpec, Variant, encode
from .trellis import (TrellisModulator, classify, load_table, make_m1,
                      make_m2, make_m3)

VARIANTS = {"conventional": Variant.CONVENTIONAL, "lps": Variant.LAST_PAIR_SWAPPING}


class UsageError(Exception):
    pass


def parse_snr_list(text: str) -> list[float]:
    """Parse '1.5' or 'start:step:end' (inclusive) or comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad snr range {text!r} (want start:step:end)")
        start, step, end = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("snr step must be positive")
        out = []
        v = start
        while v <= end + 1e-9:
            out.append(round(v, 10))
            v += step
        return out
    return [float(t) for t in text.split(",") if t]


def channel_config(name: str, K: int) -> an.ChannelConfig:
    if name in ("m1g", "m2g", "m3g", "g1"):
        return an.ChannelConfig(kind=name, K=K)
    if name.startswith("discrete:"):
        return an.ChannelConfig(kind="discrete", pmf_path=name.split(":", 1)[1])
    raise UsageError(f"unknown channel {name!r}")


def _load_config(ns: argparse.Namespace, parser: argparse.ArgumentParser, argv):
    """Fill argparse defaults from a JSON config file; flags win."""
    if not getattr(ns, "config", None):
        return ns
    try:
        with open(ns.config) as f:
            cfg = json.load(f)
        if not isinstance(cfg, dict):
            raise ValueError("config must be a JSON object")
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read config: {e}") from e
    actions = list(parser._actions)
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            for sp in a.choices.values():
                actions.extend(sp._actions)
    explicit = {a.dest for a in actions
                if any(tok == opt or tok.startswith(opt + "=")
                       for tok in argv for opt in a.option_strings)}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if hasattr(ns, dest) and dest not in explicit:
            setattr(ns, dest, val)
    return ns


# ---------------------------------------------------------------------------
# classify / encode
# ---------------------------------------------------------------------------

def cmd_classify(ns) -> int:
    if ns.instance:
        m = {"m1": make_m1, "m2": make_m2, "m3": make_m3}[ns.instance]()
    else:
        m = load_table(ns.table)
    result = classify(m)
    if result.witness is not None and result.category != result.category.BIJECTIVE:
        blocks = ",".join("{" + ",".join(str(s) for s in b) + "}" for b in result.witness)
        print(f"{result.category.value} {{{blocks}}}")
    else:
        print(result.category.value)
    return 0


def cmd_encode(ns) -> int:
    bits = np.array([int(c) for c in ns.bits], dtype=np.uint8)
    n = int(np.log2(len(bits)))
    if 1 << n != len(bits):
        raise UsageError("input length must be a power of two")
    spec = CodeSpec(n, len(bits), frozenset(), VARIANTS[ns.variant])
    x = encode(bits, spec)
    print("".join(str(int(b)) for b in x))
    return 0


# ---------------------------------------------------------------------------
# capacity / va / fer
# ---------------------------------------------------------------------------

def _require_seed(ns):
    if ns.seed is None:
        raise UsageError("--seed is required (no wall-clock seeding)")


def _specs(ns, N, frozen=frozenset()):
    n = int(np.log2(N))
    if 1 << n != N:
        raise UsageError("N must be a power of two")
    names = ["conventional", "lps"] if ns.variant == "both" else [ns.variant]
    return [(name, CodeSpec(n, N - len(frozen), frozenset(frozen), VARIANTS[name]))
            for name in names]


def cmd_capacity(ns) -> int:
    _require_seed(ns)
    cfg = channel_config(ns.channel, ns.sampling)
    snrs = parse_snr_list(ns.snr)
    m = cfg.modulator()
    rows = []
    for name, spec in _specs(ns, ns.n):
        for k, snr in enumerate(snrs):
            em = cfg.emission(snr)
            cap = an.mc_capacity(spec, m, em, ns.m, (ns.seed, k), batch=ns.batch)
            rows += an.capacity_rows(snr, cap, name, ns.channel, spec.N)
    an.write_capacities_csv(ns.output, rows)
    print(f"capacity: wrote {len(rows)} rows to {ns.output}")
    return 0


def cmd_va(ns) -> int:
    _require_seed(ns)
    cfg = channel_config(ns.channel, ns.sampling)
    snrs = parse_snr_list(ns.snr)
    rows = []
    for name, spec in _specs(ns, ns.n):
        pts = an.va_curve(cfg, spec, snrs, ns.m, ns.seed, batch=ns.batch)
        rows += an.va_rows(pts, name, ns.channel, spec.N, ns.m)
    an.write_va_csv(ns.output, rows)
    print(f"va: wrote {len(rows)} rows to {ns.output}")
    return 0


def _frozen_cached(cache_dir, key_parts, build):
    os.makedirs(cache_dir, exist_ok=True)
    key = hashlib.sha256(repr(key_parts).encode()).hexdigest()[:24]
    path = os.path.join(cache_dir, f"frozen_{key}.json")
    if os.path.exists(path):
        with open(path) as f:
            return frozenset(json.load(f))
    fs = build()
    with open(path, "w") as f:
        json.dump(sorted(fs), f)
    return fs


def cmd_fer(ns) -> int:
    _require_seed(ns)
    cfg = channel_config(ns.channel, ns.sampling)
    snrs = parse_snr_list(ns.snr)
    K = ns.k if ns.k is not None else int(round(ns.rate * ns.n_len))
    m = cfg.modulator()
    records = []
    for name, _ in _specs(ns, ns.n_len):
        variant = VARIANTS[name]
        n = int(np.log2(ns.n_len))
        for snr in snrs:
            design = ns.design_snr if ns.design_snr is not None else snr
            full = CodeSpec(n, ns.n_len, frozenset(), variant)

            def build():
                em = cfg.emission(design)
                cap = an.mc_capacity(full, m, em, ns.design_m, (ns.seed, 999), batch=ns.batch)
                return an.frozen_set_from_capacities(cap, K)

            frozen = _frozen_cached(
                ns.cache_dir,
                (ns.channel, name, ns.n_len, K, design, ns.design_m, ns.seed, ns.sampling),
                build,
            )
            spec = CodeSpec(n, K, frozen, variant)
            em = cfg.emission(snr)
            rec = an.fer_experiment(spec, m, em, ns.list, ns.trials, ns.seed,
                                    snr_db=snr, channel=ns.channel, batch=ns.batch)
            records.append(rec)
            lo, hi = rec.ci95()
            print(f"fer: {name} snr={snr} fer={rec.fer:.4g} ci=[{lo:.4g},{hi:.4g}]")
    an.write_fer_csv(ns.output, records)
    print(f"fer: wrote {len(records)} records to {ns.output}")
    return 0


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _oracle_instances(seed):
    rng = np.random.default_rng(seed)
    out = []
    for S in (2, 4, 2):
        m = an.random_bijective_modulator(S, rng)
        em = random_discrete_emission(S, 3, rng)
        out.append((m, em))
    return out


def suite_thm1(seed=2024, tol=1e-9):
    lines, ok = [], True
    for idx, (m, em) in enumerate(_oracle_instances(seed)):
        w = an.comparison_channel(m, em)
        for n in (1, 2, 3):
            sp = an.exact_capacity(m, em, n, Variant.LAST_PAIR_SWAPPING)
            mem = an.exact_capacity_memoryless(w, n)
            d = float(np.max(np.abs(sp.raw - mem.raw)))
            good = d <= tol
            ok &= good
            lines.append(f"thm1 instance={idx} N={1 << n} |D|={d:.3e} "
                         f"{'PASS' if good else 'FAIL'}")
    return ok, lines


def suite_prop2(seed=2024, tol=1e-9):
    lines, ok = [], True
    for idx, (m, em) in enumerate(_oracle_instances(seed)):
        w = an.comparison_channel(m, em)
        iw = an.binary_channel_capacity(w)
        memo = {}
        for n in (1, 2, 3):
            cp = an.exact_capacity(m, em, n, Variant.CONVENTIONAL)
            pred = np.empty(1 << n)
            for i in range(1 << n):
                blk, j = an.prop2_predict(i)
                nn = blk.bit_length() - 1
                if nn not in memo:
                    memo[nn] = an.exact_capacity_memoryless(w, nn).raw
                pred[i] = memo[nn][j]
            d = float(np.max(np.abs(cp.raw - pred)))
            good = d <= tol
            ok &= good
            lines.append(f"prop2 instance={idx} N={1 << n} |D|={d:.3e} "
                         f"{'PASS' if good else 'FAIL'}")
        # length-2 non-polarization: both sub-channels equal I(W)
        cp2 = an.exact_capacity(m, em, 1, Variant.CONVENTIONAL)
        d2 = float(np.max(np.abs(cp2.raw - iw)))
        good = d2 <= tol
        ok &= good
        lines.append(f"prop2 instance={idx} N=2 nonpolarized |D|={d2:.3e} "
                     f"{'PASS' if good else 'FAIL'}")
    return ok, lines


def suite_thm2(seed=2024):
    lines, ok = [], True
    for idx, (m, em) in enumerate(_oracle_instances(seed)):
        for n in (1, 2, 3):
            sp = an.exact_capacity(m, em, n, Variant.LAST_PAIR_SWAPPING)
            cp = an.exact_capacity(m, em, n, Variant.CONVENTIONAL)
            gap = sp.var - cp.var
            good = gap > 1e-6
            ok &= good
            lines.append(f"thm2 instance={idx} N={1 << n} var gap={gap:.3e} "
                         f"{'PASS' if good else 'FAIL'}")
        # equality cases: noiseless and pure-noise emissions
        S = m.num_states
        for tag, pmf in (("noiseless", np.eye(S)),
                         ("purenoise", np.full((S, 3), 1.0 / 3))):
            emx = DiscreteEmission(pmf)
            sp = an.exact_capacity(m, emx, 3, Variant.LAST_PAIR_SWAPPING)
            cp = an.exact_capacity(m, emx, 3, Variant.CONVENTIONAL)
            gap = abs(sp.var - cp.var)
            good = gap <= 1e-12
            ok &= good
            lines.append(f"thm2 instance={idx} {tag} |var gap|={gap:.3e} "
                         f"{'PASS' if good else 'FAIL'}")
    return ok, lines


def suite_prop1(seed=2024):
    rng = np.random.default_rng(seed)
    lines, ok = [], True
    for i, tol in ((2, 1e-12), (3, 1e-12), (1, 1e-9)):
        worst = 0.0
        for _ in range(5):
            x = rng.integers(0, 2, 4)
            worst = max(worst, eq.verify_prop1(i, x, 4, 0.25, int(rng.integers(1 << 30))))
        good = worst <= tol
        ok &= good
        lines.append(f"prop1 instance={i} max discrepancy={worst:.3e} "
                     f"{'PASS' if good else 'FAIL'}")
    return ok, lines


def suite_sctd(seed=2024, tol=1e-9, cases=100):
    rng = np.random.default_rng(seed)
    lines, ok = [], True
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 4))
        N = 1 << n
        S = int(rng.integers(2, 5))
        tab = tuple(tuple(int(v) for v in rng.integers(0, S, 2)) for _ in range(S))
        m = TrellisModulator(S, tab)
        em = random_discrete_emission(S, 3, rng)
        variant = Variant.LAST_PAIR_SWAPPING if rng.integers(0, 2) else Variant.CONVENTIONAL
        spec = CodeSpec(n, N, frozenset(), variant)
        dec = SctdDecoder(spec, m)
        u = rng.integers(0, 2, N)
        x = encode(u.astype(np.uint8), spec)
        y = em.transmit(m.modulate(x), rng)
        ours = dec.phase_log_likelihoods(y, em, u)[0]
        i = int(rng.integers(0, N))
        b = int(rng.integers(0, 2))
        ref = brute_force_joint(y, spec, m, em, list(u[:i]), b)
        rel = abs(np.exp(ours[i, b]) - ref) / max(ref, 1e-300)
        worst = max(worst, rel)
    good = worst <= tol
    ok &= good
    lines.append(f"sctd oracle {cases} cases, worst rel err={worst:.3e} "
                 f"{'PASS' if good else 'FAIL'}")
    return ok, lines


SUITES = {"thm1": suite_thm1, "thm2": suite_thm2, "prop1": suite_prop1,
          "prop2": suite_prop2, "sctd": suite_sctd}


def cmd_verify(ns) -> int:
    names = list(SUITES) if ns.suite == "all" else [ns.suite]
    all_ok = True
    for name in names:
        ok, lines = SUITES[name](seed=ns.seed if ns.seed is not None else 2024)
        all_ok &= ok
        for line in lines:
            print(line)
    print("verify:", "PASS" if all_ok else "FAIL")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polar-trellis")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify a trellis modulator")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--instance", choices=["m1", "m2", "m3"])
    g.add_argument("--table", help="transition table file")
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("encode", help="encode a source word")
    e.add_argument("--variant", choices=list(VARIANTS), default="conventional")
    e.add_argument("--bits", required=True, help="source bits, e.g. 0101")
    e.set_defaults(func=cmd_encode)

    def common(sp, n_flag="--n"):
        sp.add_argument("--config", help="JSON config file (flags override)")
        sp.add_argument("--channel", default="m1g")
        sp.add_argument("--variant", choices=list(VARIANTS) + ["both"],
                        default="conventional")
        sp.add_argument("--snr", default="0", help="value, list, or start:step:end")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--sampling", type=int, default=DEFAULT_K,
                        help="waveform sampling factor K")
        sp.add_argument("--batch", type=int, default=256)
        sp.add_argument("-o", "--output", default="out.csv")

    cap = sub.add_parser("capacity", help="Monte-Carlo sub-channel capacities")
    common(cap)
    cap.add_argument("--n", type=int, default=64, help="code length N")
    cap.add_argument("--m", type=int, default=10_000, help="Monte-Carlo samples")
    cap.set_defaults(func=cmd_capacity)

    va = sub.add_parser("va", help="variance-vs-average capacity sweep")
    common(va)
    va.add_argument("--n", type=int, default=64)
    va.add_argument("--m", type=int, default=10_000)
    va.set_defaults(func=cmd_va)

    fer = sub.add_parser("fer", help="frame error rate experiment")
    common(fer)
    fer.add_argument("--n", dest="n_len", type=int, default=256, help="code length N")
    fer.add_argument("--k", type=int, help="info bits (overrides --rate)")
    fer.add_argument("--rate", type=float, default=0.5)
    fer.add_argument("--list", type=int, default=8)
    fer.add_argument("--trials", type=int, default=10_000)
    fer.add_argument("--design-snr", type=float, dest="design_snr")
    fer.add_argument("--design-m", type=int, dest="design_m", default=20_000)
    fer.add_argument("--cache-dir", dest="cache_dir", default=".polar_trellis_cache")
    fer.set_defaults(func=cmd_fer)

    v = sub.add_parser("verify", help="run the exact oracle suites")
    v.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        ns = parser.parse_args(argv)
        ns = _load_config(ns, parser, argv)
        return ns.func(ns)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
