"""Finite trellis modulators and their classification.

A trellis modulator is a deterministic finite-state machine (S, B, F) with
binary input: s_n = F(s_{n-1}, x_n), starting from state 0.  Three built-in
instances correspond to binary CPM schemes:

* M1: |S| = 2,  F1(k, x) = (k + x) mod 2            (MSK phase state)
* M2: |S| = 8,  F2(k, x) = (k + x + (k mod 2)) mod 8
* M3: |S| = 4,  F3(k, x) = (2k + x) mod 4           (pure ISI memory)

Classification (by transition-table structure):

* Bijective: F is a bijection in each argument separately (this forces
  |S| = 2, since F(s, .) maps {0,1} onto S).
* Sub-injective: some partition Q of S has a well-defined induced block map
  F^Q that is injective in each argument.
* Non-sub-injective: no such partition exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

MAX_CLASSIFY_STATES = 12


@dataclass(frozen=True)
class TrellisModulator:
    """Deterministic state machine: table[s][x] = next state; initial state 0."""

    num_states: int
    table: tuple  # tuple of (next_on_0, next_on_1) per state
    name: str = ""

    def __post_init__(self):
        if len(self.table) != self.num_states:
            raise ValueError("table size mismatch")
        for row in self.table:
            if len(row) != 2 or not all(0 <= s < self.num_states for s in row):
                raise ValueError("invalid transition entry")
        object.__setattr__(self, "table", tuple(tuple(int(s) for s in r) for r in self.table))

    def step(self, s: int, x: int) -> int:
        return self.table[s][x]

    def table_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    def modulate(self, x) -> np.ndarray:
        """State sequence s_0..s_{len(x)-1} driven by bits x from state 0."""
        x = np.asarray(x, dtype=np.int64)
        out = np.empty(x.shape, dtype=np.int64)
        s = 0
        for i, b in enumerate(x):
            s = self.table[s][b]
            out[i] = s
        return out

    def modulate_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized modulate over rows of a (batch, N) bit array."""
        X = np.asarray(X, dtype=np.int64)
        tab = self.table_array()
        out = np.empty(X.shape, dtype=np.int64)
        s = np.zeros(X.shape[0], dtype=np.int64)
        for n in range(X.shape[1]):
            s = tab[s, X[:, n]]
            out[:, n] = s
        return out


class Category(str, Enum):
    BIJECTIVE = "Bijective"
    SUB_INJECTIVE_NON_BIJECTIVE = "SubInjectiveNonBijective"
    NON_SUB_INJECTIVE = "NonSubInjective"


@dataclass(frozen=True)
class Classification:
    category: Category
    witness: tuple | None = None  # tuple of sorted blocks, or None

    def witness_blocks(self):
        return None if self.witness is None else [set(b) for b in self.witness]


def make_m1() -> TrellisModulator:
    return TrellisModulator(2, tuple((k % 2, (k + 1) % 2) for k in range(2)), "m1")


def make_m2() -> TrellisModulator:
    return TrellisModulator(
        8, tuple(((k + k % 2) % 8, (k + 1 + k % 2) % 8) for k in range(8)), "m2"
    )


def make_m3() -> TrellisModulator:
    return TrellisModulator(4, tuple(((2 * k) % 4, (2 * k + 1) % 4) for k in range(4)), "m3")


def make_memoryless() -> TrellisModulator:
    """Two-state machine with s_n = x_n: a memoryless channel in trellis form."""
    return TrellisModulator(2, ((0, 1), (0, 1)), "memoryless")


def make_cpm_trellis(M: int, h, L: int) -> TrellisModulator:
    """Trellis of a binary CPM scheme with modulation index h = J/P and memory L.

    The state is (accumulated phase index mod P, last L input symbols):
    s = p * M^L + sum_i x_{n-i} M^i.  Stepping shifts the symbol window and
    folds its oldest symbol into the phase accumulator.
    """
    if M != 2:
        raise ValueError("only binary CPM (M = 2) is supported")
    h = Fraction(h)
    P = h.denominator
    if L < 1:
        raise ValueError("L must be >= 1")
    ML = M**L
    num_states = P * ML
    table = []
    for s in range(num_states):
        p, tail = divmod(s, ML)
        top = tail // (ML // M)  # oldest symbol in the window
        rest = tail % (ML // M)
        row = []
        for x in range(2):
            p2 = (p + top) % P
            row.append(p2 * ML + rest * M + x)
        table.append(tuple(row))
    return TrellisModulator(num_states, tuple(table), f"cpm({M},{h},{L})")


def load_table(path) -> TrellisModulator:
    """Read a transition table: first line num_states, then `F(s,0) F(s,1)` rows."""
    with open(path) as f:
        tokens = f.read().split()
    if not tokens:
        raise ValueError("empty table file")
    try:
        num_states = int(tokens[0])
        vals = [int(t) for t in tokens[1:]]
    except ValueError as e:
        raise ValueError(f"malformed table file: {e}") from e
    if num_states < 1 or len(vals) != 2 * num_states:
        raise ValueError("table file does not match declared state count")
    table = tuple((vals[2 * s], vals[2 * s + 1]) for s in range(num_states))
    return TrellisModulator(num_states, table)


def save_table(m: TrellisModulator, path) -> None:
    with open(path, "w") as f:
        f.write(f"{m.num_states}\n")
        for s in range(m.num_states):
            f.write(f"{m.table[s][0]} {m.table[s][1]}\n")


def _partition_from_rgs(rgs) -> list[list[int]]:
    nblocks = max(rgs) + 1
    blocks = [[] for _ in range(nblocks)]
    for s, b in enumerate(rgs):
        blocks[b].append(s)
    return blocks


def _iter_rgs(n: int):
    """All restricted-growth strings of length n, in lexicographic order."""
    a = [0] * n
    while True:
        yield tuple(a)
        # next RGS: increment rightmost position that can grow
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
            a[i] = 0
            i -= 1
        else:
            return


def induced_map(m: TrellisModulator, blocks):
    """Block-level transition table, or None if some image straddles blocks.

    blocks: iterable of disjoint state sets covering S.  Returns a list of
    (next_block_on_0, next_block_on_1) indices parallel to `blocks` when every
    image set {F(s,x) : s in block} lands inside a single block.
    """
    blocks = [sorted(b) for b in blocks]
    covered = sorted(s for b in blocks for s in b)
    if covered != list(range(m.num_states)):
        raise ValueError("not a partition of the state space")
    block_of = {}
    for i, b in enumerate(blocks):
        for s in b:
            block_of[s] = i
    out = []
    for b in blocks:
        row = []
        for x in range(2):
            imgs = {block_of[m.table[s][x]] for s in b}
            if len(imgs) != 1:
                return None
            row.append(imgs.pop())
        out.append(tuple(row))
    return out


def _injective_each_var(table, n: int) -> bool:
    for x in range(2):
        if len({table[s][x] for s in range(n)}) != n:
            return False
    for s in range(n):
        if table[s][0] == table[s][1]:
            return False
    return True


def is_bijective(m: TrellisModulator) -> bool:
    """F bijective in each argument: columns permute S and rows map B onto S."""
    if m.num_states != 2:
        return False  # F(s, .): {0,1} -> S cannot be onto otherwise
    return _injective_each_var(m.table, 2)


def classify(m: TrellisModulator) -> Classification:
    """Classify per transition-table structure; returns a witnessing partition.

    The sub-injective search enumerates all partitions of S as restricted-
    growth strings.  Among witnessing partitions the finest one (most blocks)
    is returned, ties broken by enumeration order.  The all-singletons
    partition is only considered while bijectivity has not already failed.
    """
    n = m.num_states
    if n > MAX_CLASSIFY_STATES:
        raise ValueError(f"state space too large to classify (|S| = {n} > {MAX_CLASSIFY_STATES})")
    if is_bijective(m):
        singles = tuple((s,) for s in range(n))
        return Classification(Category.BIJECTIVE, singles)
    best = None
    for rgs in _iter_rgs(n):
        nblocks = max(rgs) + 1
        if nblocks == n:
            continue  # singletons: bijectivity already failed
        if best is not None and nblocks <= len(best):
            continue
        blocks = _partition_from_rgs(rgs)
        ind = induced_map(m, blocks)
        if ind is None:
            continue
        if _injective_each_var(ind, nblocks):
            best = tuple(tuple(b) for b in blocks)
    if best is not None:
        return Classification(Category.SUB_INJECTIVE_NON_BIJECTIVE, best)
    return Classification(Category.NON_SUB_INJECTIVE, None)
