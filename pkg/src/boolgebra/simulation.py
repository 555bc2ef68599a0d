"""Bit-parallel simulation and simulation-based equivalence checking.

Patterns are packed 64 per machine word; a graph with P inputs is checked
exhaustively by sweeping all 2^P assignments in word-sized blocks.  Random
mode samples word blocks and can only ever return a counterexample or
``inconclusive``, never ``equivalent``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aig import Aig, AigError, lit_node

EXHAUSTIVE_PI_LIMIT = 20

EQUIVALENT = "equivalent"
COUNTEREXAMPLE = "counterexample"
INCONCLUSIVE = "inconclusive"

_U64 = np.uint64
_ALL_ONES = _U64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class EquivResult:
    status: str
    counterexample: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.status == EQUIVALENT


def simulate(g: Aig, input_words: np.ndarray) -> np.ndarray:
    """Evaluate the graph on packed patterns.

    ``input_words`` has shape (n_pis, n_words), dtype uint64; the result has
    shape (n_pos, n_words).
    """
    words = np.asarray(input_words, dtype=_U64)
    if words.ndim != 2 or words.shape[0] != g.n_pis:
        raise AigError(f"expected ({g.n_pis}, W) input words, got {words.shape}")
    n_words = words.shape[1]
    values = np.zeros((g.num_nodes, n_words), dtype=_U64)
    for k, pi in enumerate(g.pis):
        values[pi] = words[k]
    for n in g.topological_order():
        if not g.is_and(n):
            continue
        f0, f1 = g.fanins(n)
        v0 = values[f0 >> 1] ^ _ALL_ONES if f0 & 1 else values[f0 >> 1]
        v1 = values[f1 >> 1] ^ _ALL_ONES if f1 & 1 else values[f1 >> 1]
        values[n] = v0 & v1
    out = np.empty((g.n_pos, n_words), dtype=_U64)
    for k, po in enumerate(g.pos):
        v = values[po >> 1]
        out[k] = v ^ _ALL_ONES if po & 1 else v
    return out


def simulate_pattern(g: Aig, bits: tuple[int, ...] | list[int]) -> list[int]:
    """Scalar single-pattern evaluation (reference path for tests)."""
    if len(bits) != g.n_pis:
        raise AigError("pattern width mismatch")
    values = {0: 0}
    for k, pi in enumerate(g.pis):
        values[pi] = int(bits[k]) & 1

    def lit_value(lit: int) -> int:
        return values[lit >> 1] ^ (lit & 1)

    for n in g.topological_order():
        if g.is_and(n):
            f0, f1 = g.fanins(n)
            values[n] = lit_value(f0) & lit_value(f1)
    return [lit_value(po) for po in g.pos]


def exhaustive_input_words(n_pis: int) -> np.ndarray:
    """All 2^n assignments packed into words; column-parallel layout.

    Variable i toggles with period 2^i across the global pattern index, so
    pattern p assigns bit ``(p >> i) & 1`` to input i.
    """
    if n_pis > EXHAUSTIVE_PI_LIMIT:
        raise AigError(f"{n_pis} inputs exceed the exhaustive limit {EXHAUSTIVE_PI_LIMIT}")
    n_patterns = 1 << n_pis
    n_words = max(1, n_patterns // 64)
    words = np.zeros((max(n_pis, 1), n_words), dtype=_U64)
    word_idx = np.arange(n_words, dtype=np.uint64)
    for i in range(n_pis):
        if i < 6:
            mask = _U64(0)
            for p in range(64):
                if (p >> i) & 1:
                    mask |= _U64(1) << _U64(p)
            row = np.full(n_words, mask, dtype=_U64)
            if n_patterns < 64:
                keep = (_U64(1) << _U64(n_patterns)) - _U64(1)
                row &= keep
            words[i] = row
        else:
            # constant per word: bit i of the word's base pattern index
            sel = ((word_idx >> _U64(i - 6)) & _U64(1)).astype(bool)
            row = np.where(sel, _ALL_ONES, _U64(0))
            words[i] = row
    return words[:n_pis] if n_pis else words[:0]


def _first_diff_pattern(n_pis: int, a_out: np.ndarray, b_out: np.ndarray,
                        words: np.ndarray) -> tuple[int, ...]:
    diff = a_out ^ b_out
    po, word = np.argwhere(diff != 0)[0]
    bits = int(diff[po, word])
    bit = (bits & -bits).bit_length() - 1
    return tuple(int(words[i, word] >> _U64(bit)) & 1 for i in range(n_pis))


def check_equivalence(a: Aig, b: Aig, mode: str = "exhaustive",
                      n_words: int = 256, seed: int = 0) -> EquivResult:
    """Compare two graphs output-by-output.

    ``mode="exhaustive"`` needs matching PI counts of at most 20 and returns
    a definite verdict.  ``mode="random"`` simulates ``n_words`` random
    64-bit words per input and returns either a counterexample or
    ``inconclusive``.
    """
    if a.n_pis != b.n_pis:
        raise AigError(f"PI count mismatch: {a.n_pis} vs {b.n_pis}")
    if a.n_pos != b.n_pos:
        raise AigError(f"PO count mismatch: {a.n_pos} vs {b.n_pos}")
    if mode == "exhaustive":
        if a.n_pis > EXHAUSTIVE_PI_LIMIT:
            raise AigError(f"exhaustive mode limited to {EXHAUSTIVE_PI_LIMIT} PIs")
        words = exhaustive_input_words(a.n_pis)
        mask = None
        if (1 << a.n_pis) < 64:
            mask = (_U64(1) << _U64(1 << a.n_pis)) - _U64(1)
        a_out = simulate(a, words)
        b_out = simulate(b, words)
        if mask is not None:
            a_out = a_out & mask
            b_out = b_out & mask
        if np.array_equal(a_out, b_out):
            return EquivResult(EQUIVALENT)
        return EquivResult(COUNTEREXAMPLE,
                           _first_diff_pattern(a.n_pis, a_out, b_out, words))
    if mode == "random":
        rng = np.random.default_rng(seed)
        words = rng.integers(0, 2 ** 64, size=(max(a.n_pis, 1), n_words),
                             dtype=np.uint64)[: a.n_pis]
        a_out = simulate(a, words)
        b_out = simulate(b, words)
        if np.array_equal(a_out, b_out):
            return EquivResult(INCONCLUSIVE)
        return EquivResult(COUNTEREXAMPLE,
                           _first_diff_pattern(a.n_pis, a_out, b_out, words))
    raise AigError(f"unknown equivalence mode {mode!r}")
