"""Cross-checks of the fast paths against independent reference evaluations."""

import numpy as np
import pytest

from boolgebra.aig import Aig, lit_not
from boolgebra.simulation import (
    EQUIVALENT,
    COUNTEREXAMPLE,
    INCONCLUSIVE,
    check_equivalence,
    exhaustive_input_words,
    simulate,
    simulate_pattern,
)


def random_aig(rng, n_pis=6, n_ands=20, n_pos=3):
    g = Aig()
    lits = [g.add_pi() for _ in range(n_pis)]
    for _ in range(n_ands):
        a, b = rng.choice(len(lits), size=2, replace=False)
        la = lits[a] ^ int(rng.integers(2))
        lb = lits[b] ^ int(rng.integers(2))
        lits.append(g.make_and(la, lb))
    for _ in range(n_pos):
        g.add_po(lits[int(rng.integers(len(lits)))] ^ int(rng.integers(2)))
    return g


def test_simulate_passthrough():
    g = Aig()
    a = g.add_pi()
    g.add_po(a)
    words = np.array([[0xDEADBEEFCAFEF00D]], dtype=np.uint64)
    assert simulate(g, words)[0, 0] == words[0, 0]


def test_simulate_contradiction_is_zero():
    g = Aig()
    a = g.add_pi()
    g.add_po(g.make_and(a, lit_not(a)))
    words = np.array([[0xFFFFFFFFFFFFFFFF]], dtype=np.uint64)
    assert simulate(g, words)[0, 0] == 0


def test_exhaustive_words_encode_pattern_bits():
    words = exhaustive_input_words(8)
    for p in [0, 1, 77, 200, 255]:
        word, bit = divmod(p, 64)
        for i in range(8):
            assert (int(words[i, word]) >> bit) & 1 == (p >> i) & 1


@pytest.mark.parametrize("seed", range(5))
def test_bit_parallel_matches_scalar(seed):
    rng = np.random.default_rng(seed)
    g = random_aig(rng, n_pis=10, n_ands=30)
    words = exhaustive_input_words(10)
    fast = simulate(g, words)
    for p in rng.integers(0, 1 << 10, size=40):
        p = int(p)
        bits = [(p >> i) & 1 for i in range(10)]
        expect = simulate_pattern(g, bits)
        word, bit = divmod(p, 64)
        got = [(int(fast[k, word]) >> bit) & 1 for k in range(g.n_pos)]
        assert got == expect


def test_equivalence_reflexive():
    rng = np.random.default_rng(7)
    g = random_aig(rng)
    assert check_equivalence(g, g).status == EQUIVALENT


def test_equivalence_detects_complemented_po():
    rng = np.random.default_rng(8)
    g = random_aig(rng, n_pos=1)
    h = g.copy()
    h._pos[0] ^= 1  # complemented function differs on every pattern
    res = check_equivalence(g, h)
    assert res.status == COUNTEREXAMPLE
    pattern = res.counterexample
    assert simulate_pattern(g, pattern) != simulate_pattern(h, pattern)


def test_random_mode_never_claims_equivalence():
    rng = np.random.default_rng(9)
    g = random_aig(rng)
    res = check_equivalence(g, g.copy(), mode="random", n_words=4, seed=3)
    assert res.status == INCONCLUSIVE


def test_random_mode_counterexample():
    g = Aig()
    a, b = g.add_pi(), g.add_pi()
    g.add_po(g.make_and(a, b))
    h = Aig()
    a2, b2 = h.add_pi(), h.add_pi()
    h.add_po(h.make_or(a2, b2))
    res = check_equivalence(g, h, mode="random", n_words=2, seed=1)
    assert res.status == COUNTEREXAMPLE
    bits = res.counterexample
    assert simulate_pattern(g, bits) != simulate_pattern(h, bits)
