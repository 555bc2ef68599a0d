import numpy as np
import pytest

from boolgebra.aig import Aig, lit_not
from boolgebra.aiger import AigerError, parse_aiger, write_aiger
from boolgebra.simulation import check_equivalence

MINIMAL = b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n"

CHAIN = (
    b"aag 5 2 0 1 3\n"
    b"2\n"
    b"4\n"
    b"10\n"
    b"6 2 4\n"
    b"8 5 6\n"
    b"10 7 8\n"
)


def test_parse_minimal_and():
    g = parse_aiger(MINIMAL)
    assert g.n_pis == 2
    assert g.n_ands == 1
    assert g.n_pos == 1
    assert g.depth() == 1
    g.validate()


def test_parse_rejects_latches():
    with pytest.raises(AigerError):
        parse_aiger(b"aag 3 1 1 1 1\n2\n4 2\n6\n6 2 4\n")


def test_parse_rejects_bad_header():
    with pytest.raises(AigerError):
        parse_aiger(b"agg 1 1 0 0 0\n2\n")
    with pytest.raises(AigerError):
        parse_aiger(b"aag 5 2 0 1\n")


def test_parse_rejects_cycles():
    bad = b"aag 3 1 0 1 2\n2\n4\n4 6 2\n6 2 2\n"
    with pytest.raises(AigerError):
        parse_aiger(bad)


def test_parse_rejects_truncation():
    with pytest.raises(AigerError):
        parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n")


def test_ascii_roundtrip_byte_identical():
    g = parse_aiger(CHAIN)
    assert write_aiger(g, "aag") == CHAIN


def test_comment_preserved_on_read_dropped_on_write():
    data = CHAIN + b"c\nbuilt by hand\n"
    g = parse_aiger(data)
    assert g.comment == "built by hand"
    assert b"built by hand" not in write_aiger(g, "aag")


def test_empty_graph_header():
    g = Aig()
    a = g.add_pi()
    g.add_po(a)
    out = write_aiger(g, "aag")
    assert out.splitlines()[0] == b"aag 1 1 0 1 0"


def test_binary_roundtrip_equivalent():
    g = parse_aiger(CHAIN)
    data = write_aiger(g, "aig")
    h = parse_aiger(data)
    assert h.n_ands == g.n_ands
    assert check_equivalence(g, h).status == "equivalent"


def test_parse_does_not_strash():
    dup = b"aag 4 2 0 1 2\n2\n4\n8\n6 2 4\n8 2 4\n"
    g = parse_aiger(dup)
    assert g.n_ands == 2  # duplicate pair kept


@pytest.mark.parametrize("seed", range(6))
def test_random_roundtrip_equivalence(seed):
    rng = np.random.default_rng(seed)
    g = Aig()
    lits = [g.add_pi() for _ in range(8)]
    for _ in range(50):
        a, b = rng.choice(len(lits), size=2, replace=False)
        lits.append(g.make_and(lits[a] ^ int(rng.integers(2)),
                               lits[b] ^ int(rng.integers(2))))
    for k in range(4):
        g.add_po(lits[int(rng.integers(len(lits)))] ^ int(rng.integers(2)))
    for fmt in ("aag", "aig"):
        h = parse_aiger(write_aiger(g, fmt))
        h.validate(strict_strash=False)
        assert check_equivalence(g, h).status == "equivalent"
        assert h.n_ands == g.n_ands


def test_size_preserved_with_dead_nodes_dropped():
    g = parse_aiger(CHAIN)
    extra = g.make_and(2, lit_not(4))
    assert g.n_ands == 4
    g.sweep_dangling()
    data = write_aiger(g, "aag")
    assert parse_aiger(data).n_ands == 3
