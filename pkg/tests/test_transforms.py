import numpy as np
import pytest

from boolgebra.aig import Aig, lit_node, lit_not
from boolgebra.plan import OpCode, StalePlanError, TraversalConfig, apply_plan
from boolgebra.random_graphs import optimizable_aig
from boolgebra.refactor import (
    eval_tree,
    factor_cubes,
    isop_cover,
    try_refactor,
)
from boolgebra.resub import try_resub
from boolgebra.rewrite import try_rewrite
from boolgebra.simulation import check_equivalence
from boolgebra.transforms import (
    AppliedRecord,
    decisions_from_csv,
    decisions_to_csv,
    orchestrated_traversal,
    probe,
    standalone_pass,
)

CFG = TraversalConfig()


# ---------------------------------------------------------------- rewrite

def redundant_mux_graph():
    """f = s&x | ~s&y | x&y: the consensus product is redundant."""
    g = Aig()
    s, x, y = (g.add_pi() for _ in range(3))
    p1 = g.add_and_raw(s, x)
    p2 = g.add_and_raw(lit_not(s), y)
    p3 = g.add_and_raw(x, y)
    o1 = lit_not(g.add_and_raw(lit_not(p1), lit_not(p2)))
    f = lit_not(g.add_and_raw(lit_not(o1), lit_not(p3)))
    g.add_po(f)
    return g, lit_node(f)


def test_rewrite_finds_consensus_redundancy():
    g, root = redundant_mux_graph()
    before = g.copy()
    plan = try_rewrite(g, root)
    assert plan is not None and plan.gain >= 1
    apply_plan(g, plan)
    g.validate()
    assert check_equivalence(before, g).status == "equivalent"
    assert before.n_ands - g.n_ands == plan.gain


def test_rewrite_skips_optimal_cone():
    g = Aig()
    a, b, c = (g.add_pi() for _ in range(3))
    f = g.make_and(g.make_and(a, b), c)
    g.add_po(f)
    assert try_rewrite(g, lit_node(f)) is None


def test_rewrite_duplicate_structure_from_raw_load():
    g = Aig()
    a, b = g.add_pi(), g.add_pi()
    t1 = g.add_and_raw(a, b)
    t2 = g.add_and_raw(a, b)  # duplicate pair survives a non-hashing load
    top = g.add_and_raw(t1, t2)  # computes just a&b
    g.add_po(top)
    before = g.copy()
    plan = try_rewrite(g, lit_node(top))
    assert plan is not None and plan.gain >= 1
    apply_plan(g, plan)
    assert check_equivalence(before, g).status == "equivalent"


# ---------------------------------------------------------------- resub

def test_resub_duplicated_cone():
    g = Aig()
    x, y, z = (g.add_pi() for _ in range(3))
    first = g.add_and_raw(x, g.add_and_raw(y, z))
    second = g.add_and_raw(g.add_and_raw(x, y), z)
    g.add_po(first)
    g.add_po(second)
    before = g.copy()
    plan = try_resub(g, lit_node(second))
    assert plan is not None
    assert plan.gain == 2  # both association nodes freed
    apply_plan(g, plan)
    g.validate()
    assert check_equivalence(before, g).status == "equivalent"


def test_resub_nothing_on_hashed_random_graph():
    rng = np.random.default_rng(5)
    g = Aig()
    pool = [g.add_pi() for _ in range(6)]
    for _ in range(25):
        i, j = rng.choice(len(pool), size=2, replace=False)
        pool.append(g.make_and(pool[i] ^ int(rng.integers(2)),
                               pool[j] ^ int(rng.integers(2))))
    for n in g.and_nodes():
        if not g.fanout_nodes(n):
            g.add_po(2 * n)
    # structurally hashed graphs may still contain functional duplicates;
    # verify any plan the probe returns is sound rather than forbidding it
    before = g.copy()
    for n in list(g.and_nodes()):
        plan = try_resub(g, n)
        if plan is not None:
            assert plan.gain >= 1
    assert check_equivalence(before, g).status == "equivalent"


# ---------------------------------------------------------------- refactor

def test_isop_and_factor_roundtrip():
    rng = np.random.default_rng(11)
    for n_vars in (2, 3, 4, 5):
        full = (1 << (1 << n_vars)) - 1
        for tt in rng.integers(0, full + 1, size=30):
            tt = int(tt)
            cubes = isop_cover(tt, n_vars)
            got = 0
            from boolgebra.refactor import _cube_mask
            for c in cubes:
                got |= _cube_mask(c, n_vars)
            assert got == tt, "cover must equal the on-set"
            tree = factor_cubes(cubes)
            assert eval_tree(tree, n_vars) == tt, "factored form must match"


def test_refactor_demorgan_pattern():
    # j = h & (~h | k) simplifies to h & k
    g = Aig()
    h, k = g.add_pi(), g.add_pi()
    u = g.add_and_raw(h, lit_not(k))       # ~(~h | k)
    j = g.add_and_raw(h, lit_not(u))
    g.add_po(j)
    before = g.copy()
    plan = try_refactor(g, lit_node(j))
    assert plan is not None and plan.gain >= 1
    apply_plan(g, plan)
    assert check_equivalence(before, g).status == "equivalent"
    assert g.n_ands == 1


def test_refactor_single_cube_no_plan():
    g = Aig()
    a, b, c = (g.add_pi() for _ in range(3))
    f = g.make_and(g.make_and(a, b), c)
    g.add_po(f)
    assert try_refactor(g, lit_node(f)) is None


def test_refactor_distributed_product():
    g = Aig()
    a, s1, s2 = (g.add_pi() for _ in range(3))
    p1 = g.add_and_raw(a, s1)
    p2 = g.add_and_raw(a, s2)
    f = lit_not(g.add_and_raw(lit_not(p1), lit_not(p2)))
    g.add_po(f)
    before = g.copy()
    plan = try_refactor(g, lit_node(f))
    assert plan is not None and plan.gain >= 1
    apply_plan(g, plan)
    assert check_equivalence(before, g).status == "equivalent"


# ---------------------------------------------------------------- traversal

def test_traversal_all_rw_on_clean_graph_is_identity():
    g = Aig()
    a, b, c, d = (g.add_pi() for _ in range(4))
    x = g.make_and(a, b)
    y = g.make_and(c, d)
    g.add_po(g.make_and(x, y))
    out, record = orchestrated_traversal(g, np.zeros(g.num_nodes, dtype=np.int8))
    assert out.structure_key() == g.structure_key()
    assert all(op == -1 for op in record.applied)
    assert record.total_reduction == 0


@pytest.mark.parametrize("seed", range(6))
def test_traversal_preserves_function_and_accounts_gains(seed):
    g = optimizable_aig(seed, n_pis=6, target_ands=30)
    rng = np.random.default_rng(seed + 100)
    for _ in range(4):
        dec = rng.integers(0, 3, size=g.num_nodes).astype(np.int8)
        out, record = orchestrated_traversal(g, dec)
        out.validate(strict_strash=False)  # raw-loaded redundancy may persist
        assert check_equivalence(g, out).status == "equivalent"
        assert out.n_ands <= g.n_ands
        assert record.total_reduction == g.n_ands - out.n_ands


def test_traversal_deterministic():
    g = optimizable_aig(3, n_pis=6, target_ands=30)
    dec = np.random.default_rng(0).integers(0, 3, size=g.num_nodes).astype(np.int8)
    a1, r1 = orchestrated_traversal(g, dec)
    a2, r2 = orchestrated_traversal(g, dec)
    assert a1.structure_key() == a2.structure_key()
    assert r1 == r2


def test_standalone_equals_constant_vector():
    g = optimizable_aig(4, n_pis=6, target_ands=30)
    for op in OpCode:
        direct = standalone_pass(g, op)
        via_vector, _ = orchestrated_traversal(
            g, np.full(g.num_nodes, int(op), dtype=np.int8))
        assert direct.structure_key() == via_vector.structure_key()


def test_traversal_rejects_bad_length():
    g = optimizable_aig(5, n_pis=6, target_ands=20)
    from boolgebra.aig import AigError
    with pytest.raises(AigError):
        orchestrated_traversal(g, np.zeros(3, dtype=np.int8))


def test_stale_plan_rejected():
    g, root = redundant_mux_graph()
    plan = try_rewrite(g, root)
    assert plan is not None
    g.make_and(lit_not(g.pis[0] * 2), lit_not(g.pis[1] * 2))  # fresh node
    with pytest.raises(StalePlanError):
        apply_plan(g, plan)


def test_decision_csv_roundtrip():
    dec = np.array([0, 1, 2, 2, 1, 0], dtype=np.int8)
    assert (decisions_from_csv(decisions_to_csv(dec)) == dec).all()


def test_applied_record_csv_roundtrip():
    rec = AppliedRecord(applied=[-1, -1, 0, 2, 1], gains=[0, 0, 1, 3, 0])
    back = AppliedRecord.from_csv(rec.to_csv())
    assert back == rec
