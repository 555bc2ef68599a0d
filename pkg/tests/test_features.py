import numpy as np
import pytest

from boolgebra.aig import Aig, lit_node, lit_not
from boolgebra.features import (
    SENTINEL,
    applicability,
    dynamic_features,
    edge_list,
    export_sample,
    feature_matrix,
    projected_dynamic_features,
    read_edge_list,
    read_features,
    static_features,
)
from boolgebra.random_graphs import optimizable_aig
from boolgebra.sampling import SamplerConfig, build_dataset
from boolgebra.transforms import AppliedRecord, orchestrated_traversal, probe
from boolgebra.plan import OpCode, TraversalConfig, apply_plan


def test_pi_rows_are_sentinel():
    g = optimizable_aig(1, n_pis=5, target_ands=15)
    st = static_features(g)
    for pi in g.pis:
        assert (st[pi] == SENTINEL).all()
    assert (st[0] == SENTINEL).all()  # constant node row


def test_edge_flags_match_fanins():
    g = Aig()
    a, b = g.add_pi(), g.add_pi()
    x = g.make_and(a, lit_not(b))
    g.add_po(x)
    st = static_features(g)
    assert list(st[lit_node(x), :2]) == [0, 1]


def test_applicability_columns_match_probes():
    g = optimizable_aig(2, n_pis=6, target_ands=30)
    cfg = TraversalConfig()
    st = static_features(g, cfg)
    app = applicability(st)
    for n in g.and_nodes():
        for op in OpCode:
            plan = probe(g, n, op, cfg)
            assert app[n, int(op)] == (plan is not None)
            if plan is not None:
                assert st[n, 3 + 2 * int(op)] == plan.gain
                assert plan.gain >= cfg.min_gain
            else:
                assert st[n, 3 + 2 * int(op)] == -1


def test_static_gains_match_applied_measurement():
    """Probe gains must equal the node-count delta of really applying them."""
    g = optimizable_aig(3, n_pis=6, target_ands=30)
    st = static_features(g)
    for n in g.and_nodes():
        for op in OpCode:
            if st[n, 2 + 2 * int(op)] == 1:
                scratch = g.copy()
                plan = probe(scratch, n, op)
                before = scratch.n_ands
                apply_plan(scratch, plan)
                assert before - scratch.n_ands == st[n, 3 + 2 * int(op)]


def test_static_features_probe_only():
    g = optimizable_aig(4, n_pis=6, target_ands=25)
    key = g.structure_key()
    static_features(g)
    assert g.structure_key() == key


def test_static_features_sample_invariant():
    g = optimizable_aig(5, n_pis=6, target_ands=25)
    a = static_features(g)
    b = static_features(g)
    assert (a == b).all()


def test_dynamic_one_hot_rows():
    g = optimizable_aig(6, n_pis=6, target_ands=25)
    dec = np.random.default_rng(0).integers(0, 3, size=g.num_nodes).astype(np.int8)
    _, record = orchestrated_traversal(g, dec)
    dyn = dynamic_features(g, record)
    for n in g.and_nodes():
        assert dyn[n].sum() == 1
        op = record.applied[n]
        col = 0 if op == -1 else 1 + op
        assert dyn[n, col] == 1
    for pi in g.pis:
        assert (dyn[pi] == SENTINEL).all()


def test_dynamic_all_none():
    g = optimizable_aig(7, n_pis=5, target_ands=15)
    record = AppliedRecord(applied=[-1] * g.num_nodes, gains=[0] * g.num_nodes)
    dyn = dynamic_features(g, record)
    for n in g.and_nodes():
        assert list(dyn[n]) == [1, 0, 0, 0]


def test_projected_dynamics_follow_applicability():
    g = optimizable_aig(8, n_pis=6, target_ands=25)
    st = static_features(g)
    app = applicability(st)
    dec = np.random.default_rng(1).integers(0, 3, size=g.num_nodes).astype(np.int8)
    proj = projected_dynamic_features(g, dec, st)
    for n in g.and_nodes():
        op = int(dec[n])
        expect = [0, 0, 0, 0]
        expect[1 + op if app[n, op] else 0] = 1
        assert list(proj[n]) == expect


def test_edge_list_directions():
    g = Aig()
    a, b = g.add_pi(), g.add_pi()
    x = g.make_and(a, b)
    g.add_po(x)
    und = edge_list(g)
    assert und.shape == (4, 2)
    dird = edge_list(g, directed=True)
    assert dird.shape == (2, 2)
    assert all(dst == lit_node(x) for _, dst in dird.tolist())


def test_export_import_roundtrip(tmp_path):
    g = optimizable_aig(9, n_pis=6, target_ands=20)
    st = static_features(g)
    dec = np.random.default_rng(2).integers(0, 3, size=g.num_nodes).astype(np.int8)
    _, record = orchestrated_traversal(g, dec)
    dyn = dynamic_features(g, record)
    names = export_sample(g, st, dyn, tmp_path, "s0")
    feats = read_features(tmp_path / names["features"])
    assert (feats == feature_matrix(st, dyn)).all()
    assert feats.shape == (g.num_nodes, 12)
    edges = read_edge_list(tmp_path / names["edges"])
    assert (edges == edge_list(g)).all()
