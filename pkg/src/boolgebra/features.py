"""Per-node feature embeddings and graph export for the predictor.

Static features (8 columns) depend only on the design structure: the two
fanin complement flags, then applicability and local gain for rewrite,
resubstitution, and refactor, probed on the pristine graph.  Dynamic
features (4 columns) are the one-hot record of which transform actually
fired at the node during one sampled traversal: [none, rw, rs, rf].

Rows for the constant node and the primary inputs carry the sentinel -99
in every column, which marks them as fanin-free for the learner.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .aig import Aig, AigError, lit_is_complemented, lit_node
from .plan import OpCode, TraversalConfig
from .transforms import APPLIED_NONE, AppliedRecord, probe

SENTINEL = -99

STATIC_COLUMNS = ("fanin0_complemented", "fanin1_complemented",
                  "rw_applicable", "rw_gain", "rs_applicable", "rs_gain",
                  "rf_applicable", "rf_gain")
DYNAMIC_COLUMNS = ("applied_none", "applied_rw", "applied_rs", "applied_rf")


def static_features(g: Aig, cfg: TraversalConfig = TraversalConfig()) -> np.ndarray:
    """(num_nodes, 8) int matrix; probe-only, the graph is left untouched."""
    version_before = g.version
    out = np.full((g.num_nodes, 8), SENTINEL, dtype=np.int32)
    for n in g.and_nodes():
        f0, f1 = g.fanins(n)
        row = [int(lit_is_complemented(f0)), int(lit_is_complemented(f1))]
        for op in (OpCode.RW, OpCode.RS, OpCode.RF):
            plan = probe(g, n, op, cfg)
            if plan is None:
                row.extend((0, -1))
            else:
                row.extend((1, plan.gain))
        out[n] = row
    if g.version != version_before:
        raise AigError("feature probes must not mutate the graph")
    return out


def applicability(static: np.ndarray) -> np.ndarray:
    """(num_nodes, 3) boolean applicability flags in opcode order."""
    return static[:, (2, 4, 6)] == 1


def dynamic_features(g: Aig, record: AppliedRecord) -> np.ndarray:
    """(num_nodes, 4) one-hot applied-op matrix over the original graph."""
    if len(record.applied) != g.num_nodes:
        raise AigError("applied record does not match the graph")
    out = np.full((g.num_nodes, 4), SENTINEL, dtype=np.int32)
    for n in g.and_nodes():
        op = record.applied[n]
        row = [0, 0, 0, 0]
        row[0 if op == APPLIED_NONE else 1 + op] = 1
        out[n] = row
    return out


def projected_dynamic_features(g: Aig, decisions, static: np.ndarray) -> np.ndarray:
    """Scoring-time stand-in for the applied record: the assigned transform
    where it is statically applicable, else none.

    The true applied record exists only after running the traversal, which
    is exactly the work the predictor is pruning away, so inference uses
    this static projection of the decision vector instead.
    """
    app = applicability(static)
    out = np.full((g.num_nodes, 4), SENTINEL, dtype=np.int32)
    for n in g.and_nodes():
        op = int(decisions[n])
        row = [0, 0, 0, 0]
        row[1 + op if app[n, op] else 0] = 1
        out[n] = row
    return out


def edge_list(g: Aig, directed: bool = False) -> np.ndarray:
    """(E, 2) array of (src, dst) node pairs, one per fanin of every alive
    AND node; both directions are emitted unless ``directed`` is set."""
    rows: list[tuple[int, int]] = []
    for n in g.and_nodes():
        for f in g.fanins(n):
            rows.append((lit_node(f), n))
            if not directed:
                rows.append((n, lit_node(f)))
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def feature_matrix(static: np.ndarray, dynamic: np.ndarray) -> np.ndarray:
    """Concatenated (num_nodes, 12) model input."""
    if static.shape[0] != dynamic.shape[0]:
        raise AigError("static/dynamic row mismatch")
    return np.concatenate([static, dynamic], axis=1)


def export_sample(g: Aig, static: np.ndarray, dynamic: np.ndarray,
                  out_dir, stem: str, directed: bool = False) -> dict[str, str]:
    """Write the edge list and 12-column feature CSV for one sample.

    Returns the relative file names; ``read_features``/``read_edge_list``
    invert the files exactly.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    edges = edge_list(g, directed=directed)
    edge_name = f"{stem}.edges"
    with open(out_dir / edge_name, "w") as fh:
        for src, dst in edges.tolist():
            fh.write(f"{src} {dst}\n")
    feats = feature_matrix(static, dynamic)
    feat_name = f"{stem}.features.csv"
    header = "node_index," + ",".join(STATIC_COLUMNS + DYNAMIC_COLUMNS)
    with open(out_dir / feat_name, "w") as fh:
        fh.write(header + "\n")
        for n in range(feats.shape[0]):
            fh.write(f"{n}," + ",".join(str(int(v)) for v in feats[n]) + "\n")
    return {"edges": edge_name, "features": feat_name}


def read_features(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "node_index" or len(header) != 13:
            raise AigError(f"bad feature file header in {path}")
        rows = []
        for line in fh:
            cells = line.strip().split(",")
            if int(cells[0]) != len(rows):
                raise AigError(f"feature rows out of order in {path}")
            rows.append([int(v) for v in cells[1:]])
    return np.asarray(rows, dtype=np.int32)


def read_edge_list(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                src, dst = line.split()
                rows.append((int(src), int(dst)))
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)
