"""Single-traversal optimization driven by per-node transform decisions.

A decision vector assigns one transform code to every node (0 rewrite,
1 resubstitution, 2 refactor; entries for the constant and the inputs are
carried but ignored).  The traversal visits the original AND nodes in
topological order, probes each node's assigned transform on the current
graph, and applies the plan when one exists.  Nodes created mid-traversal
and nodes consumed by an earlier replacement are never visited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aig import Aig, AigError
from .plan import (
    OpCode,
    APPLIED_NONE,
    StalePlanError,
    TransformPlan,
    TraversalConfig,
    apply_plan,
)
from .refactor import try_refactor
from .resub import try_resub
from .rewrite import try_rewrite

__all__ = [
    "OpCode", "TraversalConfig", "TransformPlan", "AppliedRecord",
    "APPLIED_NONE", "StalePlanError", "apply_plan", "probe",
    "orchestrated_traversal", "standalone_pass",
    "decisions_to_csv", "decisions_from_csv",
]

_PROBES = {OpCode.RW: try_rewrite, OpCode.RS: try_resub, OpCode.RF: try_refactor}
_OP_NAMES = {APPLIED_NONE: "none", int(OpCode.RW): "rw",
             int(OpCode.RS): "rs", int(OpCode.RF): "rf"}
_OP_VALUES = {name: code for code, name in _OP_NAMES.items()}


def probe(g: Aig, node: int, op: OpCode,
          cfg: TraversalConfig = TraversalConfig()) -> TransformPlan | None:
    """Transformability check: a plan when ``op`` applies at ``node``."""
    return _PROBES[OpCode(op)](g, node, cfg)


@dataclass
class AppliedRecord:
    """Which transform actually fired at each node during one traversal."""

    applied: list[int]          # APPLIED_NONE or an OpCode value, per node
    gains: list[int]

    @property
    def total_reduction(self) -> int:
        return sum(self.gains)

    def op_name(self, node: int) -> str:
        return _OP_NAMES[self.applied[node]]

    def to_csv(self) -> str:
        lines = ["node_index,applied_op,gain"]
        for n, (op, gain) in enumerate(zip(self.applied, self.gains)):
            lines.append(f"{n},{_OP_NAMES[op]},{gain}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "AppliedRecord":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0] != "node_index,applied_op,gain":
            raise AigError("bad applied-record CSV header")
        applied, gains = [], []
        for ln in lines[1:]:
            idx, name, gain = ln.split(",")
            if int(idx) != len(applied):
                raise AigError("applied-record CSV rows out of order")
            applied.append(_OP_VALUES[name])
            gains.append(int(gain))
        return cls(applied=applied, gains=gains)


def decisions_to_csv(decisions) -> str:
    """One transform code per line, line index == node index."""
    return "\n".join(str(int(d)) for d in decisions) + "\n"


def decisions_from_csv(text: str) -> np.ndarray:
    values = [int(ln) for ln in text.strip().splitlines() if ln.strip()]
    arr = np.asarray(values, dtype=np.int8)
    if arr.size and (arr.min() < 0 or arr.max() > 2):
        raise AigError("decision codes must be 0, 1, or 2")
    return arr


def orchestrated_traversal(aig: Aig, decisions,
                           cfg: TraversalConfig = TraversalConfig()
                           ) -> tuple[Aig, AppliedRecord]:
    """Run one decision-driven traversal on a private copy of ``aig``.

    Returns the optimized graph and the per-node applied record.
    Deterministic for a fixed (graph, decisions, config) triple.
    """
    decisions = np.asarray(decisions)
    if decisions.shape != (aig.num_nodes,):
        raise AigError(
            f"decision vector length {decisions.shape} does not match "
            f"{aig.num_nodes} nodes")
    g = aig.copy()
    visit = [n for n in g.topological_order() if g.is_and(n)]
    applied = [APPLIED_NONE] * aig.num_nodes
    gains = [0] * aig.num_nodes
    consumed: set[int] = set()
    for v in visit:
        if not g.is_alive(v) or v in consumed:
            continue
        op = OpCode(int(decisions[v]))
        plan = _PROBES[op](g, v, cfg)
        if plan is None:
            continue
        consumed |= g.mffc_nodes(v)
        apply_plan(g, plan)
        applied[v] = int(op)
        gains[v] = plan.gain
    return g, AppliedRecord(applied=applied, gains=gains)


def standalone_pass(aig: Aig, op: OpCode,
                    cfg: TraversalConfig = TraversalConfig()) -> Aig:
    """Classic single-operation pass: every node assigned the same transform."""
    decisions = np.full(aig.num_nodes, int(OpCode(op)), dtype=np.int8)
    g, _ = orchestrated_traversal(aig, decisions, cfg)
    return g
