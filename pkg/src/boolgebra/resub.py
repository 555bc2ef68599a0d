"""Resubstitution: re-express a node with divisors already in the graph.

A reconvergence-driven window around the node is simulated exhaustively
over its leaves.  Divisor candidates are the nodes computable from the
window leaves that survive the node's removal (outside its MFFC and its
transitive fanout).  Zero-resubstitution replaces the node with a single
divisor up to complementation; one-resubstitution with an AND of two
divisor literals, output polarity free.
"""

from __future__ import annotations

from .aig import Aig, lit_node, make_lit
from .cuts import reconvergence_cut, var_mask
from .plan import OpCode, TransformPlan, TraversalConfig, measure_recipe

_CLOSURE_CAP = 160
_MAX_TRIALS = 12


def _window_values(g: Aig, node: int, leaves: tuple[int, ...]
                   ) -> dict[int, int] | None:
    """Truth tables over the window leaves for the cut cone plus side logic."""
    n_vars = len(leaves)
    values: dict[int, int] = {}
    for i, leaf in enumerate(leaves):
        values[leaf] = 0 if leaf == 0 else var_mask(i, n_vars)
    full = (1 << (1 << n_vars)) - 1

    # the cut cone itself (guaranteed evaluable: the cut dominates the node)
    def eval_cone(n: int) -> int | None:
        if n in values:
            return values[n]
        if not g.is_and(n):
            return None
        f0, f1 = g.fanins(n)
        v0 = eval_cone(lit_node(f0))
        v1 = eval_cone(lit_node(f1))
        if v0 is None or v1 is None:
            return None
        if f0 & 1:
            v0 ^= full
        if f1 & 1:
            v1 ^= full
        values[n] = v0 & v1
        return values[n]

    if eval_cone(node) is None:
        return None
    # sideways closure: nodes whose fanins are already valued
    frontier = sorted(values)
    while frontier and len(values) < _CLOSURE_CAP:
        next_frontier = []
        for n in frontier:
            for f in g.fanout_nodes(n):
                if f in values or not g.is_alive(f):
                    continue
                f0, f1 = g.fanins(f)
                n0, n1 = lit_node(f0), lit_node(f1)
                if n0 in values and n1 in values:
                    v0 = values[n0] ^ (full if f0 & 1 else 0)
                    v1 = values[n1] ^ (full if f1 & 1 else 0)
                    values[f] = v0 & v1
                    next_frontier.append(f)
                    if len(values) >= _CLOSURE_CAP:
                        break
            if len(values) >= _CLOSURE_CAP:
                break
        frontier = sorted(next_frontier)
    return values


def try_resub(g: Aig, node: int, cfg: TraversalConfig = TraversalConfig()
              ) -> TransformPlan | None:
    """Best 0- or 1-resubstitution plan for ``node``."""
    if not (g.is_and(node) and g.is_alive(node)):
        return None
    leaves = reconvergence_cut(g, node, cfg.resub_leaf_limit)
    if node in leaves:
        return None
    values = _window_values(g, node, leaves)
    if values is None:
        return None
    n_vars = len(leaves)
    full = (1 << (1 << n_vars)) - 1
    target = values[node]
    mffc = g.mffc_nodes(node)
    tfo = g.transitive_fanout(node)
    divisors = [n for n in sorted(values)
                if n != node and n != 0 and n not in mffc and n not in tfo]
    divisors = divisors[:cfg.divisor_cap]

    candidates: list[tuple[tuple, tuple]] = []  # (rank_meta, recipe)
    for d in divisors:
        if values[d] == target:
            candidates.append(((0, d, 0), ("lit", make_lit(d))))
        elif values[d] ^ full == target:
            candidates.append(((0, d, 1), ("lit", make_lit(d, True))))
    for i, da in enumerate(divisors):
        va = values[da]
        for db in divisors[i + 1:]:
            vb = values[db]
            for pa in (0, 1):
                for pb in (0, 1):
                    v = (va ^ (full if pa else 0)) & (vb ^ (full if pb else 0))
                    if v == target:
                        candidates.append(((1, da, db, pa, pb, 0),
                                           ("and2", make_lit(da, pa),
                                            make_lit(db, pb), 0)))
                    elif v ^ full == target:
                        candidates.append(((1, da, db, pa, pb, 1),
                                           ("and2", make_lit(da, pa),
                                            make_lit(db, pb), 1)))
    best: TransformPlan | None = None
    for meta, recipe in candidates[:_MAX_TRIALS]:
        measured = measure_recipe(g, node, recipe)
        if measured is None:
            continue
        gain, _ = measured
        if gain < cfg.min_gain:
            continue
        rank = (-gain, meta)
        if best is None or rank < best.rank_key:
            best = TransformPlan(op=OpCode.RS, root=node, gain=gain,
                                 recipe=recipe, version=g.version,
                                 rank_key=rank)
    return best
