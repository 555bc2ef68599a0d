"""Cut rewriting against the precomputed 4-input implementation library.

Each 4-feasible cut of the target node is canonicalized under NPN and
rebuilt from the library's minimal structure for its class; the candidate
that frees the most nodes (after structural-hash reuse of logic already in
the graph) becomes the plan.
"""

from __future__ import annotations

from .aig import Aig, make_lit
from .cuts import cut_truth_table, enumerate_cuts
from .npn import expand_tt
from .plan import OpCode, TransformPlan, TraversalConfig, measure_recipe


def try_rewrite(g: Aig, node: int, cfg: TraversalConfig = TraversalConfig()
                ) -> TransformPlan | None:
    """Best rewrite plan for ``node``, or None when no cut qualifies."""
    if not (g.is_and(node) and g.is_alive(node)):
        return None
    depth_before = g.depth() if cfg.rw_preserve_depth else None
    cuts = enumerate_cuts(g, node, k=cfg.rewrite_cut_k,
                          max_cuts=cfg.rewrite_max_cuts,
                          cone_cap=cfg.rewrite_cone_cap)
    best: TransformPlan | None = None
    for cut in cuts:
        if len(cut.leaves) < 2 or node in cut.leaves:
            continue
        tt = cut_truth_table(g, cut)
        recipe = ("npn", expand_tt(tt, len(cut.leaves)),
                  tuple(make_lit(leaf) for leaf in cut.leaves))
        measured = measure_recipe(g, node, recipe,
                                  want_depth=cfg.rw_preserve_depth)
        if measured is None:
            continue
        gain, depth_after = measured
        if gain < cfg.min_gain and not (cfg.rw_zero and gain >= 0):
            continue
        if cfg.rw_preserve_depth and depth_after > depth_before:
            continue
        rank = (-gain, len(cut.leaves), cut.leaves)
        if best is None or rank < best.rank_key:
            best = TransformPlan(op=OpCode.RW, root=node, gain=gain,
                                 recipe=recipe, version=g.version,
                                 rank_key=rank, depth_after=depth_after)
    return best
