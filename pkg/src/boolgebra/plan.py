"""Shared machinery for local transform plans.

A plan captures a checked, applicable local transform: the root node, the
recipe that rebuilds its function, and the exact node-count gain the edit
realizes.  Gains are measured by trial application inside a journal
transaction, so they account for structural-hash reuse, cascaded fanout
merging, and cone sweeping; applying a plan replays the identical edit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .aig import Aig, AigError, LIT_FALSE, LIT_TRUE, lit_node, lit_not
from .npn import get_library


class OpCode(IntEnum):
    """Transform codes as used in decision files."""
    RW = 0
    RS = 1
    RF = 2


APPLIED_NONE = -1


class StalePlanError(AigError):
    """Plan re-applied after the graph changed underneath it."""


@dataclass(frozen=True)
class TraversalConfig:
    """Knobs shared by the transform probes and the traversal."""
    min_gain: int = 1
    rw_zero: bool = False            # accept zero-gain rewrites
    rw_preserve_depth: bool = False  # reject rewrites that deepen the graph
    rf_depth: bool = False           # accept zero-gain refactors that reduce depth
    rewrite_cut_k: int = 4
    rewrite_max_cuts: int = 8
    rewrite_cone_cap: int = 128
    refactor_leaf_limit: int = 10
    resub_leaf_limit: int = 8
    divisor_cap: int = 64


@dataclass(frozen=True)
class TransformPlan:
    op: OpCode
    root: int
    gain: int
    recipe: tuple
    version: int
    rank_key: tuple = field(default=(), compare=False)
    depth_after: int | None = field(default=None, compare=False)


def build_recipe(g: Aig, recipe: tuple) -> int:
    """Materialize a replacement recipe, returning its output literal."""
    tag = recipe[0]
    if tag == "lit":
        return recipe[1]
    if tag == "and2":
        _, a, b, out_neg = recipe
        return g.make_and(a, b) ^ out_neg
    if tag == "npn":
        _, tt16, leaf_lits = recipe
        return get_library().build(g, tt16, list(leaf_lits))
    if tag == "tree":
        _, tree, leaf_lits = recipe
        return _build_tree(g, tree, leaf_lits)
    raise AigError(f"unknown recipe tag {tag!r}")


def _build_tree(g: Aig, tree: tuple, leaf_lits: tuple[int, ...]) -> int:
    kind = tree[0]
    if kind == "const":
        return LIT_TRUE if tree[1] else LIT_FALSE
    if kind == "leaf":
        _, var, pol = tree
        return leaf_lits[var] ^ pol
    if kind == "and":
        return g.make_and(_build_tree(g, tree[1], leaf_lits),
                          _build_tree(g, tree[2], leaf_lits))
    if kind == "or":
        return g.make_or(_build_tree(g, tree[1], leaf_lits),
                         _build_tree(g, tree[2], leaf_lits))
    raise AigError(f"unknown tree node {kind!r}")


def _edit(g: Aig, root: int, recipe: tuple) -> bool:
    """Inside an open transaction: build the recipe and rewire the root.

    Returns False when the recipe reproduces the root itself (a no-op).
    """
    out = build_recipe(g, recipe)
    if lit_node(out) == root:
        return False
    g.replace(root, out)
    return True


def measure_recipe(g: Aig, root: int, recipe: tuple,
                   want_depth: bool = False) -> tuple[int, int | None] | None:
    """Trial-apply a recipe and roll back; returns (gain, depth_after)."""
    g.begin()
    try:
        before = g.n_ands
        if not _edit(g, root, recipe):
            return None
        gain = before - g.n_ands
        depth_after = g.depth() if want_depth else None
        return gain, depth_after
    finally:
        g.rollback()


def apply_plan(g: Aig, plan: TransformPlan) -> int:
    """Replay a plan's edit; the realized gain must equal the planned gain."""
    if plan.version != g.version:
        raise StalePlanError(
            f"plan for node {plan.root} was made at version {plan.version}, "
            f"graph is at {g.version}")
    g.begin()
    before = g.n_ands
    if not _edit(g, plan.root, plan.recipe):
        g.rollback()
        raise AigError(f"plan for node {plan.root} replays as a no-op")
    gain = before - g.n_ands
    if gain != plan.gain:
        g.rollback()
        raise AigError(f"plan for node {plan.root} realized gain {gain}, "
                       f"planned {plan.gain}")
    g.commit()
    return gain
