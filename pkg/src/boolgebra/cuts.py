"""Cut enumeration and cut-function computation.

A cut of a node is a set of leaves such that every path from a primary
input to the node passes through at least one leaf.  K-feasible cuts are
found by merging fanin cut sets bottom-up, dropping oversized and dominated
cuts, and truncating each node's set to a fixed budget, fewest leaves first.

Truth tables are plain integers with ``2 ** len(leaves)`` bits; leaf ``i``
is input variable ``i`` (leaves sorted ascending by node index) and minterm
bit ordering is little-endian in variable 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .aig import Aig, AigError, lit_node

MAX_CUT_INPUTS = 8


class CutError(AigError):
    pass


@dataclass
class Cut:
    root: int
    leaves: tuple[int, ...]
    truth: int | None = field(default=None, compare=False)


@lru_cache(maxsize=None)
def var_mask(var: int, n_vars: int) -> int:
    """Truth table of projection onto ``var`` over ``n_vars`` inputs."""
    mask = 0
    for m in range(1 << n_vars):
        if (m >> var) & 1:
            mask |= 1 << m
    return mask


def enumerate_cuts(g: Aig, node: int, k: int = 4, max_cuts: int = 8,
                   cone_cap: int | None = None) -> list[Cut]:
    """K-feasible cuts of ``node``, dominated cuts removed.

    The trivial cut ``{node}`` is always present.  ``cone_cap`` optionally
    bounds how many transitive-fanin nodes are expanded; nodes beyond the
    cap contribute only their trivial cut, which keeps probe cost local on
    large graphs while every returned cut stays valid.
    """
    if not (2 <= k <= MAX_CUT_INPUTS):
        raise CutError(f"cut width {k} outside supported range 2..{MAX_CUT_INPUTS}")
    if not g.is_alive(node):
        raise CutError(f"node {node} is dead")
    # collect the transitive fanin cone, optionally capped (breadth-first so
    # the cap keeps the nearest region of the cone)
    cone: list[int] = []
    seen = {node}
    frontier = [node]
    while frontier:
        next_frontier: list[int] = []
        for n in sorted(frontier):
            cone.append(n)
            if not g.is_and(n):
                continue
            if cone_cap is not None and len(cone) >= cone_cap:
                continue
            for f in g.fanins(n):
                fn = lit_node(f)
                if fn not in seen:
                    seen.add(fn)
                    next_frontier.append(fn)
        frontier = next_frontier
    expanded = set(cone) if cone_cap is None else set(cone[:cone_cap])
    # bottom-up over the cone only: iterative DFS post-order from the root
    cut_sets: dict[int, list[frozenset[int]]] = {}
    stack: list[tuple[int, bool]] = [(node, False)]
    while stack:
        n, ready = stack.pop()
        if n in cut_sets:
            continue
        trivial = frozenset((n,))
        if not g.is_and(n) or n not in expanded:
            cut_sets[n] = [trivial]
            continue
        f0, f1 = (lit_node(f) for f in g.fanins(n))
        if not ready:
            stack.append((n, True))
            stack.append((f0, False))
            stack.append((f1, False))
            continue
        merged: set[frozenset[int]] = set()
        for c0 in cut_sets[f0]:
            for c1 in cut_sets[f1]:
                union = c0 | c1
                if len(union) <= k:
                    merged.add(union)
        merged.add(trivial)
        kept = _filter_dominated(merged)
        cut_sets[n] = kept[:max_cuts]
    return [Cut(root=node, leaves=tuple(sorted(c))) for c in cut_sets[node]]


def _filter_dominated(cuts: set[frozenset[int]]) -> list[frozenset[int]]:
    ordered = sorted(cuts, key=lambda c: (len(c), sorted(c)))
    kept: list[frozenset[int]] = []
    for c in ordered:
        if not any(prev < c for prev in kept):
            kept.append(c)
    return kept


def cut_truth_table(g: Aig, cut: Cut) -> int:
    """Root function over the cut leaves, computed over the cut cone.

    Raises if the cone escapes the leaves (a primary input reachable without
    crossing a leaf means the leaf set does not dominate the root).
    """
    leaves = cut.leaves
    n_vars = len(leaves)
    if n_vars > MAX_CUT_INPUTS + 2:
        raise CutError(f"cut too wide for truth table: {n_vars} leaves")
    values: dict[int, int] = {}
    for i, leaf in enumerate(leaves):
        values[leaf] = 0 if leaf == 0 else var_mask(i, n_vars)
    full = (1 << (1 << n_vars)) - 1

    def eval_node(n: int) -> int:
        got = values.get(n)
        if got is not None:
            return got
        if not g.is_and(n):
            raise CutError(f"cut {leaves} does not dominate node {cut.root}"
                           f" (reached node {n})")
        f0, f1 = g.fanins(n)
        v0 = eval_node(lit_node(f0))
        if f0 & 1:
            v0 ^= full
        v1 = eval_node(lit_node(f1))
        if f1 & 1:
            v1 ^= full
        values[n] = v0 & v1
        return values[n]

    truth = eval_node(cut.root)
    cut.truth = truth
    return truth


def reconvergence_cut(g: Aig, node: int, limit: int) -> tuple[int, ...]:
    """A single wide cut grown by cheapest-expansion, capped at ``limit`` leaves.

    Starting from the fanin pair, the leaf whose expansion adds the fewest
    fresh leaves is expanded until no leaf fits in the budget.  Favoring
    reconvergent expansions keeps the cut function rich for the windowing
    transforms.
    """
    if not g.is_and(node):
        raise CutError(f"node {node} is not an AND node")
    leaves = {lit_node(f) for f in g.fanins(node)}
    while True:
        best_leaf = None
        best_cost = None
        for leaf in sorted(leaves):
            if not g.is_and(leaf):
                continue
            fresh = {lit_node(f) for f in g.fanins(leaf)} - leaves
            cost = len(fresh) - 1
            if len(leaves) + cost > limit:
                continue
            if best_cost is None or cost < best_cost:
                best_leaf, best_cost = leaf, cost
        if best_leaf is None:
            return tuple(sorted(leaves))
        leaves.discard(best_leaf)
        leaves.update(lit_node(f) for f in g.fanins(best_leaf))
