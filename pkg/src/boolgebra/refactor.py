"""Refactoring: rebuild a wide cut's function from its factored form.

The cut function is converted to an irredundant sum of products (greedy
prime-implicant cover), factored algebraically by iterative division with
kernel and literal divisors, and rebuilt through DeMorgan AND/OR trees.
The plan stands only when the rebuild, with structural-hash reuse, strictly
shrinks the graph (or, in the opt-in depth mode, shrinks depth at zero cost).

Cubes are frozensets of ``(var, complemented)`` literal pairs over the cut
leaf variables.
"""

from __future__ import annotations

from .aig import Aig, make_lit
from .cuts import Cut, cut_truth_table, reconvergence_cut, var_mask
from .plan import OpCode, TransformPlan, TraversalConfig, measure_recipe

Cube = frozenset[tuple[int, int]]

_MAX_KERNELS = 64


def _cube_mask(cube: Cube, n_vars: int) -> int:
    full = (1 << (1 << n_vars)) - 1
    mask = full
    for var, comp in cube:
        vm = var_mask(var, n_vars)
        mask &= (vm ^ full) if comp else vm
    return mask


def _cube_key(cube: Cube) -> tuple:
    return tuple(sorted(cube))


def isop_cover(tt: int, n_vars: int) -> list[Cube]:
    """Greedy prime-implicant cover of the on-set, made irredundant."""
    full = (1 << (1 << n_vars)) - 1
    on = tt & full
    if on == 0:
        return []
    if on == full:
        return [frozenset()]
    cubes: list[Cube] = []
    covered = 0
    for m in range(1 << n_vars):
        if not (on >> m) & 1 or (covered >> m) & 1:
            continue
        lits = {(v, 1 - ((m >> v) & 1)) for v in range(n_vars)}
        for v in range(n_vars):  # expand to a prime, dropping vars in order
            cand = {(w, c) for (w, c) in lits if w != v}
            if len(cand) == len(lits):
                continue
            if _cube_mask(frozenset(cand), n_vars) & ~on == 0:
                lits = cand
        cube = frozenset(lits)
        cubes.append(cube)
        covered |= _cube_mask(cube, n_vars)
    masks = [_cube_mask(c, n_vars) for c in cubes]
    keep = [True] * len(cubes)
    for i in reversed(range(len(cubes))):
        others = 0
        for j, m in enumerate(masks):
            if j != i and keep[j]:
                others |= m
        if masks[i] & ~others == 0:
            keep[i] = False
    return sorted((c for c, k in zip(cubes, keep) if k), key=_cube_key)


def _common_cube(cubes: list[Cube]) -> Cube:
    it = iter(cubes)
    common = set(next(it))
    for c in it:
        common &= c
    return frozenset(common)


def _literal_counts(cubes: list[Cube]) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for c in cubes:
        for lit in c:
            counts[lit] = counts.get(lit, 0) + 1
    return counts


def weak_division(f: list[Cube], d: list[Cube]) -> tuple[list[Cube], list[Cube]]:
    """Algebraic quotient and remainder of ``f`` by divisor ``d``."""
    quotient_sets = []
    for dc in d:
        quotient_sets.append({c - dc for c in f if dc <= c})
    q = set.intersection(*quotient_sets) if quotient_sets else set()
    q_sorted = sorted(q, key=_cube_key)
    product = {qc | dc for qc in q for dc in d}
    r = [c for c in f if c not in product]
    return q_sorted, r


def kernels(cubes: list[Cube]) -> list[list[Cube]]:
    """Cube-free kernels of the cover (recursive co-kernel extraction)."""
    out: list[list[Cube]] = []
    seen: set[tuple] = set()
    all_lits = sorted({lit for c in cubes for lit in c})
    lit_index = {lit: i for i, lit in enumerate(all_lits)}

    def record(kernel: list[Cube]) -> None:
        key = tuple(sorted(_cube_key(c) for c in kernel))
        if key not in seen and len(kernel) >= 2:
            seen.add(key)
            out.append(kernel)

    def rec(g: list[Cube], min_idx: int) -> None:
        if len(out) >= _MAX_KERNELS:
            return
        counts = _literal_counts(g)
        for lit, cnt in sorted(counts.items()):
            idx = lit_index[lit]
            if idx < min_idx or cnt < 2:
                continue
            sub = [c - {lit} for c in g if lit in c]
            common = _common_cube(sub)
            core = sorted(({c - common for c in sub}), key=_cube_key)
            if any(lit_index[l] < idx for l in common):
                continue  # this kernel is found from a smaller literal
            record(core)
            rec(core, idx + 1)

    if not _common_cube(cubes):
        record(list(cubes))
    rec(list(cubes), 0)
    return out


def _lits_total(cubes: list[Cube]) -> int:
    return sum(len(c) for c in cubes)


def factor_cubes(cubes: list[Cube]) -> tuple:
    """Factored operation tree for a cube cover."""
    if not cubes:
        return ("const", 0)
    if any(len(c) == 0 for c in cubes):
        return ("const", 1)
    if len(cubes) == 1:
        return _and_tree([("leaf", var, comp)
                          for var, comp in sorted(next(iter(cubes)))])
    common = _common_cube(cubes)
    if common:
        rest = [c - common for c in cubes]
        return ("and",
                _and_tree([("leaf", v, c) for v, c in sorted(common)]),
                factor_cubes(rest))
    # candidate divisors: kernels plus frequent single literals
    best = None
    total = _lits_total(cubes)
    candidates: list[list[Cube]] = kernels(cubes)
    for lit, cnt in sorted(_literal_counts(cubes).items()):
        if cnt >= 2:
            candidates.append([frozenset((lit,))])
    for d in candidates:
        if sorted(d, key=_cube_key) == sorted(cubes, key=_cube_key):
            continue
        q, r = weak_division(cubes, d)
        if not q:
            continue
        saved = total - (_lits_total(d) + _lits_total(q) + _lits_total(r))
        if len(q) == 1 and not next(iter(q)):
            continue  # trivial quotient: F == D + R, nothing factored
        key = (-saved, tuple(sorted(_cube_key(c) for c in d)))
        if best is None or key < best[0]:
            best = (key, d, q, r)
    if best is not None and -best[0][0] > 0:
        _, d, q, r = best
        dq = ("and", factor_cubes(d), factor_cubes(q))
        if not r:
            return dq
        return ("or", dq, factor_cubes(r))
    # flat disjunction of cubes
    return _or_tree([_and_tree([("leaf", v, c) for v, c in sorted(cube)])
                     for cube in cubes])


def _and_tree(items: list[tuple]) -> tuple:
    if not items:
        return ("const", 1)
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return ("and", _and_tree(items[:mid]), _and_tree(items[mid:]))


def _or_tree(items: list[tuple]) -> tuple:
    if not items:
        return ("const", 0)
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return ("or", _or_tree(items[:mid]), _or_tree(items[mid:]))


def eval_tree(tree: tuple, n_vars: int) -> int:
    """Truth table of an operation tree (reference path for tests)."""
    full = (1 << (1 << n_vars)) - 1
    kind = tree[0]
    if kind == "const":
        return full if tree[1] else 0
    if kind == "leaf":
        _, var, comp = tree
        vm = var_mask(var, n_vars)
        return (vm ^ full) if comp else vm
    a = eval_tree(tree[1], n_vars)
    b = eval_tree(tree[2], n_vars)
    return (a & b) if kind == "and" else (a | b)


def try_refactor(g: Aig, node: int, cfg: TraversalConfig = TraversalConfig()
                 ) -> TransformPlan | None:
    """Best refactoring plan for ``node``, or None."""
    if not (g.is_and(node) and g.is_alive(node)):
        return None
    leaves = reconvergence_cut(g, node, cfg.refactor_leaf_limit)
    if node in leaves:
        return None
    tt = cut_truth_table(g, Cut(root=node, leaves=leaves))
    cubes = isop_cover(tt, len(leaves))
    tree = factor_cubes(cubes)
    recipe = ("tree", tree, tuple(make_lit(leaf) for leaf in leaves))
    want_depth = cfg.rf_depth
    depth_before = g.depth() if want_depth else None
    measured = measure_recipe(g, node, recipe, want_depth=want_depth)
    if measured is None:
        return None
    gain, depth_after = measured
    accept = gain >= cfg.min_gain
    if not accept and want_depth:
        accept = gain >= 0 and depth_after < depth_before
    if not accept:
        return None
    return TransformPlan(op=OpCode.RF, root=node, gain=gain, recipe=recipe,
                         version=g.version, rank_key=(-gain, leaves),
                         depth_after=depth_after)
