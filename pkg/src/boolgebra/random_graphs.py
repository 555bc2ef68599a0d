"""Seeded generators for synthetic optimizable AIGs.

Plain random AND structure is nearly incompressible, so the generator mixes
in local patterns that the three transforms can act on: absorbed
conjunctions, duplicated cones with shifted association, distributed
products awaiting factoring, and redundant consensus terms.  Graphs are
built without structural hashing so the injected redundancy survives, the
same way a technology-independent netlist arrives from a frontend.
"""

from __future__ import annotations

import numpy as np

from .aig import Aig, lit_node, lit_not

__all__ = ["random_aig", "optimizable_aig", "toy_aig"]


def random_aig(seed: int, n_pis: int = 8, n_ands: int = 40, n_pos: int = 4) -> Aig:
    """Unstructured random graph (little redundancy; mostly for I/O tests)."""
    rng = np.random.default_rng(seed)
    g = Aig()
    pool = [g.add_pi() for _ in range(n_pis)]
    for _ in range(n_ands):
        i, j = rng.choice(len(pool), size=2, replace=False)
        a = pool[i] ^ int(rng.integers(2))
        b = pool[j] ^ int(rng.integers(2))
        if lit_node(a) == lit_node(b):
            continue
        pool.append(g.add_and_raw(a, b))
    for _ in range(n_pos):
        g.add_po(pool[int(rng.integers(n_pis, len(pool)))] ^ int(rng.integers(2)))
    return g


def _raw_or(g: Aig, a: int, b: int) -> int:
    return lit_not(g.add_and_raw(lit_not(a), lit_not(b)))


def _pick_distinct(rng, pool, k):
    idx = rng.choice(len(pool), size=k, replace=False)
    return [pool[int(i)] for i in idx]


def optimizable_aig(seed: int, n_pis: int = 8, target_ands: int = 60,
                    extra_pos: int = 2) -> Aig:
    """Random graph seeded with transform opportunities.

    Stops adding blocks once ``target_ands`` is reached; every sink node
    becomes an output so no logic dangles.
    """
    rng = np.random.default_rng(seed)
    g = Aig()
    pool = [g.add_pi() for _ in range(n_pis)]

    def flip(lit):
        return lit ^ int(rng.integers(2))

    while g.n_ands < target_ands:
        kind = rng.choice(
            ["rand", "rand", "absorb", "dup", "distrib", "consensus"])
        if kind == "rand":
            a, b = _pick_distinct(rng, pool, 2)
            if lit_node(a) == lit_node(b):
                continue
            pool.append(g.add_and_raw(flip(a), flip(b)))
        elif kind == "absorb":
            # p = x & (x & y): one node redundant
            x, y = _pick_distinct(rng, pool, 2)
            if lit_node(x) == lit_node(y):
                continue
            x, y = flip(x), flip(y)
            t = g.add_and_raw(x, y)
            pool.append(g.add_and_raw(t, x))
        elif kind == "dup":
            # same function, shifted association: x(yz) vs (xy)z
            x, y, z = _pick_distinct(rng, pool, 3)
            nodes = {lit_node(x), lit_node(y), lit_node(z)}
            if len(nodes) < 3:
                continue
            x, y, z = flip(x), flip(y), flip(z)
            first = g.add_and_raw(x, g.add_and_raw(y, z))
            second = g.add_and_raw(g.add_and_raw(x, y), z)
            pool.extend((first, second))
        elif kind == "distrib":
            # a&s1 | a&s2, flat: factoring saves one node
            a, s1, s2 = _pick_distinct(rng, pool, 3)
            nodes = {lit_node(a), lit_node(s1), lit_node(s2)}
            if len(nodes) < 3:
                continue
            a, s1, s2 = flip(a), flip(s1), flip(s2)
            p1 = g.add_and_raw(a, s1)
            p2 = g.add_and_raw(a, s2)
            pool.append(_raw_or(g, p1, p2))
        else:
            # s&x | ~s&y | x&y: the consensus term is redundant
            s, x, y = _pick_distinct(rng, pool, 3)
            nodes = {lit_node(s), lit_node(x), lit_node(y)}
            if len(nodes) < 3:
                continue
            s, x, y = flip(s), flip(x), flip(y)
            p1 = g.add_and_raw(s, x)
            p2 = g.add_and_raw(lit_not(s), y)
            p3 = g.add_and_raw(x, y)
            pool.append(_raw_or(g, _raw_or(g, p1, p2), p3))
    sinks = [n for n in g.and_nodes() if not g.fanout_nodes(n)]
    for n in sinks:
        g.add_po(n * 2 + int(rng.integers(2)))
    for _ in range(extra_pos):
        tap = int(rng.integers(n_pis, len(pool)))
        g.add_po(flip(pool[tap]))
    return g


def toy_aig(seed: int, max_ands: int = 7, n_pis: int = 5) -> Aig:
    """Small optimizable graph for exhaustive decision-space enumeration."""
    rng = np.random.default_rng(seed)
    for attempt in range(50):
        g = optimizable_aig(int(rng.integers(1 << 30)), n_pis=n_pis,
                            target_ands=max_ands, extra_pos=0)
        if g.n_ands <= max_ands + 2:
            return g
    return g
