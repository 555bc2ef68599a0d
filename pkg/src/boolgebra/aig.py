"""Mutable And-Inverter Graph with structural hashing and journaled edits.

Nodes are addressed by integer index.  Index 0 is the constant-false node,
primary inputs have no fanins, and every other node is a two-input AND gate.
Edges are encoded literals: ``2 * node + complement_bit``, the same encoding
the AIGER format uses.  Node indices are never reused; deletion flips a
liveness flag and dead slots are dropped only when the graph is serialized.

Mutating operations can run inside a journal transaction (``begin`` /
``rollback`` / ``commit``) so that transform probes can trial-apply an edit,
measure the exact node-count effect, and restore the previous state.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple

LIT_FALSE = 0
LIT_TRUE = 1

TYPE_CONST = 0
TYPE_PI = 1
TYPE_AND = 2


class AigError(Exception):
    """Structural misuse of an Aig (bad literal, arity, liveness, ...)."""


def make_lit(node: int, complemented: bool = False) -> int:
    return node * 2 + (1 if complemented else 0)


def lit_node(lit: int) -> int:
    return lit >> 1


def lit_is_complemented(lit: int) -> bool:
    return bool(lit & 1)


def lit_not(lit: int) -> int:
    return lit ^ 1


def lit_regular(lit: int) -> int:
    return lit & ~1


class Literal(NamedTuple):
    """Decoded edge reference; ``encode`` round-trips with the AIGER integer form."""

    node: int
    complemented: bool

    def encode(self) -> int:
        return make_lit(self.node, self.complemented)

    @classmethod
    def decode(cls, value: int) -> "Literal":
        if value < 0:
            raise AigError(f"negative literal {value}")
        return cls(value >> 1, bool(value & 1))


@dataclass(frozen=True)
class GraphStats:
    size: int
    depth: int
    n_pis: int
    n_pos: int


class Aig:
    """And-Inverter Graph over encoded literals."""

    def __init__(self) -> None:
        # Parallel per-node arrays; slot 0 is the constant-false node.
        self._type = [TYPE_CONST]
        self._fanin0 = [0]
        self._fanin1 = [0]
        self._alive = [True]
        self._level = [0]
        self._nref = [0]          # references from alive AND fanins plus POs
        self._fanouts = [set()]   # alive AND fanout node indices
        self._pis: list[int] = []
        self._pos: list[int] = []
        self._strash: dict[tuple[int, int], int] = {}
        self._n_ands = 0
        self.version = 0
        self.comment: str | None = None
        self._journal: list | None = None
        self._txn_state: tuple | None = None
        self._levels_dirty = False
        self._topo_cache: tuple[int, list[int]] | None = None

    # ------------------------------------------------------------------
    # basic queries

    @property
    def num_nodes(self) -> int:
        """Total node slots including the constant and dead nodes."""
        return len(self._type)

    @property
    def n_pis(self) -> int:
        return len(self._pis)

    @property
    def n_pos(self) -> int:
        return len(self._pos)

    @property
    def n_ands(self) -> int:
        """Count of alive AND nodes (the graph size metric)."""
        return self._n_ands

    @property
    def pis(self) -> tuple[int, ...]:
        return tuple(self._pis)

    @property
    def pos(self) -> tuple[int, ...]:
        return tuple(self._pos)

    def is_and(self, node: int) -> bool:
        return self._type[node] == TYPE_AND

    def is_pi(self, node: int) -> bool:
        return self._type[node] == TYPE_PI

    def is_const(self, node: int) -> bool:
        return self._type[node] == TYPE_CONST

    def is_alive(self, node: int) -> bool:
        return self._alive[node]

    def fanins(self, node: int) -> tuple[int, int]:
        if self._type[node] != TYPE_AND:
            raise AigError(f"node {node} is not an AND node")
        return self._fanin0[node], self._fanin1[node]

    def fanout_nodes(self, node: int) -> list[int]:
        return sorted(self._fanouts[node])

    def ref_count(self, node: int) -> int:
        return self._nref[node]

    def and_nodes(self) -> list[int]:
        return [n for n in range(len(self._type))
                if self._type[n] == TYPE_AND and self._alive[n]]

    def po_fanin(self, index: int) -> int:
        return self._pos[index]

    # ------------------------------------------------------------------
    # journal

    def begin(self) -> None:
        if self._journal is not None:
            raise AigError("transaction already active")
        self._journal = []
        self._txn_state = (len(self._type), self.version, self._n_ands,
                           self._levels_dirty, self._topo_cache)

    def commit(self) -> None:
        if self._journal is None:
            raise AigError("no active transaction")
        self._journal = None
        self._txn_state = None

    def rollback(self) -> None:
        if self._journal is None:
            raise AigError("no active transaction")
        old_len, version, n_ands, levels_dirty, topo_cache = self._txn_state
        for entry in reversed(self._journal):
            tag = entry[0]
            if tag == "nref":
                _, n, old = entry
                if n < old_len:
                    self._nref[n] = old
            elif tag == "fo_add":
                _, n, f = entry
                if n < old_len:
                    self._fanouts[n].discard(f)
            elif tag == "fo_del":
                _, n, f = entry
                if n < old_len:
                    self._fanouts[n].add(f)
            elif tag == "strash":
                _, key, old = entry
                if old is None:
                    self._strash.pop(key, None)
                else:
                    self._strash[key] = old
            elif tag == "fanin":
                _, n, o0, o1 = entry
                if n < old_len:
                    self._fanin0[n] = o0
                    self._fanin1[n] = o1
            elif tag == "alive":
                _, n, old = entry
                if n < old_len:
                    self._alive[n] = old
            elif tag == "po":
                _, i, old = entry
                self._pos[i] = old
        del self._type[old_len:]
        del self._fanin0[old_len:]
        del self._fanin1[old_len:]
        del self._alive[old_len:]
        del self._level[old_len:]
        del self._nref[old_len:]
        del self._fanouts[old_len:]
        self.version = version
        self._n_ands = n_ands
        # level values may have been recomputed mid-transaction without
        # journaling; force a recompute on next use
        self._levels_dirty = True
        self._topo_cache = topo_cache
        self._journal = None
        self._txn_state = None

    @property
    def in_txn(self) -> bool:
        return self._journal is not None

    def _j(self, entry: tuple) -> None:
        if self._journal is not None:
            self._journal.append(entry)

    def _bump(self) -> None:
        self.version += 1
        self._topo_cache = None

    # ------------------------------------------------------------------
    # construction

    def add_pi(self) -> int:
        if self._journal is not None:
            raise AigError("cannot add PIs inside a transaction")
        node = self._append_node(TYPE_PI, 0, 0, 0)
        self._pis.append(node)
        self._bump()
        return make_lit(node)

    def add_po(self, lit: int) -> int:
        if self._journal is not None:
            raise AigError("cannot add POs inside a transaction")
        self._check_lit(lit)
        self._pos.append(lit)
        self._set_nref(lit_node(lit), self._nref[lit_node(lit)] + 1)
        self._bump()
        return len(self._pos) - 1

    def _set_po(self, index: int, lit: int) -> None:
        old = self._pos[index]
        if old == lit:
            return
        self._j(("po", index, old))
        self._pos[index] = lit
        self._set_nref(lit_node(old), self._nref[lit_node(old)] - 1)
        self._set_nref(lit_node(lit), self._nref[lit_node(lit)] + 1)

    def _append_node(self, node_type: int, f0: int, f1: int, level: int) -> int:
        node = len(self._type)
        self._type.append(node_type)
        self._fanin0.append(f0)
        self._fanin1.append(f1)
        self._alive.append(True)
        self._level.append(level)
        self._nref.append(0)
        self._fanouts.append(set())
        return node

    def _check_lit(self, lit: int) -> None:
        node = lit_node(lit)
        if node < 0 or node >= len(self._type):
            raise AigError(f"literal {lit} references unknown node {node}")
        if not self._alive[node]:
            raise AigError(f"literal {lit} references dead node {node}")

    def make_and(self, a: int, b: int) -> int:
        """Structurally hashed AND constructor with constant/idempotence rules."""
        self._check_lit(a)
        self._check_lit(b)
        if a > b:
            a, b = b, a
        if a == LIT_FALSE:
            return LIT_FALSE
        if a == LIT_TRUE:
            return b
        if a == b:
            return a
        if a ^ b == 1:
            return LIT_FALSE
        key = (a, b)
        existing = self._strash.get(key)
        if existing is not None and self._alive[existing]:
            return make_lit(existing)
        return make_lit(self._new_and(a, b))

    def add_and_raw(self, a: int, b: int) -> int:
        """Append an AND node without simplification or strash reuse.

        Used by the AIGER parser and by fixtures that deliberately contain
        redundant structure.  The first node with a given fanin pair owns the
        strash entry; later duplicates stay alive but unhashed.
        """
        self._check_lit(a)
        self._check_lit(b)
        if a > b:
            a, b = b, a
        return make_lit(self._new_and(a, b, register_strash_if_free=True))

    def _new_and(self, a: int, b: int, register_strash_if_free: bool = False) -> int:
        level = 1 + max(self._level[lit_node(a)], self._level[lit_node(b)])
        node = self._append_node(TYPE_AND, a, b, level)
        for f in (a, b):
            fn = lit_node(f)
            self._set_nref(fn, self._nref[fn] + 1)
            if node not in self._fanouts[fn]:
                self._j(("fo_add", fn, node))
                self._fanouts[fn].add(node)
        key = (a, b)
        if register_strash_if_free:
            if key not in self._strash or not self._alive[self._strash[key]]:
                self._strash_set(key, node)
        else:
            self._strash_set(key, node)
        self._n_ands += 1
        self._bump()
        return node

    def _set_nref(self, node: int, value: int) -> None:
        self._j(("nref", node, self._nref[node]))
        self._nref[node] = value

    def _strash_set(self, key: tuple[int, int], node: int) -> None:
        self._j(("strash", key, self._strash.get(key)))
        self._strash[key] = node

    def _strash_del(self, key: tuple[int, int], node: int) -> None:
        if self._strash.get(key) == node:
            self._j(("strash", key, node))
            del self._strash[key]

    # convenience constructors
    def make_or(self, a: int, b: int) -> int:
        return lit_not(self.make_and(lit_not(a), lit_not(b)))

    def make_xor(self, a: int, b: int) -> int:
        return self.make_or(self.make_and(a, lit_not(b)),
                            self.make_and(lit_not(a), b))

    def make_mux(self, sel: int, t: int, e: int) -> int:
        return self.make_or(self.make_and(sel, t), self.make_and(lit_not(sel), e))

    # ------------------------------------------------------------------
    # mutation

    def _detach_fanins(self, node: int) -> None:
        for f in (self._fanin0[node], self._fanin1[node]):
            fn = lit_node(f)
            self._set_nref(fn, self._nref[fn] - 1)
            if node in self._fanouts[fn]:
                self._j(("fo_del", fn, node))
                self._fanouts[fn].discard(node)

    def _change_fanins(self, node: int, a: int, b: int) -> None:
        old0, old1 = self._fanin0[node], self._fanin1[node]
        self._strash_del((old0, old1), node)
        self._detach_fanins(node)
        self._j(("fanin", node, old0, old1))
        self._fanin0[node] = a
        self._fanin1[node] = b
        for f in (a, b):
            fn = lit_node(f)
            self._set_nref(fn, self._nref[fn] + 1)
            if node not in self._fanouts[fn]:
                self._j(("fo_add", fn, node))
                self._fanouts[fn].add(node)
        self._strash_set((a, b), node)
        self._levels_dirty = True
        self._bump()

    def _kill(self, node: int) -> None:
        if not self._alive[node] or self._type[node] != TYPE_AND:
            raise AigError(f"cannot kill node {node}")
        if self._nref[node] != 0 or self._fanouts[node]:
            raise AigError(f"killing referenced node {node}")
        self._strash_del((self._fanin0[node], self._fanin1[node]), node)
        self._detach_fanins(node)
        self._j(("alive", node, True))
        self._alive[node] = False
        self._n_ands -= 1
        self._bump()

    def _kill_dead_cone(self, roots: Iterable[int]) -> None:
        """Recursively remove AND nodes whose reference count dropped to zero."""
        stack = [n for n in sorted(roots, reverse=True)]
        while stack:
            n = stack.pop()
            if (self._type[n] == TYPE_AND and self._alive[n]
                    and self._nref[n] == 0):
                f0, f1 = lit_node(self._fanin0[n]), lit_node(self._fanin1[n])
                self._kill(n)
                for f in (f0, f1):
                    if self._nref[f] == 0 and self._type[f] == TYPE_AND:
                        stack.append(f)

    def replace(self, node: int, new_lit: int) -> None:
        """Transfer every fanout of ``node`` onto ``new_lit`` and sweep the
        logic that becomes unreferenced.

        Rewiring may make a fanout node constant, single-input, or
        structurally identical to an existing node; such nodes are merged
        recursively so the strash uniqueness invariant survives.  ``new_lit``
        must not depend on ``node``.
        """
        if self._type[node] != TYPE_AND or not self._alive[node]:
            raise AigError(f"replace target {node} is not an alive AND node")
        self._check_lit(new_lit)
        subst: dict[int, int] = {}

        def resolve(lit: int) -> int:
            while lit_node(lit) in subst:
                target = subst[lit_node(lit)]
                lit = target ^ (lit & 1)
            return lit

        new_lit = resolve(new_lit)
        if lit_node(new_lit) == node:
            raise AigError("replacement literal depends on the replaced node")
        self._bump()
        subst[node] = new_lit
        queue = deque([node])
        while queue:
            cur = queue.popleft()
            target = resolve(make_lit(cur))
            for i, po in enumerate(self._pos):
                if lit_node(po) == cur:
                    self._set_po(i, target ^ (po & 1))
            for f in sorted(self._fanouts[cur]):
                if not self._alive[f] or f in subst:
                    continue
                n0 = resolve(self._fanin0[f])
                n1 = resolve(self._fanin1[f])
                if n0 > n1:
                    n0, n1 = n1, n0
                merged: int | None = None
                if n0 == LIT_FALSE or n0 ^ n1 == 1:
                    merged = LIT_FALSE
                elif n0 == LIT_TRUE or n0 == n1:
                    merged = n1
                else:
                    existing = self._strash.get((n0, n1))
                    if existing is not None and self._alive[existing] \
                            and existing != f and existing not in subst:
                        merged = make_lit(existing)
                if merged is None:
                    self._change_fanins(f, n0, n1)
                else:
                    subst[f] = merged
                    queue.append(f)
        # Detach all substituted nodes, then sweep cones that lost their
        # last reference.  Substituted nodes may reference each other through
        # stale fanins, so peel them off in dependency order.
        freed_roots: list[int] = []
        remaining = [n for n in sorted(subst, reverse=True) if self._alive[n]]
        while remaining:
            deferred: list[int] = []
            for n in remaining:
                if self._nref[n] == 0 and not self._fanouts[n]:
                    f0, f1 = lit_node(self._fanin0[n]), lit_node(self._fanin1[n])
                    self._kill(n)
                    freed_roots.extend((f0, f1))
                else:
                    deferred.append(n)
            if len(deferred) == len(remaining):
                raise AigError("substituted nodes still referenced")
            remaining = deferred
        self._kill_dead_cone(freed_roots)
        self._levels_dirty = True

    def sweep_dangling(self) -> "Aig":
        """Mark dead every AND node unreachable backward from the POs."""
        reachable = set()
        stack = [lit_node(po) for po in self._pos]
        while stack:
            n = stack.pop()
            if n in reachable or self._type[n] != TYPE_AND or not self._alive[n]:
                continue
            reachable.add(n)
            stack.append(lit_node(self._fanin0[n]))
            stack.append(lit_node(self._fanin1[n]))
        dead = {n for n in self.and_nodes() if n not in reachable}
        if dead:
            self._bump()
            # all fanouts of an unreachable node are unreachable, so killing
            # in reverse topological order keeps reference counts consistent
            for n in reversed(self.topological_order()):
                if n in dead and self._alive[n]:
                    self._kill(n)
        return self

    # ------------------------------------------------------------------
    # orders, levels, cones

    def topological_order(self) -> list[int]:
        """PIs in declaration order, then alive AND nodes, fanins first.

        On freshly constructed or parsed graphs this is simply ascending
        node index; after in-place replacements the order is recomputed
        (smallest ready index first, which is deterministic).
        """
        if self._topo_cache is not None and self._topo_cache[0] == self.version:
            return list(self._topo_cache[1])
        ands = self.and_nodes()
        monotone = all(lit_node(self._fanin0[n]) < n and lit_node(self._fanin1[n]) < n
                       for n in ands)
        if monotone:
            order = list(self._pis) + ands
        else:
            indeg: dict[int, int] = {}
            dependents: dict[int, list[int]] = {}
            ready: list[int] = []
            and_set = set(ands)
            for n in ands:
                deg = 0
                for f in set((lit_node(self._fanin0[n]), lit_node(self._fanin1[n]))):
                    if f in and_set:
                        deg += 1
                        dependents.setdefault(f, []).append(n)
                indeg[n] = deg
                if deg == 0:
                    heapq.heappush(ready, n)
            ordered_ands: list[int] = []
            while ready:
                n = heapq.heappop(ready)
                ordered_ands.append(n)
                for d in dependents.get(n, ()):
                    indeg[d] -= 1
                    if indeg[d] == 0:
                        heapq.heappush(ready, d)
            if len(ordered_ands) != len(ands):
                raise AigError("cycle detected in AND structure")
            order = list(self._pis) + ordered_ands
        self._topo_cache = (self.version, order)
        return list(order)

    def levels(self) -> list[int]:
        """Per-node level; PIs at 0, AND nodes 1 + max fanin level."""
        if self._levels_dirty:
            for n in self.topological_order():
                if self._type[n] == TYPE_AND:
                    self._level[n] = 1 + max(self._level[lit_node(self._fanin0[n])],
                                             self._level[lit_node(self._fanin1[n])])
            self._levels_dirty = False
        return list(self._level)

    def depth(self) -> int:
        levels = self.levels()
        best = 0
        for po in self._pos:
            n = lit_node(po)
            if self._type[n] == TYPE_AND and self._alive[n]:
                best = max(best, levels[n])
        return best

    def stats(self) -> GraphStats:
        return GraphStats(size=self._n_ands, depth=self.depth(),
                          n_pis=self.n_pis, n_pos=self.n_pos)

    def mffc_nodes(self, node: int) -> set[int]:
        """Maximum fanout-free cone of ``node`` (AND nodes, including itself)."""
        if self._type[node] != TYPE_AND or not self._alive[node]:
            raise AigError(f"node {node} is not an alive AND node")
        cone: set[int] = set()
        touched: list[int] = []

        def deref(n: int) -> None:
            cone.add(n)
            for f in (self._fanin0[n], self._fanin1[n]):
                fn = lit_node(f)
                if self._type[fn] != TYPE_AND:
                    continue
                self._nref[fn] -= 1
                touched.append(fn)
                if self._nref[fn] == 0:
                    deref(fn)

        deref(node)
        for fn in reversed(touched):
            self._nref[fn] += 1
        return cone

    def mffc_size(self, node: int) -> int:
        return len(self.mffc_nodes(node))

    def transitive_fanout(self, node: int) -> set[int]:
        seen: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            for f in self._fanouts[n]:
                if f not in seen and self._alive[f]:
                    seen.add(f)
                    stack.append(f)
        return seen

    # ------------------------------------------------------------------
    # copying and checking

    def copy(self) -> "Aig":
        if self._journal is not None:
            raise AigError("cannot copy inside a transaction")
        g = Aig.__new__(Aig)
        g._type = list(self._type)
        g._fanin0 = list(self._fanin0)
        g._fanin1 = list(self._fanin1)
        g._alive = list(self._alive)
        g._level = list(self._level)
        g._nref = list(self._nref)
        g._fanouts = [set(s) for s in self._fanouts]
        g._pis = list(self._pis)
        g._pos = list(self._pos)
        g._strash = dict(self._strash)
        g._n_ands = self._n_ands
        g.version = self.version
        g.comment = self.comment
        g._journal = None
        g._txn_state = None
        g._levels_dirty = self._levels_dirty
        g._topo_cache = None
        return g

    def structure_key(self) -> tuple:
        """Canonical snapshot of the alive structure, for equality checks."""
        ands = tuple((n, self._fanin0[n], self._fanin1[n]) for n in self.and_nodes())
        return (tuple(self._pis), tuple(self._pos), ands)

    def validate(self, strict_strash: bool = True) -> None:
        """Check structural invariants; raises AigError on the first failure."""
        n = len(self._type)
        if not (self._type[0] == TYPE_CONST and self._alive[0]):
            raise AigError("node 0 must be the alive constant")
        nref = [0] * n
        for po in self._pos:
            self._check_lit(po)
            nref[lit_node(po)] += 1
        fanouts: list[set[int]] = [set() for _ in range(n)]
        for node in range(1, n):
            t = self._type[node]
            if t == TYPE_AND and self._alive[node]:
                for f in (self._fanin0[node], self._fanin1[node]):
                    self._check_lit(f)
                    nref[lit_node(f)] += 1
                    fanouts[lit_node(f)].add(node)
                if self._fanin0[node] > self._fanin1[node]:
                    raise AigError(f"node {node} fanins not in canonical order")
        for node in range(n):
            if self._alive[node] and nref[node] != self._nref[node]:
                raise AigError(f"node {node} refcount {self._nref[node]} != {nref[node]}")
            live_fo = {f for f in self._fanouts[node] if self._alive[f]}
            if self._alive[node] and live_fo != fanouts[node]:
                raise AigError(f"node {node} fanout set inconsistent")
        self.topological_order()  # raises on cycles
        if strict_strash:
            seen: dict[tuple[int, int], int] = {}
            for node in self.and_nodes():
                key = (self._fanin0[node], self._fanin1[node])
                if key in seen:
                    raise AigError(f"strash violation: nodes {seen[key]} and {node}")
                seen[key] = node
                if self._strash.get(key) != node:
                    raise AigError(f"strash table missing node {node}")
        alive_ands = sum(1 for node in range(n)
                         if self._type[node] == TYPE_AND and self._alive[node])
        if alive_ands != self._n_ands:
            raise AigError(f"size counter {self._n_ands} != {alive_ands}")
