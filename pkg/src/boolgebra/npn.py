"""NPN canonical forms and a minimal-size implementation library for all
functions of up to four inputs.

Every 16-bit truth table is mapped to the lexicographically smallest table
reachable by input negation, input permutation, and output negation; the
distinct representatives are the 222 NPN classes.  A companion table stores,
for every function, a minimal AND-structure found by exhaustive bottom-up
synthesis: starting from the projections, all pairwise AND combinations with
all polarity choices are enumerated in order of increasing node count until
the whole space is covered.

The generated tables are cached as an ``.npz`` under ``boolgebra/data`` so
they are built once per installation.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .aig import Aig, AigError, LIT_FALSE, lit_not

FULL = 0xFFFF
N_FUNCTIONS = 1 << 16
VAR_TABLES = (0xAAAA, 0xCCCC, 0xF0F0, 0xFF00)
PERMS = tuple(itertools.permutations(range(4)))
EXPECTED_CLASSES = 222

_DATA_FILE = Path(__file__).parent / "data" / "npn4.npz"
_LIBRARY: "NpnLibrary | None" = None


def _normalize(tt: int) -> tuple[int, int]:
    """Polarity-normalized table (bit 0 clear) plus the complement flag."""
    if tt & 1:
        return tt ^ FULL, 1
    return tt, 0


def transform_id(perm_idx: int, neg_mask: int, out_neg: int) -> int:
    return (perm_idx * 16 + neg_mask) * 2 + out_neg


def decode_transform(tid: int) -> tuple[tuple[int, ...], int, int]:
    out_neg = tid & 1
    rest = tid >> 1
    return PERMS[rest >> 4], rest & 15, out_neg


def apply_transform(tt: int, tid: int) -> int:
    """Transformed table g with g(y) = f(z) ^ out, z_j = y_perm[j] ^ neg_j."""
    perm, neg_mask, out_neg = decode_transform(tid)
    out = 0
    for y in range(16):
        z = 0
        for j in range(4):
            bit = ((y >> perm[j]) & 1) ^ ((neg_mask >> j) & 1)
            z |= bit << j
        out |= ((tt >> z) & 1) << y
    return out ^ (FULL if out_neg else 0)


def _compute_canonical_tables() -> tuple[np.ndarray, np.ndarray]:
    tts = np.arange(N_FUNCTIONS, dtype=np.uint32)
    best = tts.copy()
    best_tid = np.zeros(N_FUNCTIONS, dtype=np.uint16)
    ident = transform_id(PERMS.index((0, 1, 2, 3)), 0, 0)
    best_tid[:] = ident
    for perm_idx, perm in enumerate(PERMS):
        for neg_mask in range(16):
            z_of_y = []
            for y in range(16):
                z = 0
                for j in range(4):
                    bit = ((y >> perm[j]) & 1) ^ ((neg_mask >> j) & 1)
                    z |= bit << j
                z_of_y.append(z)
            g = np.zeros(N_FUNCTIONS, dtype=np.uint32)
            for y, z in enumerate(z_of_y):
                g |= ((tts >> z) & 1) << y
            for out_neg in (0, 1):
                cand = g ^ (FULL * out_neg)
                tid = transform_id(perm_idx, neg_mask, out_neg)
                upd = cand < best
                best[upd] = cand[upd]
                best_tid[upd] = tid
    return best.astype(np.uint16), best_tid


def _synthesize_structures() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exhaustive bottom-up synthesis of minimal AND trees for every table.

    ``cost[t]`` is the node count, ``left[t]``/``right[t]`` encode the fanin
    functions as ``2 * table + complement`` over polarity-normalized tables.
    """
    cost = np.full(N_FUNCTIONS, 0xFF, dtype=np.uint8)
    left = np.zeros(N_FUNCTIONS, dtype=np.uint32)
    right = np.zeros(N_FUNCTIONS, dtype=np.uint32)
    cost[0] = 0
    for v in VAR_TABLES:
        cost[v] = 0
    buckets: dict[int, np.ndarray] = {
        0: np.array([0, *VAR_TABLES], dtype=np.uint32)}
    assigned = 1 + len(VAR_TABLES)
    target = N_FUNCTIONS // 2  # normalized tables only
    c = 0
    while assigned < target:
        c += 1
        if c > 40:
            raise AigError("synthesis failed to close the 4-input space")
        new_costs: list[np.ndarray] = []
        for a in range((c - 1) // 2 + 1):
            b = c - 1 - a
            if b not in buckets or a not in buckets:
                continue
            arr = buckets[a].astype(np.uint32)
            scal = buckets[b]
            for g_val in scal.tolist():
                for pf in (0, 1):
                    fa = arr ^ (FULL * pf)
                    lits_f = arr * 2 + pf
                    for pg in (0, 1):
                        gv = g_val ^ (FULL * pg)
                        res = fa & gv
                        flip = res & 1
                        norm = res ^ (flip * FULL)
                        cand = cost[norm] > c
                        if not cand.any():
                            continue
                        norm_new = norm[cand]
                        uniq, first = np.unique(norm_new, return_index=True)
                        cost[uniq] = c
                        left[uniq] = lits_f[cand][first]
                        right[uniq] = g_val * 2 + pg
                        new_costs.append(uniq)
        if new_costs:
            merged = np.unique(np.concatenate(new_costs))
            buckets[c] = merged.astype(np.uint32)
            assigned += len(merged)
        elif assigned < target:
            raise AigError(f"no progress at cost {c}; space not closed")
    return cost, left, right


class NpnLibrary:
    """Canonicalization plus structure lookup for 4-input functions."""

    def __init__(self, canon_rep, canon_tid, cost, left, right):
        self.canon_rep = canon_rep
        self.canon_tid = canon_tid
        self.cost = cost
        self.left = left
        self.right = right

    def canonical(self, tt: int) -> tuple[int, int]:
        """(representative, transform id) with apply_transform(tt, tid) == rep."""
        return int(self.canon_rep[tt]), int(self.canon_tid[tt])

    def n_classes(self) -> int:
        return len(np.unique(self.canon_rep))

    def implementation_cost(self, tt: int) -> int:
        norm, _ = _normalize(tt)
        return int(self.cost[norm])

    def build(self, g: Aig, tt: int, leaf_lits: list[int]) -> int:
        """Construct ``tt`` over the given leaves with ``make_and``.

        ``tt`` is a 16-bit table; ``leaf_lits`` supplies up to four leaf
        literals, padded with constant-0 for inputs the function ignores.
        The rebuilt logic routes through the NPN representative of ``tt``,
        honoring the stored minimal structure of its class.
        """
        tt &= FULL
        rep, tid = self.canonical(tt)
        perm, neg_mask, out_neg = decode_transform(tid)
        # impl input slot i carries leaf perm^-1(i), complemented per the mask
        slot_lits = [LIT_FALSE] * 4
        for j in range(4):
            lit = leaf_lits[j] if j < len(leaf_lits) else LIT_FALSE
            slot_lits[perm[j]] = lit ^ ((neg_mask >> j) & 1)
        out = self._build_norm(g, *_normalize(rep), slot_lits, {})
        return out ^ out_neg

    def _build_norm(self, g: Aig, norm: int, flip: int,
                    slot_lits: list[int], memo: dict[int, int]) -> int:
        if norm in memo:
            return memo[norm] ^ flip
        if norm == 0:
            lit = LIT_FALSE
        elif norm in VAR_TABLES:
            lit = slot_lits[VAR_TABLES.index(norm)]
        else:
            if self.cost[norm] == 0xFF:
                raise AigError(f"no structure for table {norm:04x}")
            la = int(self.left[norm])
            lb = int(self.right[norm])
            va = self._build_norm(g, la >> 1, la & 1, slot_lits, memo)
            vb = self._build_norm(g, lb >> 1, lb & 1, slot_lits, memo)
            out = g.make_and(va, vb)
            # the AND's raw output is complemented iff both operands were
            lit = out ^ ((la & 1) & (lb & 1))
        memo[norm] = lit
        return lit ^ flip

    def steps_for(self, norm: int) -> list[tuple[int, int]]:
        """Fanin-literal pairs (over normalized tables) of the stored tree."""
        steps: list[tuple[int, int]] = []
        seen: set[int] = set()

        def walk(t: int) -> None:
            if t in seen or t == 0 or t in VAR_TABLES:
                return
            seen.add(t)
            la, lb = int(self.left[t]), int(self.right[t])
            walk(la >> 1)
            walk(lb >> 1)
            steps.append((la, lb))

        walk(norm)
        return steps


def generate_library() -> NpnLibrary:
    canon_rep, canon_tid = _compute_canonical_tables()
    cost, left, right = _synthesize_structures()
    return NpnLibrary(canon_rep, canon_tid, cost, left, right)


def get_library() -> NpnLibrary:
    """Load the cached library, generating and caching it on first use."""
    global _LIBRARY
    if _LIBRARY is not None:
        return _LIBRARY
    if _DATA_FILE.exists():
        data = np.load(_DATA_FILE)
        _LIBRARY = NpnLibrary(data["canon_rep"], data["canon_tid"],
                              data["cost"], data["left"], data["right"])
    else:
        _LIBRARY = generate_library()
        _DATA_FILE.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(
            _DATA_FILE,
            canon_rep=_LIBRARY.canon_rep, canon_tid=_LIBRARY.canon_tid,
            cost=_LIBRARY.cost, left=_LIBRARY.left, right=_LIBRARY.right)
    return _LIBRARY


def expand_tt(tt: int, n_vars: int) -> int:
    """Tile a 2^n_vars-bit table up to the full 16-bit form."""
    width = 1 << n_vars
    out = tt & ((1 << width) - 1)
    while width < 16:
        out |= out << width
        width *= 2
    return out
