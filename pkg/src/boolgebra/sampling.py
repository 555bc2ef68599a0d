"""Decision-vector sampling, dataset construction, and label normalization.

The decision space over N nodes has 3^N points, so even mid-sized designs
are explored by sampling only.  Uniform sampling draws every code
independently; priority-guided sampling starts from the strongest
statically-applicable transform per node and randomizes a drawn fraction of
the AND nodes, which concentrates samples in the high-reduction region
while keeping diversity for training.

Labels are normalized per design: the best sample gets 0, a zero-reduction
sample gets 1, everything else the fraction of the gap to the best.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .aig import Aig, AigError
from .features import applicability, static_features
from .plan import TraversalConfig
from .transforms import AppliedRecord, orchestrated_traversal

FRACTION_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

STRATEGIES = ("uniform", "priority", "mixed")


@dataclass(frozen=True)
class SamplerConfig:
    strategy: str = "mixed"
    priority: tuple[int, int, int] = (0, 1, 2)   # opcode order, strongest first
    fraction: float | None = None                # None: drawn per sample
    seed: int = 0
    count: int = 600
    uniform_share: float = 0.5                   # mixed strategy split

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise AigError(f"unknown strategy {self.strategy!r}")
        if sorted(self.priority) != [0, 1, 2]:
            raise AigError("priority must be a permutation of (0, 1, 2)")
        if self.fraction is not None and not 0.1 <= self.fraction <= 0.9:
            raise AigError("sampling fraction must lie in [0.1, 0.9]")


@dataclass
class SampleRecord:
    design_id: str
    index: int
    decisions: np.ndarray
    applied: AppliedRecord
    reduction: int
    label: float | None = None

    def __eq__(self, other):
        return (isinstance(other, SampleRecord)
                and self.design_id == other.design_id
                and self.index == other.index
                and np.array_equal(self.decisions, other.decisions)
                and self.applied == other.applied
                and self.reduction == other.reduction
                and self.label == other.label)


def sample_rng(master_seed: int, index: int) -> np.random.Generator:
    """Per-sample generator; identical streams in serial and parallel runs."""
    return np.random.default_rng([master_seed, index])


def random_decision_vector(n_nodes: int, rng: np.random.Generator) -> np.ndarray:
    """Every entry i.i.d. uniform over the three transform codes."""
    if n_nodes < 1:
        raise AigError("need at least one node")
    return rng.integers(0, 3, size=n_nodes).astype(np.int8)


def priority_guided_vector(g: Aig, static_flags: np.ndarray,
                           config: SamplerConfig,
                           rng: np.random.Generator) -> np.ndarray:
    """Priority base vector with a random fraction of nodes re-randomized.

    Each AND node gets its highest-priority statically-applicable transform;
    nodes with no applicable transform draw a uniform code (a don't-care
    that keeps the vector dense).  A uniform subset of ceil(p * N) AND nodes
    is then overwritten with uniform codes.
    """
    decisions = random_decision_vector(g.num_nodes, rng)
    and_nodes = g.and_nodes()
    for n in and_nodes:
        for op in config.priority:
            if static_flags[n, op]:
                decisions[n] = op
                break
    p = config.fraction
    if p is None:
        p = float(rng.choice(FRACTION_GRID))
    elif not 0.1 <= p <= 0.9:
        raise AigError("sampling fraction must lie in [0.1, 0.9]")
    n_overwrite = int(np.ceil(p * len(and_nodes)))
    if n_overwrite and and_nodes:
        chosen = rng.choice(and_nodes, size=min(n_overwrite, len(and_nodes)),
                            replace=False)
        decisions[chosen] = rng.integers(0, 3, size=len(chosen)).astype(np.int8)
    return decisions


def _exhaustive_vectors(n_nodes: int, and_nodes: list[int], count: int):
    """All 3^k assignments over the AND nodes (tiny graphs only)."""
    vecs = []
    k = len(and_nodes)
    for idx in range(min(count, 3 ** k)):
        dec = np.zeros(n_nodes, dtype=np.int8)
        rem = idx
        for n in and_nodes:
            dec[n] = rem % 3
            rem //= 3
        vecs.append(dec)
    return vecs


def sample_vectors(g: Aig, config: SamplerConfig,
                   static_flags: np.ndarray | None = None) -> list[np.ndarray]:
    """The decision vectors for one dataset, in index order.

    When a uniform request is at least as large as the whole 3^N space of a
    tiny graph, the space is enumerated instead so the batch provably
    contains the optimum.
    """
    and_nodes = g.and_nodes()
    if config.strategy == "uniform" and len(and_nodes) <= 12 and \
            config.count >= 3 ** len(and_nodes):
        vecs = _exhaustive_vectors(g.num_nodes, and_nodes, config.count)
        for idx in range(len(vecs), config.count):
            vecs.append(random_decision_vector(g.num_nodes,
                                               sample_rng(config.seed, idx)))
        return vecs
    if config.strategy != "uniform" and static_flags is None:
        raise AigError("priority sampling needs static applicability flags")
    vecs = []
    for idx in range(config.count):
        rng = sample_rng(config.seed, idx)
        if config.strategy == "uniform":
            vecs.append(random_decision_vector(g.num_nodes, rng))
        elif config.strategy == "priority":
            vecs.append(priority_guided_vector(g, static_flags, config, rng))
        else:  # mixed: leading share uniform, remainder priority-guided
            if idx < int(round(config.uniform_share * config.count)):
                vecs.append(random_decision_vector(g.num_nodes, rng))
            else:
                vecs.append(priority_guided_vector(g, static_flags, config, rng))
    return vecs


def _evaluate_one(args):
    g, decisions, cfg = args
    out, record = orchestrated_traversal(g, decisions, cfg)
    return out.n_ands, record


def worker_count() -> int:
    env = os.environ.get("BOOLGEBRA_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def evaluate_vectors(g: Aig, vectors, cfg: TraversalConfig = TraversalConfig()
                     ) -> list[tuple[int, AppliedRecord]]:
    """Run one traversal per vector; (final size, applied record) each.

    Parallel over graph copies when BOOLGEBRA_THREADS asks for workers;
    results keep the input order either way.
    """
    jobs = [(g, dec, cfg) for dec in vectors]
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_one, jobs, chunksize=8))
    return [_evaluate_one(job) for job in jobs]


def build_dataset(g: Aig, config: SamplerConfig, design_id: str = "design",
                  cfg: TraversalConfig = TraversalConfig(),
                  static_flags: np.ndarray | None = None) -> list[SampleRecord]:
    """Sample, evaluate, and label ``config.count`` decision vectors."""
    if static_flags is None and config.strategy != "uniform":
        static_flags = applicability(static_features(g, cfg))
    vectors = sample_vectors(g, config, static_flags)
    size_before = g.n_ands
    results = evaluate_vectors(g, vectors, cfg)
    records = []
    for idx, (dec, (size_after, record)) in enumerate(zip(vectors, results)):
        records.append(SampleRecord(design_id=design_id, index=idx,
                                    decisions=dec, applied=record,
                                    reduction=size_before - size_after))
    return normalize_labels(records)


def normalize_labels(records: list[SampleRecord]) -> list[SampleRecord]:
    """label = (best_reduction - reduction) / best_reduction, in [0, 1].

    The best sample is labeled exactly 0; when no sample reduces anything
    every label is 0.  Smaller is better, matching the ranking the flow
    sorts by.
    """
    if not records:
        raise AigError("cannot normalize an empty record set")
    best = max(r.reduction for r in records)
    for r in records:
        r.label = 0.0 if best == 0 else (best - r.reduction) / best
    return records


def _rle_encode(decisions: np.ndarray) -> list[list[int]]:
    runs = []
    for v in decisions.tolist():
        if runs and runs[-1][0] == v:
            runs[-1][1] += 1
        else:
            runs.append([int(v), 1])
    return runs


def _rle_decode(runs: list[list[int]], dtype=np.int8) -> np.ndarray:
    out = []
    for value, count in runs:
        out.extend([value] * count)
    return np.asarray(out, dtype=dtype)


def write_manifest(records: list[SampleRecord], path, seed: int,
                   feature_paths: list[str] | None = None) -> None:
    """One JSON line per sample: ids, seed, RLE decisions, reduction, label,
    and the relative path of the sample's feature file."""
    with open(path, "w") as fh:
        for i, r in enumerate(records):
            row = {
                "design_id": r.design_id,
                "index": r.index,
                "seed": seed,
                "decisions_rle": _rle_encode(r.decisions),
                "applied_rle": _rle_encode(np.asarray(r.applied.applied)),
                "gains_rle": _rle_encode(np.asarray(r.applied.gains)),
                "reduction": r.reduction,
                "label": r.label,
                "features": feature_paths[i] if feature_paths else None,
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_manifest(path) -> list[SampleRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            applied = AppliedRecord(
                applied=_rle_decode(row["applied_rle"], np.int64).tolist(),
                gains=_rle_decode(row["gains_rle"], np.int64).tolist())
            records.append(SampleRecord(
                design_id=row["design_id"], index=row["index"],
                decisions=_rle_decode(row["decisions_rle"]),
                applied=applied, reduction=row["reduction"],
                label=row["label"]))
    return records
