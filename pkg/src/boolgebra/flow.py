"""End-to-end minimization flow: sample, score, prune, evaluate, verify.

One flow run samples a batch of decision vectors, scores every sample with
the trained predictor (no traversals yet), keeps the ``top_k``
best-predicted vectors, runs the exact traversal on those only, verifies
functional equivalence of every reported result, and reports the
optimized-to-original size ratios next to the three standalone baselines.
Sampling, pruning, and evaluation happen exactly once per run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .aig import Aig, AigError
from .features import (
    applicability,
    edge_list,
    feature_matrix,
    projected_dynamic_features,
    static_features,
)
from .plan import OpCode, TraversalConfig
from .predictor import GraphSample, Model, predict_batch
from .sampling import SamplerConfig, sample_vectors
from .simulation import EQUIVALENT, check_equivalence
from .transforms import orchestrated_traversal, standalone_pass

RANDOM_VERIFY_WORDS = 157  # just over ten thousand random patterns
EXHAUSTIVE_VERIFY_PIS = 16

VERIFIED_EXHAUSTIVE = "equivalent"
VERIFIED_PROBABILISTIC = "probabilistic"
VERIFIED_FAILED = "failed"


@dataclass(frozen=True)
class FlowConfig:
    sample_count: int = 600
    top_k: int = 10
    master_seed: int = 0
    strategy: str = "mixed"
    verification: str = "auto"       # auto | exhaustive | random | none
    record_timing: bool = True
    traversal: TraversalConfig = field(default_factory=TraversalConfig)

    def __post_init__(self):
        if self.top_k > self.sample_count:
            raise AigError("top_k cannot exceed sample_count")
        if self.verification not in ("auto", "exhaustive", "random", "none"):
            raise AigError(f"unknown verification mode {self.verification!r}")


@dataclass
class FlowRow:
    design: str
    orig_size: int
    rw: float
    rs: float
    rf: float
    bg_mean: float
    bg_best: float
    impr_rw: float
    impr_rs: float
    impr_rf: float
    verified: str
    seconds: float
    # companion data not part of the report schema
    baseline_sizes: dict = field(default_factory=dict, compare=False)
    topk_sizes: list = field(default_factory=list, compare=False)
    best_graph: Aig | None = field(default=None, compare=False)

    def csv_line(self) -> str:
        return ",".join([
            self.design, str(self.orig_size),
            f"{self.rw:.6f}", f"{self.rs:.6f}", f"{self.rf:.6f}",
            f"{self.bg_mean:.6f}", f"{self.bg_best:.6f}",
            f"{self.impr_rw:.6f}", f"{self.impr_rs:.6f}", f"{self.impr_rf:.6f}",
            self.verified, f"{self.seconds:.3f}",
        ])


REPORT_HEADER = ("design,orig_size,rw,rs,rf,bg_mean,bg_best,"
                 "impr_rw,impr_rs,impr_rf,verified,seconds")


def report_to_csv(rows: list[FlowRow]) -> str:
    return "\n".join([REPORT_HEADER] + [r.csv_line() for r in rows]) + "\n"


def _verify(original: Aig, optimized: Aig, mode: str) -> str:
    if mode == "none":
        return VERIFIED_PROBABILISTIC
    if mode == "exhaustive" or (mode == "auto"
                                and original.n_pis <= EXHAUSTIVE_VERIFY_PIS):
        if original.n_pis > 20:
            return VERIFIED_FAILED
        res = check_equivalence(original, optimized, mode="exhaustive")
        return VERIFIED_EXHAUSTIVE if res.status == EQUIVALENT else VERIFIED_FAILED
    res = check_equivalence(original, optimized, mode="random",
                            n_words=RANDOM_VERIFY_WORDS, seed=0)
    if res.status == "counterexample":
        return VERIFIED_FAILED
    return VERIFIED_PROBABILISTIC


def compare_baselines(g: Aig, cfg: TraversalConfig = TraversalConfig(),
                      verification: str = "auto") -> dict:
    """Sizes, ratios, and verification verdicts of the standalone passes."""
    out = {}
    for op in OpCode:
        opt = standalone_pass(g, op, cfg)
        out[op.name.lower()] = {
            "size": opt.n_ands,
            "ratio": opt.n_ands / g.n_ands if g.n_ands else 1.0,
            "verified": _verify(g, opt, verification),
        }
    return out


def run_flow(g: Aig, model: Model | None, config: FlowConfig,
             design_id: str = "design") -> FlowRow:
    """One sample-prune-evaluate run; returns the report row.

    ``model`` may be None only in the degenerate no-pruning configuration
    (``top_k == sample_count``), where scores play no role.
    """
    if model is None and config.top_k != config.sample_count:
        raise AigError("pruning requires a trained model")
    t0 = time.monotonic()
    orig_size = g.n_ands
    static = static_features(g, config.traversal)
    flags = applicability(static)
    sampler = SamplerConfig(strategy=config.strategy, seed=config.master_seed,
                            count=config.sample_count)
    vectors = sample_vectors(g, sampler, flags)
    if model is not None:
        edges = edge_list(g)
        samples = [GraphSample(edges=edges,
                               features=feature_matrix(
                                   static, projected_dynamic_features(g, dec, static)),
                               design_id=design_id)
                   for dec in vectors]
        scores = predict_batch(model, samples)
    else:
        scores = np.zeros(len(vectors))
    keep = np.argsort(scores, kind="stable")[:config.top_k]
    keep = sorted(int(i) for i in keep)

    verdicts = []
    sizes = []
    best_size = None
    best_graph = None
    for idx in keep:
        opt, _record = orchestrated_traversal(g, vectors[idx], config.traversal)
        verdict = _verify(g, opt, config.verification)
        verdicts.append(verdict)
        if verdict == VERIFIED_FAILED:
            continue
        sizes.append(opt.n_ands)
        if best_size is None or opt.n_ands < best_size:
            best_size, best_graph = opt.n_ands, opt
    baselines = compare_baselines(g, config.traversal, config.verification)
    if any(v == VERIFIED_FAILED for v in verdicts) or not sizes:
        verified = VERIFIED_FAILED
    elif all(v == VERIFIED_EXHAUSTIVE for v in verdicts) and \
            all(b["verified"] == VERIFIED_EXHAUSTIVE for b in baselines.values()):
        verified = VERIFIED_EXHAUSTIVE
    else:
        verified = VERIFIED_PROBABILISTIC
    ratios = [s / orig_size for s in sizes] if orig_size else [1.0]
    bg_mean = float(np.mean(ratios)) if sizes else float("nan")
    bg_best = float(np.min(ratios)) if sizes else float("nan")
    seconds = time.monotonic() - t0 if config.record_timing else 0.0
    return FlowRow(
        design=design_id, orig_size=orig_size,
        rw=baselines["rw"]["ratio"], rs=baselines["rs"]["ratio"],
        rf=baselines["rf"]["ratio"],
        bg_mean=bg_mean, bg_best=bg_best,
        impr_rw=baselines["rw"]["ratio"] - bg_best,
        impr_rs=baselines["rs"]["ratio"] - bg_best,
        impr_rf=baselines["rf"]["ratio"] - bg_best,
        verified=verified, seconds=seconds,
        baseline_sizes={k: v["size"] for k, v in baselines.items()},
        topk_sizes=sizes, best_graph=best_graph)
