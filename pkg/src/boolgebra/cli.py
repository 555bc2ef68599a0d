"""Command-line surface over the library.

Subcommands: stats, opt, sample, features, train, predict, flow, verify.
Outputs go to files; a short human-readable summary is printed.  Exit
codes: 0 success, 2 AIGER parse failure, 3 verification failure,
4 configuration/usage failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .aig import Aig, AigError
from .aiger import AigerError, parse_aiger_file, write_aiger_file
from .features import (
    dynamic_features,
    edge_list,
    export_sample,
    feature_matrix,
    read_edge_list,
    read_features,
    static_features,
)
from .flow import FlowConfig, compare_baselines, report_to_csv, run_flow
from .plan import OpCode, TraversalConfig
from .predictor import (
    GraphSample,
    ModelConfig,
    TrainConfig,
    curve_to_csv,
    load_model,
    model_init,
    predict_batch,
    save_model,
    train,
)
from .sampling import (
    SamplerConfig,
    build_dataset,
    read_manifest,
    write_manifest,
)
from .simulation import check_equivalence
from .transforms import (
    AppliedRecord,
    decisions_from_csv,
    decisions_to_csv,
    orchestrated_traversal,
    standalone_pass,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_CONFIG = 4

_OPS = {"rw": OpCode.RW, "rs": OpCode.RS, "rf": OpCode.RF}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_CONFIG)


def _load_graph(path) -> Aig:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such file: {path}", EXIT_CONFIG)
    try:
        return parse_aiger_file(p)
    except AigerError as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_PARSE) from exc


def _cmd_stats(args) -> int:
    g = _load_graph(args.design)
    s = g.stats()
    print(f"{args.design}: size={s.size} depth={s.depth} "
          f"pis={s.n_pis} pos={s.n_pos}")
    return EXIT_OK


def _cmd_opt(args) -> int:
    g = _load_graph(args.design)
    if (args.op is None) == (args.decisions is None):
        raise CliError("opt needs exactly one of --op / --decisions")
    if args.op is not None:
        decisions = np.full(g.num_nodes, int(_OPS[args.op]), dtype=np.int8)
    else:
        decisions = decisions_from_csv(Path(args.decisions).read_text())
        if decisions.shape[0] != g.num_nodes:
            raise CliError(
                f"decision file has {decisions.shape[0]} lines, design has "
                f"{g.num_nodes} nodes")
    out, record = orchestrated_traversal(g, decisions, _traversal_config(args))
    out_path = args.output or _derived(args.design, ".opt.aag")
    write_aiger_file(out, out_path)
    if args.record:
        Path(args.record).write_text(record.to_csv())
    print(f"size {g.n_ands} -> {out.n_ands} "
          f"(reduction {record.total_reduction}); wrote {out_path}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    g = _load_graph(args.design)
    config = SamplerConfig(strategy=args.strategy, seed=args.seed,
                           count=args.count)
    records = build_dataset(g, config, design_id=Path(args.design).stem,
                            cfg=_traversal_config(args))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    st = static_features(g, _traversal_config(args))
    feature_paths = []
    for r in records:
        dyn = dynamic_features(g, r.applied)
        names = export_sample(g, st, dyn, out_dir, f"sample{r.index:05d}")
        feature_paths.append(names["features"])
    manifest = out_dir / "dataset.jsonl"
    write_manifest(records, manifest, seed=args.seed,
                   feature_paths=feature_paths)
    reductions = [r.reduction for r in records]
    print(f"{len(records)} samples -> {manifest} "
          f"(reduction min {min(reductions)} mean "
          f"{sum(reductions)/len(reductions):.1f} max {max(reductions)})")
    return EXIT_OK


def _cmd_features(args) -> int:
    g = _load_graph(args.design)
    cfg = _traversal_config(args)
    st = static_features(g, cfg)
    if args.sample:
        decisions = decisions_from_csv(Path(args.sample).read_text())
        if decisions.shape[0] != g.num_nodes:
            raise CliError("decision file length mismatch")
        _, record = orchestrated_traversal(g, decisions, cfg)
    else:
        record = AppliedRecord(applied=[-1] * g.num_nodes,
                               gains=[0] * g.num_nodes)
    dyn = dynamic_features(g, record)
    out_dir = Path(args.out_dir)
    names = export_sample(g, st, dyn, out_dir, args.stem,
                          directed=args.directed)
    print(f"wrote {out_dir / names['edges']} and {out_dir / names['features']}")
    return EXIT_OK


def _samples_from_manifest(manifest_path) -> list[GraphSample]:
    manifest_path = Path(manifest_path)
    records = read_manifest(manifest_path)
    base = manifest_path.parent
    samples = []
    import json
    with open(manifest_path) as fh:
        rows = [json.loads(ln) for ln in fh if ln.strip()]
    edges_cache: dict[str, np.ndarray] = {}
    for rec, row in zip(records, rows):
        feat_name = row.get("features")
        if not feat_name:
            raise CliError(f"manifest row {rec.index} lacks a features path")
        feats = read_features(base / feat_name)
        edge_name = str(Path(feat_name).with_suffix("").with_suffix("")) + ".edges"
        if edge_name not in edges_cache:
            edges_cache[edge_name] = read_edge_list(base / edge_name)
        samples.append(GraphSample(edges=edges_cache[edge_name],
                                   features=feats, label=rec.label,
                                   design_id=rec.design_id))
    return samples


def _cmd_train(args) -> int:
    samples = _samples_from_manifest(args.manifest)
    if args.profile == "paper":
        mcfg = ModelConfig.paper_profile(seed=args.seed)
        tcfg = TrainConfig.paper_profile(seed=args.seed)
    else:
        mcfg = ModelConfig.reduced_profile(seed=args.seed)
        tcfg = TrainConfig.reduced_profile(seed=args.seed)
    if args.epochs is not None:
        from dataclasses import replace
        tcfg = replace(tcfg, epochs=args.epochs)
    model = model_init(mcfg)
    model, curve = train(model, samples, tcfg)
    save_model(model, args.out)
    curve_path = Path(args.out).with_suffix(".loss.csv")
    curve_path.write_text(curve_to_csv(curve))
    print(f"trained {args.profile} profile for {tcfg.epochs} epochs; "
          f"final test loss {curve[-1][2]:.6f}; wrote {args.out} and {curve_path}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    model = load_model(args.model).eval()
    samples = _samples_from_manifest(args.manifest)
    scores = predict_batch(model, samples)
    out_path = Path(args.out or _derived(args.manifest, ".scores.csv"))
    lines = ["sample_index,score,label"]
    for i, (sc, s) in enumerate(zip(scores, samples)):
        lines.append(f"{i},{sc!r},{'' if s.label is None else repr(s.label)}")
    out_path.write_text("\n".join(lines) + "\n")
    order = np.argsort(scores, kind="stable")
    top = ", ".join(str(int(i)) for i in order[:10])
    print(f"scored {len(samples)} samples -> {out_path}; best-ranked: {top}")
    return EXIT_OK


def _cmd_flow(args) -> int:
    g = _load_graph(args.design)
    overrides = _read_config_file(args.config) if args.config else {}
    sample_count = args.samples if args.samples is not None else \
        int(overrides.get("sample_count", 600))
    top_k = args.top_k if args.top_k is not None else \
        int(overrides.get("top_k", 10))
    seed = args.seed if args.seed is not None else \
        int(overrides.get("master_seed", 0))
    verification = args.verification or overrides.get("verification", "auto")
    config = FlowConfig(sample_count=sample_count, top_k=top_k,
                        master_seed=seed, verification=verification,
                        record_timing=not args.stable_output,
                        traversal=_traversal_config(args))
    model = None
    if args.model:
        model = load_model(args.model).eval()
    elif top_k != sample_count:
        raise CliError("flow needs --model unless top-k equals the sample count")
    row = run_flow(g, model, config, design_id=Path(args.design).stem)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = out_dir / "flow_report.csv"
    report.write_text(report_to_csv([row]))
    if row.best_graph is not None:
        write_aiger_file(row.best_graph, out_dir / "best.aag")
    print(f"{row.design}: orig {row.orig_size}, bg_best ratio {row.bg_best:.4f} "
          f"(rw {row.rw:.4f} rs {row.rs:.4f} rf {row.rf:.4f}), "
          f"verified={row.verified}; wrote {report}")
    if row.verified == "failed":
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_verify(args) -> int:
    a = _load_graph(args.left)
    b = _load_graph(args.right)
    try:
        res = check_equivalence(a, b, mode=args.mode, n_words=args.words,
                                seed=args.seed)
    except AigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    print(f"verdict: {res.status}"
          + (f" at pattern {res.counterexample}" if res.counterexample else ""))
    return EXIT_OK if res.status in ("equivalent", "inconclusive") else EXIT_VERIFY


def _cmd_baselines(args) -> int:
    g = _load_graph(args.design)
    rows = compare_baselines(g, _traversal_config(args))
    for name, row in rows.items():
        print(f"{name}: size {row['size']} ratio {row['ratio']:.4f} "
              f"verified={row['verified']}")
    return EXIT_OK


def _derived(path, suffix: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


def _read_config_file(path) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such config file: {path}", EXIT_CONFIG)
    out = {}
    for line in p.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"bad config line: {line!r}", EXIT_CONFIG)
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _traversal_config(args) -> TraversalConfig:
    return TraversalConfig(rw_zero=getattr(args, "rw_zero", False),
                           rf_depth=getattr(args, "rf_depth", False))


def _add_traversal_flags(p) -> None:
    p.add_argument("--rw-zero", action="store_true", dest="rw_zero",
                   help="accept zero-gain rewrites")
    p.add_argument("--rf-depth", action="store_true", dest="rf_depth",
                   help="accept zero-gain refactors that reduce depth")


def build_parser() -> _Parser:
    parser = _Parser(prog="boolgebra",
                     description="AIG minimization with orchestrated "
                                 "Boolean transforms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print size/depth/io counts")
    p.add_argument("design")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("opt", help="run one optimization traversal")
    p.add_argument("design")
    p.add_argument("--op", choices=sorted(_OPS))
    p.add_argument("--decisions", help="per-node decision CSV")
    p.add_argument("-o", "--output")
    p.add_argument("--record", help="write the applied-op record CSV here")
    _add_traversal_flags(p)
    p.set_defaults(func=_cmd_opt)

    p = sub.add_parser("sample", help="build a labeled decision-vector dataset")
    p.add_argument("design")
    p.add_argument("--count", type=int, default=600)
    p.add_argument("--strategy", choices=["uniform", "priority", "mixed"],
                   default="mixed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="dataset")
    _add_traversal_flags(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("features", help="export edge list and feature matrix")
    p.add_argument("design")
    p.add_argument("--sample", help="decision CSV for dynamic features")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--stem", default="design")
    p.add_argument("--directed", action="store_true",
                   help="emit fanin-to-node edges only")
    _add_traversal_flags(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("train", help="train the predictor on a dataset manifest")
    p.add_argument("manifest")
    p.add_argument("--profile", choices=["paper", "reduced"], default="reduced")
    p.add_argument("--out", default="model.bgnn")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="score dataset samples with a model")
    p.add_argument("model")
    p.add_argument("manifest")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("flow", help="sample, prune with the model, evaluate top-k")
    p.add_argument("design")
    p.add_argument("--model")
    p.add_argument("--samples", type=int)
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--seed", type=int)
    p.add_argument("--verification",
                   choices=["auto", "exhaustive", "random", "none"])
    p.add_argument("--config", help="key=value config file; flags win")
    p.add_argument("--out-dir", default="flow_out")
    p.add_argument("--stable-output", action="store_true",
                   help="zero wall times for byte-reproducible reports")
    _add_traversal_flags(p)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("baselines", help="run the three standalone passes")
    p.add_argument("design")
    _add_traversal_flags(p)
    p.set_defaults(func=_cmd_baselines)

    p = sub.add_parser("verify", help="equivalence-check two designs")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=["exhaustive", "random"],
                   default="exhaustive")
    p.add_argument("--words", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except AigerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
