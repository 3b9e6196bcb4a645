"""Command-line entry point.

Subcommands: score (one model), rank (a manifest of models), eval (the
full correlation protocol over targets and seeds), synth (generate
synthetic datasets and zoos).  Exit codes: 0 success, 1 partial failure,
2 configuration error, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import ConfigError, DegenerateInputError, KitescoreError, SchemaError
from .estimators import ESTIMATORS, NEEDS_LABELS, NEEDS_META, NEEDS_RANDOM, ModelMeta
from .evaluation import EvalReport, te_aggregate
from .io_formats import load_manifest, load_score_table, read_features, write_features
from .kernels import KERNEL_KINDS, FeatureMatrix, LabelVector
from .pipeline import PipelineConfig, score_model
from .preprocess import sample_probe
from .random_features import derive_seed
from .synth import (
    SyntheticZooSpec,
    gen_gaussian_mixture,
    gen_synthetic_zoo,
    orthogonal_spec,
    two_class_spec,
    zoo_split,
)

VERSION_STRING = f"kitescore {__version__}"

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _parse_pca_dim(value: str) -> int | None:
    if value.lower() in ("full", "none", "0"):
        return None
    return int(value)


def _default_jobs() -> int:
    env = os.environ.get("KITE_JOBS", "")
    try:
        return max(int(env), 1)
    except ValueError:
        return 1


def _load_labels(path: str) -> LabelVector:
    """Labels from a feature file (embedded) or a one-label-per-line text file."""
    if path.endswith(".txt"):
        labels = np.loadtxt(path, dtype=np.int64, ndmin=1)
        return LabelVector(labels, num_classes=int(labels.max()) + 1)
    _, labels = read_features(path)
    if labels is None:
        raise SchemaError(f"{path} carries no labels")
    return labels


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        estimator=getattr(args, "estimator", "kite"),
        kernel=args.kernel,
        sigma=args.sigma,
        pca_dim=args.pca_dim,
        lambda_=getattr(args, "lambda_", 1.0),
        k=args.k,
        random_kind=args.random_kind,
        hidden_widths=[int(w) for w in args.hidden.split(",") if w],
        init=args.init,
        num_seeds=args.net_seeds,
        seed=args.seed,
    )


# ---------------------------------------------------------------- score


def cmd_score(args: argparse.Namespace) -> int:
    if args.estimator not in ESTIMATORS:
        return _fail(f"unknown estimator {args.estimator!r}; known: {sorted(ESTIMATORS)}", EXIT_CONFIG)
    features, embedded = read_features(args.features)
    labels = _load_labels(args.labels) if args.labels else embedded
    if args.estimator in NEEDS_LABELS and labels is None:
        return _fail(f"estimator {args.estimator!r} requires labels", EXIT_CONFIG)
    random_features = None
    if args.random:
        random_features, _ = read_features(args.random, provenance="random")
    elif args.estimator in NEEDS_RANDOM:
        return _fail(f"estimator {args.estimator!r}: random features required (--random)", EXIT_CONFIG)
    meta = None
    if args.estimator in NEEDS_META:
        if args.layers is None or args.source_size is None:
            return _fail("heuristic estimator requires --layers and --source-size", EXIT_CONFIG)
        meta = ModelMeta(layers=args.layers, source_size=args.source_size, target_size=features.n)
    cfg = _pipeline_config(args)

    start = time.perf_counter()
    value = score_model(
        features, labels, None, cfg, random_features=random_features, meta=meta
    )
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    record = {
        "score": value,
        "estimator": args.estimator,
        "version": VERSION_STRING,
        "config": cfg.to_dict(),
        "inputs": {"features": args.features, "labels": args.labels, "random": args.random},
        "n": features.n,
        "d": features.d,
        "timing_ms": elapsed_ms,
    }
    print(repr(value))
    print(json.dumps(record, sort_keys=True))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------- rank


def _score_one_model(entry, manifest, labels, raw, cfg_base, target_id="target"):
    features, _ = read_features(manifest.feature_path(entry))
    if features.n != labels.n:
        raise SchemaError(
            f"model {entry.model_id}: {features.n} rows, target has {labels.n}"
        )
    meta = ModelMeta(
        layers=entry.layers,
        source_size=entry.source_size,
        target_size=labels.n,
    )
    return score_model(
        features,
        labels,
        raw,
        cfg_base,
        meta=meta,
        random_stream=f"random-net:{target_id}",
    )


def cmd_rank(args: argparse.Namespace) -> int:
    if args.estimator not in ESTIMATORS:
        return _fail(f"unknown estimator {args.estimator!r}; known: {sorted(ESTIMATORS)}", EXIT_CONFIG)
    manifest = load_manifest(args.manifest)
    raw, embedded = read_features(args.target_features, provenance="raw")
    labels = _load_labels(args.target_labels) if args.target_labels else embedded
    if labels is None:
        return _fail("target labels required (embed them or pass --target-labels)", EXIT_CONFIG)
    cfg = _pipeline_config(args)

    results: dict[str, float] = {}
    failures: dict[str, str] = {}

    def work(entry):
        return entry.model_id, _score_one_model(entry, manifest, labels, raw, cfg)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = {pool.submit(work, e): e for e in manifest.entries}
        for fut, entry in futures.items():
            try:
                model_id, value = fut.result()
                results[model_id] = value
            except KitescoreError as exc:
                failures[entry.model_id] = f"{type(exc).__name__}: {exc}"

    ranked = sorted(results.items(), key=lambda kv: (-kv[1], kv[0]))
    for model_id, value in ranked:
        print(f"{model_id}\t{value!r}")
    for model_id, message in sorted(failures.items()):
        print(f"failed: {model_id}: {message}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model_id", "score"])
            for model_id, value in ranked:
                writer.writerow([model_id, repr(value)])
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------- eval


def _load_targets(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    targets = doc.get("targets")
    if not isinstance(targets, list) or not targets:
        raise SchemaError(f"{path}: needs a non-empty 'targets' list")
    root = os.path.dirname(os.path.abspath(path))
    out = []
    for item in targets:
        if "target_id" not in item or "manifest" not in item or "raw_features" not in item:
            raise SchemaError(f"{path}: target entries need target_id, manifest, raw_features")
        out.append(
            {
                "target_id": str(item["target_id"]),
                "manifest": os.path.join(root, item["manifest"]),
                "raw_features": os.path.join(root, item["raw_features"]),
                "labels": os.path.join(root, item["labels"]) if item.get("labels") else None,
            }
        )
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    for est in estimators:
        if est not in ESTIMATORS:
            return _fail(f"unknown estimator {est!r}; known: {sorted(ESTIMATORS)}", EXIT_CONFIG)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    if not seeds:
        return _fail("at least one seed required", EXIT_CONFIG)
    targets = _load_targets(args.targets)
    truth_table = load_score_table(args.ground_truth)

    # every (model, target) pair must be covered by the ground truth
    manifests = {t["target_id"]: load_manifest(t["manifest"]) for t in targets}
    for t in targets:
        for entry in manifests[t["target_id"]].entries:
            if (entry.model_id, t["target_id"]) not in truth_table.truth:
                raise SchemaError(
                    f"ground truth missing pair ({entry.model_id}, {t['target_id']})"
                )

    os.makedirs(args.out_dir, exist_ok=True)
    base_cfg = _pipeline_config(args)
    run_config = {
        **base_cfg.to_dict(),
        "estimators": estimators,
        "seeds": seeds,
        "probe_size": args.probe_size,
        "targets_file": args.targets,
        "ground_truth": args.ground_truth,
        "out_dir": args.out_dir,
    }
    del run_config["estimator"], run_config["seed"]

    # cache model features per target; they are reused across seeds
    features_cache: dict[str, dict[str, FeatureMatrix]] = {}
    for t in targets:
        manifest = manifests[t["target_id"]]
        features_cache[t["target_id"]] = {
            e.model_id: read_features(manifest.feature_path(e))[0] for e in manifest.entries
        }

    per_seed_reports: dict[str, list[EvalReport]] = {est: [] for est in estimators}
    for seed in seeds:
        table = load_score_table(args.ground_truth)
        for t in targets:
            target_id = t["target_id"]
            manifest = manifests[target_id]
            raw, embedded = read_features(t["raw_features"], provenance="raw")
            labels = _load_labels(t["labels"]) if t["labels"] else embedded
            if labels is None:
                return _fail(f"target {target_id}: labels required", EXIT_CONFIG)
            probe = sample_probe(raw, labels, args.probe_size, seed=derive_seed("probe", seed, target_id))
            idx = probe.indices

            def work(entry):
                feats = features_cache[target_id][entry.model_id]
                if feats.n != labels.n:
                    raise SchemaError(
                        f"model {entry.model_id}: {feats.n} rows, target has {labels.n}"
                    )
                sub = FeatureMatrix(feats.data[idx], provenance=feats.provenance)
                meta = ModelMeta(entry.layers, entry.source_size, probe.labels.n)
                values = {}
                for est in estimators:
                    cfg = PipelineConfig(
                        estimator=est,
                        kernel=base_cfg.kernel,
                        sigma=base_cfg.sigma,
                        pca_dim=base_cfg.pca_dim,
                        lambda_=base_cfg.lambda_,
                        k=base_cfg.k,
                        random_kind=base_cfg.random_kind,
                        hidden_widths=base_cfg.hidden_widths,
                        init=base_cfg.init,
                        num_seeds=base_cfg.num_seeds,
                        seed=derive_seed("eval", seed, target_id),
                    )
                    values[est] = score_model(
                        sub,
                        probe.labels,
                        probe.features,
                        cfg,
                        meta=meta,
                        random_stream="random-net",
                    )
                return entry.model_id, values

            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rows = dict(pool.map(work, manifest.entries))
            for model_id in sorted(rows):
                for est, value in rows[model_id].items():
                    table.add_score(est, model_id, target_id, value)

        for est in estimators:
            report = te_aggregate(table, est)
            report.metadata.update(
                {"seed": seed, "version": VERSION_STRING, "run_config": run_config}
            )
            stem = os.path.join(args.out_dir, f"report_seed{seed}_{est}")
            report.write_json(stem + ".json")
            report.write_csv(stem + ".csv")
            per_seed_reports[est].append(report)

    summary = {"version": VERSION_STRING, "run_config": run_config, "estimators": {}}
    for est in estimators:
        reports = per_seed_reports[est]
        pcs = [r.mean_pearson for r in reports]
        taus = [r.mean_tau for r in reports]
        ddof = 1 if len(reports) > 1 else 0
        summary["estimators"][est] = {
            "mean_pearson": float(np.mean(pcs)),
            "std_pearson": float(np.std(pcs, ddof=ddof)),
            "mean_tau": float(np.mean(taus)),
            "std_tau": float(np.std(taus, ddof=ddof)),
            "per_seed_mean_pearson": pcs,
            "per_seed_mean_tau": taus,
        }
    with open(os.path.join(args.out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(args.out_dir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "mean_pearson", "std_pearson", "mean_tau", "std_tau"])
        for est in estimators:
            s = summary["estimators"][est]
            writer.writerow(
                [est, repr(s["mean_pearson"]), repr(s["std_pearson"]), repr(s["mean_tau"]), repr(s["std_tau"])]
            )
    for est in estimators:
        s = summary["estimators"][est]
        print(
            f"{est}: Mean PC = {s['mean_pearson']:.4f} +/- {s['std_pearson']:.4f}  "
            f"Mean tau = {s['mean_tau']:.4f} +/- {s['std_tau']:.4f}"
        )
    return EXIT_OK


# ---------------------------------------------------------------- synth


def _task_from_args(args: argparse.Namespace):
    if args.classes == 2:
        spec = two_class_spec(args.sep, args.n_per_class, dim=args.dim, variance=args.variance, seed=args.seed)
    else:
        spec = orthogonal_spec(
            args.classes, args.sep, args.n_per_class,
            dim=max(args.dim, args.classes), variance=args.variance, seed=args.seed,
        )
    return gen_gaussian_mixture(spec)


def cmd_synth_gaussian(args: argparse.Namespace) -> int:
    features, labels = _task_from_args(args)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "gaussian.kfea")
    write_features(path, features, labels)
    print(f"wrote {path}: n={features.n} d={features.d} classes={labels.num_classes}")
    return EXIT_OK


def _write_zoo(args: argparse.Namespace) -> int:
    raw, labels = _task_from_args(args)
    spec = SyntheticZooSpec(
        raw_dim=raw.d,
        num_models=args.models,
        seed=args.seed,
        geometry_fade=args.fade,
    )
    zoo = gen_synthetic_zoo(spec, (raw, labels))
    scoring, _ = zoo_split(raw.n, args.seed, spec.holdout_fraction)
    os.makedirs(args.out, exist_ok=True)

    raw_path = os.path.join(args.out, "raw.kfea")
    write_features(
        raw_path,
        FeatureMatrix(raw.data[scoring], provenance="raw"),
        LabelVector(labels.labels[scoring], labels.num_classes),
    )
    entries = []
    with open(os.path.join(args.out, "truth.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_id", "target_id", "accuracy"])
        for model in zoo:
            fname = f"{model.model_id}.kfea"
            write_features(os.path.join(args.out, fname), model.features)
            entries.append(
                {
                    "model_id": model.model_id,
                    "feature_file": fname,
                    "architecture": "synthetic-mix",
                    "layers": 10 + int(round(40 * model.quality)),
                    "source_name": f"synthetic-q{model.quality:.3f}",
                    "source_size": 100000 + int(round(900000 * model.quality)),
                }
            )
            writer.writerow([model.model_id, args.target_id, repr(model.ground_truth_accuracy)])
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump({"models": entries}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(args.out, "targets.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "targets": [
                    {
                        "target_id": args.target_id,
                        "manifest": "manifest.json",
                        "raw_features": "raw.kfea",
                    }
                ]
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(
        f"wrote zoo to {args.out}: {len(zoo)} models, scoring n={scoring.size}, "
        f"classes={labels.num_classes}"
    )
    return EXIT_OK


def cmd_synth_zoo(args: argparse.Namespace) -> int:
    return _write_zoo(args)


def cmd_synth_hard(args: argparse.Namespace) -> int:
    return _write_zoo(args)


# ---------------------------------------------------------------- parser


def _add_common_scoring_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="linear", choices=KERNEL_KINDS)
    p.add_argument("--sigma", type=float, default=None, help="kernel bandwidth (default: median heuristic)")
    p.add_argument("--pca-dim", dest="pca_dim", type=_parse_pca_dim, default=32,
                   help="PCA dimension, or 'full' to skip reduction (default 32)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lambda_", type=float, default=1.0,
                   help="weight for the linear_combo estimator")
    p.add_argument("--k", type=int, default=1, help="neighbors for knn_cv")
    p.add_argument("--random-kind", dest="random_kind", default="net", choices=("net", "gaussian"),
                   help="random features: untrained net on the raw input, or standard-normal baseline")
    p.add_argument("--hidden", default="512,256", help="random-net hidden widths, comma-separated")
    p.add_argument("--init", default="he_normal",
                   choices=("xavier_normal", "he_normal", "he_uniform"))
    p.add_argument("--net-seeds", dest="net_seeds", type=int, default=5,
                   help="number of random-net seeds to average")


def _add_synth_task_flags(p: argparse.ArgumentParser, classes: int, sep: float,
                          n_per_class: int, dim: int) -> None:
    p.add_argument("--classes", type=int, default=classes)
    p.add_argument("--sep", type=float, default=sep)
    p.add_argument("--n-per-class", dest="n_per_class", type=int, default=n_per_class)
    p.add_argument("--dim", type=int, default=dim)
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kitescore", description=__doc__)
    parser.add_argument("--version", action="version", version=VERSION_STRING)
    parser.add_argument("--config", default=None,
                        help="JSON config file; explicit flags override its values")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one model's features")
    p_score.add_argument("--features", required=True)
    p_score.add_argument("--labels", default=None)
    p_score.add_argument("--random", default=None, help="random-feature file")
    p_score.add_argument("--estimator", default="kite")
    p_score.add_argument("--layers", type=int, default=None)
    p_score.add_argument("--source-size", dest="source_size", type=int, default=None)
    p_score.add_argument("--json", default=None, help="write the JSON record here too")
    _add_common_scoring_flags(p_score)
    p_score.set_defaults(func=cmd_score)

    p_rank = sub.add_parser("rank", help="rank all models in a manifest")
    p_rank.add_argument("--manifest", required=True)
    p_rank.add_argument("--target-features", dest="target_features", required=True)
    p_rank.add_argument("--target-labels", dest="target_labels", default=None)
    p_rank.add_argument("--estimator", default="kite")
    p_rank.add_argument("--jobs", type=int, default=_default_jobs())
    p_rank.add_argument("--out", default=None, help="also write the ranking as CSV")
    _add_common_scoring_flags(p_rank)
    p_rank.set_defaults(func=cmd_rank)

    p_eval = sub.add_parser("eval", help="correlation protocol over targets and seeds")
    p_eval.add_argument("--targets", required=True, help="targets JSON file")
    p_eval.add_argument("--ground-truth", dest="ground_truth", required=True)
    p_eval.add_argument("--estimators", default="kite,ta,ra")
    p_eval.add_argument("--seeds", default="0,1,2")
    p_eval.add_argument("--probe-size", dest="probe_size", type=int, default=500)
    p_eval.add_argument("--jobs", type=int, default=_default_jobs())
    p_eval.add_argument("--out-dir", dest="out_dir", required=True)
    _add_common_scoring_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate synthetic data")
    synth_sub = p_synth.add_subparsers(dest="synth_command", required=True)

    p_g = synth_sub.add_parser("gaussian", help="Gaussian-mixture dataset")
    _add_synth_task_flags(p_g, classes=2, sep=2.0, n_per_class=250, dim=2)
    p_g.set_defaults(func=cmd_synth_gaussian)

    p_z = synth_sub.add_parser("zoo", help="synthetic model zoo on a coarse task")
    _add_synth_task_flags(p_z, classes=8, sep=4.0, n_per_class=75, dim=32)
    p_z.add_argument("--models", type=int, default=8)
    p_z.add_argument("--fade", type=float, default=0.7)
    p_z.add_argument("--target-id", dest="target_id", default="zoo")
    p_z.set_defaults(func=cmd_synth_zoo)

    p_h = synth_sub.add_parser("hard", help="synthetic model zoo on a fine-grained task")
    _add_synth_task_flags(p_h, classes=20, sep=0.3, n_per_class=30, dim=20)
    p_h.add_argument("--models", type=int, default=8)
    p_h.add_argument("--fade", type=float, default=0.7)
    p_h.add_argument("--target-id", dest="target_id", default="hard")
    p_h.set_defaults(func=cmd_synth_hard)

    return parser


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    """Fill flags from the --config JSON; explicit command-line flags win."""
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            overrides = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{args.config}: not valid JSON ({exc})") from None
    if not isinstance(overrides, dict):
        raise SchemaError(f"{args.config}: config must be a JSON object")
    explicit = set()
    for token in argv:
        if token.startswith("--"):
            explicit.add(token.split("=", 1)[0].lstrip("-").replace("-", "_"))
    aliases = {"lambda": "lambda_"}
    for key, value in overrides.items():
        attr = aliases.get(key, key.replace("-", "_"))
        if not hasattr(args, attr):
            raise SchemaError(f"{args.config}: unknown config key {key!r}")
        if key.replace("-", "_") in explicit or attr in explicit:
            continue
        if attr == "pca_dim" and isinstance(value, str):
            value = _parse_pca_dim(value)
        setattr(args, attr, value)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config_file(args, argv)
        return args.func(args)
    except ConfigError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_CONFIG)
    except DegenerateInputError as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_DEGENERATE)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
