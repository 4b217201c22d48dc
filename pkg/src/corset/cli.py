"""Command-line entry point: ``corset <subcommand> ...``.

Exit status is 0 on success, 1 when a library call fails and 2 on bad usage.
Every randomized subcommand stamps its seed into the JSON it writes.
"""

from __future__ import annotations

import argparse
import collections
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import __version__
from .data import DataFormatError, load_dense, load_sparse, save_sparse, split
from .evaluate import evaluate, predict_dataset
from .head_sampler import HeadSampler
from .label_space import (build_feature_space, build_label_space, feature_containment,
                          label_containment)
from .learner import LearnerConfig, RuleSetModel, fit
from .synth import GeneratorConfig, config_json, generate, recovery_score
from .tail_sampler import TailSampler

log = logging.getLogger("corset")

DEFAULT_LAMBDAS = (0.01, 0.1, 1.0, 10.0, 100.0)


def _fractions(text: str) -> tuple:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None
    if len(parts) < 2:
        raise argparse.ArgumentTypeError("need at least two fractions")
    return parts


def _id_list(text: str) -> frozenset:
    try:
        ids = frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad id list {text!r}") from None
    if not ids:
        raise argparse.ArgumentTypeError("empty id list")
    return ids


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path == "-":
        print(text)
    elif path:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _table(rows: dict) -> str:
    width = max(map(len, rows)) if rows else 0
    out = []
    for k, v in rows.items():
        val = f"{v:.4f}" if isinstance(v, float) else str(v)
        out.append(f"{k:<{width}}  {val:>12}")
    return "\n".join(out)


def _learner_config(args, **over) -> LearnerConfig:
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    kw = dict(
        lam=args.lam, tau=args.tau, max_rules=None if args.tau is not None else args.max_rules,
        pool_size=args.pool_size, variant=args.variant, two_pass=args.two_pass,
        label_theta=args.theta, feature_theta=args.feature_theta if args.feature_theta is not None else args.theta,
        label_max_size=args.max_size, feature_max_size=args.max_size,
        gamma=args.gamma, epsilon=args.epsilon, seed=args.seed, threads=threads,
        full_tail_space=args.full_tail_space,
    )
    kw.update(over)
    return LearnerConfig(**kw)


def _train_test(args):
    ds = load_sparse(args.data)
    if args.split:
        train, *_, test = split(ds, args.split, args.seed)
        return train, test
    return ds, None


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        n_records=args.records, n_features=args.features, n_labels=args.labels, n_rules=args.rules,
        features_per_rule=args.features_per_rule, labels_per_rule=args.labels_per_rule,
        coverage=args.coverage, noise=args.noise, seed=args.seed,
    )
    ds, truth = generate(cfg)
    save_sparse(ds, args.out)
    truth_path = args.truth or f"{args.out}.truth.json"
    obj = truth.to_json()
    obj["config"] = config_json(cfg)
    obj["seed"] = args.seed
    _write_json(obj, truth_path)
    print(_table({"records": len(ds), "features": ds.n_features, "labels": ds.n_labels,
                  "planted_rules": len(truth.rules), "truth": truth_path}))
    return 0


def cmd_convert(args) -> int:
    ds = load_dense(args.csv, args.labels, args.percentile)
    save_sparse(ds, args.out)
    print(_table(ds.stats()))
    return 0


def cmd_stats(args) -> int:
    st = load_sparse(args.data).stats()
    print(_table(st))
    _write_json(st, args.json)
    return 0


def cmd_train(args) -> int:
    train, test = _train_test(args)
    cfg = _learner_config(args)
    model = fit(train, cfg)
    model.save(args.model)
    report = {"rules": len(model.rules), "seed": args.seed, "model": str(args.model)}
    if test is not None:
        m = evaluate(model.bind(test), test, args.ignore_absent_labels)
        report.update({"test_micro_f1": m.micro_f1, "test_macro_f1": m.macro_f1,
                       "test_hamming_score": m.hamming_score})
    if args.truth:
        from .synth import PlantedGroundTruth
        report["recovery"] = recovery_score(train, PlantedGroundTruth.load(args.truth), model.bind(train))
    print(_table(report))
    _write_json(report, args.json)
    return 0


def cmd_predict(args) -> int:
    model = RuleSetModel.load(args.model)
    ds = load_sparse(args.data)
    lines = [" ".join(map(str, sorted(p))) for p in predict_dataset(model.rules, ds)]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_evaluate(args) -> int:
    model = RuleSetModel.load(args.model)
    ds = load_sparse(args.data)
    rep = evaluate(model.bind(ds), ds, args.ignore_absent_labels)
    print(rep.table())
    _write_json(json.loads(rep.to_json()), args.json)
    return 0


def _emit_counts(counts: collections.Counter, n: int, header: str, out) -> None:
    rows = [f"{header}\tcount\tfrequency"]
    for items, c in sorted(counts.items(), key=lambda kv: (-kv[1], sorted(kv[0]))):
        rows.append(f"{','.join(map(str, sorted(items)))}\t{c}\t{c / n:.6f}")
    text = "\n".join(rows) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_sample_tails(args) -> int:
    ds = load_sparse(args.data)
    index = None
    if not args.full_tail_space:
        index = label_containment(ds, build_label_space(ds, args.theta, args.max_size))
    sampler = TailSampler(ds, index)
    rng = random.Random(args.seed)
    counts = collections.Counter(sampler.sample(rng) for _ in range(args.n))
    _emit_counts(counts, args.n, "tail", args.out)
    return 0


def cmd_sample_heads(args) -> int:
    ds = load_sparse(args.data)
    findex = None
    if args.variant == "surs":
        findex = feature_containment(ds, build_feature_space(ds, args.theta, args.max_size))
    sampler = HeadSampler(ds, args.variant, findex, args.gamma, args.epsilon)
    rng = random.Random(args.seed)
    drawn = [sampler.sample(args.tail, rng) for _ in range(args.n)]
    counts = collections.Counter(h for h in drawn if h)
    if not counts:
        raise RuntimeError(f"tail {sorted(args.tail)} admits no learnable head")
    _emit_counts(counts, args.n, "head", args.out)
    return 0


def cmd_sweep_lambda(args) -> int:
    train, test = _train_test(args)
    test = test if test is not None else train
    rows = ["lambda\tavg_pairwise_overlap\tmicro_f1\trules\tseed"]
    result = []
    for lam in args.lambdas:
        model = fit(train, _learner_config(args, lam=lam))
        bound = model.bind(test)
        m = evaluate(bound, test, args.ignore_absent_labels)
        ov = evaluate(model.bind(train), train).avg_pairwise_overlap
        rows.append(f"{lam:g}\t{ov:.6f}\t{m.micro_f1:.6f}\t{len(model.rules)}\t{args.seed}")
        result.append({"lambda": lam, "avg_pairwise_overlap": ov, "micro_f1": m.micro_f1,
                       "rules": len(model.rules)})
    text = "\n".join(rows) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    _write_json({"seed": args.seed, "rows": result}, args.json)
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_learner_flags(p) -> None:
    stop = p.add_mutually_exclusive_group()
    stop.add_argument("--tau", type=float, default=None, help="stop when the best rule adds at most this covered fraction")
    stop.add_argument("--max-rules", type=int, default=150)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="diversity weight")
    p.add_argument("--pool-size", type=int, default=500)
    p.add_argument("--variant", choices=("surs", "gh"), default="surs")
    p.add_argument("--two-pass", action="store_true", help="rerun greedy over every sampled candidate")
    p.add_argument("--theta", type=float, default=0.1, help="clique threshold of the label space")
    p.add_argument("--feature-theta", type=float, default=None, help="clique threshold of the feature space (default: --theta)")
    p.add_argument("--max-size", type=int, default=5, help="largest itemset in either space")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--threads", type=int, default=None, help="default: all cores")
    p.add_argument("--full-tail-space", action="store_true", help="sample tails over all label subsets")
    p.add_argument("--split", type=_fractions, default=None,
                   help="fractions like 0.7,0.3; train on the first part, score on the last")
    p.add_argument("--ignore-absent-labels", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corset", description="Multi-label rule-set learning.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", default=None, help="write a JSON report here ('-' for stdout)")

    p = sub.add_parser("generate", help="write a planted-rule dataset and its ground truth")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None, help="default: OUT.truth.json")
    p.add_argument("--records", type=int, default=1000)
    p.add_argument("--features", type=int, default=100)
    p.add_argument("--labels", type=int, default=100)
    p.add_argument("--rules", type=int, default=None)
    p.add_argument("--features-per-rule", type=int, default=3)
    p.add_argument("--labels-per-rule", type=int, default=3)
    p.add_argument("--coverage", choices=("uniform", "skewed"), default="uniform")
    p.add_argument("--noise", type=float, default=0.01)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convert", help="binarize a numeric CSV into the sparse format")
    p.add_argument("csv")
    p.add_argument("labels", help="one line of label ids per CSV row")
    p.add_argument("--out", required=True)
    p.add_argument("--percentile", type=float, default=90.0)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", help="dataset summary")
    p.add_argument("data")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="learn a rule set")
    common(p)
    p.add_argument("data")
    p.add_argument("--model", required=True)
    p.add_argument("--truth", default=None, help="ground-truth JSON for a recovery score")
    _add_learner_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predicted label ids, one line per record")
    p.add_argument("data")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model on a labelled dataset")
    p.add_argument("data")
    p.add_argument("--model", required=True)
    p.add_argument("--ignore-absent-labels", action="store_true")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sample-tails", help="TSV of tail draws from an empty rule set")
    common(p)
    p.add_argument("data")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--full-tail-space", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample_tails)

    p = sub.add_parser("sample-heads", help="TSV of head draws for one tail")
    common(p)
    p.add_argument("data")
    p.add_argument("--tail", type=_id_list, required=True, help="comma-separated label ids")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--variant", choices=("surs", "gh"), default="surs")
    p.add_argument("--theta", type=float, default=0.1)
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample_heads)

    p = sub.add_parser("sweep-lambda", help="TSV of overlap and micro-F1 across lambda")
    common(p)
    p.add_argument("data")
    p.add_argument("--lambdas", type=_floats, default=DEFAULT_LAMBDAS)
    p.add_argument("--out", default="-")
    _add_learner_flags(p)
    p.set_defaults(func=cmd_sweep_lambda)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DataFormatError, ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"corset: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
