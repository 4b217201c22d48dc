"""Prediction by tail union and multi-label evaluation metrics.

Gold and predicted label sets are paired by record position.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .data import Dataset
from .objective import Rule


def _head_tail(rule):
    if isinstance(rule, Rule):
        return rule.head, rule.tail
    return frozenset(rule[0]), frozenset(rule[1])


def predict(rules: Iterable, features) -> frozenset:
    """Union of the tails of all rules whose head is contained in ``features``."""
    features = frozenset(features)
    out = set()
    for r in rules:
        h, t = _head_tail(r)
        if h <= features:
            out |= t
    return frozenset(out)


def predict_dataset(rules: Iterable, dataset: Dataset) -> list:
    rules = [_head_tail(r) for r in rules]
    return [predict(rules, rec.features) for rec in dataset.records]


def _counts(gold: Sequence, pred: Sequence):
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold rows vs {len(pred)} predicted rows")
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        g, p = set(g), set(p)
        tp += len(g & p)
        fp += len(p - g)
        fn += len(g - p)
    return tp, fp, fn


def micro_f1(gold: Sequence, pred: Sequence) -> float:
    tp, fp, fn = _counts(gold, pred)
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


def macro_f1(gold: Sequence, pred: Sequence, n_labels: int, ignore_absent: bool = False) -> float:
    """Mean per-label F1. A label absent from both gold and predictions scores 0
    unless ``ignore_absent`` drops it from the mean."""
    tp = [0] * n_labels
    fp = [0] * n_labels
    fn = [0] * n_labels
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold rows vs {len(pred)} predicted rows")
    for g, p in zip(gold, pred):
        g, p = set(g), set(p)
        for k in g & p:
            tp[k] += 1
        for k in p - g:
            fp[k] += 1
        for k in g - p:
            fn[k] += 1
    scores = []
    for k in range(n_labels):
        denom = 2 * tp[k] + fp[k] + fn[k]
        if denom == 0:
            if not ignore_absent:
                scores.append(0.0)
            continue
        scores.append(2 * tp[k] / denom)
    return sum(scores) / len(scores) if scores else 0.0


def hamming_loss(gold: Sequence, pred: Sequence, n_labels: int) -> float:
    _, fp, fn = _counts(gold, pred)
    cells = len(gold) * n_labels
    return (fp + fn) / cells if cells else 0.0


def hamming_score(gold: Sequence, pred: Sequence, n_labels: int) -> float:
    return 1.0 - hamming_loss(gold, pred, n_labels)


def avg_pairwise_overlap(rules: Sequence[Rule]) -> float:
    """Mean coverage intersection size over unordered rule pairs (0 below two rules)."""
    n = len(rules)
    if n < 2:
        return 0.0
    total = 0
    for i in range(n):
        a = rules[i]
        for j in range(i + 1, n):
            b = rules[j]
            shared = len(a.tail & b.tail)
            if shared:
                total += shared * (a.support & b.support).bit_count()
    return total / (n * (n - 1) / 2)


@dataclass
class MetricReport:
    micro_f1: float
    macro_f1: float
    hamming_score: float
    avg_pairwise_overlap: float
    rule_count: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    def table(self) -> str:
        rows = asdict(self)
        width = max(map(len, rows))
        lines = []
        for k, v in rows.items():
            val = f"{v:d}" if isinstance(v, int) else f"{v:.4f}"
            lines.append(f"{k:<{width}}  {val:>10}")
        return "\n".join(lines)


def evaluate(rules: Sequence[Rule], dataset: Dataset, ignore_absent: bool = False) -> MetricReport:
    """Metrics of ``rules`` (bound to ``dataset``) on ``dataset``'s gold labels."""
    gold = [r.labels for r in dataset.records]
    pred = predict_dataset(rules, dataset)
    return MetricReport(
        micro_f1=micro_f1(gold, pred),
        macro_f1=macro_f1(gold, pred, dataset.n_labels, ignore_absent),
        hamming_score=hamming_score(gold, pred, dataset.n_labels),
        avg_pairwise_overlap=avg_pairwise_overlap(rules),
        rule_count=len(rules),
    )
