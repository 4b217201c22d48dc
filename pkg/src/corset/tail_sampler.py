"""Tail sampling proportional to uncovered area.

Stage one draws a record with probability proportional to its weight, stage two
draws a tail from that record. Over the full power set of a record's labels the
weight is ``|uncovered| * 2**(|L_D| - 1)``; over a reduced space it is the sum of
``|S - cov_D|`` over the members ``S`` contained in the record.
"""

from __future__ import annotations

import bisect
import itertools
import random
from dataclasses import dataclass
from typing import Iterable

from .data import Dataset, iter_bits
from .label_space import ContainmentIndex
from .objective import Rule, RuleSet


class FullyCovered(RuntimeError):
    """Every label occurrence reachable by the sampler is already covered."""


def _rules(x) -> list:
    if x is None:
        return []
    if isinstance(x, Rule):
        return [x]
    return list(x)


def record_specific_coverage(dataset: Dataset, record: int, rules) -> frozenset:
    """Labels of ``record`` covered by a rule (or the union over a rule set)."""
    labels = dataset.records[record].labels
    bit = 1 << record
    out = set()
    for r in _rules(rules):
        if r.support & bit:
            out |= labels & r.tail
    return frozenset(out)


def marginal_coverage(dataset: Dataset, record: int, tail: Iterable[int], rules) -> frozenset:
    return (dataset.records[record].labels & frozenset(tail)) - record_specific_coverage(dataset, record, rules)


def _uncovered_labels(dataset: Dataset, record: int, ruleset: RuleSet | None) -> frozenset:
    labels = dataset.records[record].labels
    if ruleset is None or not ruleset.union:
        return labels
    bit = 1 << record
    return frozenset(k for k in labels if not ruleset.union.get(k, 0) & bit)


@dataclass
class TailWeights:
    """Record weights for stage one plus the per-record uncovered label sets."""

    weights: list  # int weight per record
    uncovered: list  # frozenset per record
    records: list = None  # ids with positive weight
    cumulative: list = None

    def __post_init__(self):
        self.refresh()

    def refresh(self) -> None:
        self.records = [i for i, w in enumerate(self.weights) if w > 0]
        self.cumulative = list(itertools.accumulate(self.weights[i] for i in self.records))

    @property
    def total(self) -> int:
        return self.cumulative[-1] if self.cumulative else 0

    def draw_record(self, rng: random.Random) -> int:
        if not self.records:
            raise FullyCovered("all record weights are zero")
        r = rng.randrange(self.total)
        return self.records[bisect.bisect_right(self.cumulative, r)]


def full_weight(n_labels: int, n_uncovered: int) -> int:
    return n_uncovered << (n_labels - 1) if n_uncovered else 0


def compute_weights_full(dataset: Dataset, ruleset: RuleSet | None = None) -> TailWeights:
    unc = [_uncovered_labels(dataset, i, ruleset) for i in range(len(dataset))]
    w = [full_weight(len(r.labels), len(u)) for r, u in zip(dataset.records, unc)]
    return TailWeights(w, unc)


def _reduced_weight(index: ContainmentIndex, record: int, uncovered: frozenset) -> int:
    itemsets = index.space.itemsets
    return sum(sum(1 for k in itemsets[m] if k in uncovered) for m in index.members[record])


def compute_weights_reduced(dataset: Dataset, index: ContainmentIndex, ruleset: RuleSet | None = None) -> TailWeights:
    unc = [_uncovered_labels(dataset, i, ruleset) for i in range(len(dataset))]
    w = [_reduced_weight(index, i, u) for i, u in enumerate(unc)]
    return TailWeights(w, unc)


def draw_tail_full(dataset: Dataset, tw: TailWeights, rng: random.Random) -> frozenset:
    i = tw.draw_record(rng)
    labels = dataset.records[i].labels
    unc = sorted(tw.uncovered[i])
    mandatory = unc[rng.randrange(len(unc))]
    rest = sorted(labels - {mandatory})
    bits = rng.getrandbits(len(rest)) if rest else 0
    return frozenset([mandatory] + [k for j, k in enumerate(rest) if bits >> j & 1])


def draw_tail_reduced(index: ContainmentIndex, tw: TailWeights, rng: random.Random) -> frozenset:
    i = tw.draw_record(rng)
    unc = tw.uncovered[i]
    itemsets = index.space.itemsets
    cands, cum, acc = [], [], 0
    for m in index.members[i]:
        w = sum(1 for k in itemsets[m] if k in unc)
        if w:
            acc += w
            cands.append(m)
            cum.append(acc)
    r = rng.randrange(acc)
    return frozenset(itemsets[cands[bisect.bisect_right(cum, r)]])


def sample_tail_full(dataset: Dataset, ruleset: RuleSet | None, rng: random.Random) -> frozenset:
    return draw_tail_full(dataset, compute_weights_full(dataset, ruleset), rng)


def sample_tail_reduced(dataset: Dataset, index: ContainmentIndex, ruleset: RuleSet | None,
                        rng: random.Random) -> frozenset:
    return draw_tail_reduced(index, compute_weights_reduced(dataset, index, ruleset), rng)


class TailSampler:
    """Weight table kept in sync with a growing rule set.

    Only records matched by a newly inserted rule change weight, so ``update``
    touches those alone.
    """

    def __init__(self, dataset: Dataset, index: ContainmentIndex | None = None, ruleset: RuleSet | None = None):
        self.dataset = dataset
        self.index = index
        self.ruleset = ruleset
        if index is None:
            self.weights = compute_weights_full(dataset, ruleset)
        else:
            self.weights = compute_weights_reduced(dataset, index, ruleset)

    def update(self, rule: Rule) -> None:
        tw = self.weights
        for i in iter_bits(rule.support):
            unc = tw.uncovered[i] - rule.tail
            if unc == tw.uncovered[i]:
                continue
            tw.uncovered[i] = unc
            if self.index is None:
                tw.weights[i] = full_weight(len(self.dataset.records[i].labels), len(unc))
            else:
                tw.weights[i] = _reduced_weight(self.index, i, unc)
        tw.refresh()

    @property
    def exhausted(self) -> bool:
        return not self.weights.records

    def sample(self, rng: random.Random) -> frozenset:
        if self.index is None:
            return draw_tail_full(self.dataset, self.weights, rng)
        return draw_tail_reduced(self.index, self.weights, rng)


# --------------------------------------------------------------------------
# Exact oracle
# --------------------------------------------------------------------------

MAX_ENUMERATED_TAILS = 1 << 20


def _covered_pairs(dataset: Dataset, rules) -> set:
    pairs = set()
    for r in _rules(rules):
        for i, rec in enumerate(dataset.records):
            if r.head <= rec.features and r.tail <= rec.labels:
                pairs.update((i, k) for k in r.tail)
    return pairs


def exact_tail_distribution(dataset: Dataset, rules=None, space=None) -> dict:
    """Uncovered-area distribution over all tails (or the members of ``space``), by brute force."""
    if space is None:
        budget = sum(1 << len(r.labels) for r in dataset.records)
        if budget > MAX_ENUMERATED_TAILS:
            raise ValueError(f"{budget} tails exceed the enumeration guard")
        tails = set()
        for rec in dataset.records:
            labs = sorted(rec.labels)
            for size in range(1, len(labs) + 1):
                tails.update(frozenset(c) for c in itertools.combinations(labs, size))
    else:
        tails = {frozenset(s) for s in space.itemsets}
    covered = _covered_pairs(dataset, rules)
    area = {}
    for t in tails:
        pairs = {(i, k) for i, rec in enumerate(dataset.records) if t <= rec.labels for k in t}
        a = len(pairs - covered)
        if a:
            area[t] = a
    total = sum(area.values())
    if not total:
        return {}
    return {t: a / total for t, a in area.items()}
