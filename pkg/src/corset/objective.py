"""Rules, coverage sets, and every scoring formula of the rule-set objective.

A rule's coverage is ``D[R] x T``. It is stored as the record bitmask ``D[R]``
together with the tail, so coverage algebra reduces to a few big-int operations.
A union of coverages is kept as one record bitmask per label.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .data import Dataset, iter_bits

EPS = 1e-12


class UndefinedPrecision(ValueError):
    """Adjusted accuracy requested for a head that matches no record."""


@dataclass(frozen=True)
class CoverageSet:
    """Set of (record-id, label) pairs, stored as label -> record bitmask."""

    by_label: tuple = ()  # sorted tuple of (label, mask) with mask != 0

    @classmethod
    def from_masks(cls, masks: dict) -> "CoverageSet":
        return cls(tuple(sorted((k, m) for k, m in masks.items() if m)))

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "CoverageSet":
        masks: dict = {}
        for i, k in pairs:
            masks[k] = masks.get(k, 0) | (1 << i)
        return cls.from_masks(masks)

    def masks(self) -> dict:
        return dict(self.by_label)

    def pairs(self) -> set:
        return {(i, k) for k, m in self.by_label for i in iter_bits(m)}

    def __len__(self):
        return sum(m.bit_count() for _, m in self.by_label)

    def __or__(self, other):
        a = self.masks()
        for k, m in other.by_label:
            a[k] = a.get(k, 0) | m
        return CoverageSet.from_masks(a)

    def __and__(self, other):
        b = other.masks()
        return CoverageSet.from_masks({k: m & b.get(k, 0) for k, m in self.by_label})

    def __sub__(self, other):
        b = other.masks()
        return CoverageSet.from_masks({k: m & ~b.get(k, 0) for k, m in self.by_label})


@dataclass(frozen=True)
class Rule:
    """Conjunctive rule ``head -> tail`` with supports cached against one dataset."""

    head: frozenset
    tail: frozenset
    head_support: int = field(compare=False, repr=False)  # bitmask D[H]
    support: int = field(compare=False, repr=False)  # bitmask D[R]

    @classmethod
    def build(cls, dataset: Dataset, head: Iterable[int], tail: Iterable[int]) -> "Rule":
        head, tail = frozenset(head), frozenset(tail)
        if not head or not tail:
            raise ValueError("rule head and tail must be non-empty")
        hs = dataset.head_mask(head)
        return cls(head, tail, hs, hs & dataset.tail_mask(tail))

    @property
    def key(self) -> tuple:
        return (tuple(sorted(self.head)), tuple(sorted(self.tail)))

    @property
    def coverage_size(self) -> int:
        return self.support.bit_count() * len(self.tail)

    def coverage(self) -> CoverageSet:
        return CoverageSet.from_masks({k: self.support for k in self.tail})

    def matches(self, features) -> bool:
        return self.head <= features

    def to_json(self) -> dict:
        return {"head": sorted(self.head), "tail": sorted(self.tail)}


def coverage(dataset: Dataset, rule: Rule | None = None, tail: Iterable[int] | None = None) -> CoverageSet:
    """Coverage of a rule, or of a bare tail (pairs of records containing it)."""
    if rule is not None:
        return rule.coverage()
    tail = frozenset(tail)
    m = dataset.tail_mask(tail) if tail else 0
    return CoverageSet.from_masks({k: m for k in tail})


# --------------------------------------------------------------------------
# Rule sets
# --------------------------------------------------------------------------

class RuleSet:
    """Ordered rules with incrementally maintained coverage bookkeeping.

    ``union[k]`` holds records where label ``k`` is covered by some rule,
    ``multi[k]`` those covered by at least two rules; both feed the objective.
    """

    def __init__(self, dataset: Dataset, rules: Iterable[Rule] = (), lam: float = 0.0):
        if lam < 0:
            raise ValueError("lambda must be non-negative")
        self.dataset = dataset
        self.lam = lam
        self.rules: list = []
        self.union: dict = {}
        self.multi: dict = {}
        self.diversity_sum = 0.0
        self._accuracy: dict = {}
        for r in rules:
            self.add(r)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __contains__(self, rule):
        return rule in self.rules

    def accuracy(self, rule: Rule) -> float:
        a = self._accuracy.get(rule.key)
        if a is None:
            a = adjusted_accuracy(self.dataset, rule)
            self._accuracy[rule.key] = a
        return a

    def add(self, rule: Rule) -> None:
        self.diversity_sum += sum(jaccard_distance(rule, r) for r in self.rules)
        s = rule.support
        for k in rule.tail:
            u = self.union.get(k, 0)
            self.multi[k] = self.multi.get(k, 0) | (u & s)
            self.union[k] = u | s
        self.rules.append(rule)

    def union_coverage(self) -> CoverageSet:
        return CoverageSet.from_masks(self.union)

    def covered_labels(self, record: int) -> frozenset:
        """cov_D(ruleset) for one record."""
        bit = 1 << record
        return frozenset(k for k, m in self.union.items() if m & bit)

    def objective(self) -> float:
        """Objective from the maintained bookkeeping (pairs covered exactly once)."""
        q = 0.0
        for r in self.rules:
            only = sum((r.support & ~self.multi.get(k, 0)).bit_count() for k in r.tail)
            if only:
                q += only * self.accuracy(r)
        return q + self.lam * self.diversity_sum


# --------------------------------------------------------------------------
# Scores
# --------------------------------------------------------------------------

def _uncovered(support: int, tail, union: dict) -> int:
    return sum((support & ~union.get(k, 0)).bit_count() for k in tail)


def uncovered_area(dataset: Dataset, x, ruleset: RuleSet | None = None) -> int:
    """|cov(x) minus the union coverage of ``ruleset``|, for a Rule or a tail."""
    if isinstance(x, Rule):
        support, tail = x.support, x.tail
    else:
        tail = frozenset(x)
        support = dataset.tail_mask(tail) if tail else 0
    union = ruleset.union if ruleset is not None else {}
    return _uncovered(support, tail, union)


def bernoulli_kl(p: float, q: float) -> float:
    p = min(max(p, EPS), 1 - EPS)
    q = min(max(q, EPS), 1 - EPS)
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


def adjusted_accuracy(dataset: Dataset, rule: Rule) -> float:
    """KL(Bern(precision) || Bern(base rate)) when precision beats the base rate, else 0."""
    nh = rule.head_support.bit_count()
    if nh == 0:
        raise UndefinedPrecision(f"undefined precision: head {sorted(rule.head)} matches no record")
    p_rule = rule.support.bit_count() / nh
    p_base = dataset.tail_mask(rule.tail).bit_count() / len(dataset)
    if p_rule <= p_base:
        return 0.0
    return bernoulli_kl(p_rule, p_base)


def safe_accuracy(dataset: Dataset, rule: Rule) -> float:
    return adjusted_accuracy(dataset, rule) if rule.head_support else 0.0


def quality(dataset: Dataset, rule: Rule, ruleset: RuleSet | None = None) -> float:
    area = uncovered_area(dataset, rule, ruleset)
    if area == 0:
        return 0.0
    return area * safe_accuracy(dataset, rule)


def jaccard_distance(a, b) -> float:
    """Jaccard distance between the coverages of two rules (or CoverageSets).

    Two empty coverages are at distance 1.
    """
    if isinstance(a, Rule) and isinstance(b, Rule):
        shared = len(a.tail & b.tail)
        inter = shared * (a.support & b.support).bit_count() if shared else 0
        union = a.coverage_size + b.coverage_size - inter
    else:
        ca = a.coverage() if isinstance(a, Rule) else a
        cb = b.coverage() if isinstance(b, Rule) else b
        inter = len(ca & cb)
        union = len(ca) + len(cb) - inter
    if union == 0:
        return 1.0
    return 1.0 - inter / union


def objective_value(dataset: Dataset, rules: Sequence[Rule], lam: float) -> float:
    """Sum of each rule's quality against the others plus lam * unordered-pair diversity.

    Computed from scratch with explicit pair sets; independent of RuleSet bookkeeping.
    """
    rules = list(rules)
    covs = [r.coverage().pairs() for r in rules]
    q = 0.0
    for i, r in enumerate(rules):
        others = set().union(*(covs[j] for j in range(len(rules)) if j != i))
        area = len(covs[i] - others)
        if area:
            q += area * safe_accuracy(dataset, r)
    div = 0.0
    for i in range(len(rules)):
        for j in range(i + 1, len(rules)):
            div += jaccard_distance(rules[i], rules[j])
    return q + lam * div


def diversity_gain(candidate: Rule, ruleset: RuleSet) -> float:
    return sum(jaccard_distance(candidate, r) for r in ruleset.rules)


def marginal_gain(dataset: Dataset, candidate: Rule, ruleset: RuleSet, lam: float | None = None) -> float:
    lam = ruleset.lam if lam is None else lam
    return quality(dataset, candidate, ruleset) + lam * diversity_gain(candidate, ruleset)


def gain_order_key(gain: float, rule: Rule) -> tuple:
    """Sort key for candidates: best gain, then larger coverage, then smaller (H, T)."""
    return (-gain, -rule.coverage_size, rule.key)


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def rules_to_jsonl(rules: Iterable[Rule]) -> str:
    return "".join(json.dumps(r.to_json()) + "\n" for r in rules)


def rules_from_json(dataset: Dataset, objs: Iterable[dict]) -> list:
    return [Rule.build(dataset, o["head"], o["tail"]) for o in objs]
