"""Greedy rule-set learning over sampled candidate pools."""

from __future__ import annotations

import json
import logging
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .data import Dataset
from .head_sampler import HeadSampler
from .label_space import (build_feature_space, build_label_space, feature_containment,
                          label_containment)
from .objective import (Rule, RuleSet, diversity_gain, gain_order_key, objective_value, quality,
                        uncovered_area)
from .tail_sampler import FullyCovered, TailSampler

log = logging.getLogger(__name__)


@dataclass
class LearnerConfig:
    lam: float = 1.0
    tau: float | None = None
    max_rules: int | None = 150
    pool_size: int = 500
    variant: str = "surs"
    two_pass: bool = False
    label_theta: float = 0.1
    label_max_size: int = 5
    feature_theta: float = 0.1
    feature_max_size: int = 5
    gamma: float = 0.5
    epsilon: float = 0.05
    seed: int = 0
    threads: int = 1
    full_tail_space: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.tau is not None and not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")
        if self.tau is None and self.max_rules is None:
            raise ValueError("set tau or max_rules")
        if self.max_rules is not None and self.max_rules < 1:
            raise ValueError("max_rules must be positive")
        if self.variant not in ("surs", "gh"):
            raise ValueError("variant must be 'surs' or 'gh'")


@dataclass
class RuleSetModel:
    rules: list  # list of (head, tail) frozenset pairs
    objective_trace: list = field(default_factory=list)
    coverage_trace: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "rules": [{"head": sorted(h), "tail": sorted(t)} for h, t in self.rules],
            "lambda": self.config.get("lam"),
            "variant": self.config.get("variant"),
            "seed": self.config.get("seed"),
            "objective_trace": self.objective_trace,
            "coverage_trace": self.coverage_trace,
            "config": self.config,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RuleSetModel":
        rules = [(frozenset(r["head"]), frozenset(r["tail"])) for r in obj["rules"]]
        return cls(rules, obj.get("objective_trace", []), obj.get("coverage_trace", []), obj.get("config", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RuleSetModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def bind(self, dataset: Dataset) -> list:
        return [Rule.build(dataset, h, t) for h, t in self.rules]


def draw_rng(seed: int, iteration: int, index: int) -> random.Random:
    """Independent stream per candidate draw, so thread count never changes results."""
    return random.Random(f"{seed}:{iteration}:{index}")


class CandidateGenerator:
    """Samples tails by uncovered area, then heads for each tail."""

    def __init__(self, dataset: Dataset, config: LearnerConfig):
        self.dataset = dataset
        self.config = config
        if config.full_tail_space:
            self.label_index = None
        else:
            space = build_label_space(dataset, config.label_theta, config.label_max_size)
            self.label_index = label_containment(dataset, space)
        findex = None
        if config.variant == "surs":
            fspace = build_feature_space(dataset, config.feature_theta, config.feature_max_size)
            findex = feature_containment(dataset, fspace)
        self.tails = TailSampler(dataset, self.label_index)
        self.heads = HeadSampler(dataset, config.variant, findex, config.gamma, config.epsilon)

    def insert(self, rule: Rule) -> None:
        self.tails.update(rule)

    def _one(self, iteration: int, index: int):
        rng = draw_rng(self.config.seed, iteration, index)
        tail = self.tails.sample(rng)
        head = self.heads.sample(tail, rng)
        if not head:
            return None
        return Rule.build(self.dataset, head, tail)

    def pool(self, iteration: int, size: int | None = None) -> list:
        """Deduplicated candidates; empty when every reachable label occurrence is covered."""
        size = self.config.pool_size if size is None else size
        if self.tails.exhausted:
            return []
        threads = self.config.threads or os.cpu_count() or 1
        idx = range(size)
        try:
            if threads > 1:
                with ThreadPoolExecutor(threads) as ex:
                    drawn = list(ex.map(lambda j: self._one(iteration, j), idx))
            else:
                drawn = [self._one(iteration, j) for j in idx]
        except FullyCovered:
            return []
        seen, out = set(), []
        for r in drawn:
            if r is not None and r.key not in seen:
                seen.add(r.key)
                out.append(r)
        return out


def gen_cand_rules(generator: CandidateGenerator, iteration: int = 0) -> list:
    return generator.pool(iteration)


def _best(dataset: Dataset, candidates, ruleset: RuleSet, skip_null: bool = True):
    best, best_key, best_gain = None, None, 0.0
    for r in candidates:
        if r in ruleset:
            continue
        q = quality(dataset, r, ruleset)
        div = diversity_gain(r, ruleset)
        if skip_null and q == 0 and div == 0:
            continue
        g = q + ruleset.lam * div
        key = gain_order_key(g, r)
        if best_key is None or key < best_key:
            best, best_key, best_gain = r, key, g
    return best, best_gain


def greedy_over_pool(dataset: Dataset, pool, budget: int, lam: float) -> RuleSet:
    """Plain greedy insertion by marginal gain over a fixed pool."""
    rs = RuleSet(dataset, lam=lam)
    pool = list(pool)
    for _ in range(budget):
        r, _g = _best(dataset, pool, rs, skip_null=False)
        if r is None:
            break
        rs.add(r)
    return rs


def fit(dataset: Dataset, config: LearnerConfig | None = None) -> RuleSetModel:
    config = config or LearnerConfig()
    if not len(dataset):
        raise ValueError("cannot fit on an empty dataset")
    gen = CandidateGenerator(dataset, config)
    rs = RuleSet(dataset, lam=config.lam)
    total_labels = dataset.total_label_occurrences or 1
    archive: dict = {}
    obj_trace, cov_trace = [], []
    iteration = 0
    while config.max_rules is None or len(rs) < config.max_rules:
        pool = gen.pool(iteration)
        iteration += 1
        for r in pool:
            archive.setdefault(r.key, r)
        best, gain = _best(dataset, pool, rs)
        if best is None and pool:
            pool = gen.pool(iteration)
            iteration += 1
            for r in pool:
                archive.setdefault(r.key, r)
            best, gain = _best(dataset, pool, rs)
        if best is None:
            break
        c = uncovered_area(dataset, best, rs) / total_labels
        if config.tau is not None and c <= config.tau:
            log.info("stop: best candidate adds c=%.5f <= tau", c)
            break
        rs.add(best)
        gen.insert(best)
        obj_trace.append(rs.objective())
        cov_trace.append(c)
        log.info("iter %d pool=%d rule=%s->%s gain=%.4f c=%.5f f=%.4f", len(rs), len(pool),
                 sorted(best.head), sorted(best.tail), gain, c, obj_trace[-1])

    rules = rs.rules
    if config.two_pass and rules:
        second = greedy_over_pool(dataset, archive.values(), len(rules), config.lam)
        if objective_value(dataset, second.rules, config.lam) > objective_value(dataset, rules, config.lam):
            log.info("second greedy pass wins (%d rules)", len(second))
            rules = second.rules
    return RuleSetModel([(r.head, r.tail) for r in rules], obj_trace, cov_trace, asdict(config))
