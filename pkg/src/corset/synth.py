"""Planted-rule synthetic datasets.

Both matrices start at zero; each generating rule writes ones into its feature and
label columns over its support; then every cell of both matrices is flipped
independently with probability ``noise``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .objective import Rule, jaccard_distance


@dataclass
class GeneratorConfig:
    n_records: int = 1000
    n_features: int = 100
    n_labels: int = 100
    n_rules: int | None = None  # default: min(|F|, |L|) // 3
    features_per_rule: int = 3
    labels_per_rule: int = 3
    coverage: str = "uniform"
    support_range: tuple = (0.05, 0.15)
    skew_exponent: float = 2.0
    noise: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.n_rules is None:
            self.n_rules = min(self.n_features, self.n_labels) // 3
        if self.features_per_rule < 1 or self.labels_per_rule < 1:
            raise ValueError("rule sizes must be >= 1")
        if self.features_per_rule > self.n_features or self.labels_per_rule > self.n_labels:
            raise ValueError("rule size exceeds the feature or label dimension")
        if not 0 <= self.noise <= 1:
            raise ValueError("noise must lie in [0, 1]")
        if self.coverage not in ("uniform", "skewed"):
            raise ValueError("coverage must be 'uniform' or 'skewed'")
        if self.n_records < 1 or self.n_rules < 0:
            raise ValueError("need at least one record and a non-negative rule count")


@dataclass
class PlantedGroundTruth:
    rules: list = field(default_factory=list)  # dicts: head, tail, support

    def to_json(self) -> dict:
        return {"rules": self.rules}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PlantedGroundTruth":
        return cls(json.loads(Path(path).read_text(encoding="utf-8"))["rules"])


def _item_blocks(rng, n_items: int, n_rules: int, size: int) -> list:
    # disjoint blocks when they fit, independent draws otherwise
    if n_rules * size <= n_items:
        perm = rng.permutation(n_items)
        return [sorted(perm[i * size:(i + 1) * size].tolist()) for i in range(n_rules)]
    return [sorted(rng.choice(n_items, size, replace=False).tolist()) for _ in range(n_rules)]


def support_fractions(cfg: GeneratorConfig, rng) -> np.ndarray:
    lo, hi = cfg.support_range
    if cfg.coverage == "uniform":
        return rng.uniform(lo, hi, cfg.n_rules)
    ranks = np.arange(1, cfg.n_rules + 1, dtype=float)
    shape = ranks ** -cfg.skew_exponent
    mass = cfg.n_rules * (lo + hi) / 2
    return np.minimum(mass * shape / shape.sum(), 1.0)


def generate(cfg: GeneratorConfig):
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_records
    X = np.zeros((n, cfg.n_features), dtype=bool)
    Y = np.zeros((n, cfg.n_labels), dtype=bool)
    heads = _item_blocks(rng, cfg.n_features, cfg.n_rules, cfg.features_per_rule)
    tails = _item_blocks(rng, cfg.n_labels, cfg.n_rules, cfg.labels_per_rule)
    truth = []
    for h, t, frac in zip(heads, tails, support_fractions(cfg, rng)):
        k = min(n, max(1, math.ceil(frac * n)))
        sup = np.sort(rng.choice(n, k, replace=False))
        X[np.ix_(sup, h)] = True
        Y[np.ix_(sup, t)] = True
        truth.append({"head": h, "tail": t, "support": sup.tolist()})
    if cfg.noise > 0:
        X ^= rng.random(X.shape) < cfg.noise
        Y ^= rng.random(Y.shape) < cfg.noise
    return Dataset.from_matrices(X, Y), PlantedGroundTruth(truth)


def recovery_score(dataset: Dataset, truth: PlantedGroundTruth, rules, threshold: float = 0.2) -> float:
    """Fraction of planted rules with a learned rule within Jaccard distance ``threshold``."""
    if not truth.rules:
        return 1.0
    learned = [r if isinstance(r, Rule) else Rule.build(dataset, *r) for r in rules]
    planted = [Rule.build(dataset, p["head"], p["tail"]) for p in truth.rules]
    hit = sum(1 for p in planted if any(jaccard_distance(p, r) <= threshold for r in learned))
    return hit / len(planted)


def config_json(cfg: GeneratorConfig) -> dict:
    d = asdict(cfg)
    d["support_range"] = list(cfg.support_range)
    return d
