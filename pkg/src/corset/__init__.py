"""Concise, diverse multi-label rule sets learned by greedy selection over sampled candidates."""

from .data import Dataset, load_sparse, save_sparse, split, support_set
from .learner import LearnerConfig, RuleSetModel, fit
from .objective import Rule, RuleSet

__all__ = [
    "Dataset", "load_sparse", "save_sparse", "split", "support_set",
    "LearnerConfig", "RuleSetModel", "fit", "Rule", "RuleSet",
]
__version__ = "0.1.0"
