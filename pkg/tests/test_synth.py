import numpy as np
import pytest

from corset.objective import Rule, quality
from corset.synth import GeneratorConfig, PlantedGroundTruth, generate, recovery_score, support_fractions


def test_deterministic_under_seed():
    a, ta = generate(GeneratorConfig(n_records=100, seed=3))
    b, tb = generate(GeneratorConfig(n_records=100, seed=3))
    assert a.records == b.records and ta.rules == tb.rules
    c, _ = generate(GeneratorConfig(n_records=100, seed=4))
    assert c.records != a.records


def test_single_rule_over_everything():
    cfg = GeneratorConfig(n_records=20, n_features=10, n_labels=10, n_rules=1, noise=0.0,
                          support_range=(1.0, 1.0))
    ds, truth = generate(cfg)
    h, t = set(truth.rules[0]["head"]), set(truth.rules[0]["tail"])
    assert all(r.features == h and r.labels == t for r in ds.records)


def test_full_noise_complements():
    cfg = GeneratorConfig(n_records=200, n_features=20, n_labels=20, n_rules=5, noise=0.0, seed=1)
    clean, _ = generate(cfg)
    flipped, _ = generate(GeneratorConfig(**{**cfg.__dict__, "noise": 1.0}))
    X0, Y0 = clean.to_matrices()
    X1, Y1 = flipped.to_matrices()
    assert np.array_equal(X1, ~X0) and np.array_equal(Y1, ~Y0)


def test_default_rule_count_and_supports():
    cfg = GeneratorConfig()
    assert cfg.n_rules == 33
    ds, truth = generate(GeneratorConfig(n_records=300, seed=0))
    assert len(truth.rules) == 33
    for r in truth.rules:
        assert set(r["support"]) <= set(range(300))
        assert 0.05 * 300 <= len(r["support"]) <= 0.15 * 300 + 1


def test_skewed_supports_decrease():
    cfg = GeneratorConfig(coverage="skewed", n_rules=10)
    fr = support_fractions(cfg, np.random.default_rng(0))
    assert all(fr[i] >= fr[i + 1] for i in range(9))
    assert fr.sum() == pytest.approx(min(10 * 0.1, fr.sum()))


@pytest.mark.parametrize("kw", [dict(features_per_rule=200), dict(labels_per_rule=0), dict(noise=1.5),
                                dict(coverage="zipf")])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        GeneratorConfig(**kw)


def test_truth_round_trip(tmp_path):
    _, truth = generate(GeneratorConfig(n_records=50, n_rules=3, seed=2))
    truth.save(tmp_path / "t.json")
    assert PlantedGroundTruth.load(tmp_path / "t.json").rules == truth.rules


def test_recovery_of_truth_itself():
    ds, truth = generate(GeneratorConfig(n_records=200, n_rules=5, seed=5))
    assert recovery_score(ds, truth, [(r["head"], r["tail"]) for r in truth.rules]) == 1.0
    assert recovery_score(ds, truth, []) == 0.0


def _perturbations(rule, n_features, n_labels):
    h, t = set(rule["head"]), set(rule["tail"])
    for f in h:
        yield h - {f}, t
    for k in t:
        yield h, t - {k}
    for f in range(n_features):
        if f not in h:
            yield h | {f}, t
    for k in range(n_labels):
        if k not in t:
            yield h, t | {k}


def _planted_is_maximal(ds, truth, n_features, n_labels):
    for r in truth.rules:
        q0 = quality(ds, Rule.build(ds, r["head"], r["tail"]))
        for h, t in _perturbations(r, n_features, n_labels):
            if h and t and quality(ds, Rule.build(ds, h, t)) > q0 + 1e-12:
                return False
    return True


def test_planted_rules_are_quality_maximizers_at_default_noise():
    wins = sum(_planted_is_maximal(*generate(GeneratorConfig(seed=seed)), 100, 100) for seed in range(10))
    assert wins >= 9


def test_planted_rules_are_quality_maximizers_without_noise():
    for seed in range(10):
        ds, truth = generate(GeneratorConfig(n_records=300, n_features=20, n_labels=20, n_rules=5,
                                             noise=0.0, seed=seed))
        assert _planted_is_maximal(ds, truth, 20, 20)
