"""Brute-force reference implementations.

Everything here works on plain Python sets and enumerates by definition. Nothing
is imported from the package under test, so agreement is evidence rather than
tautology. Records are ``(features, labels)`` pairs of frozensets.
"""

from __future__ import annotations

import itertools
import math


def subsets(items, min_size=0):
    items = sorted(items)
    for k in range(min_size, len(items) + 1):
        for c in itertools.combinations(items, k):
            yield frozenset(c)


def support(records, features=(), labels=()):
    f, l = set(features), set(labels)
    return [i for i, (F, L) in enumerate(records) if f <= F and l <= L]


def coverage(records, head, tail):
    head, tail = set(head), set(tail)
    return {(i, k) for i, (F, L) in enumerate(records) if head <= F and tail <= L for k in tail}


def tail_coverage(records, tail):
    tail = set(tail)
    return {(i, k) for i, (_, L) in enumerate(records) if tail <= L for k in tail}


def union_coverage(records, rules):
    out = set()
    for h, t in rules:
        out |= coverage(records, h, t)
    return out


def kl(p, q, eps=1e-12):
    p = min(max(p, eps), 1 - eps)
    q = min(max(q, eps), 1 - eps)
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


def accuracy(records, head, tail):
    matched = support(records, features=head)
    if not matched:
        return 0.0
    p_rule = len(support(records, head, tail)) / len(matched)
    p_base = len(support(records, labels=tail)) / len(records)
    return kl(p_rule, p_base) if p_rule > p_base else 0.0


def quality(records, rule, others):
    cov = coverage(records, *rule) - union_coverage(records, others)
    return len(cov) * accuracy(records, *rule) if cov else 0.0


def jaccard(ca, cb):
    union = ca | cb
    if not union:
        return 1.0
    return 1.0 - len(ca & cb) / len(union)


def objective(records, rules, lam):
    rules = list(rules)
    q = sum(quality(records, r, rules[:i] + rules[i + 1:]) for i, r in enumerate(rules))
    covs = [coverage(records, *r) for r in rules]
    d = sum(jaccard(covs[i], covs[j]) for i in range(len(rules)) for j in range(i + 1, len(rules)))
    return q + lam * d


def brute_force_best(records, pool, budget, lam):
    best = 0.0
    for k in range(min(budget, len(pool)) + 1):
        for combo in itertools.combinations(pool, k):
            best = max(best, objective(records, list(combo), lam))
    return best


# --------------------------------------------------------------------------
# Tail and head distributions
# --------------------------------------------------------------------------

def record_weight(records, i, rules):
    """Sum over all tails T of the record's labels of |T minus covered labels|."""
    covered = {k for (j, k) in union_coverage(records, rules) if j == i}
    L = records[i][1]
    return sum(len(t - covered) for t in subsets(L, 1))


def tail_distribution(records, rules=(), space=None):
    covered = union_coverage(records, rules)
    if space is None:
        tails = {t for _, L in records for t in subsets(L, 1)}
    else:
        tails = {frozenset(s) for s in space}
    area = {t: len(tail_coverage(records, t) - covered) for t in tails}
    area = {t: a for t, a in area.items() if a}
    total = sum(area.values())
    return {t: a / total for t, a in area.items()} if total else {}


def bipartition(records, tail):
    tail = set(tail)
    pos = [i for i, (_, L) in enumerate(records) if tail <= L]
    neg = [i for i, (_, L) in enumerate(records) if not tail <= L]
    return pos, neg


def pair_distribution(records, tail, members=None, min_size=2):
    """P(D+, D-) proportional to the number of heads inside F+ and not inside F-.

    ``members`` restricts heads to a family of feature sets; otherwise heads are
    all feature subsets of size >= ``min_size``.
    """
    pos, neg = bipartition(records, tail)
    w = {}
    for p in pos:
        Fp = records[p][0]
        heads = [frozenset(m) for m in members if set(m) <= Fp] if members is not None else subsets(Fp, min_size)
        heads = list(heads)
        for n in neg:
            Fn = records[n][0]
            c = sum(1 for h in heads if not h <= Fn)
            if c:
                w[(p, n)] = c
    total = sum(w.values())
    return {k: v / total for k, v in w.items()} if total else {}


def head_distribution(records, tail, n_features, members=None, min_size=2):
    """P(H) proportional to |D+[H]| * |D- without D[H]|."""
    pos, neg = bipartition(records, tail)
    cands = [frozenset(m) for m in members] if members is not None else subsets(range(n_features), min_size)
    q = {}
    for h in cands:
        v = sum(1 for p in pos if h <= records[p][0]) * sum(1 for n in neg if not h <= records[n][0])
        if v:
            q[h] = v
    total = sum(q.values())
    return {h: v / total for h, v in q.items()} if total else {}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical(draws):
    n = len(draws)
    out = {}
    for d in draws:
        out[d] = out.get(d, 0) + 1
    return {k: v / n for k, v in out.items()}


# --------------------------------------------------------------------------
# Label space
# --------------------------------------------------------------------------

def cooccurrence(item_sets, u, v):
    """p(u, v) = |D[{u, v}]| / |D[{u}]|."""
    du = [s for s in item_sets if u in s]
    if not du:
        return 0.0
    return sum(1 for s in du if v in s) / len(du)


def probable_cliques(item_sets, n_items, theta, max_size):
    """Every item set with all directed pair weights positive whose product reaches theta."""
    present = [u for u in range(n_items) if any(u in s for s in item_sets)]
    out = {}
    for k in range(1, max_size + 1):
        for c in itertools.combinations(present, k):
            prob = 1.0
            for u, v in itertools.permutations(c, 2):
                prob *= cooccurrence(item_sets, u, v)
            if k == 1 or prob >= theta and prob > 0:
                out[frozenset(c)] = prob
    return out


def containment(item_sets, family):
    return [{frozenset(m) for m in family if set(m) <= s} for s in item_sets]


# --------------------------------------------------------------------------
# Greedy head
# --------------------------------------------------------------------------

def phi(records, pos, neg, head, gamma):
    h = set(head)
    return sum(1 for p in pos if h <= records[p][0]) - gamma * sum(1 for n in neg if h <= records[n][0])


# --------------------------------------------------------------------------
# Metrics
# --------------------------------------------------------------------------

def micro_f1(gold, pred):
    g = {(i, k) for i, s in enumerate(gold) for k in s}
    p = {(i, k) for i, s in enumerate(pred) for k in s}
    tp, fp, fn = len(g & p), len(p - g), len(g - p)
    return 1.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)


def hamming_score(gold, pred, n_labels):
    wrong = sum(len(set(g) ^ set(p)) for g, p in zip(gold, pred))
    return 1.0 - wrong / (len(gold) * n_labels)
