"""Head sampling for a fixed tail.

Heads are drawn proportionally to discriminativity, ``|D+[H]| * |D- minus D-[H]|``,
through a pair of records (D+, D-) drawn by coupling from the past with an
independence proposal, or built greedily from such a pair.

Full-space pair weight: ``2**|F+| - 2**|F+ & F-| - |F+ - F-|``, the number of
heads with at least two features contained in F+ but not in F-. The proposal is
``w1(D+) = 2**|F+| - |F+| - 1`` for the positive and uniform for the negative.
"""

from __future__ import annotations

import bisect
import functools
import itertools
import math
import random
from dataclasses import dataclass

from .data import Dataset, iter_bits

MAX_HORIZON = 1 << 20
FIRST_HORIZON = 4


class Unlearnable(RuntimeError):
    """No pair of records carries positive weight for this tail."""


class CFTPTimeout(RuntimeError):
    """Coupling did not coalesce within the horizon cap."""


@dataclass(frozen=True)
class Bipartition:
    positives: int  # record bitmask of D+_T
    negatives: int  # record bitmask of D-_T

    @classmethod
    def of(cls, dataset: Dataset, tail) -> "Bipartition":
        pos = dataset.tail_mask(tail)
        return cls(pos, dataset.all_mask & ~pos)

    @property
    def n_pos(self) -> int:
        return self.positives.bit_count()

    @property
    def n_neg(self) -> int:
        return self.negatives.bit_count()


def discriminativity(dataset: Dataset, head, tail) -> int:
    bip = Bipartition.of(dataset, tail)
    hm = dataset.head_mask(head)
    return (hm & bip.positives).bit_count() * (bip.negatives & ~hm).bit_count()


def pair_weight(fp: int, fn: int) -> int:
    a = fp.bit_count()
    c = (fp & fn).bit_count()
    return (1 << a) - (1 << c) - (a - c)


def positive_weight(fp: int) -> int:
    a = fp.bit_count()
    return (1 << a) - a - 1


class _Categorical:
    """Draws indices proportionally to non-negative int or float weights."""

    def __init__(self, weights):
        self.ids = [i for i, w in enumerate(weights) if w > 0]
        self.cum = list(itertools.accumulate(weights[i] for i in self.ids))
        self.exact = all(isinstance(weights[i], int) for i in self.ids)

    @property
    def total(self):
        return self.cum[-1] if self.cum else 0

    def draw(self, rng: random.Random) -> int:
        if self.exact:
            r = rng.randrange(self.total)
            return self.ids[bisect.bisect_right(self.cum, r)]
        r = rng.random() * self.total
        return self.ids[min(bisect.bisect_right(self.cum, r), len(self.ids) - 1)]


class PairModel:
    """Target and proposal weights over (positive, negative) record pairs.

    ``bits`` maps a record id to whatever ``target`` consumes (feature bitmask in
    the full space, member bitmask in a reduced space). The proposal factorizes as
    ``pos_w[p] * neg_w[n]``; ``neg_w=None`` means uniform.
    """

    def __init__(self, pos_ids, neg_ids, bits, target, pos_w, neg_w=None):
        self.pos_ids = pos_ids
        self.neg_ids = neg_ids
        self.bits = bits
        self.target = target
        self.pos_w = pos_w
        self.neg_w = neg_w
        self._pos = _Categorical(pos_w)
        self._neg = None if neg_w is None else _Categorical(neg_w)

    @classmethod
    def full_space(cls, dataset: Dataset, bip: Bipartition) -> "PairModel":
        pos = list(iter_bits(bip.positives))
        neg = list(iter_bits(bip.negatives))
        bits = dataset.record_feature_bits
        return cls(pos, neg, bits, pair_weight, [positive_weight(bits[i]) for i in pos])

    @classmethod
    def reduced_space(cls, member_bits: list, bip: Bipartition) -> "PairModel":
        pos = list(iter_bits(bip.positives))
        neg = list(iter_bits(bip.negatives))
        return cls(pos, neg, member_bits, lambda p, n: (p & ~n).bit_count(),
                   [member_bits[i].bit_count() for i in pos])

    @classmethod
    def boley(cls, dataset: Dataset, bip: Bipartition) -> "PairModel":
        """The general-purpose proposal sqrt(w1(D+) * w2(D-)); kept for convergence comparisons.

        ``w2 = 2**|F| - 2**|F-| - (|F| - |F-|)`` counts heads of size >= 2 outside
        F-, so both factors bound the target and so does their geometric mean.
        """
        pos = list(iter_bits(bip.positives))
        neg = list(iter_bits(bip.negatives))
        bits = dataset.record_feature_bits
        nf = dataset.n_features

        def w2(fn):
            b = fn.bit_count()
            return (1 << nf) - (1 << b) - (nf - b)

        return cls(pos, neg, bits, pair_weight,
                   [math.sqrt(positive_weight(bits[i])) for i in pos],
                   [math.sqrt(max(w2(bits[i]), 0)) for i in neg])

    @property
    def learnable(self) -> bool:
        return bool(self.neg_ids) and self._pos.total > 0 and (self._neg is None or self._neg.total > 0)

    def draw_proposal(self, rng: random.Random) -> tuple:
        p = self._pos.draw(rng)
        n = rng.randrange(len(self.neg_ids)) if self._neg is None else self._neg.draw(rng)
        return p, n

    def w(self, pair) -> int:
        return self.target(self.bits[self.pos_ids[pair[0]]], self.bits[self.neg_ids[pair[1]]])

    def wbar(self, pair):
        pw = self.pos_w[pair[0]]
        return pw if self.neg_w is None else pw * self.neg_w[pair[1]]

    def records(self, pair) -> tuple:
        return self.pos_ids[pair[0]], self.neg_ids[pair[1]]


def cftp(model: PairModel, rng: random.Random, max_horizon: int = MAX_HORIZON) -> tuple:
    """Exact draw of a pair proportional to the target weight.

    Returns ``((pos_record, neg_record), horizon)``. Randomness for each time
    step into the past is drawn once and reused when the horizon doubles;
    the bottom state (ratio wbar/w = 1) dominates every real state, so the chain
    started from it has coalesced as soon as it leaves it.
    """
    if not model.learnable:
        raise Unlearnable("no positive record with positive proposal weight")
    steps = []  # steps[t] = (u_t, C_t, w(C_t), wbar(C_t))
    horizon = FIRST_HORIZON
    while True:
        while len(steps) <= horizon:
            c = model.draw_proposal(rng)
            steps.append((rng.random(), c, model.w(c), model.wbar(c)))
        state = None
        w_s = wbar_s = None
        for t in range(horizon, -1, -1):
            u, c, wc, wbarc = steps[t]
            if state is None:
                ratio = wc / wbarc
                assert 0.0 <= ratio <= 1.0, "proposal must dominate the target"
            else:
                ratio = (wbar_s * wc) / (w_s * wbarc)
            # strict: a zero-weight proposal is never entered
            if u < ratio:
                state, w_s, wbar_s = c, wc, wbarc
        if state is not None:
            return model.records(state), horizon
        if horizon >= max_horizon:
            raise CFTPTimeout(f"no coalescence within horizon {max_horizon}")
        horizon *= 2


def cftp_sample_pair(dataset: Dataset, tail, rng: random.Random, max_horizon: int = MAX_HORIZON) -> tuple:
    model = PairModel.full_space(dataset, Bipartition.of(dataset, tail))
    return cftp(model, rng, max_horizon)[0]


def _random_subset(items: list, rng: random.Random) -> list:
    if not items:
        return []
    bits = rng.getrandbits(len(items))
    return [x for j, x in enumerate(items) if bits >> j & 1]


def sample_head_from_pair(dataset: Dataset, pair, rng: random.Random, min_size: int = 2) -> frozenset:
    """Uniform head among sets H with F+ >= H, H not inside F-, |H| >= ``min_size``.

    H is the union of a uniform non-empty subset of F+ - F- and a uniform subset
    of F+ & F-; draws below ``min_size`` are rejected.
    """
    fp = dataset.records[pair[0]].features
    fn = dataset.records[pair[1]].features
    diff = sorted(fp - fn)
    inter = sorted(fp & fn)
    if not diff:
        raise ValueError("positive record's features are contained in the negative's")
    if len(diff) + len(inter) < min_size:
        raise ValueError(f"no head of size >= {min_size} for this pair")
    while True:
        h1 = _random_subset(diff, rng)
        if not h1:
            continue
        head = h1 + _random_subset(inter, rng)
        if len(head) >= min_size:
            return frozenset(head)


def uniform_member(member_bits: int, rng: random.Random) -> int:
    n = member_bits.bit_count()
    k = rng.randrange(n)
    for j, m in enumerate(iter_bits(member_bits)):
        if j == k:
            return m
    raise AssertionError("unreachable")


def phi(dataset: Dataset, bip: Bipartition, head_mask: int, gamma: float) -> float:
    return (head_mask & bip.positives).bit_count() - gamma * (head_mask & bip.negatives).bit_count()


def greedy_head(dataset: Dataset, bip: Bipartition, pair, gamma: float = 0.5, epsilon: float = 0.05) -> frozenset:
    """Greedy feature selection from F+ - F- maximizing the penalized support phi.

    Stops once the head's support drops below ``epsilon * |D+|`` and returns the
    prefix with the highest recorded phi.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    pool = sorted(dataset.records[pair[0]].features - dataset.records[pair[1]].features)
    if not pool:
        raise ValueError("empty candidate pool for greedy head")
    fm = dataset.feature_masks
    chosen, scores = [], []
    cur = dataset.all_mask
    while pool:
        best = max(pool, key=lambda h: (phi(dataset, bip, cur & fm[h], gamma), -h))
        cur &= fm[best]
        chosen.append(best)
        scores.append(phi(dataset, bip, cur, gamma))
        pool.remove(best)
        if cur.bit_count() < epsilon * bip.n_pos:
            break
    i_best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return frozenset(chosen[:i_best + 1])


# --------------------------------------------------------------------------
# Head sampler used by candidate generation
# --------------------------------------------------------------------------

class HeadSampler:
    """Produces a head for a tail: ``surs`` samples under a reduced feature space,
    ``gh`` runs the greedy heuristic on a coupled pair."""

    def __init__(self, dataset: Dataset, variant: str = "surs", feature_index=None,
                 gamma: float = 0.5, epsilon: float = 0.05, max_horizon: int = MAX_HORIZON,
                 cache_size: int = 4096):
        if variant not in ("surs", "gh"):
            raise ValueError(f"unknown head sampler variant {variant!r}")
        if variant == "surs" and feature_index is None:
            raise ValueError("surs needs a feature containment index")
        self.dataset = dataset
        self.variant = variant
        self.index = feature_index
        self.gamma = gamma
        self.epsilon = epsilon
        self.max_horizon = max_horizon
        self._model = functools.lru_cache(maxsize=cache_size)(self._build_model)

    def _build_model(self, tail: frozenset):
        bip = Bipartition.of(self.dataset, tail)
        if self.variant == "surs":
            return bip, PairModel.reduced_space(self.index.member_bits, bip)
        return bip, PairModel.full_space(self.dataset, bip)

    def _support_fallback(self, bip: Bipartition, rng: random.Random):
        """Every record is positive: draw H proportionally to its support."""
        pos = list(iter_bits(bip.positives))
        if self.variant == "surs":
            cat = _Categorical([self.index.member_bits[i].bit_count() for i in pos])
            if not cat.total:
                return None
            i = pos[cat.draw(rng)]
            return frozenset(self.index.space.itemsets[uniform_member(self.index.member_bits[i], rng)])
        feats = self.dataset.records
        cat = _Categorical([(1 << len(feats[i].features)) - 1 for i in pos])
        if not cat.total:
            return None
        items = sorted(feats[pos[cat.draw(rng)]].features)
        while True:
            h = _random_subset(items, rng)
            if h:
                return frozenset(h)

    def _fallback_pair(self, model: PairModel, rng: random.Random, tries: int = 1000):
        fb = self.dataset.record_feature_bits
        for _ in range(tries):
            p, n = model.records(model.draw_proposal(rng))
            if fb[p] & ~fb[n]:
                return p, n
        return None

    def sample(self, tail, rng: random.Random):
        """A head for ``tail``, or None when the tail admits no learnable head."""
        bip, model = self._model(frozenset(tail))
        if not bip.positives:
            return None
        if not bip.negatives:
            return self._support_fallback(bip, rng)
        try:
            pair, _ = cftp(model, rng, self.max_horizon)
        except Unlearnable:
            return None
        except CFTPTimeout:
            pair = self._fallback_pair(model, rng)
            if pair is None:
                return None
            return greedy_head(self.dataset, bip, pair, self.gamma, self.epsilon)
        if self.variant == "gh":
            return greedy_head(self.dataset, bip, pair, self.gamma, self.epsilon)
        mb = self.index.member_bits
        m = uniform_member(mb[pair[0]] & ~mb[pair[1]], rng)
        return frozenset(self.index.space.itemsets[m])


# --------------------------------------------------------------------------
# Exact oracles
# --------------------------------------------------------------------------

def exact_pair_distribution(dataset: Dataset, tail) -> dict:
    """Pair probabilities w(D+, D-) / sum w by enumeration over all pairs."""
    recs = dataset.records
    tail = frozenset(tail)
    pos = [i for i, r in enumerate(recs) if tail <= r.labels]
    neg = [i for i, r in enumerate(recs) if not tail <= r.labels]
    w = {}
    for p in pos:
        for n in neg:
            a = len(recs[p].features)
            c = len(recs[p].features & recs[n].features)
            val = 2 ** a - 2 ** c - (a - c)
            if val:
                w[(p, n)] = val
    total = sum(w.values())
    return {k: v / total for k, v in w.items()} if total else {}


def exact_head_distribution(dataset: Dataset, tail, min_size: int = 2, max_features: int = 16) -> dict:
    """Discriminativity-proportional head distribution by scanning every feature subset."""
    nf = dataset.n_features
    if nf > max_features:
        raise ValueError(f"{nf} features exceed the enumeration limit {max_features}")
    tail = frozenset(tail)
    recs = dataset.records
    pos = [r.features for r in recs if tail <= r.labels]
    neg = [r.features for r in recs if not tail <= r.labels]
    q = {}
    for size in range(max(min_size, 1), nf + 1):
        for h in itertools.combinations(range(nf), size):
            hs = frozenset(h)
            val = sum(1 for f in pos if hs <= f) * sum(1 for f in neg if not hs <= f)
            if val:
                q[hs] = val
    total = sum(q.values())
    return {h: v / total for h, v in q.items()} if total else {}
