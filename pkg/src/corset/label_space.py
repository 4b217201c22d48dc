"""Interpretable sample spaces built from probable cliques of a co-occurrence graph.

The graph has a directed edge (u, v) whenever items u and v co-occur, weighted by
p(u, v) = |D[u] & D[v]| / |D[u]|. A set S is kept when every pair inside S is
connected in both directions and the product of all its directed edge weights
reaches ``theta``. That product only shrinks as S grows, so depth-first
enumeration can prune on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .data import Dataset, iter_bits

log = logging.getLogger(__name__)


class SpaceBudgetExceeded(RuntimeError):
    """Clique enumeration visited more DFS nodes than allowed."""


@dataclass
class ItemGraph:
    """Directed co-occurrence graph over label (or feature) ids."""

    n_nodes: int
    support: list  # per-node record bitmask
    weights: dict = field(default_factory=dict)  # u -> {v: p(u, v)}

    def p(self, u: int, v: int) -> float:
        return self.weights.get(u, {}).get(v, 0.0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.weights.get(u, {})


def _build_graph(masks: list) -> ItemGraph:
    g = ItemGraph(len(masks), list(masks))
    for u, mu in enumerate(masks):
        nu = mu.bit_count()
        if not nu:
            continue
        row = {}
        for v, mv in enumerate(masks):
            if v == u:
                continue
            inter = (mu & mv).bit_count()
            if inter:
                row[v] = inter / nu
        g.weights[u] = row
    return g


def build_label_graph(dataset: Dataset) -> ItemGraph:
    return _build_graph(dataset.label_masks)


def build_feature_graph(dataset: Dataset) -> ItemGraph:
    return _build_graph(dataset.feature_masks)


@dataclass
class InterpretableSpace:
    """Family of item sets (each a sorted tuple) with their clique probabilities."""

    itemsets: list
    probabilities: list
    theta: float
    max_size: int

    def __len__(self):
        return len(self.itemsets)

    def as_sets(self) -> set:
        return {frozenset(s) for s in self.itemsets}

    def dump(self) -> str:
        return "".join(
            " ".join(map(str, s)) + f"\t{p:.10g}\n" for s, p in zip(self.itemsets, self.probabilities)
        )

    def save(self, path) -> None:
        Path(path).write_text(self.dump(), encoding="utf-8")

    @classmethod
    def parse(cls, text: str, theta: float = 0.0, max_size: int = 0) -> "InterpretableSpace":
        sets, probs = [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            ids, prob = line.split("\t")
            sets.append(tuple(sorted(int(x) for x in ids.split())))
            probs.append(float(prob))
        return cls(sets, probs, theta, max_size or max((len(s) for s in sets), default=0))


def enumerate_probable_cliques(graph: ItemGraph, theta: float, max_size: int = 5,
                               node_budget: int | None = None) -> InterpretableSpace:
    """All probable cliques of size <= ``max_size`` with probability >= ``theta``.

    Every node with non-empty support is admitted as a singleton.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    sets, probs = [], []
    visited = 0

    # candidates after u: larger ids connected both ways
    nbrs = {}
    for u, row in graph.weights.items():
        nbrs[u] = [v for v in sorted(row) if v > u and graph.has_edge(v, u)]

    def extend(clique, prob, cands):
        nonlocal visited
        for idx, v in enumerate(cands):
            visited += 1
            if node_budget is not None and visited > node_budget:
                raise SpaceBudgetExceeded(
                    f"clique enumeration exceeded {node_budget} nodes; raise theta or lower max_size"
                )
            p = prob
            for u in clique:
                p *= graph.p(u, v) * graph.p(v, u)
                if p < theta:
                    break
            if p < theta:
                continue
            new = clique + (v,)
            sets.append(new)
            probs.append(p)
            if len(new) < max_size:
                nxt = [w for w in cands[idx + 1:] if graph.has_edge(v, w) and graph.has_edge(w, v)]
                if nxt:
                    extend(new, p, nxt)

    for u in range(graph.n_nodes):
        if not graph.support[u]:
            continue
        sets.append((u,))
        probs.append(1.0)
        if max_size > 1:
            extend((u,), 1.0, nbrs.get(u, []))
    log.debug("enumerated %d item sets (%d DFS nodes)", len(sets), visited)
    return InterpretableSpace(sets, probs, theta, max_size)


def build_label_space(dataset: Dataset, theta: float, max_size: int = 5,
                      node_budget: int | None = None) -> InterpretableSpace:
    return enumerate_probable_cliques(build_label_graph(dataset), theta, max_size, node_budget)


def build_feature_space(dataset: Dataset, theta: float, max_size: int = 5,
                        node_budget: int | None = 2_000_000) -> InterpretableSpace:
    return enumerate_probable_cliques(build_feature_graph(dataset), theta, max_size, node_budget)


# --------------------------------------------------------------------------
# Set containment (PRETTI-style)
# --------------------------------------------------------------------------

@dataclass
class ContainmentIndex:
    """For every record, which space members are contained in its item set.

    ``members[i]`` lists member ids; ``member_bits[i]`` is the same as a bitmask.
    ``records_of[m]`` is the record bitmask of member ``m``.
    """

    space: InterpretableSpace
    members: list
    member_bits: list
    records_of: list


class _TrieNode:
    __slots__ = ("children", "ends")

    def __init__(self):
        self.children = {}
        self.ends = []


def build_containment_index(item_masks: list, n_records: int, space: InterpretableSpace) -> ContainmentIndex:
    """Containment lists via an inverted index and a prefix tree over the members.

    Members are ordered by ascending item frequency so that common prefixes share
    their intersection work.
    """
    freq = [m.bit_count() for m in item_masks]
    root = _TrieNode()
    for mid, items in enumerate(space.itemsets):
        node = root
        for it in sorted(items, key=lambda x: (freq[x], x)):
            node = node.children.setdefault(it, _TrieNode())
        node.ends.append(mid)

    records_of = [0] * len(space)
    stack = [(root, (1 << n_records) - 1)]
    while stack:
        node, recs = stack.pop()
        for mid in node.ends:
            records_of[mid] = recs
        for it, child in node.children.items():
            sub = recs & item_masks[it]
            if sub:
                stack.append((child, sub))

    members = [[] for _ in range(n_records)]
    for mid, recs in enumerate(records_of):
        for i in iter_bits(recs):
            members[i].append(mid)
    member_bits = [sum(1 << m for m in ms) for ms in members]
    return ContainmentIndex(space, members, member_bits, records_of)


def label_containment(dataset: Dataset, space: InterpretableSpace) -> ContainmentIndex:
    return build_containment_index(dataset.label_masks, len(dataset), space)


def feature_containment(dataset: Dataset, space: InterpretableSpace) -> ContainmentIndex:
    return build_containment_index(dataset.feature_masks, len(dataset), space)
