"""Binary multi-label datasets: loading, binarization, indexing, splitting.

Record ids are stable 0-based positions. Support sets are handled internally as
Python ``int`` bitmasks over record ids (bit ``i`` set iff record ``i`` is in the
set), which makes intersections and counts cheap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DataFormatError(ValueError):
    """Raised on malformed sparse/dense input files."""


def iter_bits(mask: int):
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class DataRecord:
    features: frozenset
    labels: frozenset


@dataclass
class Dataset:
    """Immutable list of records with feature and label inverted indexes."""

    records: list
    n_features: int
    n_labels: int
    feature_masks: list = field(init=False, repr=False)
    label_masks: list = field(init=False, repr=False)
    record_feature_bits: list = field(init=False, repr=False)
    record_label_bits: list = field(init=False, repr=False)

    def __post_init__(self):
        fm = [0] * self.n_features
        lm = [0] * self.n_labels
        rf, rl = [], []
        for i, rec in enumerate(self.records):
            bit = 1 << i
            for f in rec.features:
                if not 0 <= f < self.n_features:
                    raise ValueError(f"record {i}: feature id {f} out of range [0, {self.n_features})")
                fm[f] |= bit
            for k in rec.labels:
                if not 0 <= k < self.n_labels:
                    raise ValueError(f"record {i}: label id {k} out of range [0, {self.n_labels})")
                lm[k] |= bit
            rf.append(mask_of(rec.features))
            rl.append(mask_of(rec.labels))
        self.feature_masks = fm
        self.label_masks = lm
        self.record_feature_bits = rf
        self.record_label_bits = rl
        self.all_mask = (1 << len(self.records)) - 1

    @classmethod
    def from_sets(cls, features: Sequence[Iterable[int]], labels: Sequence[Iterable[int]],
                  n_features: int | None = None, n_labels: int | None = None) -> "Dataset":
        if len(features) != len(labels):
            raise ValueError("features and labels must have the same number of records")
        recs = [DataRecord(frozenset(f), frozenset(l)) for f, l in zip(features, labels)]
        if n_features is None:
            n_features = 1 + max((max(r.features) for r in recs if r.features), default=-1)
        if n_labels is None:
            n_labels = 1 + max((max(r.labels) for r in recs if r.labels), default=-1)
        return cls(recs, n_features, n_labels)

    @classmethod
    def from_matrices(cls, X, Y) -> "Dataset":
        X = np.asarray(X, dtype=bool)
        Y = np.asarray(Y, dtype=bool)
        feats = [np.flatnonzero(row).tolist() for row in X]
        labs = [np.flatnonzero(row).tolist() for row in Y]
        return cls.from_sets(feats, labs, X.shape[1], Y.shape[1])

    def __len__(self):
        return len(self.records)

    @property
    def feature_index(self) -> list:
        return [list(iter_bits(m)) for m in self.feature_masks]

    @property
    def label_index(self) -> list:
        return [list(iter_bits(m)) for m in self.label_masks]

    @property
    def total_feature_occurrences(self) -> int:
        return sum(len(r.features) for r in self.records)

    @property
    def total_label_occurrences(self) -> int:
        return sum(len(r.labels) for r in self.records)

    def head_mask(self, head: Iterable[int]) -> int:
        m = self.all_mask
        for f in head:
            m &= self.feature_masks[f]
        return m

    def tail_mask(self, tail: Iterable[int]) -> int:
        m = self.all_mask
        for k in tail:
            m &= self.label_masks[k]
        return m

    def subset(self, ids: Sequence[int]) -> "Dataset":
        return Dataset([self.records[i] for i in ids], self.n_features, self.n_labels)

    def to_matrices(self):
        X = np.zeros((len(self), self.n_features), dtype=bool)
        Y = np.zeros((len(self), self.n_labels), dtype=bool)
        for i, r in enumerate(self.records):
            X[i, list(r.features)] = True
            Y[i, list(r.labels)] = True
        return X, Y

    def stats(self) -> dict:
        n = len(self)
        return {
            "instances": n,
            "attributes": self.n_features,
            "labels": self.n_labels,
            "cardinality": self.total_label_occurrences / n if n else 0.0,
            "distinct": len({r.labels for r in self.records}),
            "feature_occurrences": self.total_feature_occurrences,
            "label_occurrences": self.total_label_occurrences,
        }


def support_set(dataset: Dataset, features: Iterable[int] = (), labels: Iterable[int] = ()) -> list:
    """Sorted record ids whose features contain ``features`` and labels contain ``labels``.

    Pass only ``features`` for D[H], only ``labels`` for D[T], both for D[R].
    An empty query matches every record.
    """
    return list(iter_bits(dataset.head_mask(features) & dataset.tail_mask(labels)))


# --------------------------------------------------------------------------
# Sparse text format
# --------------------------------------------------------------------------

def _parse_ids(text: str, lineno: int) -> list:
    try:
        return [int(tok) for tok in text.split()]
    except ValueError as exc:
        raise DataFormatError(f"line {lineno}: {exc}") from None


def parse_sparse(text: str) -> Dataset:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataFormatError("line 1: missing header")
    header = _parse_ids(lines[0], 1)
    if len(header) != 3 or min(header) < 0:
        raise DataFormatError("line 1: header must be '<n_records> <n_features> <n_labels>'")
    n, nf, nl = header
    body = lines[1:]
    if len(body) != n:
        raise DataFormatError(f"line {len(lines) + 1}: expected {n} records, found {len(body)}")
    feats, labs = [], []
    for lineno, line in enumerate(body, start=2):
        if line.count("|") != 1:
            raise DataFormatError(f"line {lineno}: expected exactly one '|' separator")
        left, right = line.split("|")
        f = _parse_ids(left, lineno)
        l = _parse_ids(right, lineno)
        if any(not 0 <= x < nf for x in f):
            raise DataFormatError(f"line {lineno}: feature id out of range [0, {nf})")
        if any(not 0 <= x < nl for x in l):
            raise DataFormatError(f"line {lineno}: label id out of range [0, {nl})")
        feats.append(f)
        labs.append(l)
    return Dataset.from_sets(feats, labs, nf, nl)


def load_sparse(path) -> Dataset:
    return parse_sparse(Path(path).read_text(encoding="utf-8"))


def format_sparse(dataset: Dataset) -> str:
    out = [f"{len(dataset)} {dataset.n_features} {dataset.n_labels}"]
    for r in dataset.records:
        f = " ".join(map(str, sorted(r.features)))
        l = " ".join(map(str, sorted(r.labels)))
        out.append(f"{f} | {l}".strip())
    return "\n".join(out) + "\n"


def save_sparse(dataset: Dataset, path) -> None:
    Path(path).write_text(format_sparse(dataset), encoding="utf-8")


def parse_label_lines(text: str, n_records: int | None = None) -> list:
    """Label sets in the sparse label syntax, one record per line (blank = empty set)."""
    lines = text.splitlines()
    if n_records is not None:
        while len(lines) > n_records and not lines[-1].strip():
            lines.pop()
    out = []
    for lineno, line in enumerate(lines, start=1):
        out.append(frozenset(_parse_ids(line.replace("|", " "), lineno)))
    if n_records is not None and len(out) != n_records:
        raise DataFormatError(f"expected {n_records} label lines, found {len(out)}")
    return out


# --------------------------------------------------------------------------
# Dense numeric input
# --------------------------------------------------------------------------

def binarize_numeric(matrix, percentile: float = 90.0, train_rows=None) -> np.ndarray:
    """1 where a value reaches its column's ``percentile``, else 0.

    Thresholds come from ``train_rows`` only (all rows when None) and are always
    observed values (numpy's ``higher`` method). Comparison is ``>=``, so a
    constant column maps to all ones.
    """
    if not 0 <= percentile <= 100:
        raise ValueError("percentile must lie in [0, 100]")
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    ref = M if train_rows is None else M[np.asarray(train_rows)]
    if len(ref) == 0:
        return np.zeros(M.shape, dtype=np.uint8)
    thr = np.percentile(ref, percentile, axis=0, method="higher")
    return (M >= thr).astype(np.uint8)


def load_dense(csv_path, labels_path, percentile: float = 90.0, train_rows=None) -> Dataset:
    try:
        M = np.loadtxt(csv_path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataFormatError(f"{csv_path}: {exc}") from None
    labels = parse_label_lines(Path(labels_path).read_text(encoding="utf-8"), len(M))
    X = binarize_numeric(M, percentile, train_rows)
    n_labels = 1 + max((max(l) for l in labels if l), default=-1)
    return Dataset.from_sets([np.flatnonzero(r).tolist() for r in X], labels, M.shape[1], n_labels)


# --------------------------------------------------------------------------
# Splitting
# --------------------------------------------------------------------------

def split_ids(n: int, fractions: Sequence[float], seed: int) -> list:
    if any(f <= 0 for f in fractions):
        raise ValueError("split fractions must be positive")
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise ValueError("split fractions must sum to 1")
    perm = list(range(n))
    random.Random(seed).shuffle(perm)
    sizes = [int(round(f * n)) for f in fractions[:-1]]
    sizes.append(n - sum(sizes))
    if any(s <= 0 for s in sizes):
        raise ValueError(f"split {list(fractions)} of {n} records leaves an empty part")
    parts, start = [], 0
    for s in sizes:
        parts.append(sorted(perm[start:start + s]))
        start += s
    return parts


def split(dataset: Dataset, fractions=(0.6, 0.2, 0.2), seed: int = 0):
    """Partition into (train, validation, test) or any number of parts."""
    return tuple(dataset.subset(ids) for ids in split_ids(len(dataset), fractions, seed))
