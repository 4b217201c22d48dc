import random

import pytest
from hypothesis import strategies as st

from corset.data import Dataset


def random_records(rng: random.Random, n, nf, nl, pf=0.5, pl=0.5):
    return [
        (frozenset(f for f in range(nf) if rng.random() < pf),
         frozenset(k for k in range(nl) if rng.random() < pl))
        for _ in range(n)
    ]


def to_dataset(records, nf, nl) -> Dataset:
    return Dataset.from_sets([r[0] for r in records], [r[1] for r in records], nf, nl)


def records_of(ds: Dataset):
    return [(r.features, r.labels) for r in ds.records]


@st.composite
def small_datasets(draw, max_records=8, max_features=6, max_labels=5):
    nf = draw(st.integers(1, max_features))
    nl = draw(st.integers(1, max_labels))
    n = draw(st.integers(1, max_records))
    feats = draw(st.lists(st.frozensets(st.integers(0, nf - 1)), min_size=n, max_size=n))
    labs = draw(st.lists(st.frozensets(st.integers(0, nl - 1)), min_size=n, max_size=n))
    recs = list(zip(feats, labs))
    return to_dataset(recs, nf, nl), recs


@pytest.fixture
def rng():
    return random.Random(12345)


# --------------------------------------------------------------------------
# Acceptance report: one line per criterion, printed after the run
# --------------------------------------------------------------------------

ACCEPTANCE = []


def report(name: str, ok, detail: str) -> None:
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    line = f"[{status}] {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
