import numpy as np
import pytest

from relsignal.simplex import ClassifierTable, FinitePosteriorTriple, SimplexVector


def random_simplex(gen, k, min_gap=0.0):
    """A random probability vector; optionally with all sorted entries at
    least min_gap apart (which also forces a unique argmax)."""
    if min_gap == 0.0:
        return SimplexVector(gen.dirichlet(np.ones(k)))
    for _ in range(200):
        batch = gen.dirichlet(np.ones(k), size=512)
        gaps = np.diff(np.sort(batch, axis=1), axis=1)
        hits = np.flatnonzero(np.all(gaps >= min_gap, axis=1))
        if hits.size:
            return SimplexVector(batch[hits[0]])
    raise AssertionError(f"could not draw a min-gap={min_gap} simplex for k={k}")


def random_separated_batch(gen, k, count, min_gap=0.01):
    """``count`` random simplex rows with sorted-entry gaps >= min_gap."""
    rows = []
    for _ in range(10000):
        batch = gen.dirichlet(np.ones(k), size=max(512, count))
        gaps = np.diff(np.sort(batch, axis=1), axis=1)
        ok = batch[np.all(gaps >= min_gap, axis=1)]
        rows.append(ok)
        if sum(r.shape[0] for r in rows) >= count:
            return np.concatenate(rows)[:count]
    raise AssertionError(f"could not draw {count} min-gap={min_gap} rows for k={k}")


def random_triple(gen, max_points=6, max_k=5, min_points=2):
    m = int(gen.integers(min_points, max_points + 1))
    k = int(gen.integers(2, max_k + 1))
    return FinitePosteriorTriple(
        support=tuple(range(m)),
        px=gen.dirichlet(np.ones(m)),
        eta=[gen.dirichlet(np.ones(k)) for _ in range(m)],
        eta_tilde=[gen.dirichlet(np.ones(k)) for _ in range(m)],
    )


def random_classifier(gen, t):
    return ClassifierTable(gen.integers(0, t.k, size=t.size), t.k)


@pytest.fixture
def gen():
    return np.random.Generator(np.random.Philox(20240601))
