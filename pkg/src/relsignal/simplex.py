"""Exact probability algebra for label-noise problems on finite supports.

The objects here are the raw material of the rest of the package: class
probability vectors, row-stochastic transition matrices, and finite-support
problems given as a triple (marginal weights, clean posterior, noisy
posterior).  Everything is an immutable value after construction and every
operation is a pure function, so instances can be shared freely across
worker processes.

Support points are opaque identifiers.  No geometry is attached: the theory
only ever consumes the marginal weight of each point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

__all__ = [
    "ValidationError",
    "SimplexVector",
    "TransitionMatrix",
    "FinitePosteriorTriple",
    "ClassifierTable",
    "argmax_set",
    "compose_noisy_posterior",
    "risk_of",
    "bayes_risk",
    "excess_risk",
]

#: Maximum drift of an input mass vector from total 1 before it is rejected.
SUM_TOL = 1e-9

#: Drift small enough to leave the entries untouched.  Anything beyond this
#: (but within SUM_TOL) is renormalized by dividing by the sum.  Freshly
#: normalized vectors land in this band, which keeps JSON round-trips
#: value-exact instead of silently rescaling by a factor of 1 +/- 1 ulp.
_KEEP_TOL = 1e-13

Which = Literal["clean", "noisy"]


class ValidationError(ValueError):
    """Inputs violate a probability-object contract."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SimplexVector:
    """A K-dimensional class-probability vector, K >= 2.

    Entries must be non-negative and sum to 1 within ``SUM_TOL``; vectors
    whose sum drifts (but stays within tolerance) are renormalized by
    dividing by the sum.
    """

    probs: np.ndarray

    def __init__(self, probs: Iterable[float]):
        arr = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs,
                         dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError(f"probability vector must be 1-D, got shape {arr.shape}")
        if arr.size < 2:
            raise ValidationError(f"need at least 2 classes, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("probability vector contains non-finite entries")
        if np.any(arr < 0.0):
            raise ValidationError(f"negative probability entry: min={arr.min()}")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, outside 1 +/- {SUM_TOL}")
        if abs(total - 1.0) > _KEEP_TOL:
            arr = arr / total
        object.__setattr__(self, "probs", _as_readonly(arr))

    @property
    def k(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, j: int) -> float:
        return float(self.probs[j])

    def __len__(self) -> int:
        return self.k

    def max(self) -> float:
        return float(self.probs.max())

    def argmax_set(self, tie_tol: float = 0.0) -> frozenset[int]:
        return argmax_set(self, tie_tol)

    def to_list(self) -> list[float]:
        return [float(v) for v in self.probs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplexVector):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(
            np.all(self.probs == other.probs)
        )

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


def uniform_vector(k: int) -> SimplexVector:
    """The uniform distribution over k classes."""
    return SimplexVector(np.full(k, 1.0 / k))


def one_hot(k: int, j: int) -> SimplexVector:
    """The point mass on class j among k classes."""
    if not 0 <= j < k:
        raise ValidationError(f"class index {j} out of range for k={k}")
    v = np.zeros(k)
    v[j] = 1.0
    return SimplexVector(v)


@dataclass(frozen=True)
class TransitionMatrix:
    """K x K row-stochastic matrix; entry (i, j) = P(noisy=j | clean=i)."""

    rows: np.ndarray

    def __init__(self, rows: Iterable[Iterable[float]] | np.ndarray):
        arr = np.asarray(rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"transition matrix must be square, got shape {arr.shape}")
        validated = np.stack([SimplexVector(row).probs for row in arr])
        object.__setattr__(self, "rows", _as_readonly(validated))

    @property
    def k(self) -> int:
        return int(self.rows.shape[0])

    def row(self, i: int) -> SimplexVector:
        return SimplexVector(self.rows[i])

    def to_lists(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.rows.shape == other.rows.shape and bool(np.all(self.rows == other.rows))

    def __hash__(self) -> int:
        return hash(self.rows.tobytes())


def rank_one_transition(eta_tilde: SimplexVector) -> TransitionMatrix:
    """The matrix with every row equal to ``eta_tilde``.

    Composing it with any clean posterior reproduces ``eta_tilde``, which is
    how an arbitrary posterior pair embeds into the transition-matrix view.
    """
    return TransitionMatrix(np.tile(eta_tilde.probs, (eta_tilde.k, 1)))


@dataclass(frozen=True)
class FinitePosteriorTriple:
    """A label-noise problem on a finite support.

    ``px`` carries the marginal weight of each support point; ``eta`` and
    ``eta_tilde`` the clean and noisy class posteriors, indexed identically
    by ``support``.
    """

    support: tuple
    px: SimplexVector
    eta: tuple[SimplexVector, ...]
    eta_tilde: tuple[SimplexVector, ...]
    k: int = field(default=0)

    def __init__(
        self,
        support: Sequence,
        px: SimplexVector | Iterable[float],
        eta: Sequence[SimplexVector | Iterable[float]],
        eta_tilde: Sequence[SimplexVector | Iterable[float]],
        k: int | None = None,
    ):
        support_t = tuple(support)
        if len(support_t) != len(set(support_t)):
            raise ValidationError("support points must be distinct")
        px_v = px if isinstance(px, SimplexVector) else SimplexVector(px)
        eta_t = tuple(v if isinstance(v, SimplexVector) else SimplexVector(v) for v in eta)
        etat_t = tuple(v if isinstance(v, SimplexVector) else SimplexVector(v) for v in eta_tilde)
        if not (len(support_t) == px_v.k == len(eta_t) == len(etat_t)):
            raise ValidationError(
                "support, px, eta, eta_tilde must be indexed identically: "
                f"{len(support_t)}, {px_v.k}, {len(eta_t)}, {len(etat_t)}"
            )
        ks = {v.k for v in eta_t} | {v.k for v in etat_t}
        if len(ks) != 1:
            raise ValidationError(f"posterior dimensions disagree: {sorted(ks)}")
        k_found = ks.pop()
        if k is not None and k != k_found:
            raise ValidationError(f"declared k={k} but posteriors have k={k_found}")
        object.__setattr__(self, "support", support_t)
        object.__setattr__(self, "px", px_v)
        object.__setattr__(self, "eta", eta_t)
        object.__setattr__(self, "eta_tilde", etat_t)
        object.__setattr__(self, "k", k_found)

    @property
    def size(self) -> int:
        return len(self.support)

    def posterior(self, which: Which) -> tuple[SimplexVector, ...]:
        if which == "clean":
            return self.eta
        if which == "noisy":
            return self.eta_tilde
        raise ValidationError(f"which must be 'clean' or 'noisy', got {which!r}")

    def weight(self, i: int) -> float:
        return self.px[i]

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "support": list(self.support),
            "px": self.px.to_list(),
            "eta": [v.to_list() for v in self.eta],
            "eta_tilde": [v.to_list() for v in self.eta_tilde],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FinitePosteriorTriple":
        return cls(
            support=doc["support"],
            px=doc["px"],
            eta=doc["eta"],
            eta_tilde=doc["eta_tilde"],
            k=doc.get("k"),
        )

    @classmethod
    def from_json(cls, text: str) -> "FinitePosteriorTriple":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class ClassifierTable:
    """A classifier on a finite support: one class label per support point."""

    labels: tuple[int, ...]
    k: int

    def __init__(self, labels: Iterable[int], k: int):
        labels_t = tuple(int(v) for v in labels)
        if any(not 0 <= v < k for v in labels_t):
            raise ValidationError(f"labels must lie in [0, {k}), got {labels_t}")
        object.__setattr__(self, "labels", labels_t)
        object.__setattr__(self, "k", int(k))

    def __getitem__(self, i: int) -> int:
        return self.labels[i]

    def __len__(self) -> int:
        return len(self.labels)


def argmax_set(v: SimplexVector, tie_tol: float = 0.0) -> frozenset[int]:
    """Indices whose entry is within ``tie_tol`` of the maximum entry."""
    if tie_tol < 0:
        raise ValidationError(f"tie_tol must be >= 0, got {tie_tol}")
    top = v.probs.max()
    return frozenset(int(i) for i in np.flatnonzero(v.probs >= top - tie_tol))


def compose_noisy_posterior(e: TransitionMatrix, eta: SimplexVector) -> SimplexVector:
    """The noisy posterior induced by transition matrix ``e``: transpose(E) @ eta."""
    if e.k != eta.k:
        raise ValidationError(f"dimension mismatch: matrix k={e.k}, vector k={eta.k}")
    return SimplexVector(e.rows.T @ eta.probs)


def risk_of(t: FinitePosteriorTriple, f: ClassifierTable, which: Which) -> float:
    """Misclassification risk of ``f`` under the selected posterior."""
    if len(f) != t.size:
        raise ValidationError(f"classifier covers {len(f)} points, support has {t.size}")
    if f.k != t.k:
        raise ValidationError(f"classifier has k={f.k}, triple has k={t.k}")
    post = t.posterior(which)
    return float(sum(t.px[i] * (1.0 - post[i][f[i]]) for i in range(t.size)))


def bayes_risk(t: FinitePosteriorTriple, which: Which) -> float:
    """Minimum achievable risk under the selected posterior."""
    post = t.posterior(which)
    return float(sum(t.px[i] * (1.0 - post[i].max()) for i in range(t.size)))


def excess_risk(t: FinitePosteriorTriple, f: ClassifierTable, which: Which) -> float:
    """Risk of ``f`` minus the Bayes risk; non-negative up to rounding."""
    return risk_of(t, f, which) - bayes_risk(t, which)


def bayes_classifier(t: FinitePosteriorTriple, which: Which) -> ClassifierTable:
    """A Bayes-optimal table (lowest index wins ties)."""
    post = t.posterior(which)
    return ClassifierTable([int(np.argmax(v.probs)) for v in post], t.k)
