"""Relative signal strength: how much a noisy posterior reveals about the
clean argmax.

For class probability vectors ``eta`` (clean) and ``eta_tilde`` (noisy), the
pointwise strength is the minimum over classes j of

    (max eta_tilde - eta_tilde[j]) / (max eta - eta[j])

with 0/0 taken as +inf.  A zero denominator with a positive numerator is
also +inf: when the clean posterior is indifferent between its top class and
j, no clean regret can be incurred by picking j, so j cannot cap the
strength.  +inf is represented as ``math.inf``, never as a large sentinel.

The signal region above level kappa collects the points whose strength
STRICTLY exceeds kappa; the region at level 0 is exactly where the noisy
argmax set is contained in the clean one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .simplex import (
    FinitePosteriorTriple,
    SimplexVector,
    ValidationError,
    argmax_set,
)

__all__ = [
    "RssValue",
    "rss",
    "rss_binary",
    "rss_matrix",
    "RegionReport",
    "region_masses",
    "positive_region",
    "pi_membership",
]

#: Extended non-negative real: a finite float >= 0 or math.inf.
RssValue = float


def rss(eta: SimplexVector, eta_tilde: SimplexVector, tie_tol: float = 0.0) -> RssValue:
    """Relative signal strength of the pair (eta, eta_tilde).

    Gaps within ``tie_tol`` of zero are treated as exact ties, so tied
    coordinates contribute +inf through the 0/0 convention.
    """
    if eta.k != eta_tilde.k:
        raise ValidationError(f"dimension mismatch: {eta.k} vs {eta_tilde.k}")
    if tie_tol < 0:
        raise ValidationError(f"tie_tol must be >= 0, got {tie_tol}")
    num = eta_tilde.max() - eta_tilde.probs
    den = eta.max() - eta.probs
    num = np.where(num <= tie_tol, 0.0, num)
    den = np.where(den <= tie_tol, 0.0, den)
    best = math.inf
    for n_j, d_j in zip(num, den):
        ratio = math.inf if d_j == 0.0 else float(n_j) / float(d_j)
        if ratio < best:
            best = ratio
    return best


def rss_binary(eta1: float, eta_tilde1: float) -> RssValue:
    """Binary specialization: a relative margin around 1/2.

    ``eta1`` and ``eta_tilde1`` are the class-1 probabilities.  Equals
    ``rss`` on the induced 2-vectors; a clean posterior exactly at 1/2 gives
    +inf.
    """
    for name, v in (("eta1", eta1), ("eta_tilde1", eta_tilde1)):
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1], got {v}")
    den = eta1 - 0.5
    if den == 0.0:
        return math.inf
    return max((eta_tilde1 - 0.5) / den, 0.0)


def rss_matrix(clean: np.ndarray, noisy: np.ndarray, tie_tol: float = 0.0) -> np.ndarray:
    """Vectorized strength over rows of two (n, K) probability matrices."""
    clean = np.asarray(clean, dtype=np.float64)
    noisy = np.asarray(noisy, dtype=np.float64)
    if clean.shape != noisy.shape or clean.ndim != 2:
        raise ValidationError(f"shape mismatch: {clean.shape} vs {noisy.shape}")
    num = noisy.max(axis=1, keepdims=True) - noisy
    den = clean.max(axis=1, keepdims=True) - clean
    num = np.where(num <= tie_tol, 0.0, num)
    den = np.where(den <= tie_tol, 0.0, den)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den == 0.0, np.inf, num / np.where(den == 0.0, 1.0, den))
    return ratios.min(axis=1)


def _point_values(t: FinitePosteriorTriple, tie_tol: float) -> list[RssValue]:
    return [rss(t.eta[i], t.eta_tilde[i], tie_tol) for i in range(t.size)]


@dataclass(frozen=True)
class RegionReport:
    """Signal-region masses at a ladder of thresholds.

    ``masses[i]`` is the probability mass of points with strength strictly
    above ``kappa_list[i]``; ``epsilon0`` is the mass of the zero-signal
    complement (strength exactly 0 included).
    """

    kappa_list: tuple[float, ...]
    masses: tuple[float, ...]
    epsilon0: float

    def to_json_dict(self) -> dict:
        return {
            "kappa": list(self.kappa_list),
            "mass": list(self.masses),
            "epsilon0": self.epsilon0,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def region_masses(
    t: FinitePosteriorTriple,
    kappa_list: Sequence[float],
    tie_tol: float = 0.0,
) -> RegionReport:
    """Mass of the strict signal region at each requested threshold."""
    kappas = sorted(float(k) for k in kappa_list)
    if any(k < 0 for k in kappas):
        raise ValidationError("kappa thresholds must be >= 0")
    values = _point_values(t, tie_tol)
    weights = t.px.probs
    masses = tuple(
        float(sum(w for v, w in zip(values, weights) if v > kappa)) for kappa in kappas
    )
    mass_a0 = float(sum(w for v, w in zip(values, weights) if v > 0.0))
    return RegionReport(tuple(kappas), masses, 1.0 - mass_a0)


def positive_region(t: FinitePosteriorTriple, tie_tol: float = 0.0) -> set:
    """Support points where the noisy argmax set is inside the clean one.

    Coincides with the set of points of strictly positive strength.
    """
    out = set()
    for i, point in enumerate(t.support):
        if argmax_set(t.eta_tilde[i], tie_tol) <= argmax_set(t.eta[i], tie_tol):
            out.add(point)
    return out


def pi_membership(
    t: FinitePosteriorTriple,
    epsilon: float,
    kappa: float,
    tie_tol: float = 0.0,
) -> bool:
    """Whether the signal region above ``kappa`` carries mass >= 1 - epsilon."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must be in [0, 1], got {epsilon}")
    if kappa < 0:
        raise ValidationError(f"kappa must be >= 0, got {kappa}")
    values = _point_values(t, tie_tol)
    mass = float(sum(w for v, w in zip(values, t.px.probs) if v > kappa))
    return mass >= 1.0 - epsilon
