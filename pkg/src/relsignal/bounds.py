"""Closed-form excess-risk bounds with explicit constants.

All logarithms are natural.  Bounds may exceed 1; reports carry both the raw
value and a clamp at 1, since a bound above 1 is vacuous for a risk but the
raw number is still informative when comparing regimes.

The capacity input V (Natarajan dimension of the hypothesis class) is always
caller-supplied; nothing here attempts to compute it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .signal import region_masses
from .simplex import ClassifierTable, FinitePosteriorTriple, ValidationError, excess_risk

__all__ = [
    "BoundQuery",
    "BoundReport",
    "log_shatter_bound",
    "estimation_term",
    "upper_bound_ni_erm",
    "lower_bound_zero_error",
    "lower_bound_general",
    "smooth_margin_bound",
    "oracle_rhs",
]


@dataclass(frozen=True)
class BoundQuery:
    """Parameters feeding the bound formulas.

    ``l_level`` is only used by the general lower bound, ``alpha``/``c_alpha``
    only by the smooth-margin bound; unused fields may stay None.
    """

    epsilon: float
    kappa: float | None
    v_natarajan: int
    n: int
    k: int
    l_level: float | None = None
    alpha: float | None = None
    c_alpha: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.kappa is not None and not self.kappa > 0:
            raise ValidationError(f"kappa must be > 0, got {self.kappa}")
        if self.v_natarajan < 1:
            raise ValidationError(f"v_natarajan must be >= 1, got {self.v_natarajan}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.l_level is not None and not 0.0 < self.l_level < 0.5:
            raise ValidationError(f"l_level must be in (0, 1/2), got {self.l_level}")
        if self.alpha is not None and not self.alpha > 0:
            raise ValidationError(f"alpha must be > 0, got {self.alpha}")
        if self.c_alpha is not None and not self.c_alpha > 0:
            raise ValidationError(f"c_alpha must be > 0, got {self.c_alpha}")


@dataclass(frozen=True)
class BoundReport:
    """A bound evaluation: raw value, validity flag, clamp, term breakdown."""

    value: float
    valid: bool
    detail: dict = field(default_factory=dict)

    @property
    def clamped(self) -> float:
        return min(self.value, 1.0)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "valid": self.valid,
            "clamped": self.clamped,
            "detail": dict(self.detail),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def log_shatter_bound(n: int, v: int, k: int) -> float:
    """Log of the shatter-coefficient bound n^V * K^(2V) for capacity V."""
    if n < 1 or v < 0 or k < 2:
        raise ValidationError(f"need n >= 1, v >= 0, k >= 2; got n={n} v={v} k={k}")
    return v * math.log(n) + 2 * v * math.log(k)


def estimation_term(n: int, v: int, k: int) -> float:
    """The explicit finite-sample deviation term 16*sqrt((V ln n + 2V ln K + 4)/(2n))."""
    return 16.0 * math.sqrt((log_shatter_bound(n, v, k) + 4.0) / (2.0 * n))


def _require(q: BoundQuery, *names: str) -> None:
    for name in names:
        if getattr(q, name) is None:
            raise ValidationError(f"query field {name!r} is required for this bound")


def upper_bound_ni_erm(q: BoundQuery) -> BoundReport:
    """Noise-ignorant ERM upper bound: epsilon + estimation term / kappa."""
    _require(q, "kappa")
    est = estimation_term(q.n, q.v_natarajan, q.k) / q.kappa
    return BoundReport(
        value=q.epsilon + est,
        valid=True,
        detail={"irreducible": q.epsilon, "estimation": est},
    )


def lower_bound_zero_error(q: BoundQuery) -> BoundReport:
    """Minimax lower bound against zero noisy-Bayes-risk adversaries.

    Valid for n > max(V-1, 2); the value is computed regardless and the
    flag records whether the precondition holds.
    """
    _require(q, "kappa")
    irreducible = (q.k - 1) / q.k * q.epsilon
    est = (q.v_natarajan - 1) * (1.0 - q.epsilon) / (8.0 * math.e * q.n * q.kappa)
    return BoundReport(
        value=irreducible + est,
        valid=q.n > max(q.v_natarajan - 1, 2),
        detail={"irreducible": irreducible, "estimation": est},
    )


def lower_bound_general(q: BoundQuery) -> BoundReport:
    """Minimax lower bound at noisy-Bayes-risk level L in (0, 1/2).

    Valid for n >= (V-1)/(2L) * max(16, 1/(1-2L)^2).
    """
    _require(q, "kappa", "l_level")
    irreducible = (q.k - 1) / q.k * q.epsilon
    est = (
        (1.0 - q.epsilon)
        / q.kappa
        * math.sqrt((q.v_natarajan - 1) * q.l_level / (2.0 * q.n))
        * math.exp(-7.0)
    )
    threshold = (
        (q.v_natarajan - 1)
        / (2.0 * q.l_level)
        * max(16.0, 1.0 / (1.0 - 2.0 * q.l_level) ** 2)
    )
    return BoundReport(
        value=irreducible + est,
        valid=q.n >= threshold,
        detail={"irreducible": irreducible, "estimation": est, "n_threshold": threshold},
    )


def smooth_margin_bound(q: BoundQuery) -> BoundReport:
    """Risk bound under a polynomial margin on the signal strength.

    With margin exponent alpha and constant C_alpha, the bound
    epsilon + C_alpha * kappa^alpha + U / kappa is minimized in closed form
    at kappa* = (U / (alpha * C_alpha))^(1/(alpha+1)), U being the explicit
    estimation term.
    """
    _require(q, "alpha", "c_alpha")
    u = estimation_term(q.n, q.v_natarajan, q.k)
    kappa_star = (u / (q.alpha * q.c_alpha)) ** (1.0 / (q.alpha + 1.0))
    margin = q.c_alpha * kappa_star**q.alpha
    est = u / kappa_star
    return BoundReport(
        value=q.epsilon + margin + est,
        valid=True,
        detail={
            "irreducible": q.epsilon,
            "margin": margin,
            "estimation": est,
            "kappa_star": kappa_star,
            "u": u,
        },
    )


def oracle_rhs(
    t: FinitePosteriorTriple,
    f: ClassifierTable,
    kappa_grid: Sequence[float],
) -> BoundReport:
    """Right-hand side of the oracle inequality, minimized over a kappa grid.

    Every grid point yields a valid upper bound on the clean excess risk:
    mass outside the signal region plus noisy excess risk divided by kappa.
    """
    kappas = [float(kk) for kk in kappa_grid]
    if not kappas:
        raise ValidationError("kappa grid must be nonempty")
    if any(kk <= 0 for kk in kappas):
        raise ValidationError("kappa grid entries must be > 0")
    noisy_excess = excess_risk(t, f, "noisy")
    report = region_masses(t, kappas)
    best_value = math.inf
    best = {}
    for kappa, mass in zip(report.kappa_list, report.masses):
        value = (1.0 - mass) + noisy_excess / kappa
        if value < best_value:
            best_value = value
            best = {
                "kappa": kappa,
                "complement_mass": 1.0 - mass,
                "scaled_noisy_excess": noisy_excess / kappa,
            }
    return BoundReport(value=best_value, valid=True, detail=best)
