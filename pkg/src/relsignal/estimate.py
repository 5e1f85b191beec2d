"""Empirical signal-strength estimation from plug-in posteriors.

Two linear classifiers are trained on the same features, one with clean and
one with noisy labels, under one shared configuration so that differences
reflect the labels rather than the tuning.  Their softmax outputs serve as
plug-in posteriors; the pointwise strength of each evaluation point, the
estimated zero-signal mass, the empirical CDF, and a fitted polynomial
envelope are reported.

Evaluation points are weighted uniformly.  Infinite strength values (a clean
plug-in posterior exactly tied at its max) only show up as tail mass beside
the CDF; with continuous plug-in posteriors and a 1e-9 tie tolerance they
are practically absent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .bounds import BoundQuery, smooth_margin_bound
from .simplex import ValidationError
from .signal import rss_matrix
from .trainer import TrainConfig, cross_validate, predict_proba_matrix

__all__ = [
    "RssEstimateReport",
    "DegenerateDistributionError",
    "estimate_report",
    "fit_smooth_margin",
    "envelope_constant",
    "DEFAULT_ALPHA_GRID",
]

DEFAULT_ALPHA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)

#: Number of quantile knots the reported CDF is condensed to.
CDF_KNOTS = 200


class DegenerateDistributionError(ValueError):
    """All estimated strength values sit at 0 or infinity; no envelope exists."""


@dataclass(frozen=True)
class RssEstimateReport:
    """Estimated strength values with their CDF and optional envelope fit.

    ``cdf_kappa[i]``/``cdf_value[i]`` tabulate F(kappa) = fraction of
    evaluation points with strength <= kappa over the finite values;
    ``inf_mass`` is the fraction at infinity (the CDF ends at 1 - inf_mass,
    exactly 1 whenever no infinities occur).  ``epsilon_hat`` is the mass
    sitting exactly at 0.
    """

    m_values: np.ndarray
    epsilon_hat: float
    cdf_kappa: tuple[float, ...]
    cdf_value: tuple[float, ...]
    inf_mass: float
    fit: dict | None = None

    def to_json_dict(self) -> dict:
        finite = self.m_values[np.isfinite(self.m_values)]
        return {
            "epsilon_hat": self.epsilon_hat,
            "inf_mass": self.inf_mass,
            "cdf": [
                {"kappa": k, "value": v} for k, v in zip(self.cdf_kappa, self.cdf_value)
            ],
            "m_values_finite": [float(v) for v in finite],
            "fit": dict(self.fit) if self.fit is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _empirical_cdf(values: np.ndarray) -> tuple[tuple[float, ...], tuple[float, ...], float]:
    n = values.size
    finite = np.sort(values[np.isfinite(values)])
    inf_mass = float((n - finite.size) / n)
    if finite.size == 0:
        return (), (), inf_mass
    knots = np.unique(finite)
    if knots.size > CDF_KNOTS:
        take = np.unique(
            np.quantile(knots, np.linspace(0.0, 1.0, CDF_KNOTS), method="lower")
        )
        knots = np.union1d(take, knots[[0, -1]])
    f_vals = np.searchsorted(finite, knots, side="right") / n
    return tuple(float(k) for k in knots), tuple(float(v) for v in f_vals), inf_mass


def estimate_report(
    train_features: np.ndarray,
    clean_labels: np.ndarray,
    noisy_labels: np.ndarray,
    eval_features: np.ndarray,
    config: TrainConfig | None = None,
    tie_tol: float = 1e-9,
    k: int | None = None,
) -> RssEstimateReport:
    """Plug-in strength estimates on the evaluation points."""
    config = config or TrainConfig()
    clean_labels = np.asarray(clean_labels, dtype=np.int64)
    noisy_labels = np.asarray(noisy_labels, dtype=np.int64)
    if clean_labels.shape != noisy_labels.shape:
        raise ValidationError("clean and noisy label sets must be the same length")
    n_classes = int(k if k is not None else max(clean_labels.max(), noisy_labels.max()) + 1)
    clean_cv = cross_validate(train_features, clean_labels, config, k=n_classes)
    noisy_cv = cross_validate(train_features, noisy_labels, config, k=n_classes)
    p_clean = predict_proba_matrix(clean_cv.model, eval_features)
    p_noisy = predict_proba_matrix(noisy_cv.model, eval_features)
    m_values = rss_matrix(p_clean, p_noisy, tie_tol)
    epsilon_hat = float(np.mean(m_values == 0.0))
    cdf_kappa, cdf_value, inf_mass = _empirical_cdf(m_values)
    return RssEstimateReport(
        m_values=m_values,
        epsilon_hat=epsilon_hat,
        cdf_kappa=cdf_kappa,
        cdf_value=cdf_value,
        inf_mass=inf_mass,
    )


def envelope_constant(m_values: np.ndarray, epsilon_hat: float, alpha: float) -> float:
    """Smallest C such that F(kappa) <= C * kappa^alpha + epsilon_hat at
    every finite positive strength value."""
    finite = np.sort(m_values[np.isfinite(m_values)])
    n = m_values.size
    positive = np.unique(finite[finite > 0.0])
    if positive.size == 0:
        raise DegenerateDistributionError(
            "all strength values are 0 or infinite; no polynomial envelope exists"
        )
    f_vals = np.searchsorted(finite, positive, side="right") / n
    excess = f_vals - epsilon_hat
    mask = excess > 0.0
    if not np.any(mask):
        return 0.0
    return float(np.max(excess[mask] / positive[mask] ** alpha))


def fit_smooth_margin(
    report: RssEstimateReport,
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID,
    n_for_scoring: int = 50000,
    v: int = 10,
    k: int = 10,
) -> tuple[float, float]:
    """Pick the envelope exponent minimizing the resulting risk bound.

    For each alpha in the grid, the minimal valid envelope constant is the
    largest ratio (F(kappa) - epsilon_hat) / kappa^alpha over the empirical
    strength values; the winning (alpha, C) minimizes the closed-form
    smooth-margin bound scored at the given sample size and capacity.
    """
    if not alpha_grid:
        raise ValidationError("alpha grid must be nonempty")
    best: tuple[float, float] | None = None
    best_value = math.inf
    for alpha in alpha_grid:
        c_alpha = envelope_constant(report.m_values, report.epsilon_hat, alpha)
        if c_alpha <= 0.0:
            # distribution never rises above epsilon_hat at finite kappa
            continue
        query = BoundQuery(
            epsilon=report.epsilon_hat, kappa=None, v_natarajan=v, n=n_for_scoring,
            k=k, alpha=alpha, c_alpha=c_alpha,
        )
        value = smooth_margin_bound(query).value
        if value < best_value:
            best_value = value
            best = (float(alpha), float(c_alpha))
    if best is None:
        raise DegenerateDistributionError(
            "no positive envelope constant on the alpha grid; the empirical CDF "
            "never exceeds epsilon_hat at finite strength"
        )
    return best


def attach_fit(report: RssEstimateReport, alpha: float, c_alpha: float) -> RssEstimateReport:
    """Return a copy of the report with the envelope parameters recorded."""
    return replace(
        report,
        fit={"alpha": alpha, "c_alpha": c_alpha, "epsilon": report.epsilon_hat},
    )
