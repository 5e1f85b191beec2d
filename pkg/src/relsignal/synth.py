"""Data and noise generation: Gaussian mixtures, label flipping, adversarial
minimax instances, and a Monte-Carlo harness for finite-domain learners.

All generators are deterministic functions of their inputs and a seed; the
seed keys an independent Philox stream per call (see :mod:`relsignal.rng`),
so trials of a sweep can run in any order on any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from . import rng
from .signal import pi_membership
from .simplex import (
    ClassifierTable,
    FinitePosteriorTriple,
    TransitionMatrix,
    ValidationError,
    bayes_risk,
)

__all__ = [
    "UniformFlip",
    "ClassConditional",
    "InstanceDependent",
    "NoiseSpec",
    "LabeledSample",
    "MinimaxInstanceSpec",
    "InstanceSpecError",
    "gaussian_mixture",
    "flip_labels",
    "sample_from_triple",
    "build_zero_error_instance",
    "build_general_instance",
    "general_proof_params",
    "plurality_fit",
    "mc_excess_risk",
    "McResult",
]

GAUSS_CENTERS = ((1.0, 1.0), (-1.0, -1.0))


class InstanceSpecError(ValidationError):
    """Requested adversarial-instance parameters violate the construction."""


@dataclass(frozen=True)
class UniformFlip:
    """Flip each label with probability ``rate`` to a uniformly chosen wrong class."""

    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValidationError(f"flip rate must be in [0, 1], got {self.rate}")


@dataclass(frozen=True)
class ClassConditional:
    """Resample label i from row i of a fixed transition matrix."""

    matrix: TransitionMatrix


@dataclass(frozen=True)
class InstanceDependent:
    """Per-point transition matrices, aligned with the sample order."""

    matrices: tuple[TransitionMatrix, ...]

    def __init__(self, matrices: Sequence[TransitionMatrix]):
        object.__setattr__(self, "matrices", tuple(matrices))


NoiseSpec = UniformFlip | ClassConditional | InstanceDependent


@dataclass(frozen=True)
class LabeledSample:
    """Points (support indices or feature rows) with labels and the seed used."""

    points: np.ndarray
    labels: np.ndarray
    seed_trace: tuple

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise ValidationError(
                f"points/labels length mismatch: {len(self.points)} vs {len(self.labels)}"
            )

    @property
    def n(self) -> int:
        return int(len(self.labels))


def gaussian_mixture(
    n_per_class: int,
    centers: Sequence[Sequence[float]] = GAUSS_CENTERS,
    seed: int = 0,
) -> LabeledSample:
    """Two-dimensional Gaussian blobs with identity covariance, one per class.

    Class c contributes ``n_per_class`` points at ``centers[c]`` plus
    standard normal noise; labels are the class indices.
    """
    if n_per_class < 1:
        raise ValidationError(f"n_per_class must be >= 1, got {n_per_class}")
    centers_arr = np.asarray(centers, dtype=np.float64)
    gen = rng.stream(seed, "gaussian_mixture")
    blocks = []
    labels = []
    for c, center in enumerate(centers_arr):
        blocks.append(center + gen.standard_normal((n_per_class, centers_arr.shape[1])))
        labels.append(np.full(n_per_class, c, dtype=np.int64))
    return LabeledSample(
        points=np.concatenate(blocks),
        labels=np.concatenate(labels),
        seed_trace=(seed, "gaussian_mixture"),
    )


def flip_labels(labels: np.ndarray, spec: NoiseSpec, k: int, seed: int = 0) -> np.ndarray:
    """Corrupt labels according to the noise specification.

    Uniform flipping replaces a label, with the given probability, by a
    uniform draw over the K-1 other classes; matrix-based noise resamples
    from the applicable row.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValidationError(f"labels out of range [0, {k})")
    gen = rng.stream(seed, "flip_labels")
    if isinstance(spec, UniformFlip):
        flip = gen.random(labels.size) < spec.rate
        offsets = gen.integers(1, k, size=labels.size)
        out = labels.copy()
        out[flip] = (labels[flip] + offsets[flip]) % k
        return out
    if isinstance(spec, ClassConditional):
        if spec.matrix.k != k:
            raise ValidationError(f"matrix k={spec.matrix.k} but k={k}")
        cdf = np.cumsum(spec.matrix.rows, axis=1)
        u = gen.random(labels.size)
        return (u[:, None] > cdf[labels]).sum(axis=1).astype(np.int64)
    if isinstance(spec, InstanceDependent):
        if len(spec.matrices) != labels.size:
            raise ValidationError(
                f"need one matrix per point: {len(spec.matrices)} vs {labels.size}"
            )
        u = gen.random(labels.size)
        out = np.empty(labels.size, dtype=np.int64)
        for i, (label, matrix) in enumerate(zip(labels, spec.matrices)):
            if matrix.k != k:
                raise ValidationError(f"matrix k={matrix.k} at point {i}, expected {k}")
            out[i] = int(np.searchsorted(np.cumsum(matrix.rows[label]), u[i], side="right"))
        return np.minimum(out, k - 1)
    raise ValidationError(f"unknown noise spec: {spec!r}")


def sample_from_triple(
    t: FinitePosteriorTriple,
    n: int,
    which: Literal["clean", "noisy"] = "noisy",
    seed: int = 0,
) -> LabeledSample:
    """Draw n i.i.d. pairs: a support index from px, then a label from the
    selected posterior at that point."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    gen = rng.stream(seed, "sample_from_triple", which)
    idx = gen.choice(t.size, size=n, p=t.px.probs)
    post = np.stack([v.probs for v in t.posterior(which)])
    cdf = np.cumsum(post, axis=1)
    u = gen.random(n)
    labels = (u[:, None] > cdf[idx]).sum(axis=1).astype(np.int64)
    return LabeledSample(points=idx, labels=labels, seed_trace=(seed, which))


@dataclass(frozen=True)
class MinimaxInstanceSpec:
    """Parameters of the adversarial finite-support constructions.

    ``j`` is the hidden clean class at the zero-signal point x0 and ``b``
    the per-point orientation bits (values in {1, 2}) of the V-1 rare
    points; leave them None when a Monte-Carlo driver redraws them per
    trial.  ``n_design`` sets the rare-point mass (1-eps)/n_design of the
    zero-error variant; ``c``/``p`` and ``l_level`` drive the general one.
    """

    variant: Literal["zero_error", "general"]
    epsilon: float
    kappa: float
    v: int
    k: int
    delta: float = 1e-6
    n_design: int | None = None
    j: int | None = None
    b: tuple[int, ...] | None = None
    c: float | None = None
    p: float | None = None
    l_level: float | None = None

    def __post_init__(self):
        if self.variant not in ("zero_error", "general"):
            raise InstanceSpecError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise InstanceSpecError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.kappa <= 0:
            raise InstanceSpecError(f"kappa must be > 0, got {self.kappa}")
        if self.delta <= 0:
            raise InstanceSpecError(f"delta must be > 0, got {self.delta}")
        if self.v <= 1:
            raise InstanceSpecError(f"v must be > 1, got {self.v}")
        if self.k < 2:
            raise InstanceSpecError(f"k must be >= 2, got {self.k}")
        if self.j is not None and not 0 <= self.j < self.k:
            raise InstanceSpecError(f"j must be in [0, {self.k}), got {self.j}")
        if self.b is not None:
            if len(self.b) != self.v - 1:
                raise InstanceSpecError(f"b must have {self.v - 1} entries, got {len(self.b)}")
            if any(bt not in (1, 2) for bt in self.b):
                raise InstanceSpecError(f"b entries must be 1 or 2, got {self.b}")
        if self.variant == "zero_error":
            if self.n_design is None or self.n_design <= self.v - 1:
                raise InstanceSpecError(
                    f"zero_error variant needs n_design > V-1 = {self.v - 1}, got {self.n_design}"
                )
        else:
            if self.c is None or not 0.0 < self.c < 0.5:
                raise InstanceSpecError(f"general variant needs c in (0, 1/2), got {self.c}")
            if self.p is None or not 0.0 < self.p <= 1.0 / (self.v - 1):
                raise InstanceSpecError(
                    f"general variant needs p in (0, 1/(V-1)], got {self.p}"
                )
            implied = (self.v - 1) * self.p * (0.5 - self.c)
            if self.l_level is not None and not math.isclose(
                self.l_level, implied, rel_tol=1e-9, abs_tol=1e-12
            ):
                raise InstanceSpecError(
                    f"l_level={self.l_level} inconsistent with (V-1)*p*(1/2-c)={implied}"
                )

    def implied_l_level(self) -> float:
        if self.variant != "general":
            raise InstanceSpecError("l_level only applies to the general variant")
        return (self.v - 1) * self.p * (0.5 - self.c)


def general_proof_params(v: int, n: int, l_level: float) -> tuple[float, float]:
    """The (c, p) choice that optimizes the general construction's bound:
    c = sqrt((V-1)/(8*n*L)), p = L / ((V-1)(1/2 - c))."""
    if not 0.0 < l_level < 0.5:
        raise InstanceSpecError(f"l_level must be in (0, 1/2), got {l_level}")
    c = math.sqrt((v - 1) / (8.0 * n * l_level))
    if c >= 0.5:
        raise InstanceSpecError(
            f"n={n} too small for the proof preset: c={c} >= 1/2; raise n or l_level"
        )
    p = l_level / ((v - 1) * (0.5 - c))
    return c, p


def _two_class_gap_vector(k: int, top: int, gap_coeff: float) -> list[float]:
    """Vector [1/2 + g, 1/2 - g, 0, ..] (orientation by ``top`` in {1, 2})."""
    if gap_coeff > 0.5 + 1e-15:
        raise InstanceSpecError(
            f"posterior entry 1/2 + {gap_coeff} exceeds 1; the construction needs "
            "kappa + delta >= 1 (gap coefficients at most 1/2)"
        )
    gap_coeff = min(gap_coeff, 0.5)
    v = [0.0] * k
    sign = 1.0 if top == 1 else -1.0
    v[0] = 0.5 + sign * gap_coeff
    v[1] = 0.5 - sign * gap_coeff
    return v


def _one_hot_list(k: int, j: int) -> list[float]:
    v = [0.0] * k
    v[j] = 1.0
    return v


def build_zero_error_instance(spec: MinimaxInstanceSpec) -> FinitePosteriorTriple:
    """Adversarial instance with zero noisy Bayes risk.

    Support x0..xV; x0 carries mass epsilon with a hidden one-hot clean
    posterior, x1..x(V-1) carry mass (1-eps)/n_design each with clean
    margin 1/(kappa+delta) and one-hot noisy posteriors, xV absorbs the
    rest.  Raises when the parameters leave the class the construction
    targets (this pins kappa + delta >= 1; for K >= 3 the off-pair
    coordinates additionally cap how far kappa may exceed 1).
    """
    if spec.variant != "zero_error":
        raise InstanceSpecError(f"expected zero_error spec, got {spec.variant}")
    if spec.j is None or spec.b is None:
        raise InstanceSpecError("zero_error builder needs j and b set")
    k, v_dim, eps = spec.k, spec.v, spec.epsilon
    gap = 1.0 / (2.0 * (spec.kappa + spec.delta))
    rare_mass = (1.0 - eps) / spec.n_design
    px = [eps] + [rare_mass] * (v_dim - 1) + [(1.0 - eps) * (1.0 - (v_dim - 1) / spec.n_design)]
    eta = [_one_hot_list(k, spec.j)]
    eta_tilde = [_one_hot_list(k, 0)]
    for bt in spec.b:
        eta.append(_two_class_gap_vector(k, bt, gap))
        eta_tilde.append(_one_hot_list(k, bt - 1))
    eta.append(_two_class_gap_vector(k, 1, gap))
    eta_tilde.append(_one_hot_list(k, 0))
    t = FinitePosteriorTriple(
        support=tuple(range(v_dim + 1)), px=px, eta=eta, eta_tilde=eta_tilde
    )
    if bayes_risk(t, "noisy") != 0.0:
        raise InstanceSpecError("internal: noisy Bayes risk is not zero")
    if not pi_membership(t, eps, spec.kappa):
        raise InstanceSpecError(
            f"construction leaves the target class at kappa={spec.kappa}, "
            f"delta={spec.delta}, K={k}: the strong-signal region is too small"
        )
    return t


def build_general_instance(spec: MinimaxInstanceSpec) -> FinitePosteriorTriple:
    """Adversarial instance whose noisy posteriors at the rare points are
    separated by 2c instead of being one-hot.

    The noisy Bayes risk restricted to x1..xV equals
    (V-1) * (1-eps) * p * (1/2 - c).
    """
    if spec.variant != "general":
        raise InstanceSpecError(f"expected general spec, got {spec.variant}")
    if spec.j is None or spec.b is None:
        raise InstanceSpecError("general builder needs j and b set")
    k, v_dim, eps = spec.k, spec.v, spec.epsilon
    clean_gap = spec.c / (spec.kappa + spec.delta)
    tail_gap = 1.0 / (2.0 * (spec.kappa + spec.delta))
    px = [eps] + [(1.0 - eps) * spec.p] * (v_dim - 1) + [
        (1.0 - eps) * (1.0 - (v_dim - 1) * spec.p)
    ]
    eta = [_one_hot_list(k, spec.j)]
    eta_tilde = [_one_hot_list(k, 0)]
    for bt in spec.b:
        eta.append(_two_class_gap_vector(k, bt, clean_gap))
        eta_tilde.append(_two_class_gap_vector(k, bt, spec.c))
    eta.append(_two_class_gap_vector(k, 1, tail_gap))
    eta_tilde.append(_one_hot_list(k, 0))
    t = FinitePosteriorTriple(
        support=tuple(range(v_dim + 1)), px=px, eta=eta, eta_tilde=eta_tilde
    )
    if not pi_membership(t, eps, spec.kappa):
        raise InstanceSpecError(
            f"construction leaves the target class at kappa={spec.kappa}, "
            f"delta={spec.delta}, K={k}: the strong-signal region is too small"
        )
    return t


def plurality_fit(
    sample: LabeledSample,
    support: Sequence,
    k: int,
    seed: int = 0,
) -> ClassifierTable:
    """Finite-domain noise-ignorant ERM over all functions.

    At each observed point, the most frequent observed label (ties broken
    uniformly at random); at unobserved points, a uniform random class.
    """
    index_of = {point: i for i, point in enumerate(support)}
    counts = np.zeros((len(support), k), dtype=np.int64)
    for point, label in zip(sample.points, sample.labels):
        key = point if not isinstance(point, np.generic) else point.item()
        if key not in index_of:
            raise ValidationError(f"sample point {key!r} outside the support")
        if not 0 <= label < k:
            raise ValidationError(f"label {label} out of range [0, {k})")
        counts[index_of[key], label] += 1
    gen = rng.stream(seed, "plurality_fit")
    labels = np.empty(len(support), dtype=np.int64)
    for i in range(len(support)):
        total = counts[i].sum()
        if total == 0:
            labels[i] = gen.integers(0, k)
            continue
        top = counts[i].max()
        tied = np.flatnonzero(counts[i] == top)
        labels[i] = tied[0] if tied.size == 1 else gen.choice(tied)
    return ClassifierTable(labels, k)


Learner = Literal["plurality", "random_guess", "noisy_bayes", "clean_bayes"]


@dataclass(frozen=True)
class McResult:
    """Monte-Carlo estimate of expected clean excess risk, split by region."""

    mean: float
    stderr: float
    trials: int
    region_breakdown: dict
    per_trial: tuple[dict, ...] | None = None

    def to_json_dict(self) -> dict:
        out = {
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
            "region_breakdown": dict(self.region_breakdown),
        }
        if self.per_trial is not None:
            out["per_trial"] = list(self.per_trial)
        return out


def _fit_learner(
    learner: Learner,
    t: FinitePosteriorTriple,
    sample: LabeledSample,
    seed: int,
) -> ClassifierTable:
    if learner == "plurality":
        return plurality_fit(sample, t.support, t.k, seed=seed)
    if learner == "random_guess":
        gen = rng.stream(seed, "random_guess")
        return ClassifierTable(gen.integers(0, t.k, size=t.size), t.k)
    if learner == "noisy_bayes":
        return ClassifierTable([int(np.argmax(v.probs)) for v in t.eta_tilde], t.k)
    if learner == "clean_bayes":
        return ClassifierTable([int(np.argmax(v.probs)) for v in t.eta], t.k)
    raise ValidationError(f"unknown learner {learner!r}")


def mc_excess_risk(
    spec: MinimaxInstanceSpec,
    learner: Learner,
    n: int,
    trials: int,
    seed: int = 0,
    keep_trials: bool = False,
) -> McResult:
    """Expected clean excess risk of a learner on randomized instances.

    Each trial draws the hidden class J uniformly and the orientation bits
    uniformly over {1, 2}^(V-1), builds the instance, samples n noisy
    pairs, fits the learner, and scores the exact clean excess risk per
    support region (x0 versus the rest).
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    x0_vals = np.empty(trials)
    rest_vals = np.empty(trials)
    builder = (
        build_zero_error_instance if spec.variant == "zero_error" else build_general_instance
    )
    for trial in range(trials):
        gen = rng.stream(seed, "mc_excess_risk", trial)
        j = int(gen.integers(0, spec.k))
        b = tuple(int(x) for x in gen.integers(1, 3, size=spec.v - 1))
        t = builder(replace(spec, j=j, b=b))
        sample = sample_from_triple(
            t, n, which="noisy", seed=rng.spawn_seed(seed, "mc_sample", trial)
        )
        f = _fit_learner(learner, t, sample, rng.spawn_seed(seed, "mc_fit", trial))
        x0 = t.px[0] * (t.eta[0].max() - t.eta[0][f[0]])
        rest = sum(
            t.px[i] * (t.eta[i].max() - t.eta[i][f[i]]) for i in range(1, t.size)
        )
        x0_vals[trial] = x0
        rest_vals[trial] = rest
    totals = x0_vals + rest_vals
    per_trial = None
    if keep_trials:
        per_trial = tuple(
            {
                "trial": i,
                "excess_risk": float(totals[i]),
                "x0": float(x0_vals[i]),
                "rest": float(rest_vals[i]),
            }
            for i in range(trials)
        )

    def _summ(vals: np.ndarray) -> dict:
        return {
            "mean": float(vals.mean()),
            "stderr": float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        }

    return McResult(
        mean=float(totals.mean()),
        stderr=float(totals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        trials=trials,
        region_breakdown={"x0": _summ(x0_vals), "rest": _summ(rest_vals)},
        per_trial=per_trial,
    )
