"""Noise-immunity diagnostics for transition matrices.

A problem is immune when the clean and noisy Bayes argmax sets coincide at
every point.  Two linear-algebraic certificates are handled here:

* diagonal dominance (each diagonal entry is the unique maximum of its row)
  is necessary and sufficient when the clean posterior is one-hot;
* the symmetric form with constant off-diagonal e in [0, 1/K) is necessary
  and sufficient for immunity under every clean posterior.

The symmetric form redistributes mass uniformly: composing it rescales the
posterior affinely by 1 - K*e, so the signal strength of any posterior with
a unique argmax is exactly 1 - K*e, and the wrong-label rate (K-1)*e may
climb all the way to (K-1)/K before immunity breaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import (
    FinitePosteriorTriple,
    SimplexVector,
    TransitionMatrix,
    ValidationError,
    argmax_set,
)

__all__ = [
    "SymmetricNoiseSpec",
    "sym_noise_stats",
    "make_symmetric",
    "universal_form_decompose",
    "is_diagonally_dominant",
    "is_immune",
    "find_counterexample",
]


@dataclass(frozen=True)
class SymmetricNoiseSpec:
    """Symmetric noise parameterized by its off-diagonal entry.

    Derived quantities: diagonal 1 - (K-1)e, wrong-label rate rho = (K-1)e,
    and signal level 1 - K*e.  The identity matrix (e = 0) counts as immune.
    """

    k: int
    e_offdiag: float

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if not 0.0 <= self.e_offdiag < 1.0 / self.k:
            raise ValidationError(
                f"e_offdiag must lie in [0, 1/{self.k}), got {self.e_offdiag}"
            )

    @property
    def diag(self) -> float:
        return 1.0 - (self.k - 1) * self.e_offdiag

    @property
    def noise_rate(self) -> float:
        """P(noisy label != clean label), independent of the clean posterior."""
        return (self.k - 1) * self.e_offdiag

    @property
    def rss_level(self) -> float:
        return 1.0 - self.k * self.e_offdiag


def sym_noise_stats(
    k: int,
    *,
    e_offdiag: float | None = None,
    noise_rate: float | None = None,
    rss_level: float | None = None,
    diag_excess: float | None = None,
) -> SymmetricNoiseSpec:
    """Build a spec from any single parameterization of symmetric noise.

    ``diag_excess`` is the alternative form with diagonal 1/K + excess and
    off-diagonal 1/K - excess/(K-1); it converts to
    e_offdiag = 1/K - excess/(K-1).
    """
    given = [v for v in (e_offdiag, noise_rate, rss_level, diag_excess) if v is not None]
    if len(given) != 1:
        raise ValidationError("specify exactly one of e_offdiag, noise_rate, rss_level, diag_excess")
    if e_offdiag is not None:
        e = float(e_offdiag)
    elif noise_rate is not None:
        if not 0.0 <= noise_rate < (k - 1) / k:
            raise ValidationError(
                f"noise_rate must lie in [0, {(k - 1) / k}), got {noise_rate}"
            )
        e = noise_rate / (k - 1)
    elif rss_level is not None:
        if not 0.0 < rss_level <= 1.0:
            raise ValidationError(f"rss_level must lie in (0, 1], got {rss_level}")
        e = (1.0 - rss_level) / k
    else:
        e = 1.0 / k - float(diag_excess) / (k - 1)
    return SymmetricNoiseSpec(k=k, e_offdiag=e)


def make_symmetric(spec: SymmetricNoiseSpec) -> TransitionMatrix:
    """Transition matrix with diagonal 1 - (K-1)e and off-diagonal e."""
    m = np.full((spec.k, spec.k), spec.e_offdiag)
    np.fill_diagonal(m, spec.diag)
    return TransitionMatrix(m)


def is_diagonally_dominant(e: TransitionMatrix, tol: float = 1e-9) -> bool:
    """True iff every diagonal entry exceeds its row's off-diagonals by > tol."""
    m = e.rows
    for i in range(e.k):
        off = np.delete(m[i], i)
        if not np.all(m[i, i] > off + tol):
            return False
    return True


def universal_form_decompose(e: TransitionMatrix, tol: float = 1e-9) -> float | None:
    """Recognize the symmetric form; return its off-diagonal entry or None.

    Requires all off-diagonal entries to agree within ``tol``, diagonals to
    equal 1 - (K-1)e within ``tol``, and e < 1/K - tol.
    """
    m = e.rows
    k = e.k
    mask = ~np.eye(k, dtype=bool)
    off = m[mask]
    e_val = float(off.mean())
    if np.any(np.abs(off - e_val) > tol):
        return None
    if np.any(np.abs(np.diag(m) - (1.0 - (k - 1) * e_val)) > tol):
        return None
    if not e_val < 1.0 / k - tol:
        return None
    return max(e_val, 0.0)


def is_immune(t: FinitePosteriorTriple, tie_tol: float = 0.0) -> bool:
    """True iff clean and noisy argmax sets agree at every support point."""
    return all(
        argmax_set(t.eta[i], tie_tol) == argmax_set(t.eta_tilde[i], tie_tol)
        for i in range(t.size)
    )


def _candidate_family(k: int) -> list[np.ndarray]:
    """Probe posteriors used by the necessity argument.

    Uniform; uniform-with-one-coordinate-zeroed; one-hot; and near-uniform
    vectors 1/K + delta, 1/K - delta over each ordered coordinate pair.
    """
    out: list[np.ndarray] = [np.full(k, 1.0 / k)]
    for i in range(k):
        v = np.full(k, 1.0 / (k - 1))
        v[i] = 0.0
        out.append(v)
    for i in range(k):
        v = np.zeros(k)
        v[i] = 1.0
        out.append(v)
    for delta in (1e-3, 1e-2, 0.05):
        if delta >= 1.0 / k:
            continue
        for a in range(k):
            for b in range(k):
                if a == b:
                    continue
                v = np.full(k, 1.0 / k)
                v[a] += delta
                v[b] -= delta
                out.append(v)
    return out


def find_counterexample(e: TransitionMatrix, tol: float = 1e-9) -> SimplexVector | None:
    """Search the proof's candidate family for a posterior whose argmax the
    matrix fails to preserve.

    ``tol`` is the argmax tie tolerance; the default absorbs the float dust
    of composing the probe vectors, so exact symmetric matrices are never
    flagged spuriously.

    Complete over that family only: a matrix outside the symmetric form is
    guaranteed to be caught by some family member, but the returned witness
    is always one of them.  Returns None when every candidate survives.
    """
    for cand in _candidate_family(e.k):
        eta = SimplexVector(cand)
        eta_tilde = SimplexVector(e.rows.T @ eta.probs)
        if argmax_set(eta_tilde, tol) != argmax_set(eta, tol):
            return eta
    return None
