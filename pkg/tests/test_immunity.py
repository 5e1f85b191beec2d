import numpy as np
import pytest

from relsignal.immunity import (
    SymmetricNoiseSpec,
    find_counterexample,
    is_diagonally_dominant,
    is_immune,
    make_symmetric,
    sym_noise_stats,
    universal_form_decompose,
)
from relsignal.signal import positive_region, rss
from relsignal.simplex import (
    FinitePosteriorTriple,
    SimplexVector,
    TransitionMatrix,
    ValidationError,
    argmax_set,
    compose_noisy_posterior,
)
from conftest import random_separated_batch


class TestSymmetricSpec:
    def test_identity_edge(self):
        spec = SymmetricNoiseSpec(k=5, e_offdiag=0.0)
        assert spec.diag == 1.0
        assert spec.noise_rate == 0.0
        assert spec.rss_level == 1.0

    def test_rejects_boundary(self):
        with pytest.raises(ValidationError):
            SymmetricNoiseSpec(k=5, e_offdiag=0.2)

    def test_stats_from_noise_rate(self):
        spec = sym_noise_stats(10, noise_rate=0.45)
        assert spec.e_offdiag == pytest.approx(0.05, abs=1e-15)
        assert spec.rss_level == pytest.approx(0.5, abs=1e-15)

    def test_stats_binary_limit(self):
        # binary noise rate approaching 1/2 collapses the signal level to 0
        for delta in (0.1, 0.01, 0.001):
            spec = sym_noise_stats(2, noise_rate=0.5 - delta)
            assert spec.rss_level == pytest.approx(2 * delta, abs=1e-12)

    def test_stats_ten_class_boundary(self):
        # ten-class turning point sits at wrong-label rate 0.9
        spec = sym_noise_stats(10, noise_rate=0.9 - 1e-6)
        assert spec.rss_level == pytest.approx(1e-6 * 10 / 9, rel=1e-6)
        with pytest.raises(ValidationError):
            sym_noise_stats(10, noise_rate=0.9)

    def test_stats_round_trips(self):
        for k in (2, 3, 10):
            for e in (0.0, 0.01, 0.9 / k):
                spec = SymmetricNoiseSpec(k=k, e_offdiag=e)
                assert sym_noise_stats(k, noise_rate=spec.noise_rate).e_offdiag == pytest.approx(e)
                if spec.rss_level > 0:
                    assert sym_noise_stats(k, rss_level=spec.rss_level).e_offdiag == pytest.approx(e)

    def test_main_text_form_conversion(self):
        # diagonal written as 1/K + excess converts to the off-diagonal form
        k = 4
        excess = 0.3
        spec = sym_noise_stats(k, diag_excess=excess)
        assert spec.diag == pytest.approx(1.0 / k + excess, abs=1e-15)

    def test_requires_exactly_one_parameter(self):
        with pytest.raises(ValidationError):
            sym_noise_stats(3, e_offdiag=0.1, noise_rate=0.2)
        with pytest.raises(ValidationError):
            sym_noise_stats(3)


class TestMakeSymmetric:
    def test_identity(self):
        assert np.array_equal(
            make_symmetric(SymmetricNoiseSpec(k=3, e_offdiag=0.0)).rows, np.eye(3)
        )

    def test_binary_quarter(self):
        m = make_symmetric(SymmetricNoiseSpec(k=2, e_offdiag=0.25))
        assert m.to_lists() == [[0.75, 0.25], [0.25, 0.75]]

    def test_boundary_noise_rate_rejected(self):
        with pytest.raises(ValidationError):
            sym_noise_stats(10, noise_rate=0.9)

    def test_rows_stochastic(self):
        m = make_symmetric(SymmetricNoiseSpec(k=7, e_offdiag=0.13))
        assert np.allclose(m.rows.sum(axis=1), 1.0, atol=1e-12)


class TestDiagonalDominance:
    def test_identity(self):
        assert is_diagonally_dominant(TransitionMatrix(np.eye(4)))

    def test_uniform_matrix(self):
        assert not is_diagonally_dominant(TransitionMatrix(np.full((3, 3), 1 / 3)))

    def test_row_violation(self):
        assert not is_diagonally_dominant(TransitionMatrix([[0.4, 0.6], [0.3, 0.7]]))

    def test_one_hot_immunity_characterization(self, gen):
        # with one-hot clean posteriors, dominance is exactly what preserves
        # the argmax; a non-dominant matrix is beaten by the offending row
        for _ in range(200):
            k = int(gen.integers(2, 6))
            m = TransitionMatrix(gen.dirichlet(np.ones(k), size=k))
            dominant = is_diagonally_dominant(m, tol=0.0)
            violated = []
            for y in range(k):
                eta = SimplexVector(np.eye(k)[y])
                out = compose_noisy_posterior(m, eta)
                violated.append(argmax_set(out) != {y})
            assert dominant == (not any(violated))


class TestUniversalForm:
    def test_identity_decomposes_to_zero(self):
        assert universal_form_decompose(TransitionMatrix(np.eye(4))) == 0.0

    def test_round_trip(self):
        for k in (2, 3, 10):
            for e in (0.0, 0.05, 0.7 / k):
                m = make_symmetric(SymmetricNoiseSpec(k=k, e_offdiag=e))
                assert universal_form_decompose(m) == pytest.approx(e, abs=1e-12)

    def test_two_distinct_offdiagonals_rejected(self):
        m = TransitionMatrix([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.2, 0.7]])
        assert universal_form_decompose(m) is None

    def test_boundary_e_rejected(self):
        # uniform matrix: off-diagonals equal but e = 1/K is out of range
        assert universal_form_decompose(TransitionMatrix(np.full((4, 4), 0.25))) is None


class TestIsImmune:
    def _induced(self, gen, e, k, points=6):
        etas = [SimplexVector(gen.dirichlet(np.ones(k))) for _ in range(points)]
        return FinitePosteriorTriple(
            support=range(points),
            px=gen.dirichlet(np.ones(points)),
            eta=etas,
            eta_tilde=[compose_noisy_posterior(e, v) for v in etas],
        )

    def test_symmetric_noise_is_immune(self, gen):
        for k in (2, 3, 5):
            e = make_symmetric(SymmetricNoiseSpec(k=k, e_offdiag=0.8 / k))
            t = self._induced(gen, e, k)
            assert is_immune(t)
            assert positive_region(t) == set(range(t.size))

    def test_argmax_flip_breaks_immunity(self):
        t = FinitePosteriorTriple(
            support=(0,) * 1 + (1,),
            px=[0.5, 0.5],
            eta=[[0, 1, 0], [0, 1, 0]],
            eta_tilde=[[0, 0, 1], [0, 1, 0]],
        )
        assert not is_immune(t)


class TestSufficiency:
    def test_argmax_preserved_on_random_vectors(self, gen):
        # unique-argmax posteriors keep their argmax under the symmetric
        # form for every off-diagonal below 1/K
        for k in (2, 3, 5, 10):
            e = make_symmetric(SymmetricNoiseSpec(k=k, e_offdiag=0.95 / k))
            batch = gen.dirichlet(np.ones(k), size=2000)
            for row in batch:
                if np.sum(row == row.max()) > 1:
                    continue
                eta = SimplexVector(row)
                assert argmax_set(compose_noisy_posterior(e, eta)) == argmax_set(eta)

    def test_closed_form_strength(self, gen):
        # affine rescaling gives strength exactly 1 - K e; separated
        # coordinates keep float cancellation below the 1e-12 budget
        for k in (2, 3, 5, 10):
            spec = SymmetricNoiseSpec(k=k, e_offdiag=0.5 / k)
            e = make_symmetric(spec)
            for row in random_separated_batch(gen, k, 250, min_gap=0.01):
                eta = SimplexVector(row)
                m = rss(eta, compose_noisy_posterior(e, eta))
                assert m == pytest.approx(spec.rss_level, abs=1e-12)


class TestNecessity:
    def test_universal_form_has_no_counterexample(self):
        for k in (2, 3, 6):
            m = make_symmetric(SymmetricNoiseSpec(k=k, e_offdiag=0.6 / k))
            assert find_counterexample(m) is None

    def test_non_dominant_matrix_caught_by_one_hot(self):
        m = TransitionMatrix([[0.4, 0.6], [0.3, 0.7]])
        witness = find_counterexample(m)
        assert witness is not None
        assert argmax_set(compose_noisy_posterior(m, witness)) != argmax_set(witness)

    def test_random_out_of_form_matrices_all_caught(self, gen):
        caught = 0
        attempts = 0
        while caught < 100:
            attempts += 1
            k = int(gen.integers(2, 7))
            m = TransitionMatrix(gen.dirichlet(np.ones(k), size=k))
            if universal_form_decompose(m) is not None:
                continue
            witness = find_counterexample(m)
            assert witness is not None, f"no witness for {m.to_lists()}"
            assert argmax_set(compose_noisy_posterior(m, witness)) != argmax_set(witness)
            caught += 1
        assert attempts < 1000
