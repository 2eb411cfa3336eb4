import numpy as np
import pytest

from detcorr import (
    CountsRecord,
    DetectorModel,
    Distribution,
    ResourceLimitError,
    apply_m,
    correct,
    frequencies,
    project_to_simplex,
)
from detcorr.error_model import apply_factored, inverse_factor_matrices


class TestCountsRecord:
    def test_shots_and_arrays(self):
        rec = CountsRecord(2, {0: 3, 3: 7}, "ZZ")
        assert rec.shots == 10
        idx, cnt = rec.index_arrays()
        assert idx.tolist() == [0, 3] and cnt.tolist() == [3, 7]

    def test_validation(self):
        with pytest.raises(ValueError):
            CountsRecord(2, {4: 1}, "ZZ")  # index out of range
        with pytest.raises(ValueError):
            CountsRecord(2, {0: -1}, "ZZ")
        with pytest.raises(ValueError):
            CountsRecord(2, {}, "ZZ")  # empty
        with pytest.raises(ValueError):
            CountsRecord(2, {0: 1}, "ZQ")  # bad basis letter

    def test_from_outcomes(self):
        rec = CountsRecord.from_outcomes(2, np.array([0, 0, 3, 1]), "ZZ")
        assert rec.counts == {0: 2, 1: 1, 3: 1}


class TestFrequencies:
    def test_point_mass_has_zero_bar(self):
        rec = CountsRecord(2, {2: 100}, "ZZ")
        dist = frequencies(rec)
        assert dist.values.tolist() == [0, 0, 1, 0]
        assert dist.sigmas[2] == 0.0

    def test_quarter_frequency_bar(self):
        rec = CountsRecord(1, {0: 50, 1: 150}, "Z")
        dist = frequencies(rec)
        assert dist.values[0] == pytest.approx(0.25)
        assert dist.sigmas[0] == pytest.approx(0.030618621784789725)

    def test_uniform_four_outcomes(self):
        rec = CountsRecord(2, {i: 100 for i in range(4)}, "ZZ")
        dist = frequencies(rec)
        assert np.allclose(dist.values, 0.25)
        assert np.allclose(dist.sigmas, 0.021650635094610966)


class TestCorrect:
    def test_trivial_model_reduces_to_frequencies(self):
        rec = CountsRecord(3, {0: 10, 5: 20, 7: 70}, "ZZZ")
        raw = frequencies(rec)
        fixed = correct(rec, DetectorModel.uniform(3, 0.0))
        assert np.array_equal(fixed.values, raw.values)
        assert np.allclose(fixed.sigmas, raw.sigmas, atol=1e-15)

    def test_single_qubit_exact_inversion(self):
        # counts proportional to the distorted image of |0>
        rec = CountsRecord(1, {0: 9700, 1: 300}, "Z")
        dist = correct(rec, DetectorModel.uniform(1, 0.03))
        assert np.allclose(dist.values, [1.0, 0.0], atol=1e-12)

    def test_normalization_preserved(self):
        rng = np.random.default_rng(31)
        rec = CountsRecord(4, {int(i): int(c) for i, c in enumerate(rng.integers(1, 50, 16))}, "ZZZZ")
        model = DetectorModel(tuple((rng.uniform(0, 0.2), rng.uniform(0, 0.2)) for _ in range(4)))
        dist = correct(rec, model)
        assert abs(dist.values.sum() - 1.0) < 1e-10

    def test_point_mass_has_zero_corrected_bar(self):
        # f = e_j makes the variance radicand vanish identically
        rec = CountsRecord(2, {1: 500}, "ZZ")
        dist = correct(rec, DetectorModel.uniform(2, 0.1))
        assert np.allclose(dist.sigmas, 0.0, atol=1e-12)

    def test_unbiasedness_over_repetitions(self):
        rng = np.random.default_rng(32)
        n, shots, reps = 2, 2000, 1000
        model = DetectorModel.uniform(n, 0.05)
        g_true = np.array([0.5, 0.3, 0.15, 0.05])
        f_exact = apply_m(model, g_true)
        samples = rng.multinomial(shots, f_exact, size=reps) / shots
        g_hat = apply_factored(inverse_factor_matrices(model), samples)
        mean = g_hat.mean(axis=0)
        stderr = g_hat.std(axis=0, ddof=1) / np.sqrt(reps)
        assert np.all(np.abs(mean - g_true) < 3 * stderr + 1e-12)

    def test_error_bar_growth_with_qubit_number(self):
        # product state |0...0>, p = 0.05: the largest corrected bar grows with n
        prev = 0.0
        for n in range(1, 9):
            model = DetectorModel.uniform(n, 0.05)
            g = np.zeros(1 << n)
            g[0] = 1.0
            f = apply_m(model, g)
            counts = {int(i): int(round(c * 10**7)) for i, c in enumerate(f) if c > 0}
            dist = correct(CountsRecord(n, counts, "Z" * n), model)
            peak = dist.sigmas.max()
            assert peak > prev
            prev = peak

    def test_corrected_bars_not_smaller_than_binomial(self):
        rng = np.random.default_rng(33)
        rec = CountsRecord(3, {int(i): int(c) for i, c in enumerate(rng.integers(10, 100, 8))}, "ZZZ")
        raw = frequencies(rec)
        fixed = correct(rec, DetectorModel.uniform(3, 0.05))
        assert fixed.sigmas.max() >= raw.sigmas.max()

    def test_dimension_mismatch(self):
        rec = CountsRecord(2, {0: 10}, "ZZ")
        with pytest.raises(ValueError):
            correct(rec, DetectorModel.uniform(3, 0.01))

    def test_memory_guard(self):
        rec = CountsRecord(27, {0: 10}, "Z" * 27)
        with pytest.raises(ResourceLimitError):
            correct(rec, DetectorModel.uniform(27, 0.01))


class TestDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            Distribution(values=np.ones(2), sigmas=np.ones(3), shots=10)
        with pytest.raises(ValueError):
            Distribution(values=np.ones(2), sigmas=-np.ones(2), shots=10)


class TestSimplexProjection:
    def test_already_valid_is_unchanged(self):
        p = np.array([0.2, 0.3, 0.5])
        assert np.allclose(project_to_simplex(p), p)

    def test_negative_entry_clipped(self):
        assert np.allclose(project_to_simplex(np.array([1.2, -0.2])), [1.0, 0.0])

    def test_properties_random(self):
        rng = np.random.default_rng(34)
        for _ in range(50):
            x = rng.normal(size=rng.integers(2, 20))
            x += (1 - x.sum()) / x.size  # keep total mass 1, entries arbitrary sign
            p = project_to_simplex(x)
            assert np.all(p >= 0)
            assert p.sum() == pytest.approx(1.0)
            assert np.allclose(project_to_simplex(p), p, atol=1e-12)

    def test_projection_flag_on_corrected_distribution(self):
        rec = CountsRecord(1, {0: 999, 1: 1}, "Z")
        dist = correct(rec, DetectorModel.uniform(1, 0.03), project=True)
        assert dist.projected
        assert np.all(dist.values >= 0)
        assert dist.values.sum() == pytest.approx(1.0)
