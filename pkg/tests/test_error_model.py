import numpy as np
import pytest

from detcorr import (
    DetectorModel,
    NoDataError,
    SingularModelError,
    apply_m,
    apply_m_inverse,
    calibrate,
    m_element,
    single_qubit_inverse,
    single_qubit_matrix,
)
from detcorr.error_model import explicit_matrix
from detcorr.reconstruct import CountsRecord


def random_model(rng, n, hi=0.2):
    return DetectorModel(tuple((rng.uniform(0, hi), rng.uniform(0, hi)) for _ in range(n)))


class TestSingleQubitMatrix:
    def test_no_error_is_identity(self):
        m = DetectorModel.uniform(1, 0.0)
        assert np.array_equal(single_qubit_matrix(m, 0), np.eye(2))

    def test_symmetric_three_percent(self):
        m = DetectorModel.uniform(1, 0.03)
        assert np.allclose(single_qubit_matrix(m, 0), [[0.97, 0.03], [0.03, 0.97]])

    def test_asymmetric_rates(self):
        m = DetectorModel(((0.1, 0.2),))
        d = single_qubit_matrix(m, 0)
        assert np.allclose(d, [[0.9, 0.2], [0.1, 0.8]])
        assert np.allclose(d.sum(axis=0), 1.0)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            single_qubit_matrix(DetectorModel.uniform(2, 0.1), 2)


class TestSingleQubitInverse:
    def test_identity_inverts_to_identity(self):
        m = DetectorModel.uniform(1, 0.0)
        assert np.allclose(single_qubit_inverse(m, 0), np.eye(2))

    def test_symmetric_three_percent(self):
        # p' = 0.03 / (0.06 - 1)
        m = DetectorModel.uniform(1, 0.03)
        pprime = 0.03 / (0.06 - 1.0)
        expected = np.array([[1 - pprime, pprime], [pprime, 1 - pprime]])
        inv = single_qubit_inverse(m, 0)
        assert np.allclose(inv, expected, atol=1e-15)
        assert inv[0, 1] == pytest.approx(-0.031914893617021274)

    def test_matches_numerical_inverse(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = random_model(rng, 1)
            assert np.allclose(
                single_qubit_inverse(m, 0), np.linalg.inv(single_qubit_matrix(m, 0)), atol=1e-12
            )

    def test_product_is_identity(self):
        m = DetectorModel(((0.07, 0.19),))
        prod = single_qubit_matrix(m, 0) @ single_qubit_inverse(m, 0)
        assert np.abs(prod - np.eye(2)).max() < 1e-12

    def test_singular_raises(self):
        m = DetectorModel.uniform(1, 0.5)
        with pytest.raises(SingularModelError):
            single_qubit_inverse(m, 0)


class TestModelValidation:
    def test_rate_out_of_range(self):
        with pytest.raises(ValueError):
            DetectorModel(((1.2, 0.0),))

    def test_empty(self):
        with pytest.raises(ValueError):
            DetectorModel(())

    def test_singular_model_constructible_but_not_invertible(self):
        # applying the forward map is fine; only inversion fails
        m = DetectorModel.uniform(2, 0.5)
        apply_m(m, np.array([1.0, 0, 0, 0]))
        with pytest.raises(SingularModelError):
            apply_m_inverse(m, np.array([1.0, 0, 0, 0]))


class TestApplyM:
    def test_identity_model_is_noop(self):
        rng = np.random.default_rng(0)
        g = rng.random(8)
        assert np.array_equal(apply_m(DetectorModel.uniform(3, 0.0), g), g)

    def test_two_qubit_point_mass(self):
        m = DetectorModel.uniform(2, 0.1)
        f = apply_m(m, np.array([1.0, 0, 0, 0]))
        assert np.allclose(f, [0.81, 0.09, 0.09, 0.01], atol=1e-15)

    def test_single_qubit_hand_product(self):
        m = DetectorModel(((0.1, 0.2),))
        f = apply_m(m, np.array([0.5, 0.5]))
        assert np.allclose(f, [0.55, 0.45], atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_m(DetectorModel.uniform(2, 0.1), np.ones(8))

    def test_matches_elementwise_matrix(self):
        # independent construction: M[j, i] = prod_k D_k[j_k, i_k], element by element
        rng = np.random.default_rng(5)
        for n in (2, 4, 6):
            model = random_model(rng, n)
            dim = 1 << n
            jj, ii = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
            full = np.ones((dim, dim))
            for k in range(n):
                d = single_qubit_matrix(model, k)
                full *= d[(jj >> k) & 1, (ii >> k) & 1]
            g = rng.random(dim)
            assert np.abs(full @ g - apply_m(model, g)).max() < 1e-12

    def test_preserves_total_probability(self):
        rng = np.random.default_rng(6)
        model = random_model(rng, 5)
        g = rng.random(32)
        g /= g.sum()
        f = apply_m(model, g)
        assert np.all(f >= 0)
        assert abs(f.sum() - 1.0) < 1e-12


class TestApplyMInverse:
    def test_round_trip_random_models(self):
        rng = np.random.default_rng(12)
        for n in range(1, 7):
            for _ in range(5):
                model = random_model(rng, n)
                g = rng.random(1 << n)
                g /= g.sum()
                back = apply_m_inverse(model, apply_m(model, g))
                assert np.abs(back - g).max() < 1e-10

    def test_sum_preservation(self):
        rng = np.random.default_rng(13)
        model = random_model(rng, 4)
        f = rng.random(16)
        g = apply_m_inverse(model, f)
        assert abs(g.sum() - f.sum()) < 1e-12

    def test_identity_model_is_noop(self):
        f = np.array([0.2, 0.8])
        assert np.array_equal(apply_m_inverse(DetectorModel.uniform(1, 0.0), f), f)

    def test_single_qubit_inverse_of_hand_product(self):
        m = DetectorModel(((0.1, 0.2),))
        g = apply_m_inverse(m, np.array([0.55, 0.45]))
        assert np.allclose(g, [0.5, 0.5], atol=1e-12)

    def test_inverse_structure_matches_numeric_inverse(self):
        # tensored analytic inverse == numerical inverse of the explicit matrix
        rng = np.random.default_rng(14)
        for n in (2, 4, 6):
            model = random_model(rng, n)
            explicit_inv = explicit_matrix(model, inverse=True)
            numeric_inv = np.linalg.inv(explicit_matrix(model))
            assert np.abs(explicit_inv - numeric_inv).max() < 1e-8


class TestMElement:
    def test_diagonal_no_flips(self):
        model = DetectorModel.uniform(3, 0.07)
        for i in range(8):
            assert m_element(model, i, i) == pytest.approx(0.93**3)

    def test_single_one_to_zero_flip(self):
        # true "011" (one zero, two ones) recorded as "010": beta = 1 flip
        model = DetectorModel(((0.1, 0.2),) * 3)
        i = 0b110  # bitstring "011", qubit 0 leftmost
        j = 0b010  # bitstring "010"
        assert m_element(model, j, i) == pytest.approx(0.9 * 0.8 * 0.2)

    def test_column_stochasticity(self):
        rng = np.random.default_rng(15)
        for n in (1, 2, 4):
            model = random_model(rng, n, hi=0.4)
            for i in range(1 << n):
                total = sum(m_element(model, j, i) for j in range(1 << n))
                assert total == pytest.approx(1.0, abs=1e-12)

    def test_index_validation(self):
        model = DetectorModel.uniform(2, 0.1)
        with pytest.raises(ValueError):
            m_element(model, 4, 0)


class TestCalibrate:
    def test_three_percent_example(self):
        zeros = CountsRecord(1, {0: 9700, 1: 300}, "Z")
        ones = CountsRecord(1, {1: 9700, 0: 300}, "Z")
        result = calibrate([("0", zeros), ("1", ones)])
        p0, p1 = result.model.per_qubit[0]
        assert p0 == pytest.approx(0.03)
        assert p1 == pytest.approx(0.03)
        assert result.p0_stderr[0] == pytest.approx(0.001705872210923198)

    def test_perfect_counts_give_zero_rates(self):
        zeros = CountsRecord(2, {0: 500}, "ZZ")
        ones = CountsRecord(2, {3: 500}, "ZZ")
        result = calibrate([(0, zeros), (3, ones)])
        assert result.model.p0.tolist() == [0.0, 0.0]
        assert result.model.p1.tolist() == [0.0, 0.0]
        assert result.p1_stderr == (0.0, 0.0)

    def test_missing_ones_run_raises(self):
        zeros = CountsRecord(1, {0: 100}, "Z")
        with pytest.raises(NoDataError, match="p1"):
            calibrate([(0, zeros)])

    def test_no_records(self):
        with pytest.raises(NoDataError):
            calibrate([])

    def test_recovers_true_rates_from_sampled_counts(self):
        rng = np.random.default_rng(21)
        n, shots = 3, 20000
        true = DetectorModel(((0.02, 0.05), (0.1, 0.01), (0.0, 0.15)))
        records = []
        for known in (0, (1 << n) - 1):
            outcomes = np.full(shots, known, dtype=np.int64)
            for k in range(n):
                p0, p1 = true.per_qubit[k]
                bits = (outcomes >> k) & 1
                flips = rng.random(shots) < np.where(bits == 1, p1, p0)
                outcomes ^= flips.astype(np.int64) << k
            records.append((known, CountsRecord.from_outcomes(n, outcomes, "Z" * n)))
        result = calibrate(records)
        for k in range(n):
            assert result.model.per_qubit[k][0] == pytest.approx(
                true.per_qubit[k][0], abs=5 * max(result.p0_stderr[k], 1e-3)
            )
            assert result.model.per_qubit[k][1] == pytest.approx(
                true.per_qubit[k][1], abs=5 * max(result.p1_stderr[k], 1e-3)
            )

    def test_mixed_known_states_cover_both_rates(self):
        # "01" exposes qubit 0 to 0 and qubit 1 to 1; "10" covers the rest
        rec01 = CountsRecord(2, {0b10: 1000}, "ZZ")
        rec10 = CountsRecord(2, {0b01: 1000}, "ZZ")
        result = calibrate([("01", rec01), ("10", rec10)])
        assert result.shots_at_zero == (1000, 1000)
        assert result.shots_at_one == (1000, 1000)


def test_explicit_matrix_guard():
    with pytest.raises(ValueError):
        explicit_matrix(DetectorModel.uniform(13, 0.01))
