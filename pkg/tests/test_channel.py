"""Unit tests for channel sampling and the equivalent real model."""

import numpy as np
import pytest

from stbclab.channel import equivalent_channel, sample_channel, transmit
from stbclab.codes import encode, rate_code, rotated_qam
from stbclab.realify import tilde, vec


class TestSampling:
    def test_statistics(self):
        rng = np.random.default_rng(20)
        draws = np.concatenate([sample_channel(4, rng).ravel() for _ in range(6250)])
        assert draws.size == 100_000
        assert abs(draws.mean()) < 0.02
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_determinism(self):
        h1 = sample_channel(3, np.random.default_rng(7))
        h2 = sample_channel(3, np.random.default_rng(7))
        np.testing.assert_array_equal(h1, h2)

    def test_bad_nr(self):
        with pytest.raises(ValueError):
            sample_channel(0, np.random.default_rng(0))


class TestTransmit:
    def test_noiseless_exact(self):
        rng = np.random.default_rng(21)
        s = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = sample_channel(2, rng)
        y = transmit(s, h, 10.0, None)
        np.testing.assert_array_equal(y, np.sqrt(10.0 / 4.0) * (h @ s))

    def test_zero_signal_noise_variance(self):
        rng = np.random.default_rng(22)
        h = sample_channel(2, rng)
        samples = np.concatenate(
            [transmit(np.zeros((4, 4)), h, 1.0, rng).ravel() for _ in range(5000)]
        )
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(1.0, rel=0.03)

    def test_received_energy_scaling(self):
        """Mean received signal power per entry is SNR * E||S||^2 / (n_t T)."""
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(23)
        snr = 4.0
        acc = 0.0
        trials = 4000
        for _ in range(trials):
            s = encode(code, const.rotated_points[rng.integers(0, 4, code.k)])
            h = sample_channel(2, rng)
            y = transmit(s, h, snr, None)
            acc += np.mean(np.abs(y) ** 2)
        assert acc / trials == pytest.approx(snr, rel=0.03)

    def test_bad_snr(self):
        with pytest.raises(ValueError):
            transmit(np.zeros((4, 4)), np.zeros((2, 4)), 0.0, None)


class TestEquivalentChannel:
    def test_consistency_with_complex_model(self):
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(24)
        for _ in range(50):
            h = sample_channel(2, rng)
            eq = equivalent_channel(h, code, const)
            s = rng.standard_normal(code.k) + 1j * rng.standard_normal(code.k)
            lhs = tilde(vec(h @ encode(code, s)))
            assert np.abs(lhs - eq.h_eq @ tilde(s)).max() < 1e-10

    def test_metric_isometry(self):
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(25)
        h = sample_channel(2, rng)
        s = const.rotated_points[rng.integers(0, 4, code.k)]
        y = transmit(encode(code, s), h, 10.0, rng)
        lhs = np.linalg.norm(y - np.sqrt(10.0 / 4.0) * h @ encode(code, s)) ** 2
        rhs = (
            np.linalg.norm(
                tilde(vec(y)) - np.sqrt(10.0 / 4.0) * equivalent_channel(h, code, const).h_eq @ tilde(s)
            )
            ** 2
        )
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_rotation_orthogonal(self):
        eq = equivalent_channel(
            sample_channel(2, np.random.default_rng(26)), rate_code(2), rotated_qam(4)
        )
        assert np.abs(eq.f.T @ eq.f - np.eye(16)).max() < 1e-12

    def test_projected_metric_square_case(self):
        """With n_r = n_min the reduced metric equals the full metric exactly."""
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(27)
        h = sample_channel(2, rng)
        eq = equivalent_channel(h, code, const)
        snr = 10.0
        y = transmit(encode(code, const.rotated_points[rng.integers(0, 4, 8)]), h, snr, rng)
        y_prime = eq.project(y)
        for _ in range(100):
            x = const.pam[rng.integers(0, 2, 16)]
            full = np.linalg.norm(tilde(vec(y)) - np.sqrt(snr / 4) * eq.h_eq @ eq.f @ x) ** 2
            red = np.linalg.norm(y_prime - np.sqrt(snr / 4) * eq.r @ x) ** 2
            assert full == pytest.approx(red, abs=1e-9)

    def test_projected_metric_tall_case_differences(self):
        """With n_r > n_min the two metrics differ by a candidate-independent constant."""
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(28)
        h = sample_channel(3, rng)
        eq = equivalent_channel(h, code, const)
        snr = 10.0
        y = transmit(encode(code, const.rotated_points[rng.integers(0, 4, 8)]), h, snr, rng)
        y_prime = eq.project(y)
        gaps = []
        for _ in range(50):
            x = const.pam[rng.integers(0, 2, 16)]
            full = np.linalg.norm(tilde(vec(y)) - np.sqrt(snr / 4) * eq.h_eq @ eq.f @ x) ** 2
            red = np.linalg.norm(y_prime - np.sqrt(snr / 4) * eq.r @ x) ** 2
            gaps.append(full - red)
        assert np.ptp(gaps) < 1e-9

    def test_no_resampling_needed_for_generic_channels(self):
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(29)
        for _ in range(2000):
            equivalent_channel(sample_channel(2, rng), code, const)
