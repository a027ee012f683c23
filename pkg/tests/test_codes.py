"""Unit tests for code construction, constellations, and the weight file."""

import numpy as np
import pytest

from stbclab.clifford import generators4
from stbclab.codes import (
    ciod4,
    encode,
    generator_matrix,
    get_code,
    load_weights,
    rate_code,
    rotated_qam,
    save_weights,
)
from stbclab.realify import tilde, vec


def _reference_base_weights():
    """The eight base weights written out directly from the generators."""
    f1, f2, f3, _ = generators4().generators
    i4 = np.eye(4, dtype=complex)
    return [
        i4 - f1 @ f2 @ f3,
        f1 - f2 @ f3,
        f1 @ f3 - f2,
        f3 - f1 @ f2,
        i4 + f1 @ f2 @ f3,
        f1 + f2 @ f3,
        -f2 - f1 @ f3,
        f3 + f1 @ f2,
    ]


class TestConstruction:
    def test_base_weights_exact(self):
        code = ciod4()
        ref = _reference_base_weights()
        for got, want in zip(code.weights, ref):
            np.testing.assert_array_equal(got, want)

    def test_raw_weight_norms(self):
        for r in (1, 2, 3, 4):
            code = rate_code(r)
            for w in code.weights:
                assert np.linalg.norm(w) ** 2 == pytest.approx(8.0, abs=1e-12)
            for w in code.scaled_weights():
                assert np.linalg.norm(w) ** 2 == pytest.approx(16.0 / code.k, abs=1e-12)

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            rate_code(5)

    def test_nesting_prefix(self):
        full = rate_code(4)
        for r in (1, 2, 3):
            np.testing.assert_array_equal(rate_code(r).weights, full.weights[: 8 * r])

    def test_third_block_is_j_times_base(self):
        full = rate_code(4)
        ref = _reference_base_weights()
        np.testing.assert_array_equal(full.weights[16], 1j * ref[0])
        np.testing.assert_array_equal(full.weights[23], 1j * ref[7])

    def test_rate2_codeword_identity(self):
        """S = base(s1..4) + e^{j pi/4} base(s5..8) F4, checked via raw sums."""
        rng = np.random.default_rng(12)
        f4 = generators4().generators[3]
        ref = _reference_base_weights()
        code = rate_code(2)
        s = rng.standard_normal(8) + 1j * rng.standard_normal(8)

        def raw_base(sym):
            st = tilde(sym)
            return sum(st[i] * ref[i] for i in range(8))

        want = code.scale * (raw_base(s[:4]) + np.exp(1j * np.pi / 4) * raw_base(s[4:]) @ f4)
        np.testing.assert_allclose(encode(code, s), want, atol=1e-12)

    def test_rate4_punctured_equals_rate2(self):
        rng = np.random.default_rng(13)
        s = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        full = rate_code(4)
        half = rate_code(2)
        padded = np.concatenate([s, np.zeros(8)])
        np.testing.assert_allclose(
            encode(full, padded) / full.scale, encode(half, s) / half.scale, atol=1e-12
        )

    def test_full_rate_definition(self):
        for r in (1, 2, 3, 4):
            code = rate_code(r)
            assert code.k / code.T == r == min(4, r)


class TestEncode:
    def test_zero_symbols(self):
        np.testing.assert_array_equal(encode(rate_code(2), np.zeros(8)), np.zeros((4, 4)))

    def test_unit_symbol_gives_scaled_weight(self):
        code = rate_code(2)
        s = np.zeros(8, dtype=complex)
        s[0] = 1.0
        np.testing.assert_allclose(encode(code, s), code.scale * code.weights[0], atol=1e-15)

    def test_linearity(self):
        rng = np.random.default_rng(14)
        code = rate_code(3)
        a = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        b = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        np.testing.assert_allclose(
            encode(code, a + b), encode(code, a) + encode(code, b), atol=1e-12
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            encode(rate_code(2), np.zeros(7))


class TestGeneratorMatrix:
    def test_columns_are_tilde_vec_weights(self):
        code = rate_code(2)
        g = generator_matrix(code)
        for i, w in enumerate(code.scaled_weights()):
            np.testing.assert_allclose(g[:, i], tilde(vec(w)), atol=1e-15)

    def test_consistency_on_random_symbols(self):
        for r in (1, 2, 3, 4):
            code = rate_code(r)
            g = generator_matrix(code)
            rng = np.random.default_rng(15 + r)
            for _ in range(100):
                s = rng.standard_normal(code.k) + 1j * rng.standard_normal(code.k)
                lhs = tilde(vec(encode(code, s)))
                assert np.abs(lhs - g @ tilde(s)).max() < 1e-12

    def test_rate4_gram_identity(self):
        g = generator_matrix(rate_code(4))
        assert np.abs(g.T @ g - np.eye(32)).max() < 1e-12

    def test_rate2_gram_is_twice_identity(self):
        g = generator_matrix(rate_code(2))
        assert np.abs(g.T @ g - 2.0 * np.eye(16)).max() < 1e-12

    def test_base_block_trace_orthogonal_exact(self):
        w = ciod4().weights
        for i in range(8):
            for k in range(8):
                if i != k:
                    assert np.trace(w[i].conj().T @ w[k]) == 0

    def test_energy_normalization_monte_carlo(self):
        code = rate_code(2)
        const = rotated_qam(4)
        rng = np.random.default_rng(16)
        draws = rng.integers(0, 4, size=(4000, code.k))
        energy = np.mean(
            [np.linalg.norm(encode(code, const.rotated_points[d])) ** 2 for d in draws]
        )
        assert energy == pytest.approx(16.0, rel=0.01)


class TestConstellation:
    def test_default_rotation_angle(self):
        const = rotated_qam(4)
        assert const.rotation == pytest.approx(0.5 * np.arctan(2.0), abs=1e-12)
        assert const.rotation == pytest.approx(0.55357, abs=1e-5)

    def test_unit_energy_4qam(self):
        const = rotated_qam(4)
        want = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
        got = {complex(round(p.real * np.sqrt(2)), round(p.imag * np.sqrt(2))) for p in const.points}
        assert got == want
        assert np.mean(np.abs(const.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_rotation_preserves_energy(self):
        for m in (4, 16, 64):
            const = rotated_qam(m)
            assert np.sum(np.abs(const.rotated_points) ** 2) == pytest.approx(
                np.sum(np.abs(const.points) ** 2), abs=1e-9
            )

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            rotated_qam(8)

    def test_index_layout(self):
        const = rotated_qam(16)
        m = const.m
        for ia in range(m):
            for ib in range(m):
                assert const.points[ia * m + ib] == pytest.approx(
                    const.pam[ia] + 1j * const.pam[ib]
                )


class TestWeightFile:
    def test_roundtrip_bit_exact(self, tmp_path):
        code = rate_code(2)
        path = tmp_path / "rate2.weights"
        save_weights(code, path)
        loaded = load_weights(path)
        assert loaded.k == code.k
        np.testing.assert_array_equal(loaded.scaled_weights(), code.scaled_weights())

    def test_duplicate_weights_rejected(self, tmp_path):
        path = tmp_path / "dup.weights"
        block = "\n".join(" ".join("1.0+0.0i" for _ in range(4)) for _ in range(4))
        path.write_text(block + "\n\n" + block + "\n")
        with pytest.raises(ValueError, match="dependent"):
            load_weights(path)

    def test_non_4x4_rejected(self, tmp_path):
        path = tmp_path / "bad.weights"
        path.write_text("1.0+0.0i 1.0+0.0i\n1.0+0.0i 1.0+0.0i\n")
        with pytest.raises(ValueError, match="4x4"):
            load_weights(path)

    def test_malformed_token_rejected(self, tmp_path):
        path = tmp_path / "tok.weights"
        path.write_text("\n".join(" ".join("oops" for _ in range(4)) for _ in range(4)) + "\n")
        with pytest.raises(ValueError, match="malformed"):
            load_weights(path)

    def test_handwritten_alamouti_style_set(self, tmp_path):
        """A 2-symbol orthogonal design embedded in the upper 2x2 block."""

        def fmt(m):
            def tok(z):
                sign = "+" if z.imag >= 0 else "-"
                return f"{float(z.real)!r}{sign}{abs(float(z.imag))!r}i"

            return "\n".join(" ".join(tok(z) for z in row) for row in m)

        a1 = np.zeros((4, 4), dtype=complex)
        a1[0, 0] = 1
        a1[1, 1] = 1
        a2 = np.zeros((4, 4), dtype=complex)
        a2[0, 0] = 1j
        a2[1, 1] = -1j
        a3 = np.zeros((4, 4), dtype=complex)
        a3[0, 1] = 1
        a3[1, 0] = -1
        a4 = np.zeros((4, 4), dtype=complex)
        a4[0, 1] = 1j
        a4[1, 0] = 1j
        path = tmp_path / "alamouti.weights"
        path.write_text("\n\n".join(fmt(m) for m in (a1, a2, a3, a4)) + "\n")
        code = load_weights(path)
        assert code.k == 2
        s = np.array([1 + 2j, 3 - 1j])
        got = encode(code, s)
        want = s[0].real * a1 + s[0].imag * a2 + s[1].real * a3 + s[1].imag * a4
        np.testing.assert_allclose(got, want, atol=1e-15)

    def test_get_code_resolves_names_and_paths(self, tmp_path):
        assert get_code("ciod").k == 4
        assert get_code("rate1").k == 4
        assert get_code("rate3").k == 12
        path = tmp_path / "w.weights"
        save_weights(rate_code(1), path)
        assert get_code(str(path)).k == 4
