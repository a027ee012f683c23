"""Unit tests for the anticommuting generators and the product basis."""

import numpy as np

from stbclab.clifford import (
    AnticommutingSet,
    basis_real_rank,
    generators4,
    product_basis,
    verify_anticommuting,
)
from stbclab.realify import real_rank, tilde, vec


def test_generator_entries_match_reference():
    f1, f2, f3, f4 = generators4().generators
    assert f1[0, 0] == 1j and f1[1, 1] == -1j and f1[2, 2] == -1j and f1[3, 3] == 1j
    np.testing.assert_array_equal(f2[0], [0, 1, 0, 0])
    np.testing.assert_array_equal(f2[1], [-1, 0, 0, 0])
    assert f3[0, 1] == 1j and f3[1, 0] == 1j and f3[2, 3] == 1j and f3[3, 2] == 1j
    assert f4[0, 2] == 1 and f4[2, 0] == -1
    assert f4[1, 3] == -1 and f4[3, 1] == 1


def test_verify_anticommuting_exact():
    ok, report = verify_anticommuting(generators4())
    assert ok and report == []


def test_identity_does_not_anticommute():
    f1 = generators4().generators[0]
    ok, report = verify_anticommuting(
        AnticommutingSet(n=4, generators=(np.eye(4, dtype=complex), f1))
    )
    assert not ok
    assert any("F1 and F2" in line for line in report)


def test_sign_flip_detected_with_pair_named():
    # flipping one F2 entry cannot break the F1 pairing (F1's diagonal
    # phases cancel on that support) but must break a later pairing
    gens = list(generators4().generators)
    bad = gens[1].copy()
    bad[0, 1] = -bad[0, 1]
    ok, report = verify_anticommuting(
        AnticommutingSet(n=4, generators=(gens[0], bad, gens[2], gens[3]))
    )
    assert not ok
    assert any("F2" in line for line in report)


class TestProductBasis:
    def setup_method(self):
        self.basis = product_basis(generators4())

    def test_first_element_identity(self):
        assert self.basis.labels[0] == (0, 0, 0, 0, 0)
        np.testing.assert_array_equal(self.basis.elements[0], np.eye(4))

    def test_f1_position(self):
        f1 = generators4().generators[0]
        idx = self.basis.labels.index((1, 0, 0, 0, 0))
        np.testing.assert_array_equal(self.basis.elements[idx], f1)

    def test_rank_32(self):
        assert basis_real_rank(self.basis) == 32

    def test_j_block_ordering(self):
        # first 16 without the j factor, then the same multiplied by j
        for i in range(16):
            assert self.basis.labels[i][-1] == 0
            assert self.basis.labels[16 + i][:4] == self.basis.labels[i][:4]
            np.testing.assert_array_equal(
                self.basis.elements[16 + i], 1j * self.basis.elements[i]
            )

    def test_all_unitary(self):
        eye = np.eye(4, dtype=complex)
        for m in self.basis.elements:
            np.testing.assert_array_equal(m.conj().T @ m, eye)

    def test_non_j_products_trace_orthogonal_exact(self):
        first16 = self.basis.elements[:16]
        for i in range(16):
            for k in range(16):
                if i != k:
                    assert np.trace(first16[i].conj().T @ first16[k]) == 0

    def test_rank_invariant_under_reordering(self):
        rng = np.random.default_rng(11)
        perm = rng.permutation(32)
        vecs = [tilde(vec(self.basis.elements[p])) for p in perm]
        assert real_rank(vecs) == 32
