"""Pairwise anticommuting unitary generators on C^4 and the derived basis.

The four generators below have entries in {0, +-1, +-j}, so all identities
(anticommutation, unitarity, trace orthogonality) hold in exact floating
point arithmetic and are checked with exact equality, not tolerances.
Their 16 products, together with the same products multiplied by j, span
the 32-dimensional real space of all 4x4 complex matrices.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .realify import real_rank, tilde, vec


@dataclass(frozen=True)
class AnticommutingSet:
    """An ordered set of pairwise anticommuting unitary n x n matrices."""

    n: int
    generators: tuple


@dataclass(frozen=True)
class MatrixBasis:
    """Ordered real basis of 4x4 matrices built from generator products.

    ``labels[i]`` is ``(l1, l2, l3, l4, jflag)``: the element is
    ``j**jflag * F1**l1 * F2**l2 * F3**l3 * F4**l4``.
    """

    elements: tuple
    labels: tuple


def generators4() -> AnticommutingSet:
    """The four 4x4 anticommuting unitary generators used by every code."""
    j = 1j
    f1 = np.diag([j, -j, -j, j])
    f2 = np.array(
        [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=complex
    )
    f3 = np.array(
        [[0, j, 0, 0], [j, 0, 0, 0], [0, 0, 0, j], [0, 0, j, 0]], dtype=complex
    )
    f4 = np.array(
        [[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex
    )
    return AnticommutingSet(n=4, generators=(f1, f2, f3, f4))


def product_basis(aset: AnticommutingSet) -> MatrixBasis:
    """All products F1^l1 F2^l2 F3^l3 F4^l4, then the same multiplied by j.

    Ordering is lexicographic in (l1, l2, l3, l4) with the non-j block
    first, so downstream weight-matrix indices stay stable.
    """
    elements = []
    labels = []
    for jflag in (0, 1):
        for lam in product((0, 1), repeat=len(aset.generators)):
            m = np.eye(aset.n, dtype=complex)
            for li, f in zip(lam, aset.generators):
                if li:
                    m = m @ f
            if jflag:
                m = 1j * m
            elements.append(m)
            labels.append((*lam, jflag))
    return MatrixBasis(elements=tuple(elements), labels=tuple(labels))


def verify_anticommuting(aset: AnticommutingSet):
    """Exact check of unitarity and pairwise anticommutation.

    Returns ``(ok, report)`` where ``report`` lists each violation; an
    empty report means every check passed exactly (zero tolerance).
    """
    report = []
    n = aset.n
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)
    for i, f in enumerate(aset.generators):
        if f.shape != (n, n):
            report.append(f"F{i + 1} has shape {f.shape}, expected {(n, n)}")
            continue
        if not np.array_equal(f.conj().T @ f, eye):
            report.append(f"F{i + 1} is not exactly unitary")
    for i in range(len(aset.generators)):
        for k in range(i + 1, len(aset.generators)):
            fi, fk = aset.generators[i], aset.generators[k]
            if not np.array_equal(fi @ fk + fk @ fi, zero):
                report.append(f"F{i + 1} and F{k + 1} do not anticommute")
    return (not report), report


def basis_real_rank(basis: MatrixBasis) -> int:
    """Rank over R of the tilde-vec'd basis elements (32 when it spans)."""
    return real_rank([tilde(vec(m)) for m in basis.elements])
