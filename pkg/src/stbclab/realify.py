"""Complex/real bridging operators and the small dense linear-algebra kernel.

Everything downstream works in one of two coordinate systems: complex
matrices (codewords, channels) or their real expansions (equivalent
channels, decoder metrics).  The operators here fix the conventions once:
``vec`` stacks columns, ``tilde`` interleaves real/imaginary parts, and
``check_expand`` replaces each complex entry by its 2x2 real rotation
block, so that ``tilde(M @ z) == check_expand(M) @ tilde(z)``.
"""

import numpy as np

_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


class RankDeficiencyError(ValueError):
    """A QR pivot fell below tolerance; the caller decides how to recover."""


def check_expand(x) -> np.ndarray:
    """Expand a complex n x m matrix to the real 2n x 2m block matrix.

    Each entry ``a + jb`` becomes the block ``[[a, -b], [b, a]]``.  The map
    is a ring homomorphism: ``check_expand(X @ Y) == check_expand(X) @
    check_expand(Y)``.
    """
    X = np.atleast_2d(np.asarray(x, dtype=complex))
    return np.kron(X.real, np.eye(2)) + np.kron(X.imag, _ROT)


def vec(x) -> np.ndarray:
    """Stack the columns of a matrix into one vector (column-major)."""
    return np.asarray(x).ravel(order="F")


def tilde(x) -> np.ndarray:
    """Interleave a complex vector into [x1_re, x1_im, x2_re, x2_im, ...]."""
    x = np.asarray(x, dtype=complex).ravel()
    out = np.empty(2 * x.size)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out


def complex_from_tilde(v) -> np.ndarray:
    """Inverse of :func:`tilde`."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size % 2:
        raise ValueError("tilde vector length must be even")
    return v[0::2] + 1j * v[1::2]


def kron(a, b) -> np.ndarray:
    """Kronecker product (thin wrapper, kept for a uniform kernel surface)."""
    return np.kron(np.asarray(a), np.asarray(b))


def qr_thin(a, pivot_tol: float = 1e-12):
    """Thin QR of a real p x q matrix (p >= q) with nonnegative R diagonal.

    Householder-based (numpy), with column signs fixed afterwards so the
    factorization is unique for full-rank input.  Raises
    :class:`RankDeficiencyError` when any diagonal pivot magnitude falls
    below ``pivot_tol``; a random-channel caller may resample, an analysis
    caller may treat it as a genuine rank deficiency.
    """
    A = np.asarray(a, dtype=float)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise ValueError(f"qr_thin expects p >= q, got shape {A.shape}")
    Q, R = np.linalg.qr(A, mode="reduced")
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    Q = Q * d
    R = R * d[:, None]
    if np.abs(np.diag(R)).min(initial=np.inf) < pivot_tol:
        raise RankDeficiencyError("diagonal pivot below tolerance")
    return Q, R


def det4(x) -> np.ndarray:
    """Determinant of 4x4 complex matrices, closed-form cofactor expansion.

    Accepts a single (4, 4) matrix or a batch (..., 4, 4); vectorized over
    the batch, which is what the exhaustive determinant searches need.
    """
    m = np.asarray(x, dtype=complex)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"expected (..., 4, 4), got {m.shape}")
    # 2x2 minors of the last two rows, Laplace expansion along rows 0-1
    def m2(r, s, c0, c1):
        return m[..., r, c0] * m[..., s, c1] - m[..., r, c1] * m[..., s, c0]

    out = (
        m2(0, 1, 0, 1) * m2(2, 3, 2, 3)
        - m2(0, 1, 0, 2) * m2(2, 3, 1, 3)
        + m2(0, 1, 0, 3) * m2(2, 3, 1, 2)
        + m2(0, 1, 1, 2) * m2(2, 3, 0, 3)
        - m2(0, 1, 1, 3) * m2(2, 3, 0, 2)
        + m2(0, 1, 2, 3) * m2(2, 3, 0, 1)
    )
    return out if out.ndim else out[()]


def real_rank(vectors, rel_tol: float = 1e-9) -> int:
    """Rank over the reals of a list of equal-length real vectors.

    Gaussian elimination with full pivoting; a pivot counts while its
    magnitude exceeds ``rel_tol`` times the first (largest) pivot.
    """
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        return 0
    lengths = {v.size for v in vecs}
    if len(lengths) != 1:
        raise ValueError("vectors must have equal lengths")
    a = np.array(vecs)
    first_pivot = np.abs(a).max()
    if first_pivot == 0.0:
        return 0
    thresh = rel_tol * first_pivot
    rank = 0
    rows = list(range(a.shape[0]))
    cols = list(range(a.shape[1]))
    while rows and cols:
        sub = np.abs(a[np.ix_(rows, cols)])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= thresh:
            break
        pr, pc = rows[i], cols[j]
        pivot = a[pr, pc]
        for r in rows:
            if r != pr:
                a[r, :] -= (a[r, pc] / pivot) * a[pr, :]
        rows.pop(i)
        cols.pop(j)
        rank += 1
    return rank
