"""Rayleigh block-fading channel and the real-valued equivalent model.

One channel draw H stays fixed over the T = 4 uses of a codeword.  The
equivalent model turns Y = sqrt(SNR/4) H S + N into a real linear system
in the unrotated symbol coordinates:

    tilde(vec(Y)) = sqrt(SNR/4) * H_eq @ F @ x_tilde + noise
    H_eq = (I_T (x) check(H)) @ G,     F = I_k (x) J(theta)

and QR of (H_eq @ F) gives the upper-triangular R the decoders consume.
"""

from dataclasses import dataclass

import numpy as np

from .codes import Constellation, LinearDispersionCode, generator_matrix, rotation_matrix
from .realify import check_expand, kron, qr_thin, tilde, vec


def sample_channel(n_r: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n_r x 4 matrix of unit-variance circular complex Gaussians."""
    if n_r < 1:
        raise ValueError("n_r must be positive")
    re = rng.standard_normal((n_r, 4))
    im = rng.standard_normal((n_r, 4))
    return (re + 1j * im) * np.sqrt(0.5)


def transmit(
    s_matrix: np.ndarray,
    h: np.ndarray,
    snr_linear: float,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Received matrix sqrt(SNR/n_t) H S plus unit-variance complex noise.

    Pass ``rng=None`` to disable the noise term (exact, noiseless output).
    """
    if snr_linear <= 0:
        raise ValueError("snr_linear must be positive")
    y = np.sqrt(snr_linear / 4.0) * (h @ s_matrix)
    if rng is not None:
        n = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) * np.sqrt(0.5)
        y = y + n
    return y


@dataclass
class EquivalentChannel:
    """H_eq with the rotation F and the QR factors of H_eq @ F."""

    h_eq: np.ndarray
    f: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def project(self, y_matrix: np.ndarray) -> np.ndarray:
        """y' = Q^T tilde(vec(Y)), the decoder-side observation."""
        return self.q.T @ tilde(vec(y_matrix))


def equivalent_channel(
    h: np.ndarray, code: LinearDispersionCode, constellation: Constellation
) -> EquivalentChannel:
    """Build the real equivalent channel for one realization.

    Raises :class:`stbclab.realify.RankDeficiencyError` via ``qr_thin``
    when H_eq @ F is (numerically) column-rank deficient; campaign code
    resamples the channel in that case.
    """
    g = generator_matrix(code)
    h_eq = kron(np.eye(code.T), check_expand(h)) @ g
    f = kron(np.eye(code.k), rotation_matrix(constellation.rotation))
    q, r = qr_thin(h_eq @ f)
    return EquivalentChannel(h_eq=h_eq, f=f, q=q, r=r)
