"""Linear dispersion codes for four transmit antennas over four channel uses.

The rate-1 base code is a coordinate-interleaved orthogonal design whose
eight weight matrices are sums of products of the anticommuting generators.
Higher-rate codes stack further weight blocks on top of it:

    symbols  1..4   base weights          A_1 .. A_8
    symbols  5..8   e^{j pi/4} * A_i * F4
    symbols  9..12  j * A_i
    symbols 13..16  j * e^{j pi/4} * A_i * F4

so the rate-r code (r = k/4 complex symbols per channel use) simply takes
the first 8r weights, and puncturing the trailing symbols of a higher-rate
code recovers the lower-rate one.  Weights are kept unscaled (squared
Frobenius norm 8 each); the ``scale`` field makes the average codeword
energy 16 under unit-energy symbols.

Symbols fed to :func:`encode` are the already-rotated complex symbols; the
matching rotation (default angle ``atan(2)/2``) lives in
:class:`Constellation` and in the decoder-side rotation matrix, so the
metric factorization stays in one place.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .clifford import generators4
from .realify import real_rank, tilde, vec

ROTATION_DEFAULT = 0.5 * np.arctan(2.0)

_CODE_NAMES = ("ciod", "rate1", "rate2", "rate3", "rate4")


@dataclass
class LinearDispersionCode:
    """Weight matrices A_1..A_2k plus the energy normalization scale.

    ``weights[2*i]`` multiplies the in-phase part of symbol i+1 and
    ``weights[2*i + 1]`` its quadrature part.  The effective (transmitted)
    weights are ``scale * weights``.
    """

    name: str
    k: int
    weights: np.ndarray
    scale: float
    n_t: int = 4
    T: int = 4

    @property
    def n_min(self) -> int:
        return self.k // self.T

    def scaled_weights(self) -> np.ndarray:
        return self.scale * self.weights


def _ciod_weights() -> np.ndarray:
    f1, f2, f3, _ = generators4().generators
    i4 = np.eye(4, dtype=complex)
    return np.array(
        [
            i4 - f1 @ f2 @ f3,
            f1 - f2 @ f3,
            f1 @ f3 - f2,
            f3 - f1 @ f2,
            i4 + f1 @ f2 @ f3,
            f1 + f2 @ f3,
            -f2 - f1 @ f3,
            f3 + f1 @ f2,
        ]
    )


def _full_weight_stack() -> np.ndarray:
    """All 32 weights of the rate-4 code, in symbol order."""
    base = _ciod_weights()
    f4 = generators4().generators[3]
    mu = np.exp(1j * np.pi / 4)
    blocks = [base, mu * (base @ f4), 1j * base, 1j * mu * (base @ f4)]
    return np.concatenate(blocks, axis=0)


def rate_code(n_min: int) -> LinearDispersionCode:
    """The rate-``n_min`` code (k = 4*n_min complex symbols over T = 4)."""
    if n_min not in (1, 2, 3, 4):
        raise ValueError(f"n_min must be 1..4, got {n_min}")
    k = 4 * n_min
    weights = _full_weight_stack()[: 2 * k]
    # ||A_i||_F^2 = 8 raw, so scale^2 * 8 = 16/k per weight
    scale = float(np.sqrt(2.0 / k))
    name = "ciod" if n_min == 1 else f"rate{n_min}"
    return LinearDispersionCode(name=name, k=k, weights=weights, scale=scale)


def ciod4() -> LinearDispersionCode:
    """The rate-1 single-symbol-decodable base code (k = 4)."""
    return rate_code(1)


def get_code(name_or_path: str) -> LinearDispersionCode:
    """Resolve a built-in code name or load a weight file from a path."""
    key = name_or_path.lower()
    if key in ("ciod", "rate1"):
        return rate_code(1)
    if key in ("rate2", "rate3", "rate4"):
        return rate_code(int(key[-1]))
    return load_weights(name_or_path)


def encode(code: LinearDispersionCode, s) -> np.ndarray:
    """Map k complex symbols to the 4x4 codeword sum_i s_tilde_i A_i."""
    s = np.asarray(s, dtype=complex).ravel()
    if s.size != code.k:
        raise ValueError(f"expected {code.k} symbols, got {s.size}")
    return code.scale * np.tensordot(tilde(s), code.weights, axes=1)


def generator_matrix(code: LinearDispersionCode) -> np.ndarray:
    """Real 32 x 2k matrix G with tilde(vec(encode(s))) = G @ tilde(s)."""
    return np.column_stack([tilde(vec(w)) for w in code.scaled_weights()])


@dataclass
class Constellation:
    """Square QAM with unit mean energy plus its rotated copy.

    ``points[ia * m + ib] = pam[ia] + 1j * pam[ib]`` where m = sqrt(M), so
    the index is real-coordinate major.  ``rotated_points`` are the same
    points turned by ``rotation`` radians; encode() consumes those.
    """

    M: int
    rotation: float
    pam: np.ndarray
    points: np.ndarray = field(init=False)
    rotated_points: np.ndarray = field(init=False)

    def __post_init__(self):
        m = self.pam.size
        self.points = (self.pam[:, None] + 1j * self.pam[None, :]).ravel()
        self.rotated_points = np.exp(1j * self.rotation) * self.points
        assert self.points.size == self.M == m * m

    @property
    def m(self) -> int:
        return self.pam.size

    def indices_to_rotated(self, idx) -> np.ndarray:
        return self.rotated_points[np.asarray(idx, dtype=int)]


def rotated_qam(M: int, theta: float = ROTATION_DEFAULT) -> Constellation:
    """Unit-energy square M-QAM with rotation angle ``theta``.

    M must be an even power of two style perfect square (4, 16, 64, ...);
    the per-dimension PAM alphabet is the odd-integer grid scaled so the
    QAM mean energy is one.
    """
    m = int(round(np.sqrt(M)))
    if m * m != M or M < 4:
        raise ValueError(f"M must be a perfect square >= 4, got {M}")
    raw = 2.0 * np.arange(m) - (m - 1)
    # mean energy of the square grid is 2*mean(raw^2)
    norm = 1.0 / np.sqrt(2.0 * np.mean(raw**2))
    return Constellation(M=M, rotation=float(theta), pam=raw * norm)


def rotation_matrix(theta: float) -> np.ndarray:
    """The 2x2 planar rotation applied per (I, Q) pair."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


# --- weight file round-trip ---------------------------------------------

_TOKEN_RE = re.compile(
    r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i$"
)


def _format_complex(z: complex) -> str:
    re_part = repr(float(z.real))
    im = float(z.imag)
    sign = "+" if (im >= 0 or im != im) else "-"
    return f"{re_part}{sign}{repr(abs(im))}i"


def _parse_complex(token: str) -> complex:
    m = _TOKEN_RE.match(token)
    if not m:
        raise ValueError(f"malformed complex token {token!r}")
    return complex(float(m.group("re")), float(m.group("im")))


def save_weights(code: LinearDispersionCode, path) -> None:
    """Write the effective (scaled) weight matrices as plain text.

    One matrix per blank-line-separated block, four rows of four
    ``a+bi`` tokens each; floats use shortest round-trip representation so
    a reload reproduces the matrices bit-exactly.
    """
    lines = [f"# stbclab weight matrices: {code.name}, k={code.k}"]
    for w in code.scaled_weights():
        lines.append("")
        for row in w:
            lines.append(" ".join(_format_complex(z) for z in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_weights(path) -> LinearDispersionCode:
    """Parse a weight file and validate it as a usable dispersion code.

    Rejects files whose blocks are not 4x4, whose matrix count is odd, or
    whose tilde-vec'd weights are linearly dependent over the reals.
    """
    with open(path) as fh:
        text = fh.read()
    blocks = []
    current = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            if current:
                blocks.append(current)
                current = []
            continue
        current.append([_parse_complex(tok) for tok in line.split()])
    if current:
        blocks.append(current)
    if not blocks:
        raise ValueError(f"no weight matrices found in {path}")
    mats = []
    for bi, rows in enumerate(blocks):
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise ValueError(f"weight matrix {bi} is not 4x4 in {path}")
        mats.append(np.array(rows, dtype=complex))
    if len(mats) % 2:
        raise ValueError(f"odd number of weight matrices ({len(mats)}) in {path}")
    if not np.all(np.isfinite(np.abs(np.array(mats)))):
        raise ValueError(f"non-finite weight entries in {path}")
    rank = real_rank([tilde(vec(m)) for m in mats])
    if rank != len(mats):
        raise ValueError(
            f"weights are linearly dependent over R (rank {rank} < {len(mats)})"
        )
    weights = np.array(mats)
    return LinearDispersionCode(
        name="external", k=len(mats) // 2, weights=weights, scale=1.0
    )
