"""Coding-gain searches, diversity witnesses, and ergodic capacity.

Determinant searches enumerate codeword differences on the integer QAM
lattice: per-dimension PAM points are odd integers, so every coordinate
difference lies in {0, +-2, ..., +-2(m-1)} with m = sqrt(M).  Exact
integer bookkeeping happens before the single floating-point rotation,
and the reported values follow the convention under which the reference
coding-gain figures for this code family are quoted (the unit-energy
values differ by the eighth power of the PAM scaling).  Both |det| and
|det|^2 minima are reported because published figures do not always say
which power is meant.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import sample_channel
from .codes import Constellation, LinearDispersionCode, generator_matrix
from .realify import check_expand, det4, kron

SINGULAR_TOL = 1e-9


def _rotated_weight_flat(code: LinearDispersionCode, rotation: float) -> np.ndarray:
    """Fold the per-symbol rotation into the scaled weights; (2k, 16) complex."""
    w = code.scaled_weights()
    c, s = np.cos(rotation), np.sin(rotation)
    wr = np.empty_like(w)
    for i in range(code.k):
        wr[2 * i] = c * w[2 * i] + s * w[2 * i + 1]
        wr[2 * i + 1] = -s * w[2 * i] + c * w[2 * i + 1]
    return wr.reshape(2 * code.k, 16)


def _diff_digit_coords(start, stop, n_digits, base):
    """Difference coordinates 2*(digit - (base-1)/2), C-order digits."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n_digits))
    half = (base - 1) // 2
    for d in range(n_digits - 1, -1, -1):
        out[:, d] = 2.0 * ((idx % base) - half)
        idx //= base
    return out


def _abs_dets(coords: np.ndarray, wflat: np.ndarray) -> np.ndarray:
    flat = coords @ wflat.real + 1j * (coords @ wflat.imag)
    return np.abs(det4(flat.reshape(-1, 4, 4)))


def _mindet_range(args):
    """Worker: min |det| and singular count over an index range."""
    wflat, base, n_digits, start, stop, zero_idx, tol, chunk = args
    best = np.inf
    best_idx = -1
    singular = 0
    for s0 in range(start, stop, chunk):
        s1 = min(s0 + chunk, stop)
        coords = _diff_digit_coords(s0, s1, n_digits, base)
        dd = _abs_dets(coords, wflat)
        if zero_idx is not None and s0 <= zero_idx < s1:
            dd[zero_idx - s0] = np.inf
        singular += int(np.count_nonzero(dd < tol))
        lm = dd.min()
        if lm < best:
            best = float(lm)
            best_idx = s0 + int(np.argmax(dd == lm))
    return best, best_idx, singular


@dataclass
class MinDetReport:
    code: str
    M: int
    mode: str
    n_evaluated: int
    min_abs_det: float
    min_abs_det_sq: float
    argmin_diff: tuple
    rank_deficient_count: int
    singular_tol: float = SINGULAR_TOL

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "mod": self.M,
            "mode": self.mode,
            "n_evaluated": self.n_evaluated,
            "min_abs_det": self.min_abs_det,
            "min_abs_det_sq": self.min_abs_det_sq,
            "argmin_diff": list(self.argmin_diff),
            "rank_deficient_count": self.rank_deficient_count,
            "singular_tol": self.singular_tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def min_determinant(
    code: LinearDispersionCode,
    constellation: Constellation,
    mode: str = "exhaustive",
    samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
    workers: int = 1,
    chunk: int = 1 << 18,
    exhaustive_cap: int = 100_000_000,
) -> MinDetReport:
    """Minimum |det| over nonzero codeword differences.

    Exhaustive mode covers every nonzero difference vector exactly once,
    (2*sqrt(M) - 1)^(2k) - 1 of them; sampled mode draws ``samples``
    uniform nonzero difference vectors with ``rng``.
    """
    wflat = _rotated_weight_flat(code, constellation.rotation)
    n_digits = 2 * code.k
    base = 2 * constellation.m - 1
    if mode == "exhaustive":
        total = base**n_digits
        if total > exhaustive_cap:
            raise ValueError(
                f"exhaustive search of {base}^{n_digits} = {total} differences "
                f"exceeds cap {exhaustive_cap}; use sampled mode"
            )
        zero_idx = (total - 1) // 2
        if workers > 1:
            bounds = np.linspace(0, total, workers + 1, dtype=np.int64)
            tasks = [
                (wflat, base, n_digits, int(a), int(b), zero_idx, SINGULAR_TOL, chunk)
                for a, b in zip(bounds[:-1], bounds[1:])
                if a < b
            ]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_mindet_range, tasks))
        else:
            parts = [
                _mindet_range((wflat, base, n_digits, 0, total, zero_idx, SINGULAR_TOL, chunk))
            ]
        best = min(p[0] for p in parts)
        best_idx = min(i for b, i, _ in parts if b == best)
        singular = sum(p[2] for p in parts)
        argmin = tuple(int(v) for v in _diff_digit_coords(best_idx, best_idx + 1, n_digits, base)[0])
        n_evaluated = total - 1
    elif mode == "sampled":
        rng = np.random.default_rng(rng)
        best = np.inf
        argmin = None
        singular = 0
        n_evaluated = 0
        batch = min(chunk, samples)
        while n_evaluated < samples:
            take = min(batch, samples - n_evaluated)
            digits = rng.integers(0, base, size=(take, n_digits))
            coords = 2.0 * (digits - (base - 1) // 2)
            nz = np.any(coords != 0.0, axis=1)
            coords = coords[nz]
            if coords.size == 0:
                continue
            dd = _abs_dets(coords, wflat)
            singular += int(np.count_nonzero(dd < SINGULAR_TOL))
            lm = dd.min()
            if lm < best:
                best = float(lm)
                argmin = tuple(int(v) for v in coords[int(np.argmax(dd == lm))])
            n_evaluated += int(coords.shape[0])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return MinDetReport(
        code=code.name,
        M=constellation.M,
        mode=mode,
        n_evaluated=n_evaluated,
        min_abs_det=float(best),
        min_abs_det_sq=float(best) ** 2,
        argmin_diff=argmin,
        rank_deficient_count=singular,
    )


@dataclass
class DiversityReport:
    code: str
    M: int
    found: bool
    witness: tuple | None
    abs_det: float | None
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "mod": self.M,
            "found": self.found,
            "witness": list(self.witness) if self.witness else None,
            "abs_det": self.abs_det,
            "evaluations": self.evaluations,
        }


def diversity_search(
    code: LinearDispersionCode,
    constellation: Constellation,
    budget: int = 1_000_000,
    rng: np.random.Generator | None = None,
    tol: float = SINGULAR_TOL,
) -> DiversityReport:
    """Look for a nonzero codeword difference with |det| below ``tol``.

    Structured phase first: differences supported on a symbol pair from
    the base block together with its mirrored pair in the j-multiplied
    block (the cross-terms between the two embedded codes), then uniform
    random differences until the budget is spent.
    """
    wflat = _rotated_weight_flat(code, constellation.rotation)
    n_digits = 2 * code.k
    evaluated = 0

    def report(found, witness=None, val=None):
        return DiversityReport(
            code=code.name,
            M=constellation.M,
            found=found,
            witness=witness,
            abs_det=val,
            evaluations=evaluated,
        )

    if code.k > 8:
        n_second = code.k - 8
        support_syms = [
            (i, j, i + 8, j + 8)
            for i in range(min(8, n_second))
            for j in range(i + 1, min(8, n_second))
        ]
        local = _diff_digit_coords(0, 3**8, 8, 3)
        local = local[np.any(local != 0.0, axis=1)]
        for syms in support_syms:
            if evaluated + local.shape[0] > budget:
                break
            cols = []
            for t in syms:
                cols += [2 * t, 2 * t + 1]
            coords = np.zeros((local.shape[0], n_digits))
            coords[:, cols] = local
            dd = _abs_dets(coords, wflat)
            evaluated += coords.shape[0]
            hit = np.flatnonzero(dd < tol)
            if hit.size:
                w = coords[hit[0]]
                return report(True, tuple(int(v) for v in w), float(dd[hit[0]]))
    rng = np.random.default_rng(rng)
    base = 2 * constellation.m - 1
    batch = 1 << 15
    while evaluated < budget:
        take = min(batch, budget - evaluated)
        digits = rng.integers(0, base, size=(take, n_digits))
        coords = 2.0 * (digits - (base - 1) // 2)
        coords = coords[np.any(coords != 0.0, axis=1)]
        if coords.size == 0:
            continue
        dd = _abs_dets(coords, wflat)
        evaluated += int(coords.shape[0])
        hit = np.flatnonzero(dd < tol)
        if hit.size:
            w = coords[hit[0]]
            return report(True, tuple(int(v) for v in w), float(dd[hit[0]]))
    return report(False)


# --- capacity -------------------------------------------------------------

@dataclass
class CapacityEstimate:
    snr_db: tuple
    mean_bits: np.ndarray
    stderr: np.ndarray
    trials: int
    label: str = ""

    def to_csv(self) -> str:
        lines = ["snr_db,capacity_bits,stderr"]
        for db, c, e in zip(self.snr_db, self.mean_bits, self.stderr):
            lines.append(f"{db!r},{float(c)!r},{float(e)!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "snr_db": list(self.snr_db),
            "capacity_bits": [float(v) for v in self.mean_bits],
            "stderr": [float(v) for v in self.stderr],
            "trials": self.trials,
        }


def code_capacity_bits(code: LinearDispersionCode, h: np.ndarray, snr_linear: float) -> float:
    """Single-realization mutual-information integrand of the coded system.

    The rotation matrix is orthogonal and drops out of H_eq H_eq^T, so the
    equivalent channel is built without it (and without any QR).
    """
    h_eq = kron(np.eye(code.T), check_expand(h)) @ generator_matrix(code)
    gram = h_eq @ h_eq.T
    n = gram.shape[0]
    _, logdet = np.linalg.slogdet(np.eye(n) + (snr_linear / 4.0) * gram)
    return float(logdet / np.log(2.0) / (2 * code.T))


def raw_capacity_bits(h: np.ndarray, snr_linear: float) -> float:
    """Single-realization capacity integrand of the unconstrained channel."""
    n_r = h.shape[0]
    gram = h @ h.conj().T
    _, logdet = np.linalg.slogdet(np.eye(n_r) + (snr_linear / 4.0) * gram)
    return float(logdet.real / np.log(2.0))


def ergodic_capacity(
    code: LinearDispersionCode | None,
    n_r: int,
    snr_grid_db,
    trials: int,
    rng: np.random.Generator | int | None = None,
) -> CapacityEstimate:
    """Monte-Carlo ergodic capacity over the SNR grid (bits per channel use).

    ``code=None`` estimates the unconstrained MIMO channel capacity; a
    code instance estimates the capacity of its equivalent channel.  One
    eigendecomposition per trial serves the whole grid.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    snr_grid_db = tuple(float(v) for v in snr_grid_db)
    rho = np.array([10.0 ** (db / 10.0) / 4.0 for db in snr_grid_db])
    samples = np.empty((trials, len(snr_grid_db)))
    g = generator_matrix(code) if code is not None else None
    eye_t = np.eye(4)
    for t in range(trials):
        h = sample_channel(n_r, rng)
        if code is None:
            lam = np.linalg.eigvalsh(h @ h.conj().T).real
            samples[t] = np.log2(1.0 + rho[:, None] * lam[None, :]).sum(axis=1)
        else:
            h_eq = kron(eye_t, check_expand(h)) @ g
            lam = np.clip(np.linalg.eigvalsh(h_eq @ h_eq.T), 0.0, None)
            samples[t] = np.log2(1.0 + rho[:, None] * lam[None, :]).sum(axis=1) / (2 * code.T)
    mean = samples.mean(axis=0)
    stderr = (
        samples.std(axis=0, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(len(snr_grid_db))
    )
    return CapacityEstimate(
        snr_db=snr_grid_db,
        mean_bits=mean,
        stderr=stderr,
        trials=trials,
        label=code.name if code is not None else "raw",
    )


def generator_gram_deviation(code: LinearDispersionCode) -> float:
    """max |G^T G - (16/k) I|; zero for an information-lossless generator."""
    g = generator_matrix(code)
    target = (16.0 / code.k) * np.eye(g.shape[1])
    return float(np.abs(g.T @ g - target).max())


def lossless_check(code: LinearDispersionCode, tol: float = 1e-10) -> bool:
    """True iff G^T G = (16/k) I within ``tol``."""
    return generator_gram_deviation(code) <= tol
