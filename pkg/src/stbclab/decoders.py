"""Exact ML decoding three ways, plus R-matrix zero-pattern analysis.

All decoders minimize the same reduced metric ||y' - R x_tilde||^2 over
x_tilde in pam^(2k), where the caller has already folded any SNR prefactor
into R.  ``brute_force_ml`` is the enumeration oracle, ``sphere_decode``
a depth-first Schnorr-Euchner search, and ``conditional_decode`` exploits
the block structure of R for the codes built here: condition on the last
4(n_min - 1) complex symbols, then the first four symbols split into four
independent 2x2 triangular problems solved by slicing.

Tie-breaking is deterministic everywhere (first candidate in a fixed
enumeration order wins); exact metric ties are counted in the result and
logged, since only then may two exact decoders disagree on the argmin.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

_BRUTE_FORCE_CAP = 1 << 24


class SearchSpaceError(ValueError):
    """Brute-force candidate count exceeds the configured cap."""


@dataclass
class ZeroPattern:
    """Boolean support mask of an upper-triangular matrix."""

    mask: np.ndarray
    tol: float


@dataclass
class DecodeResult:
    symbol_indices: np.ndarray
    x_tilde: np.ndarray
    metric: float
    nodes: int
    ties: int = 0


def slice_pam(value: float, alphabet) -> float:
    """Nearest alphabet point; the lower point wins on exact midpoint ties."""
    a = np.asarray(alphabet, dtype=float)
    return float(a[_slice_idx(np.asarray(value, dtype=float), a)])


def _slice_idx(values: np.ndarray, alphabet: np.ndarray) -> np.ndarray:
    """Vectorized nearest-point indices with lower-on-tie convention."""
    j = np.clip(np.searchsorted(alphabet, values), 1, alphabet.size - 1)
    lower = alphabet[j - 1]
    upper = alphabet[j]
    take_upper = (values - lower) > (upper - values)
    return np.where(take_upper, j, j - 1)


# --- zero patterns --------------------------------------------------------

def zero_pattern(r_mat, tol: float | None = None) -> ZeroPattern:
    """Support mask of R: entries with |r_ij| > tol (default 1e-10 max|R|)."""
    R = np.asarray(r_mat, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("zero_pattern expects a square matrix")
    if tol is None:
        tol = 1e-10 * np.abs(R).max()
    mask = np.abs(R) > tol
    if np.any(np.tril(mask, -1)):
        raise ValueError("matrix has sub-diagonal support; not upper triangular")
    return ZeroPattern(mask=mask, tol=float(tol))


def _d_block_proposed() -> np.ndarray:
    d = np.zeros((8, 8), dtype=bool)
    for i in range(4):
        d[2 * i, 2 * i] = d[2 * i, 2 * i + 1] = d[2 * i + 1, 2 * i + 1] = True
    return d


def _d_block_perfect() -> np.ndarray:
    rows = [
        "x0x0x0x0",
        "0x0x0x0x",
        "00x0x0x0",
        "000x0x0x",
        "0000x0x0",
        "00000x0x",
        "000000x0",
        "0000000x",
    ]
    return np.array([[c == "x" for c in row] for row in rows])


def _d_block_east() -> np.ndarray:
    rows = [
        "x0x00000",
        "0x0x0000",
        "00x00000",
        "000x0000",
        "0000x0x0",
        "00000x0x",
        "000000x0",
        "0000000x",
    ]
    return np.array([[c == "x" for c in row] for row in rows])


def pattern_template(kind: str, size: int) -> np.ndarray:
    """Expected support for a 2k x 2k R matrix (size = 2k, multiple of 8).

    Layout is block upper triangular with the kind's 8x8 D block on the
    diagonal and unconstrained 8x8 blocks above it.  The EAST template is
    defined for size 16 only.
    """
    if size % 8:
        raise ValueError("pattern size must be a multiple of 8")
    blocks = size // 8
    d = {"proposed": _d_block_proposed, "perfect": _d_block_perfect, "east": _d_block_east}[
        kind
    ]()
    if kind == "east" and size != 16:
        raise ValueError("EAST template is defined for size 16 only")
    spec = np.zeros((size, size), dtype=bool)
    for bi in range(blocks):
        spec[8 * bi : 8 * bi + 8, 8 * bi : 8 * bi + 8] = d
        spec[8 * bi : 8 * bi + 8, 8 * (bi + 1) :] = True
    return spec


def pattern_matches(pattern: ZeroPattern | np.ndarray, spec) -> bool:
    """True iff every structural zero of the spec is zero in the pattern."""
    mask = pattern.mask if isinstance(pattern, ZeroPattern) else np.asarray(pattern)
    spec_mask = (
        pattern_template(spec, mask.shape[0]) if isinstance(spec, str) else np.asarray(spec)
    )
    if mask.shape != spec_mask.shape:
        raise ValueError(f"size mismatch: {mask.shape} vs {spec_mask.shape}")
    return not np.any(mask & ~spec_mask)


# --- decoders -------------------------------------------------------------

def _validate_model(y_prime, r_mat, pam):
    y = np.asarray(y_prime, dtype=float).ravel()
    R = np.asarray(r_mat, dtype=float)
    a = np.asarray(pam, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] != y.size:
        raise ValueError(f"inconsistent shapes: y {y.shape}, R {R.shape}")
    if y.size % 2:
        raise ValueError("model dimension must be even (two reals per symbol)")
    if a.ndim != 1 or a.size < 2 or np.any(np.diff(a) <= 0):
        raise ValueError("pam must be a sorted 1-D alphabet")
    return y, R, a


def _coords_to_indices(x_tilde: np.ndarray, pam: np.ndarray) -> np.ndarray:
    """Complex-symbol constellation indices (I-major) from pam coordinates."""
    pos = np.searchsorted(pam, x_tilde)
    return pos[0::2] * pam.size + pos[1::2]


def _digit_coords(start: int, stop: int, n_digits: int, pam: np.ndarray) -> np.ndarray:
    """Rows start..stop-1 of the pam^n_digits grid in C (last fastest) order."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n_digits))
    m = pam.size
    for d in range(n_digits - 1, -1, -1):
        out[:, d] = pam[idx % m]
        idx //= m
    return out


def brute_force_ml(y_prime, r_mat, pam, max_candidates: int = _BRUTE_FORCE_CAP) -> DecodeResult:
    """Global minimum over all M^k symbol vectors by direct enumeration.

    Candidates are scanned in lexicographic order of the per-symbol
    constellation indices; the first minimum encountered wins ties.
    """
    y, R, a = _validate_model(y_prime, r_mat, pam)
    n = y.size
    total = a.size**n
    if total > max_candidates:
        raise SearchSpaceError(f"{a.size}^{n} = {total} candidates exceed cap {max_candidates}")
    chunk = 1 << 16
    best_metric = np.inf
    best_row = -1
    ties = 0
    Rt = R.T.copy()
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        cand = _digit_coords(start, stop, n, a)
        resid = cand @ Rt - y
        metrics = np.einsum("ij,ij->i", resid, resid)
        local_min = metrics.min()
        if local_min < best_metric:
            best_metric = local_min
            best_row = start + int(np.argmax(metrics == local_min))
            ties = int(np.count_nonzero(metrics == local_min)) - 1
        elif local_min == best_metric:
            ties += int(np.count_nonzero(metrics == local_min))
    x = _digit_coords(best_row, best_row + 1, n, a)[0]
    if ties:
        log.info("brute_force_ml: %d exact metric tie(s) at metric %.17g", ties, best_metric)
    return DecodeResult(
        symbol_indices=_coords_to_indices(x, a),
        x_tilde=x,
        metric=float(best_metric),
        nodes=total,
        ties=ties,
    )


def sphere_decode(y_prime, r_mat, pam) -> DecodeResult:
    """Depth-first sphere decoder with Schnorr-Euchner candidate ordering.

    The initial radius is the metric of the Babai (successive slicing)
    point, which guarantees the search tree contains at least one leaf.
    Candidates at each level are visited in increasing distance from the
    unconstrained estimate, so a bound violation prunes the whole level.
    Node count = Babai path (n) + expanded search nodes; a noiseless
    observation therefore costs exactly n nodes.
    """
    y, R, a = _validate_model(y_prime, r_mat, pam)
    n = y.size
    diag = np.diag(R)
    if np.abs(diag).min() < 1e-12:
        raise ValueError("R is numerically singular; cannot sphere decode")

    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        rhs = y[i] - R[i, i + 1 :] @ x[i + 1 :]
        x[i] = a[_slice_idx(np.asarray(rhs / R[i, i]), a)]
    resid = y - R @ x
    state = {
        "metric": float(resid @ resid),
        "x": x.copy(),
        "nodes": n,
        "ties": 0,
    }

    def search(level: int, cost: float) -> None:
        rhs = y[level] - R[level, level + 1 :] @ x[level + 1 :]
        rll = R[level, level]
        order = np.lexsort((a, np.abs(a - rhs / rll)))
        for idx in order:
            inc = (rhs - rll * a[idx]) ** 2
            new_cost = cost + inc
            if new_cost >= state["metric"]:
                if level == 0 and new_cost == state["metric"]:
                    state["ties"] += 1
                break  # remaining candidates at this level are farther out
            state["nodes"] += 1
            x[level] = a[idx]
            if level == 0:
                state["metric"] = new_cost
                state["x"] = x.copy()
            else:
                search(level - 1, new_cost)

    search(n - 1, 0.0)
    if state["ties"]:
        log.info("sphere_decode: %d exact leaf tie(s)", state["ties"])
    xb = state["x"]
    return DecodeResult(
        symbol_indices=_coords_to_indices(xb, a),
        x_tilde=xb,
        metric=state["metric"],
        nodes=state["nodes"],
        ties=state["ties"],
    )


def conditional_decode(y_prime, r_mat, pam, n_min: int, check_pattern: bool = True) -> DecodeResult:
    """Structured exact ML for the multiplexed codes built in this package.

    Enumerates the last 4(n_min - 1) complex symbols; for each assignment
    the leading 8 real coordinates decouple into four independent 2x2
    upper-triangular problems, each solved by scanning the quadrature
    coordinate over the PAM alphabet and hard-slicing the in-phase one.
    Leaf-candidate count is exactly M^(4(n_min-1)) * 4 * sqrt(M).

    Falls back to :func:`sphere_decode` with a warning when R does not
    carry the expected zero pattern.
    """
    y, R, a = _validate_model(y_prime, r_mat, pam)
    n = y.size
    if n != 8 * n_min:
        raise ValueError(f"model dimension {n} does not match n_min={n_min}")
    if check_pattern and not pattern_matches(zero_pattern(R), "proposed"):
        warnings.warn("R does not match the expected pattern; falling back to sphere decoding")
        return sphere_decode(y, R, a)

    m = a.size
    M = m * m
    n_tail_sym = 4 * (n_min - 1)
    total_tails = M**n_tail_sym
    chunk = 1 << 14
    best = {"metric": np.inf, "x": None, "row": -1, "ties": 0}
    leaves = 0
    sub = [
        (R[2 * i, 2 * i], R[2 * i, 2 * i + 1], R[2 * i + 1, 2 * i + 1]) for i in range(4)
    ]
    for start in range(0, total_tails, chunk):
        stop = min(start + chunk, total_tails)
        if n_tail_sym:
            tails = _digit_coords(start, stop, 2 * n_tail_sym, a)
            resid_t = tails @ R[8:, 8:].T - y[8:]
            tail_metric = np.einsum("ij,ij->i", resid_t, resid_t)
            y_head = y[:8] - tails @ R[:8, 8:].T
        else:
            tails = np.zeros((1, 0))
            tail_metric = np.zeros(1)
            y_head = y[:8][None, :]
        rows = y_head.shape[0]
        head_metric = np.zeros(rows)
        head_x = np.empty((rows, 8))
        for i, (aa, bb, dd) in enumerate(sub):
            y1 = y_head[:, 2 * i]
            y2 = y_head[:, 2 * i + 1]
            shifted = y1[:, None] - bb * a[None, :]
            xi = a[_slice_idx(shifted / aa, a)]
            cost = (y2[:, None] - dd * a[None, :]) ** 2 + (shifted - aa * xi) ** 2
            jb = np.argmin(cost, axis=1)
            rows_idx = np.arange(rows)
            head_metric += cost[rows_idx, jb]
            head_x[:, 2 * i] = xi[rows_idx, jb]
            head_x[:, 2 * i + 1] = a[jb]
            leaves += rows * m
        totals = tail_metric + head_metric
        local_min = totals.min()
        if local_min < best["metric"]:
            r = int(np.argmax(totals == local_min))
            best["metric"] = local_min
            best["x"] = np.concatenate([head_x[r], tails[r]])
            best["ties"] = int(np.count_nonzero(totals == local_min)) - 1
        elif local_min == best["metric"]:
            best["ties"] += int(np.count_nonzero(totals == local_min))
    xb = best["x"]
    resid = y - R @ xb
    metric = float(resid @ resid)
    if best["ties"]:
        log.info("conditional_decode: %d exact metric tie(s)", best["ties"])
    return DecodeResult(
        symbol_indices=_coords_to_indices(xb, a),
        x_tilde=xb,
        metric=metric,
        nodes=leaves,
        ties=best["ties"],
    )


def decode(name: str, y_prime, r_mat, pam, n_min: int) -> DecodeResult:
    """Dispatch by decoder name ('brute', 'sphere', 'conditional')."""
    if name == "brute":
        return brute_force_ml(y_prime, r_mat, pam)
    if name == "sphere":
        return sphere_decode(y_prime, r_mat, pam)
    if name == "conditional":
        return conditional_decode(y_prime, r_mat, pam, n_min)
    raise ValueError(f"unknown decoder {name!r}")
