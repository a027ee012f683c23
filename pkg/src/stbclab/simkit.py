"""Seeded Monte-Carlo symbol-error-rate campaigns.

Every trial derives its own random substreams from
``SeedSequence((master_seed, snr_index, trial, attempt))`` with separate
children for data, channel, and noise, so results are bit-identical for
any worker count and two campaigns differing only in the decoder see the
same channels and noise (paired comparison).  A trial draws one channel
realization per codeword (quasi-static block fading over the T = 4 uses).

Error unit: complex-symbol errors (decoded symbol != transmitted), summed
over the k symbols of each trial.  The reported standard error uses the
binomial formula at trial granularity, a slightly conservative figure.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import equivalent_channel, sample_channel, transmit
from .codes import LinearDispersionCode, encode, get_code, rotated_qam
from .decoders import decode
from .realify import RankDeficiencyError

log = logging.getLogger(__name__)

_MAX_RESAMPLE = 100


@dataclass
class CampaignConfig:
    code: str
    n_r: int
    mod: int = 4
    snr_db: tuple = (4.0, 8.0, 12.0, 16.0, 20.0)
    trials: int = 100_000
    decoder: str = "conditional"
    seed: int = 0
    max_error_events: int | None = 200
    noiseless: bool = False
    count_bits: bool = False
    threads: int = 1
    theta: float | None = None

    def __post_init__(self):
        self.snr_db = tuple(float(v) for v in self.snr_db)
        if list(self.snr_db) != sorted(self.snr_db):
            raise ValueError("snr_db grid must be sorted")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class SERPoint:
    snr_db: float
    errors: int
    trials: int
    ser: float
    stderr: float
    mean_nodes: float
    resampled: int = 0
    bit_errors: int | None = None


def bpcu(config: CampaignConfig) -> float:
    """Bits per channel use: code rate times log2 of the alphabet size."""
    code = get_code(config.code)
    return code.n_min * math.log2(config.mod)


def is_full_rate(code: LinearDispersionCode, n_r: int) -> bool:
    """Rate equals min(n_t, n_r) complex symbols per channel use."""
    return code.k == code.T * min(4, n_r)


def _run_trial(code, constellation, n_r, snr_idx, snr_linear, decoder_name, seed, trial, noiseless):
    """One decode; returns (symbol_errors, nodes, bit_errors, resampled, metric)."""
    pam = constellation.pam
    attempt = 0
    while True:
        ss = np.random.SeedSequence(entropy=(seed, snr_idx, trial, attempt))
        rng_data, rng_chan, rng_noise = (np.random.default_rng(c) for c in ss.spawn(3))
        idx_true = rng_data.integers(0, constellation.M, size=code.k)
        s = constellation.indices_to_rotated(idx_true)
        s_matrix = encode(code, s)
        h = sample_channel(n_r, rng_chan)
        try:
            eq = equivalent_channel(h, code, constellation)
        except RankDeficiencyError:
            attempt += 1
            if attempt > _MAX_RESAMPLE:
                raise
            continue
        y = transmit(s_matrix, h, snr_linear, None if noiseless else rng_noise)
        y_prime = eq.project(y)
        r_eff = np.sqrt(snr_linear / 4.0) * eq.r
        result = decode(decoder_name, y_prime, r_eff, pam, code.n_min)
        wrong = idx_true != result.symbol_indices
        bit_errs = 0
        if np.any(wrong):
            m = constellation.m
            ia, ib = idx_true // m, idx_true % m
            ja, jb = result.symbol_indices // m, result.symbol_indices % m
            gray = lambda v: v ^ (v >> 1)
            diff = (gray(ia) ^ gray(ja)) | ((gray(ib) ^ gray(jb)) << 8)
            bit_errs = int(sum(bin(int(d)).count("1") for d in diff))
        return int(np.count_nonzero(wrong)), result.nodes, bit_errs, attempt, result.metric


def _ser_batch(args):
    """Worker: run a contiguous trial range at one SNR point."""
    (code, constellation, n_r, snr_idx, snr_linear, decoder_name, seed, start, stop, noiseless) = args
    out = np.empty((stop - start, 4), dtype=np.int64)
    metrics = np.empty(stop - start)
    for i, trial in enumerate(range(start, stop)):
        e, nodes, bits, res, metric = _run_trial(
            code, constellation, n_r, snr_idx, snr_linear, decoder_name, seed, trial, noiseless
        )
        out[i] = (e, nodes, bits, res)
        metrics[i] = metric
    return out, metrics


def run_ser(config: CampaignConfig, trace_path: str | None = None) -> list:
    """Run the campaign and return one :class:`SERPoint` per SNR value.

    Stops a point early once the cumulative symbol-error count reaches
    ``config.max_error_events`` (scanning trials in order, so the stopping
    trial is identical for any worker count).
    """
    code = get_code(config.code)
    if code.k > 4 * config.n_r:
        raise ValueError(
            f"{code.name} needs n_r >= {code.n_min} receive antennas (got {config.n_r}); "
            "use a punctured (lower-rate) code"
        )
    theta = config.theta
    constellation = rotated_qam(config.mod) if theta is None else rotated_qam(config.mod, theta)
    points = []
    trace_rows = []
    workers = max(1, config.threads)
    batch = max(256, math.ceil(config.trials / (8 * workers)))
    for snr_idx, snr_db in enumerate(config.snr_db):
        snr_linear = 10.0 ** (snr_db / 10.0)
        per_trial = np.empty((config.trials, 4), dtype=np.int64)
        per_metric = np.empty(config.trials)
        done = 0
        stop_at = config.trials
        ranges = [
            (start, min(start + batch, config.trials))
            for start in range(0, config.trials, batch)
        ]
        args = [
            (code, constellation, config.n_r, snr_idx, snr_linear, config.decoder,
             config.seed, a, b, config.noiseless)
            for a, b in ranges
        ]
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
            futures = [pool.submit(_ser_batch, a) for a in args]
        cum_errors = 0
        for bi, (a, b) in enumerate(ranges):
            if a >= stop_at:
                break
            out, metrics = futures[bi].result() if workers > 1 else _ser_batch(args[bi])
            per_trial[a:b] = out
            per_metric[a:b] = metrics
            done = b
            if config.max_error_events is not None and stop_at == config.trials:
                cum = cum_errors + np.cumsum(out[:, 0])
                hit = np.flatnonzero(cum >= config.max_error_events)
                if hit.size:
                    stop_at = a + int(hit[0]) + 1
            cum_errors += int(out[:, 0].sum())
        if workers > 1:
            pool.shutdown(cancel_futures=True)
        used = min(done, stop_at)
        cols = per_trial[:used]
        errors = int(cols[:, 0].sum())
        ser = errors / (used * code.k)
        stderr = math.sqrt(max(ser * (1.0 - ser), 0.0) / used)
        points.append(
            SERPoint(
                snr_db=snr_db,
                errors=errors,
                trials=used,
                ser=ser,
                stderr=stderr,
                mean_nodes=float(cols[:, 1].sum() / used),
                resampled=int(cols[:, 3].sum()),
                bit_errors=int(cols[:, 2].sum()) if config.count_bits else None,
            )
        )
        if trace_path is not None:
            for t in range(used):
                trace_rows.append(
                    (snr_db, t, int(per_trial[t, 0]), repr(float(per_metric[t])), int(per_trial[t, 1]))
                )
        log.info(
            "ser point done: %s dB, %d/%d trials, %d errors", snr_db, used, config.trials, errors
        )
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["snr_db", "trial", "errors", "metric", "nodes"])
            w.writerows(trace_rows)
    return points


def write_ser_csv(points, config: CampaignConfig, path) -> None:
    """CSV schema: code,n_r,mod,snr_db,trials,errors,ser,stderr,mean_nodes."""
    lines = ["code,n_r,mod,snr_db,trials,errors,ser,stderr,mean_nodes"]
    for p in points:
        lines.append(
            ",".join(
                [
                    config.code,
                    str(config.n_r),
                    str(config.mod),
                    repr(p.snr_db),
                    str(p.trials),
                    str(p.errors),
                    repr(p.ser),
                    repr(p.stderr),
                    repr(p.mean_nodes),
                ]
            )
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def config_to_dict(config: CampaignConfig) -> dict:
    d = asdict(config)
    d["snr_db"] = list(config.snr_db)
    return d
