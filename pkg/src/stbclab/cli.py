"""Command-line front end: verification, generation, analysis, simulation.

Flag precedence: built-in defaults < --config file < explicit flags.  The
config file is JSON, either a flat mapping of flag names to values or a
previously emitted run manifest (whose ``config`` entry is used), so any
run can be reproduced byte-for-byte from its manifest.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 I/O error.
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import analysis, simkit
from .channel import equivalent_channel, sample_channel
from .clifford import basis_real_rank, generators4, product_basis, verify_anticommuting
from .codes import (
    encode,
    generator_matrix,
    get_code,
    load_weights,
    rotated_qam,
    save_weights,
)
from .decoders import pattern_matches, pattern_template, zero_pattern
from .realify import real_rank, tilde, vec

_CODE_CHOICES = ("ciod", "rate1", "rate2", "rate3", "rate4")


def _default_threads() -> int:
    env = os.environ.get("STBC_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _parse_snr_grid(text: str) -> tuple:
    """Either 'start:step:stop' (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise argparse.ArgumentTypeError(f"bad SNR grid {text!r}; want start:step:stop")
        start, step, stop = parts
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    return tuple(float(v) for v in text.split(","))


def _weights_sha256(code) -> str:
    h = hashlib.sha256()
    for w in code.scaled_weights():
        h.update(np.ascontiguousarray(w).tobytes())
    return h.hexdigest()


def _write_manifest(out_path: str, subcommand: str, config: dict, outputs: list) -> str:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "outputs": outputs,
    }
    if "code" in config:
        try:
            manifest["weights_sha256"] = _weights_sha256(get_code(config["code"]))
        except (OSError, ValueError):
            pass
    path = out_path + ".manifest.json"
    with open(path, "w") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def _load_config(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


# --- verify ----------------------------------------------------------------

def _verify_checks(codes, seed: int):
    """Yield (name, ok, detail) for the whole invariant suite."""
    gens = generators4()
    ok, report = verify_anticommuting(gens)
    yield "anticommute", ok, "exact" if ok else "; ".join(report)
    rank = basis_real_rank(product_basis(gens))
    yield "basis_rank", rank == 32, f"{rank}/32"
    for code in codes:
        rank = real_rank([tilde(vec(w)) for w in code.weights])
        yield f"weights_independent[{code.name}]", rank == 2 * code.k, f"rank {rank}/{2 * code.k}"
        dev = analysis.generator_gram_deviation(code)
        yield f"lossless[{code.name}]", dev < 1e-12, f"GtG deviation {dev:.3e}"
        g = generator_matrix(code)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(20):
            s = rng.standard_normal(code.k) + 1j * rng.standard_normal(code.k)
            lhs = tilde(vec(encode(code, s)))
            worst = max(worst, float(np.abs(lhs - g @ tilde(s)).max()))
        yield f"encode_consistency[{code.name}]", worst < 1e-12, f"max dev {worst:.3e}"
        const = rotated_qam(4)
        rng = np.random.default_rng(seed + 1)
        bad = 0
        for _ in range(20):
            h = sample_channel(code.n_min, rng)
            eq = equivalent_channel(h, code, const)
            if not pattern_matches(zero_pattern(eq.r), "proposed"):
                bad += 1
        yield f"rpattern[{code.name}]", bad == 0, f"{20 - bad}/20 channels match"
        rng = np.random.default_rng(seed + 2)
        draws = rng.integers(0, 4, size=(4000, code.k))
        pts = const.rotated_points[draws]
        energy = np.mean(
            [np.linalg.norm(encode(code, p)) ** 2 for p in pts[:4000]]
        )
        yield f"energy[{code.name}]", abs(energy - 16.0) < 0.16, f"E||S||^2 = {energy:.4f}"


def _cmd_verify(args) -> int:
    if args.weights:
        try:
            load_weights(args.weights)
        except ValueError as exc:
            print(f"[FAIL] weights_file: {exc}")
            return 1
        print("[ok] weights_file: loadable, independent")
    codes = [get_code(n) for n in (args.code,)] if args.code else [
        get_code(n) for n in ("ciod", "rate2", "rate3", "rate4")
    ]
    failures = 0
    for name, ok, detail in _verify_checks(codes, args.seed):
        if args.check and args.check not in name:
            continue
        print(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
        failures += 0 if ok else 1
    return 1 if failures else 0


# --- gen ---------------------------------------------------------------------

def _cmd_gen(args) -> int:
    code = get_code(args.code)
    save_weights(code, args.out)
    print(f"wrote {2 * code.k} weight matrices to {args.out}")
    _write_manifest(args.out, "gen", {"code": args.code, "out": args.out}, [args.out])
    return 0


# --- rmatrix -------------------------------------------------------------------

def _cmd_rmatrix(args) -> int:
    code = get_code(args.code)
    const = rotated_qam(args.mod)
    rng = np.random.default_rng(args.seed)
    h = sample_channel(args.nr, rng)
    eq = equivalent_channel(h, code, const)
    pat = zero_pattern(eq.r)
    for row in pat.mask:
        print("".join("x" if v else "." for v in row))
    verdicts = []
    for kind in ("proposed", "perfect", "east"):
        try:
            verdicts.append((kind, pattern_matches(pat, kind)))
        except ValueError:
            verdicts.append((kind, None))
    known = False
    for kind, verdict in verdicts:
        label = "n/a" if verdict is None else ("match" if verdict else "no match")
        known = known or bool(verdict)
        print(f"{kind}: {label}")
    if not known:
        print("no known pattern")
    return 0


# --- mindet --------------------------------------------------------------------

def _cmd_mindet(args) -> int:
    code = get_code(args.code)
    const = rotated_qam(args.mod)
    mode = "exhaustive" if args.exhaustive else "sampled"
    report = analysis.min_determinant(
        code,
        const,
        mode=mode,
        samples=args.samples,
        rng=args.seed,
        workers=args.threads,
    )
    print(
        f"{code.name} {args.mod}-QAM {mode}: min|det| = {report.min_abs_det:.6f}, "
        f"min|det|^2 = {report.min_abs_det_sq:.6f}, "
        f"rank-deficient = {report.rank_deficient_count} of {report.n_evaluated}"
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json())
        _write_manifest(
            args.out,
            "mindet",
            {
                "code": args.code,
                "mod": args.mod,
                "exhaustive": bool(args.exhaustive),
                "samples": args.samples,
                "seed": args.seed,
                "out": args.out,
            },
            [args.out],
        )
    return 0


# --- capacity --------------------------------------------------------------------

def _cmd_capacity(args) -> int:
    code = None if args.code == "raw" else get_code(args.code)
    est = analysis.ergodic_capacity(code, args.nr, args.snr, args.trials, args.seed)
    baseline = analysis.ergodic_capacity(None, args.nr, args.snr, args.trials, args.seed)
    for db, c, e, b in zip(est.snr_db, est.mean_bits, est.stderr, baseline.mean_bits):
        print(f"{db:6.1f} dB: {c:.4f} +- {e:.4f} bits/use (raw channel {b:.4f})")
    if code is not None and code.k == 16 and args.nr >= 4:
        rng = np.random.default_rng(args.seed)
        dev = 0.0
        for _ in range(100):
            h = sample_channel(args.nr, rng)
            for db in (0.0, 10.0, 20.0):
                rho = 10.0 ** (db / 10.0)
                dev = max(
                    dev,
                    abs(
                        analysis.code_capacity_bits(code, h, rho)
                        - analysis.raw_capacity_bits(h, rho)
                    ),
                )
        print(f"lossless per-realization max deviation: {dev:.3e}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(est.to_csv())
        _write_manifest(
            args.out,
            "capacity",
            {
                "code": args.code,
                "nr": args.nr,
                "snr": list(args.snr),
                "trials": args.trials,
                "seed": args.seed,
                "out": args.out,
            },
            [args.out],
        )
    return 0


# --- ser -------------------------------------------------------------------------

def _cmd_ser(args) -> int:
    config = simkit.CampaignConfig(
        code=args.code,
        n_r=args.nr,
        mod=args.mod,
        snr_db=args.snr,
        trials=args.trials,
        decoder=args.decoder,
        seed=args.seed,
        max_error_events=None if args.max_errors == 0 else args.max_errors,
        noiseless=args.noiseless,
        count_bits=args.bits,
        threads=args.threads,
    )
    points = simkit.run_ser(config, trace_path=args.trace)
    for p in points:
        print(
            f"{p.snr_db:6.1f} dB: SER {p.ser:.6g} ({p.errors} errors / {p.trials} trials), "
            f"mean nodes {p.mean_nodes:.1f}"
        )
    if args.out:
        simkit.write_ser_csv(points, config, args.out)
        cfg = simkit.config_to_dict(config)
        cfg.update({"out": args.out, "trace": args.trace, "max_errors": args.max_errors})
        _write_manifest(args.out, "ser", cfg, [args.out])
    return 0


# --- parser ----------------------------------------------------------------------

def _build_parser(overrides: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stbclab",
        description="Space-time block code construction, decoding, and evaluation toolkit",
    )
    parser.add_argument("--config", help="JSON config or run manifest; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = add("verify", _cmd_verify, help="run the construction invariant suite")
    p.add_argument("--code", choices=_CODE_CHOICES)
    p.add_argument("--check", help="only run checks whose name contains this substring")
    p.add_argument("--weights", help="also validate an external weight file")
    p.add_argument("--seed", type=int, default=0)

    p = add("gen", _cmd_gen, help="write a code's weight matrices to a text file")
    p.add_argument("--code", choices=_CODE_CHOICES, required=True)
    p.add_argument("--out", required=True)

    p = add("rmatrix", _cmd_rmatrix, help="show the R-matrix zero pattern for one channel draw")
    p.add_argument("--code", default="rate2")
    p.add_argument("--nr", type=int, default=2)
    p.add_argument("--mod", type=int, default=4, choices=(4, 16, 64))
    p.add_argument("--seed", type=int, default=0)

    p = add("mindet", _cmd_mindet, help="minimum-determinant search")
    p.add_argument("--code", default="rate2")
    p.add_argument("--mod", type=int, default=4, choices=(4, 16, 64))
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", help="write the report as JSON")

    p = add("capacity", _cmd_capacity, help="ergodic capacity estimate over an SNR grid")
    p.add_argument("--code", default="rate4", help="code name, weight file, or 'raw'")
    p.add_argument("--nr", type=int, default=4)
    p.add_argument("--snr", type=_parse_snr_grid, default=(0.0, 5.0, 10.0, 15.0, 20.0))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the curve as CSV")

    p = add("ser", _cmd_ser, help="Monte-Carlo symbol-error-rate campaign")
    p.add_argument("--code", default="rate2")
    p.add_argument("--nr", type=int, default=2)
    p.add_argument("--mod", type=int, default=4, choices=(4, 16, 64))
    p.add_argument("--snr", type=_parse_snr_grid, default=(4.0, 8.0, 12.0, 16.0, 20.0))
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--decoder", choices=("conditional", "sphere", "brute"), default="conditional")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--max-errors", type=int, default=200, help="stop a point early; 0 disables")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--bits", action="store_true", help="also count Gray-mapped bit errors")
    p.add_argument("--trace", help="write per-trial metric/node CSV")
    p.add_argument("--out", help="write the campaign CSV")

    if overrides:
        for action in sub.choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in overrides.items() if k in known})
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    try:
        overrides = _load_config(ns.config) if ns.config else {}
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    parser = _build_parser(overrides)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
