"""Command-line front end.

Subcommands: calibrate, invert, collective-invert, expect, squeeze,
simulate-fig1, simulate-fig2.  Exit codes: 0 success, 2 input or format
error, 3 singular detector model, 4 resource limit.  All simulation commands
are deterministic given their arguments (including --seed); the only
environment variable consulted is DETCORR_THREADS, the default worker-thread
count for the simulation subcommands (output does not depend on it).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io, statesim
from .error_model import DetectorModel, calibrate
from .errors import ResourceLimitError, SingularModelError
from .observables import (
    PauliString,
    SqueezingInput,
    correction_factor,
    expect_corrected,
    expect_raw,
    squeezing_corrected,
)
from .collective import unfold_collective
from .reconstruct import correct, frequencies
from .util import fmt17

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_RESOURCE = 4


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("detector model (exactly one source)")
    group.add_argument("--model", metavar="FILE", help="model JSON from 'calibrate'")
    group.add_argument("--p", type=float, help="uniform symmetric rate p0 = p1 = p")
    group.add_argument("--p0", help="rate(s) 0->1: single float or comma list per qubit")
    group.add_argument("--p1", help="rate(s) 1->0: single float or comma list per qubit")


def _parse_rates(text: str, n: int, name: str) -> list[float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 1:
        return parts * n
    if len(parts) != n:
        raise ValueError(f"{name} lists {len(parts)} rates for {n} qubits")
    return parts


def _resolve_model(args: argparse.Namespace, n: int) -> DetectorModel:
    sources = sum([args.model is not None, args.p is not None, args.p0 is not None or args.p1 is not None])
    if sources != 1:
        raise ValueError("give exactly one model source: --model, --p, or --p0/--p1")
    if args.model is not None:
        model = io.read_model(args.model)
        if model.n != n:
            raise ValueError(f"model file covers {model.n} qubits, data has {n}")
        return model
    if args.p is not None:
        return DetectorModel.uniform(n, args.p)
    if args.p0 is None or args.p1 is None:
        raise ValueError("--p0 and --p1 must be given together")
    p0 = _parse_rates(args.p0, n, "--p0")
    p1 = _parse_rates(args.p1, n, "--p1")
    return DetectorModel(tuple(zip(p0, p1)))


def _cmd_calibrate(args: argparse.Namespace) -> int:
    records = [io.read_calibration_record(path) for path in args.record]
    result = calibrate(records)
    io.write_model(args.out, result.model, result)
    print(f"calibrated {result.model.n} qubit(s) from {len(records)} record(s) -> {args.out}")
    for k, (p0, p1) in enumerate(result.model.per_qubit):
        print(
            f"  qubit {k}: p0 = {p0:.6f} +- {result.p0_stderr[k]:.6f}"
            f"   p1 = {p1:.6f} +- {result.p1_stderr[k]:.6f}"
        )
    return EXIT_OK


def _cmd_invert(args: argparse.Namespace) -> int:
    record = io.read_counts(args.counts)
    model = _resolve_model(args, record.n)
    dist = correct(record, model, project=args.project)
    if args.out:
        io.write_distribution(args.out, dist, kind="individual")
    raw = frequencies(record)
    negative = int((dist.values < 0).sum())
    print(f"unfolded {record.shots} shots over {1 << record.n} outcomes")
    print(f"  sum = {dist.values.sum():.12f}  negative entries = {negative}"
          + (f"  clamped = {list(dist.clamped)}" if dist.clamped else ""))
    print(f"  max sigma raw/corrected = {raw.sigmas.max():.3e} / {dist.sigmas.max():.3e}")
    if args.out:
        print(f"  wrote {args.out}")
    return EXIT_OK


def _cmd_collective_invert(args: argparse.Namespace) -> int:
    counts = io.read_collective_counts(args.counts)
    result = unfold_collective(counts, args.p0, args.p1)
    dist = result.distribution
    if args.out:
        io.write_distribution(
            args.out, dist, kind="collective", condition_number=result.condition_number
        )
    print(f"unfolded {counts.shots} shots over {counts.n + 1} excitation outcomes")
    print(f"  condition number of response = {result.condition_number:.6g}")
    print(f"  sum = {dist.values.sum():.12f}  negative entries = {int((dist.values < 0).sum())}")
    if args.out:
        print(f"  wrote {args.out}")
    return EXIT_OK


def _cmd_expect(args: argparse.Namespace) -> int:
    record = io.read_counts(args.counts)
    obs = PauliString(record.n, args.observable, args.coefficient)
    model = _resolve_model(args, record.n)
    raw, raw_sigma = expect_raw(record, obs)
    corr, corr_sigma = expect_corrected(record, obs, model)
    factor = correction_factor(obs, model)
    print(f"observable {obs.factors}  support {obs.support}  setting {record.setting}  shots {record.shots}")
    print(f"  raw       = {raw:+.6f} +- {raw_sigma:.6f}")
    print(f"  corrected = {corr:+.6f} +- {corr_sigma:.6f}")
    if factor.scale is not None:
        print(f"  correction factor = {fmt17(factor.scale)}")
    else:
        print("  correction factor = per-outcome (rates are not symmetric)")
    if args.out:
        payload = {
            "schema_version": io.SCHEMA_VERSION,
            "observable": obs.factors,
            "support": obs.support,
            "shots": record.shots,
            "raw": raw,
            "raw_sigma": raw_sigma,
            "corrected": corr,
            "corrected_sigma": corr_sigma,
            "correction_factor": factor.scale,
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"  wrote {args.out}")
    return EXIT_OK


def _cmd_squeeze(args: argparse.Namespace) -> int:
    if args.collective:
        counts_z = io.read_collective_counts(args.counts_z)
        counts_x = io.read_collective_counts(args.counts_x)
        n = counts_z.n
    else:
        counts_z = io.read_counts(args.counts_z)
        counts_x = io.read_counts(args.counts_x)
        n = counts_z.n
    inp = SqueezingInput(
        counts_z=counts_z, counts_x=counts_x, n=n, model=DetectorModel.uniform(n, args.p)
    )
    res = squeezing_corrected(inp)
    print(f"n = {res.n}  p = {res.p}")
    print(f"  xi            = {res.xi:.6f} +- {res.sigma_xi:.6f}")
    print(f"  xi corrected  = {res.xi_corrected:.6f} +- {res.sigma_xi_corrected:.6f}"
          + ("  [radicand clamped to 0]" if res.negative_radicand else ""))
    print(f"  xi detection  = {res.xi_detection:.6f}")
    print(f"  <Jx> = {res.jx:.4f} (corrected {res.jx_corrected:.4f})"
          f"  <Jz^2> = {res.jz2:.4f} (corrected {res.jz2_corrected:.4f})")
    if args.out:
        payload = {
            "schema_version": io.SCHEMA_VERSION,
            "n": res.n,
            "p": res.p,
            "xi": res.xi,
            "sigma_xi": res.sigma_xi,
            "xi_corrected": res.xi_corrected,
            "sigma_xi_corrected": res.sigma_xi_corrected,
            "xi_detection": res.xi_detection,
            "negative_radicand": res.negative_radicand,
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"  wrote {args.out}")
    return EXIT_OK


def _parse_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: 'start:stop:step' (inclusive stop) or a comma list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        values = []
        v = start
        while v <= stop + 1e-12:
            values.append(round(v, 10))
            v += step
        return tuple(values)
    return tuple(float(x) for x in text.split(","))


def _cmd_simulate_fig1(args: argparse.Namespace) -> int:
    rows = statesim.figure1_experiment(
        n=args.n, p=args.p, p_n=args.pn, shots=args.shots, seed=args.seed,
        bootstrap_resamples=args.bootstrap,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "fig1.csv"
    io.write_figure1_csv(csv_path, rows)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        from .plotting import render_figure1

        png_path = out_dir / "fig1.png"
        render_figure1(rows, png_path)
        print(f"wrote {png_path}")
    return EXIT_OK


def _cmd_simulate_fig2(args: argparse.Namespace) -> int:
    grid = _parse_grid(args.pn_grid) if args.pn_grid else None
    rows = statesim.figure2_experiment(
        n=args.n, p=args.p, p_n_grid=grid, shots=args.shots, seed=args.seed,
        bootstrap_resamples=args.bootstrap,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "fig2.csv"
    io.write_figure2_csv(csv_path, rows)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        from .plotting import render_figure2

        png_path = out_dir / "fig2.png"
        render_figure2(rows, png_path)
        print(f"wrote {png_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detcorr",
        description="Correct qubit readout errors by inverting a calibrated flip model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="estimate flip rates from known-input runs")
    p.add_argument("--record", action="append", required=True, metavar="FILE",
                   help="counts file with a 'known' bitstring field (repeatable)")
    p.add_argument("--out", required=True, help="model JSON output path")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("invert", help="unfold a counts file through the inverse response")
    p.add_argument("--counts", required=True, metavar="FILE")
    p.add_argument("--project", action="store_true",
                   help="project the unfolded vector onto the probability simplex")
    p.add_argument("--out", help="distribution JSON output path")
    _add_model_args(p)
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("collective-invert",
                       help="unfold excitation-count data (JSON array of n+1 integers)")
    p.add_argument("--counts", required=True, metavar="FILE")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--out", help="distribution JSON output path")
    p.set_defaults(func=_cmd_collective_invert)

    p = sub.add_parser("expect", help="raw and corrected expectation of a Pauli string")
    p.add_argument("--counts", required=True, metavar="FILE")
    p.add_argument("--observable", required=True,
                   help="factor string over IXYZ, qubit 0 leftmost, e.g. XZIIZ")
    p.add_argument("--coefficient", type=float, default=1.0)
    p.add_argument("--out", help="JSON report output path")
    _add_model_args(p)
    p.set_defaults(func=_cmd_expect)

    p = sub.add_parser("squeeze", help="spin squeezing parameter, raw and corrected")
    p.add_argument("--counts-z", required=True, metavar="FILE", help="squeezing-axis counts")
    p.add_argument("--counts-x", required=True, metavar="FILE", help="mean-spin-axis counts")
    p.add_argument("--p", type=float, required=True, help="uniform symmetric flip rate")
    p.add_argument("--collective", action="store_true",
                   help="counts files are collective (JSON arrays of n+1 integers)")
    p.add_argument("--out", help="JSON report output path")
    p.set_defaults(func=_cmd_squeeze)

    p = sub.add_parser("simulate-fig1", help="stabilizer values before/after correction")
    p.add_argument("--n", type=int, default=statesim.DEFAULT_N)
    p.add_argument("--p", type=float, default=statesim.DEFAULT_P)
    p.add_argument("--pn", type=float, default=0.0, help="depolarizing preparation noise")
    p.add_argument("--shots", type=int, default=statesim.DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=statesim.DEFAULT_SEED)
    p.add_argument("--bootstrap", type=int, default=statesim.DEFAULT_BOOTSTRAP,
                   help="bootstrap resamples for the alternative error bars")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-plot", action="store_true", help="skip the PNG rendering")
    p.set_defaults(func=_cmd_simulate_fig1)

    p = sub.add_parser("simulate-fig2", help="entanglement witness vs preparation noise")
    p.add_argument("--n", type=int, default=statesim.DEFAULT_N)
    p.add_argument("--p", type=float, default=statesim.DEFAULT_P)
    p.add_argument("--pn-grid", default=None,
                   help="'start:stop:step' or comma list (default 0:0.1:0.005)")
    p.add_argument("--shots", type=int, default=statesim.DEFAULT_SHOTS)
    p.add_argument("--seed", type=int, default=statesim.DEFAULT_SEED)
    p.add_argument("--bootstrap", type=int, default=statesim.DEFAULT_BOOTSTRAP)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_simulate_fig2)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SingularModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
