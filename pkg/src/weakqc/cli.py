"""Command-line front end.

Every command writes one data file (CSV for tables, JSON for transcripts)
whose header records the package version, the exact command line and the
seed. Output goes to ``--output``; without it, to
``$WEAKQC_OUTPUT_DIR/<command>.<ext>`` if that variable is set, else stdout.

Exit codes: 0 success, 1 invalid input, 2 internal consistency check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys
from pathlib import Path

from . import __version__
from .counterex import local_meter_table, sat_scaling_table
from .orderfind import (
    OrderInstance,
    denominator_distribution,
    ideal_denominator_distribution,
)
from .readout import (
    DecisionSpec,
    required_samples,
    required_samples_real,
    run_bisection,
    sample_bound,
    totient_floor,
)
from .streams import make_rng
from .weakmeter import MeterConfig

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2
OUTPUT_DIR_ENV = "WEAKQC_OUTPUT_DIR"
DEFAULT_THETA = math.pi / 6


class ConsistencyError(RuntimeError):
    pass


def _header(args) -> dict:
    return {"version": __version__, "command": args.command_line, "seed": args.seed}


def _render_csv(header: dict, rows: list[dict]) -> str:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _render_json(header: dict, data) -> str:
    return json.dumps({"header": header, "data": data}, indent=2) + "\n"


def _emit(args, rows_or_data, default_format: str) -> None:
    fmt = args.format or default_format
    header = _header(args)
    if fmt == "csv":
        text = _render_csv(header, rows_or_data)
    else:
        text = _render_json(header, rows_or_data)
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{fmt}"
    if target is None:
        sys.stdout.write(text)
        return
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="") as fh:
        fh.write(text)


def _meter(theta: float) -> MeterConfig:
    config = MeterConfig(theta)
    if config.is_off:
        raise ValueError("theta must be below pi/4 to build an estimator")
    return config


def cmd_distribution(args) -> None:
    if args.ideal:
        if args.r is None:
            raise ValueError("--ideal needs --r")
        bits = args.bits if args.bits is not None else max(1, args.r.bit_length())
        dist = ideal_denominator_distribution(args.r, bits)
    else:
        if args.x is None or args.N is None:
            raise ValueError("need --x and --N (or --ideal --r)")
        dist = denominator_distribution(OrderInstance(args.x, args.N, args.phase_bits))
    rows = [{"value": v, "probability": p} for v, p in dist.rows()]
    total = math.fsum(r["probability"] for r in rows)
    if abs(total - 1.0) > 1e-9:
        raise ConsistencyError(f"distribution mass sums to {total}")
    _emit(args, rows, "csv")


def cmd_order_find(args) -> None:
    config = _meter(args.theta)
    instance = OrderInstance(args.x, args.N, args.phase_bits)
    dist = denominator_distribution(instance)
    result = run_bisection(
        dist, config, args.epsilon, make_rng(args.seed), signal_floor=args.signal_floor
    )
    report = {
        "x": instance.x,
        "N": instance.N,
        "phase_bits": instance.phase_bits,
        "theta": args.theta,
        "strength": config.strength,
        "epsilon": args.epsilon,
        "true_order": instance.order,
        "readout": result.value,
        "correct": result.value == instance.order,
        **{k: v for k, v in result.to_dict().items() if k != "value"},
    }
    _emit(args, report, "json")


def cmd_bisection_demo(args) -> None:
    config = _meter(args.theta)
    bits = args.bits if args.bits is not None else args.r.bit_length()
    dist = ideal_denominator_distribution(args.r, bits)
    floor = args.signal_floor if args.signal_floor is not None else totient_floor(args.r)
    result = run_bisection(
        dist, config, args.epsilon, make_rng(args.seed), signal_floor=floor, exact=args.exact
    )
    report = {
        "r": args.r,
        "theta": args.theta,
        "epsilon": args.epsilon,
        "exact": args.exact,
        "readout": result.value,
        "correct": result.value == args.r,
        **{k: v for k, v in result.to_dict().items() if k != "value"},
    }
    _emit(args, report, "json")


def _doubling(lo: int, hi: int) -> list[int]:
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= n-min <= n-max")
    out, n = [], lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


def cmd_sample_budget(args) -> None:
    spec = DecisionSpec.from_snr(args.snr)
    rows = []
    # cap on M / ln(n)^2 for n >= 2, from the closed-form upper bound
    cap = (2 * math.sqrt(2) / args.snr) ** 2 * (
        1 - math.log(args.epsilon * math.sqrt(math.pi)) / math.log(2)
    ) ** 2
    for n in _doubling(args.n_min, args.n_max):
        M = required_samples(spec, args.epsilon, n)
        row = {"n": n, "M": M, "total_samples": n * M}
        if n >= 2:
            ratio = n * M / (n * math.log(n) ** 2)
            bound = sample_bound(args.snr, args.epsilon, n)
            if required_samples_real(spec, args.epsilon, n) > bound or ratio > cap + 1 / math.log(2) ** 2:
                raise ConsistencyError(f"sample budget exceeds its bound at n={n}")
            row.update(n_log2n_ratio=ratio, M_bound=bound)
        else:
            row.update(n_log2n_ratio="", M_bound="")
        rows.append(row)
    if any(b["M"] < a["M"] for a, b in zip(rows, rows[1:])):
        raise ConsistencyError("M is not monotone in n")
    _emit(args, rows, "csv")


def cmd_sat_demo(args) -> None:
    rows = sat_scaling_table(range(args.n_min, args.n_max + 1), args.epsilon)
    for prev, row in zip(rows, rows[1:]):
        row["ratio_to_previous"] = row["M_required"] / prev["M_required"]
    if rows:
        rows[0]["ratio_to_previous"] = ""
    bad = [r["n"] for r in rows[1:] if abs(r["ratio_to_previous"] - 2.0) > 0.2]
    _emit(args, rows, "csv")
    if bad:
        raise ConsistencyError(f"M does not double per input bit at n={bad}")


def cmd_local_demo(args) -> None:
    rows = local_meter_table(args.n, args.sigma, args.gamma, args.samples, args.seed)
    _emit(args, rows, "csv")
    bad = [r["n"] for r in rows if abs(r["z_score"]) > 5.0]
    if bad:
        raise ConsistencyError(f"Monte Carlo disagrees with closed form at n={bad}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakqc",
        description="Order finding read out through weak measurements.",
    )
    parser.add_argument("--version", action="version", version=f"weakqc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        p.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--seed", type=int, default=0,
                       help="random seed, echoed into the output header" if seeded
                       else "echoed into the output header (command is deterministic)")

    p = sub.add_parser("distribution", help="denominator-register distribution",
                       description="CSV columns: value, probability (nonzero masses only).")
    p.add_argument("--x", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--phase-bits", type=int)
    p.add_argument("--ideal", action="store_true", help="exact phases s/r, s uniform")
    p.add_argument("--r", type=int, help="order for --ideal")
    p.add_argument("--bits", type=int, help="register bits for --ideal")
    common(p, seeded=False)
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("order-find", help="weak-readout order finding for (x, N)",
                       description="JSON report: readout, correctness against the "
                                   "classical order, per-bit transcript, sample totals.")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--phase-bits", type=int)
    p.add_argument("--signal-floor", type=float, help="default 1/(2 ln N)")
    common(p)
    p.set_defaults(func=cmd_order_find)

    p = sub.add_parser("bisection-demo", help="bisection readout of an ideal distribution",
                       description="JSON transcript of {prefix, M, sample_mean, threshold, decision}.")
    p.add_argument("--r", type=int, default=432)
    p.add_argument("--bits", type=int)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--signal-floor", type=float, help="default phi(r)/r")
    p.add_argument("--exact", action="store_true", help="use true expectations instead of samples")
    common(p)
    p.set_defaults(func=cmd_bisection_demo)

    p = sub.add_parser("sample-budget", help="samples per decision versus register size",
                       description="CSV columns: n, M, total_samples, n_log2n_ratio "
                                   "(= n M / (n ln^2 n)), M_bound. n doubles from n-min to n-max.")
    p.add_argument("--snr", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=1024)
    common(p, seeded=False)
    p.set_defaults(func=cmd_sample_budget)

    p = sub.add_parser("sat-demo", help="samples needed to detect one satisfying input",
                       description="CSV columns: n, signal, snr0, M_required, ratio_to_previous.")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--epsilon", type=float, default=0.05)
    common(p, seeded=False)
    p.set_defaults(func=cmd_sat_demo)

    p = sub.add_parser("local-demo", help="local-meter product variance, closed form vs Monte Carlo",
                       description="CSV columns: n, sigma, gamma, closed_form, empirical, "
                                   "standard_error, z_score.")
    p.add_argument("--n", type=int, nargs="+", default=[2])
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_local_demo)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_line = shlex.join(["weakqc", *argv])
    try:
        args.func(args)
    except ConsistencyError as exc:
        print(f"weakqc: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"weakqc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
