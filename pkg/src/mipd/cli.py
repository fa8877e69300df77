"""Command-line interface.

Subcommands
-----------
signal    one averaged-signal point (finite N or asymptotic), JSON on stdout
scan      (C, A) grid of asymptotic signal points -> CSV + manifest
winding   integer winding number of the unwrapped phase, JSON on stdout
curve     unwrapped chi(theta) samples -> CSV + manifest
critical  refine a dephasing divergence, or trace the critical line -> CSV
sample    Monte Carlo trajectory estimate of z, JSON on stdout
verify    run the bundled invariant suite

Angles accept multiples of pi ("0.75pi"), ranges are "start:end:count",
and the winding direction is "+1" or "-1".  Exit codes: 0 success,
1 usage error, 2 numeric failure (no convergence / ill-defined path),
3 I/O error.  MIPD_THREADS (integer >= 1) caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .errors import ContinuationStalled, IllDefinedPath, MipdError, NoConvergence
from .output import (
    AxisSpec,
    fmt,
    write_critical_csv,
    write_curve_csv,
    write_manifest,
    write_scan_csv,
)
from .protocol import ProtocolParams
from .replica import signal as signal_point
from .topology import (
    find_critical_point,
    find_critical_point_fixed_theta,
    trace_critical_line,
    scan_grid,
    unwrap_phase,
    winding_number,
)
from .trajectories import estimate_signal, thread_count
from .verify import render_report, run_suite

USAGE_EXIT, NUMERIC_EXIT, IO_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse with the exit-status contract (usage errors -> 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def parse_angle(text: str) -> float:
    """Radians, accepting literal pi multiples like '0.75pi' or 'pi'."""
    s = text.strip().lower().replace(" ", "")
    try:
        if s.endswith("pi"):
            head = s[:-2]
            if head in ("", "+", "-"):
                head += "1"
            return float(head) * math.pi
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None


def parse_axis(text: str) -> AxisSpec:
    """AxisSpec from 'start:end:count'."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:end:count, got {text!r}")
    try:
        return AxisSpec(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}: {exc}") from None


def parse_direction(text: str) -> int:
    if text in ("+1", "1"):
        return +1
    if text == "-1":
        return -1
    raise argparse.ArgumentTypeError(f"--d must be +1 or -1, got {text!r}")


def _theta_in_range(parser, theta):
    if not 0.0 <= theta <= math.pi:
        parser.error(f"--theta must lie in [0, pi], got {fmt(theta)}")


def _signal_json(pt) -> str:
    return json.dumps(
        {
            "re_z": pt.z.real,
            "im_z": pt.z.imag,
            "alpha": pt.alpha,
            "chi_principal": pt.chi_principal,
            "defined": pt.defined,
        },
        sort_keys=True,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="mipd", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_point_args(sp, with_theta=True):
        sp.add_argument("--C", type=float, required=True, help="measurement strength, >= 0")
        sp.add_argument("--A", type=float, required=True, help="asymmetry parameter")
        if with_theta:
            sp.add_argument("--theta", type=parse_angle, required=True,
                            help="polar angle in [0, pi]; accepts e.g. 0.75pi")
        sp.add_argument("--d", type=parse_direction, required=True,
                        help="winding direction, +1 or -1")

    sp = sub.add_parser("signal", help="one averaged-signal point")
    add_point_args(sp)
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--N", type=int, help="finite number of measurements")
    mode.add_argument("--asymptotic", action="store_true", help="N -> infinity mode")

    sp = sub.add_parser("scan", help="asymptotic signal on a (C, A) grid")
    sp.add_argument("--C", type=parse_axis, required=True, metavar="START:END:COUNT")
    sp.add_argument("--A", type=parse_axis, required=True, metavar="START:END:COUNT")
    sp.add_argument("--theta", type=parse_angle, required=True)
    sp.add_argument("--d", type=parse_direction, required=True)
    sp.add_argument("--out", required=True, help="output CSV path")

    sp = sub.add_parser("winding", help="integer winding number over theta")
    add_point_args(sp, with_theta=False)
    sp.add_argument("--resolution", type=int, default=256)

    sp = sub.add_parser("curve", help="unwrapped chi(theta) samples")
    add_point_args(sp, with_theta=False)
    sp.add_argument("--resolution", type=int, default=256)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("critical", help="refine or trace dephasing divergences")
    sp.add_argument("--d", type=parse_direction, required=True)
    sp.add_argument("--A", type=float, help="fix A; solve for (C, theta)")
    sp.add_argument("--theta", type=parse_angle, help="fix theta; solve for (C, A)")
    sp.add_argument("--seed-C", type=float, required=True)
    sp.add_argument("--seed-theta", type=parse_angle, help="theta seed (fixed-A mode)")
    sp.add_argument("--seed-A", type=float, help="A seed (fixed-theta mode)")
    sp.add_argument("--trace", action="store_true",
                    help="continue the fixed-A root along A")
    sp.add_argument("--A-to", type=float, help="continuation endpoint (with --trace)")
    sp.add_argument("--step", type=float, default=0.01, help="initial A step")
    sp.add_argument("--out", help="output CSV path (default: stdout JSON)")

    sp = sub.add_parser("sample", help="Monte Carlo estimate of z")
    add_point_args(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--shots", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--log", help="optional per-trajectory CSV path")

    sp = sub.add_parser("verify", help="run the bundled invariant suite")
    sp.add_argument("--seed", type=int, default=2024)
    sp.add_argument("--samples", type=int, default=20)

    return parser


def _cmd_signal(parser, args) -> int:
    _theta_in_range(parser, args.theta)
    if args.N is not None and args.N < 1:
        parser.error("--N must be >= 1")
    try:
        p = ProtocolParams(C=args.C, A=args.A, theta=args.theta, d=args.d,
                           N=None if args.asymptotic else args.N)
    except ValueError as exc:
        parser.error(str(exc))
    print(_signal_json(signal_point(p)))
    return 0


def _cmd_scan(parser, args) -> int:
    _theta_in_range(parser, args.theta)
    if args.C.start < 0:
        parser.error("--C range must start at >= 0")
    grid = scan_grid(
        args.C.values(), args.A.values(), args.theta, args.d,
        threads=thread_count(),
    )
    path = write_scan_csv(grid, args.out)
    write_manifest(
        path,
        command="scan",
        params={"theta": args.theta, "d": args.d},
        axes={
            "C": {"start": args.C.start, "end": args.C.end, "count": args.C.count},
            "A": {"start": args.A.start, "end": args.A.end, "count": args.A.count},
        },
    )
    print(f"wrote {path} ({args.C.count * args.A.count} cells)")
    return 0


def _cmd_winding(parser, args) -> int:
    if args.C < 0:
        parser.error("--C must be >= 0")
    n = winding_number(args.C, args.A, args.d, args.resolution)
    print(json.dumps({"C": args.C, "A": args.A, "d": args.d, "winding": n},
                     sort_keys=True))
    return 0


def _cmd_curve(parser, args) -> int:
    if args.C < 0:
        parser.error("--C must be >= 0")
    curve = unwrap_phase(args.C, args.A, args.d, args.resolution)
    path = write_curve_csv(curve, args.out)
    write_manifest(
        path,
        command="curve",
        params={"C": args.C, "A": args.A, "d": args.d,
                "resolution": args.resolution,
                "winding": curve.winding},
    )
    print(f"wrote {path} ({curve.theta_samples.size} samples, "
          f"winding {curve.winding})")
    return 0


def _point_json(pt) -> str:
    return json.dumps(
        {"C_crit": pt.C_crit, "A_crit": pt.A_crit, "theta_crit": pt.theta_crit,
         "d": pt.d, "residual": pt.residual},
        sort_keys=True,
    )


def _cmd_critical(parser, args) -> int:
    fixed_a = args.A is not None
    fixed_theta = args.theta is not None
    if fixed_a == fixed_theta:
        parser.error("exactly one of --A (fixed-A mode) or --theta "
                     "(fixed-theta mode) is required")
    if fixed_a:
        if args.seed_theta is None:
            parser.error("--seed-theta is required in fixed-A mode")
        point = find_critical_point(args.seed_C, args.seed_theta, args.A, args.d)
    else:
        if args.trace:
            parser.error("--trace requires fixed-A mode (--A)")
        if args.seed_A is None:
            parser.error("--seed-A is required in fixed-theta mode")
        point = find_critical_point_fixed_theta(
            args.seed_C, args.seed_A, args.theta, args.d)

    if args.trace:
        if args.A_to is None:
            parser.error("--trace requires --A-to")
        points = trace_critical_line(point, args.A, args.A_to,
                                     initial_step=args.step)
    else:
        points = [point]

    if args.out:
        path = write_critical_csv(points, args.out)
        write_manifest(
            path,
            command="critical",
            params={"d": args.d, "mode": "fixed-A" if fixed_a else "fixed-theta",
                    "trace": bool(args.trace)},
        )
        print(f"wrote {path} ({len(points)} points)")
    else:
        for pt in points:
            print(_point_json(pt))
    return 0


def _cmd_sample(parser, args) -> int:
    _theta_in_range(parser, args.theta)
    if args.shots < 1:
        parser.error("--shots must be >= 1")
    if args.N < 1:
        parser.error("--N must be >= 1")
    p = ProtocolParams(C=args.C, A=args.A, theta=args.theta, d=args.d, N=args.N)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            est = estimate_signal(p, args.shots, args.seed, trajectory_log=fh)
    else:
        est = estimate_signal(p, args.shots, args.seed)
    print(json.dumps(
        {"re_z_hat": est.z_hat.real, "im_z_hat": est.z_hat.imag,
         "stderr_re": est.stderr_re, "stderr_im": est.stderr_im,
         "shots": est.shots, "accept_rate": est.accept_rate, "seed": est.seed},
        sort_keys=True,
    ))
    return 0


def _cmd_verify(parser, args) -> int:
    results = run_suite(seed=args.seed, samples=args.samples)
    report, all_pass = render_report(results)
    print(report)
    if not all_pass:
        failed = next(r.name for r in results if not r.passed)
        print(f"FAILED: {failed}", file=sys.stderr)
        return NUMERIC_EXIT
    return 0


_HANDLERS = {
    "signal": _cmd_signal,
    "scan": _cmd_scan,
    "winding": _cmd_winding,
    "curve": _cmd_curve,
    "critical": _cmd_critical,
    "sample": _cmd_sample,
    "verify": _cmd_verify,
}


def _merge_negative_ranges(argv):
    """Join '--A -2:2:200' into '--A=-2:2:200' so argparse reads the value."""
    merged = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and nxt is not None
                and nxt.startswith("-") and ":" in nxt):
            merged.append(f"{tok}={nxt}")
            i += 2
        else:
            merged.append(tok)
            i += 1
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_negative_ranges(list(argv)))
    try:
        return _HANDLERS[args.command](parser, args)
    except (NoConvergence, IllDefinedPath, ContinuationStalled) as exc:
        print(f"mipd {args.command}: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    except OSError as exc:
        path = getattr(exc, "filename", None)
        print(f"mipd {args.command}: I/O error on {path!r}: {exc}", file=sys.stderr)
        return IO_EXIT
    except MipdError as exc:
        print(f"mipd {args.command}: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
