"""Command-line surface: thresholds, condition checks, verification
sweeps, ground-state solving, and phase tables.

Exit codes are a fixed contract: 0 success or condition holds, 2
invalid input, 3 condition false or no existence, 4 indeterminate near
a threshold, 5 equivalence violation, 6 solver failure, 7 I/O failure.
Machine-readable output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from typing import Sequence

from ._fmt import format_float, json_text
from .conditions import (
    EquivalenceViolation,
    IndeterminateNearThreshold,
    check_existence,
    check_f_positive,
    check_Ftilde,
    check_uniqueness,
    sweep,
    verify_corollary,
    verify_theorem,
)
from .nonlinearity import InvalidParams, make_params, thresholds
from .shooting import (
    BracketNotFound,
    Controls,
    NoExistence,
    NonFiniteState,
    StepSizeUnderflow,
    find_ground_state,
    profile_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FALSE = 3
EXIT_INDETERMINATE = 4
EXIT_VIOLATION = 5
EXIT_SOLVER = 6
EXIT_IO = 7

_CONDITIONS = {
    "existence": check_existence,
    "uniqueness": check_uniqueness,
    "ftilde-big": check_Ftilde,
    "f-positive": check_f_positive,
}


def _parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InvalidParams(f"malformed range {text!r}, expected lo:hi")
    try:
        lo_f, hi_f = float(lo), float(hi)
    except ValueError:
        raise InvalidParams(f"malformed range {text!r}, expected lo:hi") from None
    if not lo_f <= hi_f:
        raise InvalidParams(f"malformed range {text!r}, lower bound exceeds upper")
    return lo_f, hi_f


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _human(pairs: Sequence[tuple[str, object]]) -> str:
    lines = []
    for key, val in pairs:
        if isinstance(val, bool):
            shown = "true" if val else "false"
        elif isinstance(val, float):
            shown = format_float(val)
        elif val is None:
            shown = "none"
        else:
            shown = str(val)
        lines.append(f"{key} = {shown}")
    return "\n".join(lines) + "\n"


def _csv_cell(val: object) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return format_float(val)
    if val is None:
        return ""
    return str(val)


def _csv_record(pairs: Sequence[tuple[str, object]]) -> str:
    header = ",".join(key for key, _ in pairs)
    row = ",".join(_csv_cell(val) for _, val in pairs)
    return header + "\n" + row + "\n"


def _render(pairs: Sequence[tuple[str, object]], output: str) -> str:
    if output == "json":
        return json_text(dict(pairs)) + "\n"
    if output == "csv":
        return _csv_record(pairs)
    return _human(pairs)


def cmd_thresholds(args: argparse.Namespace) -> int:
    thr = thresholds(args.p, args.q)
    pairs = [
        ("omega_crit", thr.omega_crit),
        ("eta_crit", thr.eta_crit),
        ("u_star_F", thr.u_star_F),
        ("u_star_f", thr.u_star_f),
    ]
    _emit(_render(pairs, args.output))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    params = make_params(args.omega, args.p, args.q, args.n)
    report = _CONDITIONS[args.condition](params)
    pairs = [
        ("condition", report.condition_id.value),
        ("holds", report.holds),
        ("method", report.method.value),
        ("margin", report.margin),
        ("witness", report.witness),
    ]
    _emit(_render(pairs, args.output))
    return EXIT_OK if report.holds else EXIT_FALSE


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise InvalidParams("--samples must be at least 1")
    p_range = _parse_range(args.p_range)
    q_range = _parse_range(args.q_range)
    if not p_range[0] > 1.0 or not q_range[0] > 1.0:
        raise InvalidParams("exponent ranges must stay above 1")
    instances = _sample_instances(args.samples, args.seed, p_range, q_range)

    passed = 0
    skipped = 0
    violations: list[str] = []
    for params in instances:
        try:
            verify_theorem(params)
        except IndeterminateNearThreshold:
            skipped += 1
            continue
        except EquivalenceViolation as exc:
            violations.append(
                f"theorem p={format_float(params.p)} q={format_float(params.q)} "
                f"omega={format_float(params.omega)}: {exc}"
            )
            continue
        corollary = verify_corollary(params.p, params.q, [params.omega])
        if corollary.ok:
            passed += 1
        else:
            violations.append(
                f"corollary p={format_float(params.p)} q={format_float(params.q)} "
                f"omega={format_float(params.omega)}"
            )

    pairs = [
        ("samples", len(instances)),
        ("passed", passed),
        ("skipped_in_band", skipped),
        ("failed", len(violations)),
    ]
    _emit(_render(pairs, args.output))
    if violations:
        for line in violations:
            print(f"violation: {line}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _sample_instances(samples, seed, p_range, q_range):
    """Seeded (p, q, omega) draws with q from its own range.

    Same placement scheme as sample_lemma_instances: swap to q > p,
    reject gaps under 1e-3, omega set multiplicatively off a randomly
    chosen threshold so both sides of both bands are exercised.
    """
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < samples:
        attempts += 1
        if attempts > 1000 * (samples + 1):
            raise InvalidParams("exponent ranges leave no room for q > p")
        p = rng.uniform(*p_range)
        q = rng.uniform(*q_range)
        if q < p:
            p, q = q, p
        if q - p < 1e-3:
            continue
        thr = thresholds(p, q)
        ref = thr.omega_crit if rng.random() < 0.5 else thr.eta_crit
        omega = rng.choice((0.5, 0.99, 1.01, 2.0)) * ref
        out.append(make_params(omega, p, q, 3))
    return out


def cmd_solve(args: argparse.Namespace) -> int:
    params = make_params(args.omega, args.p, args.q, args.n)
    overrides = {}
    if args.rtol is not None:
        overrides["rtol"] = args.rtol
    if args.atol is not None:
        overrides["atol"] = args.atol
    gs = find_ground_state(params, Controls(**overrides) if overrides else None)

    if args.out is not None:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(profile_csv(gs.profile))

    if args.output == "json":
        diag = {
            "alpha": gs.alpha,
            "bracket": [gs.bracket[0], gs.bracket[1]],
            "decay_rate": gs.decay_rate,
            "ode_residual": gs.ode_residual,
            "max_energy_violation": gs.profile.stats.max_energy_violation,
            "profile": gs.profile.to_json_dict(),
        }
        _emit(json_text(diag) + "\n")
    elif args.output == "csv":
        _emit(profile_csv(gs.profile))
    else:
        pairs = [
            ("alpha_star", gs.alpha),
            ("bracket_lo", gs.bracket[0]),
            ("bracket_hi", gs.bracket[1]),
            ("decay_rate", gs.decay_rate),
            ("ode_residual", gs.ode_residual),
            ("max_energy_violation", gs.profile.stats.max_energy_violation),
            ("samples", len(gs.profile.samples)),
        ]
        _emit(_human(pairs))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    table = sweep(
        _parse_range(args.p),
        _parse_range(args.q),
        _parse_range(args.omega),
        args.res,
    )
    if args.output == "json":
        keys = ("p", "q", "omega", "omega_crit", "eta_crit", "existence", "uniqueness", "consistent")
        rows = [{k: getattr(r, k) for k in keys} for r in table]
        text = json_text({"rows": rows}) + "\n"
    else:
        text = table.to_csv()
    if args.out is not None:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        _emit(text)
    return EXIT_OK


def _add_output_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--output", choices=("json", "csv", "human"), default="human",
        help="stdout format (default: human)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublepower",
        description="Existence and uniqueness machinery for -u'' - (n-1)/r u' "
        "= -omega*u + u**p - u**q.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("thresholds", help="print omega_crit, eta_crit and maximizers")
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--q", type=float, required=True)
    _add_output_flag(sub)
    sub.set_defaults(handler=cmd_thresholds)

    sub = subs.add_parser("check", help="evaluate one condition at (omega, p, q)")
    sub.add_argument("--omega", type=float, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--q", type=float, required=True)
    sub.add_argument("--n", type=int, default=3)
    sub.add_argument("--condition", choices=sorted(_CONDITIONS), required=True)
    _add_output_flag(sub)
    sub.set_defaults(handler=cmd_check)

    sub = subs.add_parser("verify", help="equivalence sweep over random instances")
    sub.add_argument("--samples", type=int, default=200)
    sub.add_argument("--seed", type=int, default=7)
    sub.add_argument("--p-range", default="1.001:6", metavar="LO:HI")
    sub.add_argument("--q-range", default="1.001:6", metavar="LO:HI")
    _add_output_flag(sub)
    sub.set_defaults(handler=cmd_verify)

    sub = subs.add_parser("solve", help="shoot for the positive decaying profile")
    sub.add_argument("--omega", type=float, required=True)
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--q", type=float, required=True)
    sub.add_argument("--n", type=int, default=3)
    sub.add_argument("--out", help="write the profile CSV to this path")
    sub.add_argument("--rtol", type=float, default=None)
    sub.add_argument("--atol", type=float, default=None)
    _add_output_flag(sub)
    sub.set_defaults(handler=cmd_solve)

    sub = subs.add_parser("sweep", help="phase table over a (p, q, omega) grid")
    sub.add_argument("--p", required=True, metavar="LO:HI")
    sub.add_argument("--q", required=True, metavar="LO:HI")
    sub.add_argument("--omega", required=True, metavar="LO:HI")
    sub.add_argument("--res", type=int, default=10)
    sub.add_argument("--out", help="write the table to this path instead of stdout")
    _add_output_flag(sub)
    sub.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IndeterminateNearThreshold as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except EquivalenceViolation as exc:
        print(f"equivalence violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except NoExistence as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FALSE
    except (BracketNotFound, StepSizeUnderflow, NonFiniteState) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BrokenPipeError:
        # consumer closed the pipe; silence the shutdown flush too
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_IO
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return EXIT_IO
