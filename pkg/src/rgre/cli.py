"""Command-line front end writing CSV/JSON for the plotting tools.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from math import lcm

from . import __version__
from .extrapolation import gamma_coefficients, run_rgre
from .harness import convergence_study
from .methods import (FAMILIES, SUPPORTED_ORDERS, NewtonError, Trajectory,
                      integrate, lmm_coefficients, parse_method)
from .problems import get_problem, registered_problems
from .stability import (alpha_angle, boundary_locus, check_root_condition,
                        sample_region)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _method_or_die(text: str):
    try:
        spec = parse_method(text)
        lmm_coefficients(spec.family, spec.order)
    except ValueError as exc:
        valid = ", ".join(f"{fam.lower()}{p}" for fam in FAMILIES
                          for p in SUPPORTED_ORDERS[fam])
        raise UsageError(f"{exc}; valid methods: {valid}") from None
    return spec


def _problem_or_die(name: str):
    try:
        return get_problem(name)
    except KeyError:
        raise UsageError(
            f"unknown problem {name!r}; valid problems: {', '.join(registered_problems())}"
        ) from None


def _metadata(method: str, ell: int, problem: str | None) -> dict:
    return {"method": method, "ell": ell, "problem": problem,
            "generated_by_version": __version__}


def _write_trajectory(path: str, fmt: str, traj: Trajectory, meta: dict) -> None:
    times = traj.times()
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"y{i}" for i in range(traj.states.shape[1])])
            for t, row in zip(times, traj.states):
                writer.writerow([_fmt(t)] + [_fmt(v) for v in row])
    else:
        payload = {"metadata": meta,
                   "rows": [{"t": float(t), "y": [float(v) for v in row]}
                            for t, row in zip(times, traj.states)]}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _cmd_solve(args) -> int:
    spec = _method_or_die(args.method)
    problem = _problem_or_die(args.problem)
    traj = integrate(spec, problem, args.n)
    _write_trajectory(args.output, args.format, traj,
                      _metadata(spec.label, 0, problem.name))
    return 0


def _cmd_rgre(args) -> int:
    spec = _method_or_die(args.method)
    problem = _problem_or_die(args.problem)
    result = run_rgre(spec, problem, args.n, args.ell)
    _write_trajectory(args.output, args.format, result.combined,
                      _metadata(spec.label, args.ell, problem.name))
    return 0


def _cmd_converge(args) -> int:
    spec = _method_or_die(args.method)
    problem = _problem_or_die(args.problem)
    n_list = [int(part) for part in args.n.split(",") if part]
    for prev, cur in zip(n_list, n_list[1:]):
        if cur != 2 * prev:
            raise UsageError(f"--n values must double: {prev} -> {cur}")
    report = convergence_study(spec, args.ell, problem, n_list)
    meta = _metadata(spec.label, args.ell, problem.name)
    if args.format == "csv":
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "max_error", "estimated_order", "f_evals"])
            for row in report.rows:
                writer.writerow([row.n_coarse, _fmt(row.max_error),
                                 _fmt(row.estimated_order), row.f_evals])
    else:
        payload = {"metadata": meta,
                   "rows": [{"n": row.n_coarse, "max_error": row.max_error,
                             "estimated_order": row.estimated_order,
                             "f_evals": row.f_evals} for row in report.rows]}
        with open(args.output, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_gamma(args) -> int:
    scheme = gamma_coefficients(args.p, args.ell)
    denom = lcm(*(g.denominator for g in scheme.gamma))
    parts = [f"{g.numerator * (denom // g.denominator)}/{denom}" for g in scheme.gamma]
    print(",".join(parts))
    return 0


def _cmd_stability_region(args) -> int:
    spec = _method_or_die(args.method)
    coeffs = lmm_coefficients(spec.family, spec.order)
    mus, stable, excluded = sample_region(
        coeffs, args.ell, (args.re_min, args.re_max),
        (args.im_min, args.im_max), args.nx, args.ny)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re_mu", "im_mu", "stable", "excluded"])
        for mu, s, e in zip(mus, stable, excluded):
            writer.writerow([_fmt(mu.real), _fmt(mu.imag), int(s), int(e)])
    if args.locus_output:
        locus = boundary_locus(coeffs, args.n_theta)
        with open(args.locus_output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "re_mu", "im_mu"])
            for theta, mu in zip(locus.theta_samples, locus.mu_points):
                writer.writerow([_fmt(theta), _fmt(mu.real), _fmt(mu.imag)])
    return 0


def _cmd_stability_angle(args) -> int:
    spec = _method_or_die(args.method)
    coeffs = lmm_coefficients(spec.family, spec.order)
    angle = alpha_angle(coeffs, args.ell)
    print("none" if angle is None else f"{angle:.3f}")
    return 0


def _cmd_root_condition(args) -> int:
    spec = _method_or_die(args.method)
    report = check_root_condition(lmm_coefficients(spec.family, spec.order))
    print("true" if report.satisfied else "false")
    print(report.message, file=sys.stderr)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rgre",
                     description="Multistep ODE solvers with repeated global "
                                 "Richardson extrapolation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_method(p):
        p.add_argument("--method", required=True, help="e.g. ab2, am3, bdf5")

    p = sub.add_parser("solve", help="integrate a problem with a base method")
    add_method(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("rgre", help="integrate with repeated extrapolation")
    add_method(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--n", type=int, required=True, help="coarse grid step count")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_rgre)

    p = sub.add_parser("converge", help="convergence-order study")
    add_method(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--n", required=True, help="comma-separated doubling grid counts")
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("gamma", help="print exact combination weights")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser("stability-region", help="sample a stability region to CSV")
    add_method(p)
    p.add_argument("--ell", type=int, default=0)
    p.add_argument("--re-min", type=float, default=-6.0)
    p.add_argument("--re-max", type=float, default=2.0)
    p.add_argument("--im-min", type=float, default=-4.0)
    p.add_argument("--im-max", type=float, default=4.0)
    p.add_argument("--nx", type=int, default=200)
    p.add_argument("--ny", type=int, default=200)
    p.add_argument("--output", required=True)
    p.add_argument("--locus-output", default=None,
                   help="also write the boundary locus CSV here")
    p.add_argument("--n-theta", type=int, default=1024)
    p.set_defaults(func=_cmd_stability_region)

    p = sub.add_parser("stability-angle", help="print the A(alpha) sector angle")
    add_method(p)
    p.add_argument("--ell", type=int, default=0)
    p.set_defaults(func=_cmd_stability_angle)

    p = sub.add_parser("root-condition", help="check zero-stability")
    add_method(p)
    p.set_defaults(func=_cmd_root_condition)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NewtonError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
