"""Command-line front end.

Exit codes: 0 on success or a passing check, 1 when a check fails, 2 on
input errors (unreadable or malformed JSON, invalid states or densities).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import matrix as mx
from .errors import MalformedInput, TwirlkitError
from .groups import (
    FiniteGroupDensity,
    convolve,
    density_from_json,
    density_to_json,
    rep_from_json,
)
from .oracle import mc_compare, mc_twirl
from .representability import (
    DEFAULT_TOL,
    brs_prescription,
    check_representable,
    check_representable_for_state,
    counterexample_report,
    twirled_operation,
)
from .twirl import (
    DEFAULT_THRESHOLD,
    apply_twirl,
    build_twirl,
    channel_superop_from_json,
    channel_to_json,
    partial_inverse,
    twirled_purity_prediction,
)


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _load_state(path: str) -> mx.DensityMatrix:
    obj = _read_json(path)
    if isinstance(obj, dict):
        if "matrix" not in obj:
            raise MalformedInput("state object needs a 'matrix'", field="matrix")
        obj = obj["matrix"]
    return mx.validate_density(mx.matrix_from_json(obj, "matrix"))


def _load_density_rep(args):
    density = density_from_json(_read_json(args.density))
    group = density.group if isinstance(density, FiniteGroupDensity) else None
    rep = rep_from_json(_read_json(args.rep), group=group)
    return density, rep


def _load_op(path: str) -> mx.KrausOperation:
    return mx.kraus_from_json(_read_json(path))


def _matrix_rows(m):
    a = np.asarray(m, dtype=complex)
    return [[i, j, repr(float(a[i, j].real)), repr(float(a[i, j].imag))]
            for i in range(a.shape[0]) for j in range(a.shape[1])]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


MATRIX_HEADER = ["row", "col", "re", "im"]


# ----------------------------------------------------------------- subcommands

def cmd_validate(args):
    obj = _read_json(args.input)
    if isinstance(obj, list):
        mx.validate_density(mx.matrix_from_json(obj))
        kind = "density_matrix"
    elif not isinstance(obj, dict):
        raise MalformedInput("expected a JSON object or matrix", field="<root>")
    elif "kraus" in obj:
        mx.kraus_from_json(obj)
        kind = "kraus_operation"
    elif obj.get("type") in ("u1_fourier", "finite"):
        density_from_json(obj)
        kind = "density"
    elif obj.get("type") in ("u1_charges", "finite_rep"):
        rep_from_json(obj)
        kind = "rep"
    elif "form" in obj:
        s = channel_superop_from_json(obj)
        if not mx.is_cptp(s):
            raise _CheckFailed({"valid": False, "kind": "channel", "error": "not CPTP"})
        kind = "channel"
    elif "matrix" in obj:
        mx.validate_density(mx.matrix_from_json(obj["matrix"]))
        kind = "density_matrix"
    else:
        raise MalformedInput("cannot tell what kind of object this is", field="<root>")
    return {"valid": True, "kind": kind}, None, 0


def cmd_twirl(args):
    rho = _load_state(args.state)
    density, rep = _load_density_rep(args)
    twirl = build_twirl(density, rep)
    out = apply_twirl(twirl, rho)
    report = {"state": mx.matrix_to_json(out), "purity_before": mx.purity(rho),
              "purity_after": mx.purity(out), "channel": channel_to_json(twirl)}
    if twirl.mask is not None:
        report["purity_predicted"] = twirled_purity_prediction(rho, twirl)
    return report, (MATRIX_HEADER, _matrix_rows(out)), 0


def cmd_compose(args):
    w1 = density_from_json(_read_json(args.first))
    w2 = density_from_json(_read_json(args.second))
    v = convolve(w1, w2)
    out = density_to_json(v)
    if isinstance(v, FiniteGroupDensity):
        rows = [[g, repr(float(p))] for g, p in enumerate(v.probs)]
        header = ["element", "prob"]
    else:
        rows = [[k - v.max_k, repr(float(z.real)), repr(float(z.imag))]
                for k, z in enumerate(v.coeffs)]
        header = ["k", "re", "im"]
    return out, (header, rows), 0


def cmd_invert(args):
    sigma = _load_state(args.state)
    density, rep = _load_density_rep(args)
    twirl = build_twirl(density, rep)
    inv = partial_inverse(twirl, args.threshold)
    out = inv(sigma)
    herm = (out + out.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(herm).min())
    report = {"matrix": mx.matrix_to_json(out), "threshold": args.threshold,
              "min_eigenvalue": min_eig, "non_physical": min_eig < -mx.PSD_TOL}
    if inv.mask is not None:
        report["recovered_entries"] = (np.abs(inv.mask) > 0).astype(int).tolist()
    return report, (MATRIX_HEADER, _matrix_rows(out)), 0


def cmd_check_rep(args):
    op = _load_op(args.op)
    density, rep = _load_density_rep(args)
    twirl = build_twirl(density, rep)
    rep_report = check_representable(op, twirl, args.threshold, args.tol)
    report = rep_report.to_json()
    ok = rep_report.representable
    if args.state:
        st = check_representable_for_state(op, twirl, _load_state(args.state),
                                           args.threshold, args.tol)
        report["state_check"] = st.to_json()
        ok = st.representable
    rows = [[rep_report.representable, repr(rep_report.residual),
             repr(rep_report.commutation_residual), repr(args.tol)]]
    return report, (["representable", "residual", "commutation_residual", "tolerance"], rows), \
        0 if ok else 1


def cmd_lift(args):
    op = _load_op(args.op)
    density, rep = _load_density_rep(args)
    twirl = build_twirl(density, rep)
    lift = twirled_operation(op, twirl, args.threshold)
    check = check_representable(op, twirl, args.threshold, args.tol)
    report = {"superop": mx.matrix_to_json(lift), "representable": check.representable,
              "residual": check.residual}
    return report, (MATRIX_HEADER, _matrix_rows(lift)), 0


def cmd_brs(args):
    op = _load_op(args.op)
    rep = rep_from_json(_read_json(args.rep))
    s = brs_prescription(op, rep)
    return {"superop": mx.matrix_to_json(s)}, (MATRIX_HEADER, _matrix_rows(s)), 0


def cmd_counterexample(args):
    rep = counterexample_report(args.p, complex(args.re_b, args.im_b), args.theta)
    rows = ([["sigma_prime"] + r for r in _matrix_rows(rep.sigma_prime)]
            + [["sigma_dprime"] + r for r in _matrix_rows(rep.sigma_dprime)])
    return rep.to_json(), (["matrix"] + MATRIX_HEADER, rows), 0


def cmd_mc_verify(args):
    rho = _load_state(args.state)
    density, rep = _load_density_rep(args)
    est = mc_twirl(rho, density, rep, args.n, args.seed)
    analytic = apply_twirl(build_twirl(density, rep), rho)
    verdict = mc_compare(est, analytic, args.k)
    report = {"estimate": est.to_json(), "analytic": mx.matrix_to_json(analytic),
              "verdict": verdict.to_json()}
    rows = [[i, j, repr(float(est.mean[i, j].real)), repr(float(est.mean[i, j].imag)),
             repr(float(analytic[i, j].real)), repr(float(analytic[i, j].imag))]
            for i in range(analytic.shape[0]) for j in range(analytic.shape[1])]
    header = ["row", "col", "mc_re", "mc_im", "analytic_re", "analytic_im"]
    return report, (header, rows), 0 if verdict.passed else 1


class _CheckFailed(Exception):
    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


# ------------------------------------------------------------------------ parser

def _unit_interval(text):
    x = float(text)
    if not 0 < x <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return x


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return n


def _default_seed():
    env = os.environ.get("TWIRLKIT_SEED")
    return int(env) if env else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twirlkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--output", help="write the JSON report here (default: stdout)")
        p.add_argument("--csv", help="also write a CSV table to this path")
        return p

    def twirl_inputs(p, state=True, state_required=True):
        if state:
            p.add_argument("--state", required=state_required, help="state JSON")
        p.add_argument("--density", required=True, help="density JSON")
        p.add_argument("--rep", required=True, help="representation JSON")

    def thresholds(p):
        p.add_argument("--threshold", type=_unit_interval, default=DEFAULT_THRESHOLD,
                       help="partial-inversion threshold b (default %(default)g)")
        p.add_argument("--tol", type=_unit_interval, default=DEFAULT_TOL,
                       help="representability tolerance (default %(default)g)")

    p = common(sub.add_parser("validate", help="validate any JSON input object"))
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = common(sub.add_parser("twirl", help="twirl a state"))
    twirl_inputs(p)
    p.set_defaults(func=cmd_twirl)

    p = common(sub.add_parser("compose", help="convolve two densities"))
    p.add_argument("first", help="density applied last (outer)")
    p.add_argument("second", help="density applied first (inner)")
    p.set_defaults(func=cmd_compose)

    p = common(sub.add_parser("invert", help="partially invert a twirled state"))
    twirl_inputs(p)
    p.add_argument("--threshold", type=_unit_interval, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_invert)

    p = common(sub.add_parser("check-rep", help="check representability of an operation"))
    p.add_argument("--op", required=True, help="Kraus operation JSON")
    twirl_inputs(p, state_required=False)
    thresholds(p)
    p.set_defaults(func=cmd_check_rep)

    p = common(sub.add_parser("lift", help="receiver-side operation T O Tinv"))
    p.add_argument("--op", required=True)
    twirl_inputs(p, state=False)
    thresholds(p)
    p.set_defaults(func=cmd_lift)

    p = common(sub.add_parser("brs", help="group-averaged operation"))
    p.add_argument("--op", required=True)
    p.add_argument("--rep", required=True)
    p.set_defaults(func=cmd_brs)

    p = common(sub.add_parser("counterexample", help="qubit x-rotation under total z-twirl"))
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--re-b", type=float, default=0.0)
    p.add_argument("--im-b", type=float, default=0.0)
    p.add_argument("--theta", type=float, required=True, help="radians")
    p.set_defaults(func=cmd_counterexample)

    p = common(sub.add_parser("mc-verify", help="Monte-Carlo check of the analytic twirl"))
    twirl_inputs(p)
    p.add_argument("--n", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=None,
                   help="default: $TWIRLKIT_SEED or 0")
    p.add_argument("--k", type=float, default=4.0, help="sigma multiplier")
    p.set_defaults(func=cmd_mc_verify)
    return parser


def _emit(report, path):
    text = json.dumps(report, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "seed", 0) is None:
        try:
            args.seed = _default_seed()
        except ValueError:
            print("error: TWIRLKIT_SEED must be an integer", file=sys.stderr)
            return 2
    try:
        report, table, code = args.func(args)
    except _CheckFailed as exc:
        _emit(exc.report, args.output)
        return 1
    except TwirlkitError as exc:
        if args.command == "validate":
            _emit({"valid": False, "kind": None, "error": f"{type(exc).__name__}: {exc}"},
                  args.output)
            return 2 if isinstance(exc, MalformedInput) else 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.output)
    if args.csv and table is not None:
        _write_csv(args.csv, *table)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
