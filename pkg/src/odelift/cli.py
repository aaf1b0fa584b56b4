"""Command line front end for the certificate pipeline.

Subcommands: ``hall`` (basis listing), ``bound`` (a-priori step bound),
``integral`` (orthogonalize and integrate an ODE), ``solve`` (full
certificate search) and ``verify`` (re-check a certificate file).  Exit
codes: 0 success, 1 verification failure, 2 input error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import hall
from .abnormal import derive
from .hall import CapExceededError
from .integral import (PolynomialODE, derivative_family, first_integral,
                       orthogonalize, translate_ode)
from .polyring import Polynomial
from .solver import Certificate, find_certificate, step_bound, verify_certificate

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_CAP_EXCEEDED = 3


def numeric_check(ode, integral, horizon, step_size, start=None):
    """Max float drift of the integral along a lifted RK4 trajectory.

    Advisory only: certification is exclusively symbolic.  The horizontal
    components follow the ODE and the bracket coordinates follow the lifted
    frame; the integral should stay at its initial value.
    """
    rank = ode.rank
    words = sorted(integral.variables()
                   | {hall.generator(i) for i in range(1, rank + 1)},
                   key=lambda w: w.key)
    fields = []
    for i in range(1, rank + 1):
        gi = hall.generator(i)
        table = []
        for u in words:
            coeff = derive(gi, Polynomial.variable(u), rank=rank)
            if not coeff.is_zero():
                table.append((u, coeff))
        fields.append(table)
    components = ode.components

    def rhs(state):
        horizontal = [p.evaluate_float(state) for p in components]
        out = {w: 0.0 for w in words}
        for value, table in zip(horizontal, fields):
            if value:
                for u, coeff in table:
                    out[u] += value * coeff.evaluate_float(state)
        return out

    state = {w: 0.0 for w in words}
    if start is not None:
        for i, x in enumerate(start, start=1):
            state[hall.generator(i)] = float(x)
    reference = integral.evaluate_float(state)
    steps = max(1, round(horizon / step_size))
    h = horizon / steps
    worst = 0.0
    for _ in range(steps):
        k1 = rhs(state)
        mid1 = {w: state[w] + 0.5 * h * k1[w] for w in words}
        k2 = rhs(mid1)
        mid2 = {w: state[w] + 0.5 * h * k2[w] for w in words}
        k3 = rhs(mid2)
        end = {w: state[w] + h * k3[w] for w in words}
        k4 = rhs(end)
        state = {w: state[w] + h / 6.0 * (k1[w] + 2 * k2[w] + 2 * k3[w] + k4[w])
                 for w in words}
        worst = max(worst, abs(integral.evaluate_float(state) - reference))
    return worst


def _parse_point(text):
    return [Fraction(part.strip()) for part in text.split(",")]


def _load_ode(args):
    if getattr(args, "ode", None) and getattr(args, "input", None):
        raise ValueError("give either --ode or --input, not both")
    if getattr(args, "ode", None):
        ode = PolynomialODE.parse([p for p in args.ode.split(";") if p.strip()])
    elif getattr(args, "input", None):
        with open(args.input) as handle:
            ode = PolynomialODE.from_json(json.load(handle))
    else:
        raise ValueError("no ODE given; use --ode or --input")
    if getattr(args, "initial_point", None):
        ode = translate_ode(ode, _parse_point(args.initial_point))
    return ode


def cmd_hall(args):
    rank = args.rank_pos if args.rank_pos is not None else args.rank
    degree = args.degree_pos if args.degree_pos is not None else args.max_degree
    if rank is None or degree is None:
        raise ValueError("hall needs a rank and a maximal degree")
    basis = hall.enumerate_hall_words(rank, degree, cap=args.basis_cap)
    if args.json:
        payload = {
            "rank": rank,
            "max_degree": degree,
            "words": basis.to_json(),
            "factorizations": {
                basis.word_text(w): hall.format_ad_factorization(w, rank)
                for w in basis.words if w.degree >= 2},
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    for w in basis.words:
        if w.degree >= 2:
            print("%s = %s" % (basis.word_text(w),
                               hall.format_ad_factorization(w, rank)))
        else:
            print(basis.word_text(w))
    return EXIT_OK


def cmd_bound(args):
    rank = args.rank_pos if args.rank_pos is not None else args.rank
    degree = args.degree_pos if args.degree_pos is not None else args.degree
    if rank is None or degree is None:
        raise ValueError("bound needs a rank and an ODE degree")
    bound = step_bound(rank, degree + 2, degree + 1, cap=args.step_cap)
    if args.json:
        print(json.dumps({"rank": rank, "degree": degree, "step_bound": bound}))
    else:
        print(bound)
    return EXIT_OK


def cmd_integral(args):
    ode = _load_ode(args)
    gradient = orthogonalize(ode)
    family = derivative_family(gradient, ode.rank)
    integral = first_integral(family)
    if args.json:
        payload = {
            "ode": ode.to_json(),
            "derivatives": {hall.format_word(w, ode.rank): family.value(w).text(ode.rank)
                            for w in family.support()},
            "Q": integral.text(ode.rank),
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    for w in family.support():
        print("X[%s]Q = %s" % (hall.format_word(w, ode.rank),
                               family.value(w).text(ode.rank)))
    print("Q = %s" % integral.text(ode.rank))
    return EXIT_OK


def _print_certificate(cert):
    print("rank %d, step %d, layer %d" % (cert.rank, cert.step, cert.layer))
    print("Q = %s" % cert.integral.text(cert.rank))
    basis = cert.context().basis
    for w, value in sorted(cert.covector.items(), key=lambda kv: kv[0].key):
        print("lambda[%s] = %s" % (basis.word_text(w), value))
    for i, factor in enumerate(cert.factors):
        print("C_%d = %s" % (i + 1, factor.text(cert.rank)))
    for name, value in cert.report.checks.items():
        print("check %s: %s" % (name, "pass" if value else "FAIL"))


def cmd_solve(args):
    ode = _load_ode(args)
    cert = find_certificate(ode, step_cap=args.step_cap,
                            use_reduction=False if args.no_elim else None)
    text = cert.to_json_text()
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(text + "\n")
    if args.json:
        print(text)
    else:
        _print_certificate(cert)
    if args.numeric_check:
        horizon, step_size = (float(x) for x in args.numeric_check.split(","))
        drift = numeric_check(ode, cert.integral, horizon, step_size)
        print("numeric check: max |Q drift| = %.3e (advisory)" % drift,
              file=sys.stderr)
    return EXIT_OK if cert.report.ok else EXIT_VERIFICATION_FAILED


def cmd_verify(args):
    with open(args.certificate) as handle:
        cert = Certificate.from_json(json.load(handle))
    report = verify_certificate(cert)
    cert.report = report
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    else:
        for name, value in report.checks.items():
            print("check %s: %s" % (name, "pass" if value else "FAIL"))
    return EXIT_OK if report.ok else EXIT_VERIFICATION_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="odelift",
        description="Certificates lifting polynomial ODE trajectories to "
                    "abnormal curves in free Carnot groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_hall = sub.add_parser("hall", help="list a Hall basis with factorizations")
    p_hall.add_argument("rank_pos", nargs="?", type=int, default=None)
    p_hall.add_argument("degree_pos", nargs="?", type=int, default=None)
    p_hall.add_argument("--rank", type=int)
    p_hall.add_argument("--max-degree", type=int)
    p_hall.add_argument("--basis-cap", type=int, default=hall.DEFAULT_BASIS_CAP)
    p_hall.add_argument("--json", action="store_true")
    p_hall.set_defaults(func=cmd_hall)

    p_bound = sub.add_parser("bound", help="a-priori nilpotency step bound")
    p_bound.add_argument("rank_pos", nargs="?", type=int, default=None)
    p_bound.add_argument("degree_pos", nargs="?", type=int, default=None)
    p_bound.add_argument("--rank", type=int)
    p_bound.add_argument("--degree", type=int)
    p_bound.add_argument("--step-cap", type=int, default=20_000_000)
    p_bound.add_argument("--json", action="store_true")
    p_bound.set_defaults(func=cmd_bound)

    for name, func in (("integral", cmd_integral), ("solve", cmd_solve)):
        p = sub.add_parser(name)
        p.add_argument("--ode", help="components separated by ';'")
        p.add_argument("--input", help="JSON ODE file")
        p.add_argument("--initial-point", help="comma-separated rationals")
        p.add_argument("--json", action="store_true")
        if name == "solve":
            p.add_argument("--step-cap", type=int, default=None)
            p.add_argument("--no-elim", action="store_true",
                           help="solve the full system without substitution")
            p.add_argument("--output", help="write the certificate JSON here")
            p.add_argument("--numeric-check", metavar="T,H",
                           help="advisory float check along a trajectory")
        p.set_defaults(func=func)

    p_verify = sub.add_parser("verify", help="re-check a certificate file")
    p_verify.add_argument("certificate")
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except (ValueError, OSError, KeyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
