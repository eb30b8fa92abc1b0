"""Command-line entry point: ``nonsig-lab <subcommand> ...``.

Exit codes: 0 success, 1 a validation check failed (or file I/O failed),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from nonsig_lab import checks, quantum, tradeoff
from nonsig_lab.bell import chain, chsh, classical_value, evaluate, generalized_chain, library_functionals
from nonsig_lab.box import read_box, write_box
from nonsig_lab.errors import InputError, NonsigLabError, ValidationError
from nonsig_lab.lp import min_disturbance_adversary, ns_value, relevance
from nonsig_lab.tradeoff import fmt

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _functional(args):
    if args.inequality == "chsh":
        return chsh()
    if args.n is None:
        raise UsageError(f"--n is required for --inequality {args.inequality}")
    if args.inequality == "chain":
        return chain(args.n)
    if args.k is None:
        raise UsageError("--k is required for --inequality genchain")
    return generalized_chain(args.n, args.k)


def cmd_values(args, out) -> int:
    f = _functional(args)
    beta_cl = classical_value(f)
    beta_ns = ns_value(f)
    beta_q = quantum.quantum_value(f)
    w = relevance(f)
    eps_th = tradeoff.epsilon_threshold(f.n, w, beta_q, beta_ns)
    out.write("inequality,n,m,beta_cl,beta_ns,beta_q,relevance,eps_th\n")
    out.write(",".join([f.name, str(f.n), str(f.m)] + [fmt(v) for v in (beta_cl, beta_ns, beta_q, w, eps_th)]) + "\n")
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    curves = tradeoff.figure_data(args.figure, args.eps_step, args.n_list, args.k)
    text = tradeoff.curves_to_csv(curves)
    Path(args.out).write_text(text)
    out.write(f"wrote {sum(len(c.epsilons) for c in curves)} rows for {len(curves)} curves to {args.out}\n")
    return EXIT_OK


def cmd_adversary(args, out) -> int:
    p = read_box(args.box)
    res = min_disturbance_adversary(p, args.epsilon)
    dest = Path(args.out) if args.out else Path(args.box).with_suffix(".extension.json")
    write_box(res.extension, dest)
    out.write(f"d_min,{fmt(res.d_min)}\n")
    out.write("functional,beta,beta_ns,relevance,bound,holds\n")
    ok = True
    for f in library_functionals(p.n, p.m):
        beta, bmax, w = evaluate(f, p), ns_value(f), relevance(f)
        bound = tradeoff.bound_general(p.n, w, args.epsilon, min(beta, bmax), bmax)
        holds = res.d_min >= bound - args.tol
        ok &= holds
        out.write(f"{f.name},{fmt(beta)},{fmt(bmax)},{fmt(w)},{fmt(bound)},{int(holds)}\n")
    out.write(f"extension,{dest}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_quantum(args, out) -> int:
    tol = args.tol
    if args.check == "gentle":
        rng = np.random.default_rng(checks.SEED)
        pairs = [(rng.uniform(), rng.uniform(0, 0.5)) for _ in range(100)]
        if args.epsilon is not None:
            pairs = [(a, args.epsilon) for a, _ in pairs]
        reports = [quantum.verify_gentle_assumptions(a, e) for a, e in pairs]
        marg = max(r.marginal_deviation for r in reports)
        cond = max(r.conditional_deviation for r in reports)
        out.write(f"max_marginal_deviation,{fmt(marg)}\nmax_conditional_deviation,{fmt(cond)}\n")
        return EXIT_OK if max(marg, cond) <= tol else EXIT_FAIL
    if args.check == "monogamy":
        grid = [args.epsilon] if args.epsilon is not None else list(np.linspace(0, 0.5, 11))
        out.write("epsilon,beta,gentle_correlator,lhs,holds\n")
        ok = True
        for e in grid:
            r = quantum.quantum_monogamy_check(quantum.tsirelson_scenario(float(e)))
            ok &= r.holds
            out.write(f"{fmt(e)},{fmt(r.beta)},{fmt(r.gentle_correlator)},{fmt(r.lhs)},{int(r.holds)}\n")
        return EXIT_OK if ok else EXIT_FAIL
    # eigs
    if args.n is None or args.k is None:
        raise UsageError("--check eigs needs --n and --k")
    f = generalized_chain(args.n, args.k)
    lam = np.sort(np.abs(quantum.gen_chain_eigenvalues(args.n, args.k)))
    sv = np.sort(np.linalg.svd(f.correlators, compute_uv=False))
    eig_dev = float(np.abs(lam - sv).max())
    bq = quantum.quantum_value(f)
    closed = quantum.quantum_value_closed_form(args.n, args.k)
    attained = evaluate(f, quantum.quantum_box(quantum.chain_scenario(args.n)))
    out.write(f"max_eigen_singular_deviation,{fmt(eig_dev)}\n")
    out.write(f"beta_q_power_iteration,{fmt(bq)}\nbeta_q_closed_form,{fmt(closed)}\nbeta_q_attained,{fmt(attained)}\n")
    worst = max(eig_dev, abs(bq - closed) / max(1.0, closed))
    return EXIT_OK if worst <= max(tol, 1e-9) else EXIT_FAIL


def cmd_check(args, out) -> int:
    results = checks.run_suite(args.suite, args.tol)
    for r in results:
        out.write(r.line() + "\n")
    failed = [r for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    return EXIT_OK if not failed else EXIT_FAIL


def _n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid n list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty n list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonsig-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("values", help="classical / no-signaling / quantum values and relevance")
    p.add_argument("--inequality", choices=["chsh", "chain", "genchain"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_values, default_tol=1e-6)

    p = sub.add_parser("bounds", help="write figure data as CSV")
    p.add_argument("--figure", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--n-list", type=_n_list, default=None, help="e.g. '2,4,8'")
    p.add_argument("--k", type=int)
    p.add_argument("--eps-step", type=float, default=0.005)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bounds, default_tol=1e-12)

    p = sub.add_parser("adversary", help="minimal-disturbance no-signaling gentle measurement")
    p.add_argument("--box", required=True, help="JSON box file")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--out", help="extension JSON (default: <box>.extension.json)")
    p.set_defaults(func=cmd_adversary, default_tol=1e-6)

    p = sub.add_parser("quantum", help="quantum verifications")
    p.add_argument("--check", choices=["gentle", "monogamy", "eigs"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_quantum, default_tol=1e-10)

    p = sub.add_parser("check", help="run invariant suites")
    p.add_argument("--suite", choices=["all", *checks.SUITES], default="all")
    p.set_defaults(func=cmd_check, default_tol=None)
    return parser


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.tol is None:
        args.tol = args.default_tol
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nonsig-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"nonsig-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"nonsig-lab: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NonsigLabError as exc:
        print(f"nonsig-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
