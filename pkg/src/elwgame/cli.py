"""Command-line interface: ``elwgame {payoff,verify,family,classify}``.

Exit codes: 0 success (or verified), 1 verified false, 2 input error,
3 non-generic payoffs.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .classifier import CASE_LABELS, NonGenericPayoffs, OracleConfig, classify_all, epsilon_nash_oracle, rows_to_csv
from .engine import ELW_PAYOFFS, as_payoffs, payoff_hilbert, payoff_quaternion
from .measures import MixedStrategy
from .nash import equilibrium_family, family_to_su2, su2_family, su2_to_strategies, verify_nash
from .quaternion import (
    alice_to_quaternion, as_unit, bob_to_quaternion, check_su2, inverse,
    quaternion_to_alice, quaternion_to_bob,
)

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_NONGENERIC = 0, 1, 2, 3
PARSE_UNIT_TOL = 1e-6
PARSE_SU2_TOL = 1e-9


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing and printing


def parse_quaternion(text):
    """``e0``..``e3`` (optionally signed), four comma-separated numbers, or a JSON list."""
    s = text.strip()
    try:
        if s.lstrip("+-") in ("e0", "e1", "e2", "e3"):
            v = np.eye(4)[int(s[-1])] * (-1.0 if s.startswith("-") else 1.0)
        elif s.startswith("["):
            v = np.array(json.loads(s), dtype=float)
        else:
            v = np.array([float(x) for x in s.split(",")])
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse quaternion {text!r}: {exc}") from exc
    if v.shape != (4,):
        raise InputError(f"quaternion {text!r} needs four components")
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > PARSE_UNIT_TOL:
        raise InputError(f"quaternion {text!r} is not unit (norm {n:g})")
    return v / n


def format_quaternion(q):
    return [float(x) for x in q]


def parse_complex(text):
    s = text.strip().replace(" ", "")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"cannot parse complex entry {text!r}") from exc


def format_complex(z, chop=1e-13):
    z = complex(z)
    re, im = (0.0 if abs(x) < chop else x for x in (z.real, z.imag))
    z = complex(re + 0.0, im + 0.0)
    return f"{z.real:.12g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.12g}i"


def parse_su2(text):
    """Four comma-separated entries ``U00,U01,U10,U11`` written as ``re+imi``."""
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError(f"SU(2) input needs four entries, got {len(parts)}")
    U = np.array([parse_complex(p) for p in parts]).reshape(2, 2)
    try:
        return check_su2(U, tol=PARSE_SU2_TOL)
    except ValueError as exc:
        raise InputError(f"{text!r}: {exc}") from exc


def format_su2(U):
    return [format_complex(z) for z in np.asarray(U).ravel()]


def parse_payoffs(text):
    try:
        X = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"cannot parse payoffs {text!r}") from exc
    if len(X) != 4:
        raise InputError(f"need four payoffs, got {len(X)}")
    return X


def load_strategy(path):
    try:
        with open(path) as fh:
            return MixedStrategy.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _table(headers, rows):
    widths = [max([len(str(h))] + [len(str(r[i])) for r in rows]) for i, h in enumerate(headers)]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows)
    return "\n".join(lines)


def _num(x, digits=10):
    if x is None:
        return "-"
    return f"{x:.{digits}g}"


def emit(args, payload, csv_rows=None, human=None):
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        print(rows_to_csv(csv_rows if csv_rows is not None else [payload]), end="")
    else:
        print(human if human is not None else json.dumps(payload, indent=2))


def _report_human(report_json, title=""):
    r = report_json
    rows = [[f"({r['type'][0]},{r['type'][1]})", str(r["verdict"]), _num(r["top_gap"]),
             _num(r["payoffs"][0]), _num(r["payoffs"][1]),
             f"{r['residuals'][0]:.2e}", f"{r['residuals'][1]:.2e}"]]
    table = _table(["type", "verdict", "top_gap", "payoff_A", "payoff_B", "resid_A", "resid_B"], rows)
    return f"{title}\n{table}" if title else table


# ---------------------------------------------------------------------------
# commands


def cmd_payoff(args):
    X = args.payoffs
    if args.identity:
        UA = UB = np.eye(2, dtype=complex)
        p = q_raw = np.array([1.0, 0, 0, 0])
    else:
        if (args.pA is None) == (args.UA is None) or (args.qB is None) == (args.UB is None):
            raise InputError("give exactly one of --pA/--UA and one of --qB/--UB (or --identity)")
        if args.pA is not None:
            p = parse_quaternion(args.pA)
            UA = quaternion_to_alice(p)
        else:
            UA = parse_su2(args.UA)
            p = alice_to_quaternion(UA)
        if args.qB is not None:
            # quaternion input for Bob is in the relabelled convention (payoff depends on p q)
            q_raw = inverse(parse_quaternion(args.qB))
            UB = quaternion_to_bob(q_raw)
        else:
            UB = parse_su2(args.UB)
            q_raw = bob_to_quaternion(UB)
    hilbert = payoff_hilbert(args.gamma, UA, UB, X)
    out = {"gamma": args.gamma, "payoffs_X": list(X), "hilbert": list(hilbert)}
    if math.isclose(args.gamma, math.pi / 2, rel_tol=0, abs_tol=1e-15):
        quat = payoff_quaternion(p, q_raw, X, raw=True)
        out["quaternion"] = list(quat)
        out["difference"] = float(max(abs(a - b) for a, b in zip(hilbert, quat)))
        out["p"] = format_quaternion(p)
        out["q"] = format_quaternion(inverse(q_raw))
    rows = [["hilbert", _num(hilbert[0]), _num(hilbert[1])]]
    if "quaternion" in out:
        rows.append(["quaternion", _num(out["quaternion"][0]), _num(out["quaternion"][1])])
    human = _table(["engine", "payoff_A", "payoff_B"], rows)
    if "difference" in out:
        human += f"\ndifference {out['difference']:.3e}"
    csv_rows = [{"engine": r[0], "payoff_A": r[1], "payoff_B": r[2], "gamma": args.gamma} for r in rows]
    emit(args, out, csv_rows, human)
    return EXIT_OK


def _oracle_cfg(args):
    return OracleConfig(K=args.grid, seed=args.seed, epsilon=args.epsilon)


def cmd_verify(args):
    mu, nu = load_strategy(args.alice), load_strategy(args.bob)
    report = verify_nash(mu, nu, args.payoffs, tol=args.tol, cluster_tol=args.cluster_tol)
    out = report.to_json(full=True)
    if args.oracle:
        cfg = _oracle_cfg(args)
        verdict = epsilon_nash_oracle(mu, nu, args.payoffs, cfg)
        out["oracle"] = {"passed": verdict.passed, "gains": list(verdict.gains), **cfg.to_json(args.payoffs)}
    csv_row = {k: out[k] for k in ("verdict", "type", "payoffs", "residuals", "top_gap")}
    human = _report_human(out)
    if args.oracle:
        human += (f"\noracle K={args.grid} seed={args.seed}: passed={out['oracle']['passed']} "
                  f"gains=({out['oracle']['gains'][0]:.3e}, {out['oracle']['gains'][1]:.3e})")
    emit(args, out, [csv_row], human)
    return EXIT_OK if report.verdict else EXIT_FALSE


def cmd_family(args):
    if args.alpha is not None or args.beta is not None:
        if args.alpha is None or args.beta is None:
            raise InputError("--alpha and --beta go together")
        alpha, beta = parse_complex(args.alpha), parse_complex(args.beta)
        try:
            mats = su2_family(alpha, beta, args.theta)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        mu, nu = su2_to_strategies(mats[:2], mats[2:])
        params = {"alpha": format_complex(alpha), "beta": format_complex(beta), "theta": args.theta}
    else:
        try:
            r = as_unit(parse_quaternion(args.r))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        mu, nu = equilibrium_family(args.theta, r, args.sign)
        mats = family_to_su2(args.theta, r, args.sign)
        params = {"theta": args.theta, "r": format_quaternion(r), "sign": args.sign}
    out = {
        "parameters": params,
        "alice": mu.to_json(),
        "bob": nu.to_json(),
        "su2": {name: format_su2(U) for name, U in zip(("UA1", "UA2", "UB1", "UB2"), mats)},
    }
    report = None
    if args.verify:
        report = verify_nash(mu, nu, args.payoffs, tol=args.tol, cluster_tol=args.cluster_tol)
        out["verification"] = report.to_json()
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "alice.json").write_text(json.dumps(mu.to_json(), indent=2))
        (d / "bob.json").write_text(json.dumps(nu.to_json(), indent=2))
    csv_rows = [{"player": player, "w": w, "q": format_quaternion(q)}
                for player, s in (("alice", mu), ("bob", nu)) for w, q in s.atoms()]
    human_rows = [[player, _num(w, 6), " ".join(f"{x:+.6f}" for x in q), " ".join(out["su2"][name])]
                  for (player, s, names) in (("alice", mu, ("UA1", "UA2")), ("bob", nu, ("UB1", "UB2")))
                  for (w, q), name in zip(s.atoms(), names)]
    human = _table(["player", "w", "quaternion", "SU(2) entries"], human_rows)
    if report is not None:
        human += "\n" + _report_human(out["verification"])
    emit(args, out, csv_rows, human)
    return EXIT_OK


def cmd_classify(args):
    cfg = _oracle_cfg(args)
    try:
        report = classify_all(args.payoffs, cfg, cases=args.case or None)
    except NonGenericPayoffs as exc:
        print(json.dumps({"error": "non-generic payoffs", "violations": exc.violations}), file=sys.stderr)
        return EXIT_NONGENERIC
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "catalogue.json").write_text(json.dumps(report.to_json(), indent=2))
        for case in report.cases:
            (d / f"scan_{case.label}.csv").write_text(case.csv_text())
    summary = report.summary_json()
    csv_rows = [{"case": c.label, **row} for c in report.cases for row in c.rows]
    rows = [[e.label, ",".join(e.flags) or "-",
             f"({e.base.report.type[0]},{e.base.report.type[1]})",
             _num(e.base.report.top_gap if math.isfinite(e.base.report.top_gap) else None, 6),
             _num(e.base.report.payoffs[0], 10), _num(e.base.report.payoffs[1], 10),
             f"{e.members_verified}/{e.members_oracle_passed}/{e.members_checked}"]
            for e in report.catalogue]
    human = _table(["entry", "flags", "type", "top_gap", "payoff_A", "payoff_B", "ver/orc/n"], rows)
    human += "\n\n" + "\n".join(f"{c.label:10s} {c.conclusion}" for c in report.cases)
    emit(args, summary, csv_rows, human)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _payoffs_arg(text):
    try:
        return parse_payoffs(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _gamma_arg(text):
    g = float(text)
    if not 0.0 <= g <= math.pi / 2 + 1e-15:
        raise argparse.ArgumentTypeError(f"gamma must lie in [0, pi/2], got {g}")
    return min(g, math.pi / 2)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--payoffs", type=_payoffs_arg, default=ELW_PAYOFFS, metavar="a,b,c,d",
                        help="classical payoffs X0,X1,X2,X3 (default 3,5,0,1)")
    common.add_argument("--gamma", type=_gamma_arg, default=math.pi / 2, metavar="RAD",
                        help="entanglement parameter (default pi/2)")
    common.add_argument("--tol", type=float, default=1e-9, help="eigenspace membership tolerance")
    common.add_argument("--cluster-tol", type=float, default=1e-9, help="eigenvalue clustering tolerance")
    common.add_argument("--oracle", action="store_true", help="also run the grid oracle")
    common.add_argument("--grid", type=int, default=4096, metavar="K", help="oracle grid size")
    common.add_argument("--seed", type=int, default=0, help="oracle grid seed")
    common.add_argument("--epsilon", type=float, default=1e-3, help="oracle slack")
    common.add_argument("--format", choices=("json", "csv", "human"), default="json")

    parser = argparse.ArgumentParser(prog="elwgame", description="Quaternionic analysis of the ELW quantum game.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("payoff", parents=[common], help="payoffs of a pure strategy pair")
    p.add_argument("--pA", help="Alice's quaternion")
    p.add_argument("--qB", help="Bob's quaternion (relabelled: payoffs depend on pA qB)")
    p.add_argument("--UA", help="Alice's SU(2) matrix as U00,U01,U10,U11")
    p.add_argument("--UB", help="Bob's SU(2) matrix as U00,U01,U10,U11")
    p.add_argument("--identity", action="store_true", help="both players play the identity")
    p.set_defaults(func=cmd_payoff)

    p = sub.add_parser("verify", parents=[common], help="check a mixed strategy pair for equilibrium")
    p.add_argument("alice", help="Alice's strategy JSON file")
    p.add_argument("bob", help="Bob's strategy JSON file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("family", parents=[common], help="a member of the equilibrium family")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--r", default="e0", help="shift quaternion (default e0)")
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--alpha", help="complex alpha of the SU(2) parameterization (with --beta)")
    p.add_argument("--beta", help="complex beta of the SU(2) parameterization (with --alpha)")
    p.add_argument("--verify", action="store_true", help="append a verification stanza")
    p.add_argument("--out", metavar="DIR", help="write alice.json and bob.json to DIR")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("classify", parents=[common], help="run the equilibrium classification")
    p.add_argument("--case", action="append", choices=CASE_LABELS, help="restrict to a case (repeatable)")
    p.add_argument("--out", metavar="DIR", help="write catalogue.json and per-case scan CSVs to DIR")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        as_payoffs(args.payoffs)
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
