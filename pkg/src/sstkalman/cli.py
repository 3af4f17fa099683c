"""Command line front end: tables, curves, sweeps, simulation, self checks.

Every subcommand shares --out/--format/--quiet.  CSV output is
comma-separated with a header row, '.' decimal separator, LF line
endings and six significant digits.  Exit status is 0 only when the
requested artifact was produced and every internal validator passed.
"""

import argparse
import json
import sys

import numpy as np

from . import channel, convcode, covar_mi, kalman, parity_prob, qli_search, sstdec

CHAIN_SLACK = 1e-12


# ------------------------------------------------------------- cell formatting

def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    return str(value)


def parse_cell(text):
    if text == "":
        return None
    try:
        value = int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return text
    # zero-padded bit strings ("000") must stay strings
    return value if str(value) == text else text


def csv_text(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def parse_csv(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    columns = lines[0].split(",") if lines else []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append({c: parse_cell(v) for c, v in zip(columns, cells)})
    return columns, rows


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def json_text(columns, rows, meta=None):
    payload = {"columns": list(columns), "rows": [_jsonable(r) for r in rows]}
    if meta:
        payload.update(_jsonable(meta))
    return json.dumps(payload, indent=2) + "\n"


# -------------------------------------------------------------- db list parsing

def parse_db_values(text):
    """'-10..10' (unit steps), 'a,b,c', single value, or '' for an empty grid."""
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return [float(v) for v in range(lo, hi + 1)]
    return [float(v) for v in text.split(",")]


# ------------------------------------------------------------------- validators

def validate_finite(columns, rows, skip=()):
    errors = []
    for i, row in enumerate(rows):
        for c in columns:
            v = row.get(c)
            if isinstance(v, (int, float, np.integer, np.floating)):
                if not np.isfinite(float(v)):
                    errors.append(f"row {i}: column {c} is not finite")
            elif v is None and c not in skip:
                errors.append(f"row {i}: column {c} is missing")
    return errors


def validate_bound_chain(rows, c="half_tr_sigma_c", g="gauss_bound",
                         x="half_tr_sigma_x", inv="inv_1p_rho",
                         log="log1p_rho_over_rho"):
    errors = []
    for i, row in enumerate(rows):
        lo, mid, hi = row[c], row[g], row[x]
        if not (lo < mid + CHAIN_SLACK and mid < hi + CHAIN_SLACK):
            errors.append(f"row {i}: bound chain violated ({lo} < {mid} < {hi})")
        if row[c] > row[inv] + CHAIN_SLACK:
            errors.append(f"row {i}: {c} exceeds {inv}")
        if row[g] > row[log] + CHAIN_SLACK:
            errors.append(f"row {i}: {g} exceeds {log}")
    return errors


def validate_lambda(rows, max_col="rho_lambda_max"):
    errors = []
    for i, row in enumerate(rows):
        if not row[max_col] < 1.0:
            errors.append(f"row {i}: {max_col} not below one")
        if row.get("lambda_t1") is not None and row["lambda_t1"] > row["lambda_t2"] + CHAIN_SLACK:
            errors.append(f"row {i}: lambda_t1 above lambda_t2")
    return errors


def validate_roundtrip(text):
    columns, rows = parse_csv(text)
    rebuilt = csv_text(columns, rows)
    if rebuilt != text:
        return ["CSV does not round-trip through parse/emit"]
    return []


# ------------------------------------------------------------------ table specs

def _sweep_rows(code, db_values, mode="general"):
    return covar_mi.sweep(code, db_values=db_values, mode=mode)


def run_tables(table):
    if table not in range(1, 11):
        raise ValueError("table id must be in 1..10")

    if table in (1, 2):
        code = convcode.get_code("c1" if table == 1 else "c2")
        columns = ["ebn0_db", "alpha1", "sigma1_sq", "alpha2", "sigma2_sq",
                   "theta12", "half_tr_sigma_x"]
        rows = [{c: getattr(r, c) for c in columns} for r in _sweep_rows(code, channel.DB_GRID)]
        return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws)]

    if table in (3, 4):
        code = convcode.get_code("c1" if table == 3 else "c2")
        columns = ["ebn0_db", "rho", "lambda_t1", "lambda_t2",
                   "rho_lambda_t1", "rho_lambda_max"]
        rows = []
        for r in _sweep_rows(code, channel.DB_GRID):
            rows.append({"ebn0_db": r.ebn0_db, "rho": r.rho,
                         "lambda_t1": r.lambda_tilde_1, "lambda_t2": r.lambda_tilde_2,
                         "rho_lambda_t1": r.rho_lambda_tilde_1,
                         "rho_lambda_max": r.rho_lambda_tilde_max})
        return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws),
                               lambda cols, rws, txt: validate_lambda(rws)]

    if table in (5, 6):
        code = convcode.get_code("c1" if table == 5 else "c2")
        columns = ["ebn0_db", "half_rho_tr_sigma_c", "half_tr_sigma_c",
                   "inv_1p_rho", "gauss_bound", "log1p_rho_over_rho",
                   "half_tr_sigma_x"]
        rows = []
        for r in _sweep_rows(code, channel.DB_GRID):
            rows.append({"ebn0_db": r.ebn0_db,
                         "half_rho_tr_sigma_c": r.half_rho_tr_sigma_c,
                         "half_tr_sigma_c": r.half_tr_sigma_c,
                         "inv_1p_rho": r.inv_one_plus_rho,
                         "gauss_bound": r.gauss_per_rho,
                         "log1p_rho_over_rho": r.log1p_rho_over_rho,
                         "half_tr_sigma_x": r.half_tr_sigma_x})
        return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws),
                               lambda cols, rws, txt: validate_bound_chain(rws)]

    if table in (7, 8):
        code = convcode.get_code("c1" if table == 7 else "c2")
        columns = ["ebn0_db", "beta1", "sigma1_sq_prime", "beta2",
                   "sigma2_sq_prime", "half_tr_sigma_x_prime"]
        rows = [{c: getattr(r, c) for c in columns}
                for r in _sweep_rows(code, channel.DB_GRID, mode="qli")]
        return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws)]

    nu = 5 if table == 9 else 6
    c_cols = [f"c{j}" for j in range(1, nu - 1)]
    columns = c_cols + ["m1_alpha", "m2_alpha", "m1_beta", "m2_beta"]
    rows = []
    for entry in qli_search.enumerate_qli(nu):
        row = {f"c{j + 1}": int(b) for j, b in enumerate(entry.c_bits)}
        row.update(m1_alpha=entry.m1_alpha, m2_alpha=entry.m2_alpha,
                   m1_beta=entry.m1_beta, m2_beta=entry.m2_beta)
        rows.append(row)
    return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws)]


# ------------------------------------------------------------------- subcommands

def run_curves(args):
    code = convcode.load_code(args.code)
    db_values = parse_db_values(args.ebn0_db)
    columns = ["ebn0_db", "rho", "half_tr_sigma_c", "gauss_bound",
               "half_tr_sigma_x", "inv_1p_rho", "log1p_rho_over_rho",
               "two_I_over_rho", "lambda_t1", "lambda_t2", "rho_lambda_max"]
    rows = []
    for r in _sweep_rows(code, db_values, mode=args.mode):
        tx = r.half_tr_sigma_x_prime if args.mode == "qli" else r.half_tr_sigma_x
        rows.append({"ebn0_db": r.ebn0_db, "rho": r.rho,
                     "half_tr_sigma_c": r.half_tr_sigma_c,
                     "gauss_bound": r.gauss_per_rho,
                     "half_tr_sigma_x": tx,
                     "inv_1p_rho": r.inv_one_plus_rho,
                     "log1p_rho_over_rho": r.log1p_rho_over_rho,
                     "two_I_over_rho": r.two_i_over_rho,
                     "lambda_t1": r.lambda_tilde_1,
                     "lambda_t2": r.lambda_tilde_2,
                     "rho_lambda_max": r.rho_lambda_tilde_max})
    validators = [lambda cols, rws, txt: validate_finite(cols, rws),
                  lambda cols, rws, txt: validate_bound_chain(rws),
                  lambda cols, rws, txt: validate_lambda(rws)]
    return columns, rows, validators, None


def run_alpha(args):
    code = convcode.load_code(args.code)
    s1, s2 = covar_mi.code_supports(code, args.mode)
    if args.emit == "polynomial":
        p1 = parity_prob.marginal_polynomial(len(s1))
        p2 = parity_prob.marginal_polynomial(len(s2))
        p11 = parity_prob.joint_polynomial(s1, s2)
        ptheta = (p11 - p1 * p2).trimmed()
        names = (("alpha1", "alpha2", "alpha11", "theta12") if args.mode == "general"
                 else ("beta1", "beta2", "beta11", "theta12_prime"))
        payload = {"code": code.name, "mode": args.mode,
                   "variable": "eps", "coefficient_order": "ascending",
                   names[0]: list(p1.coefficients),
                   names[1]: list(p2.coefficients),
                   names[2]: list(p11.coefficients),
                   names[3]: list(ptheta.coefficients)}
        return None, payload, [], None

    db_values = parse_db_values(args.ebn0_db)
    if args.mode == "general":
        columns = ["ebn0_db", "epsilon", "alpha1", "alpha2", "alpha11", "theta12"]
    else:
        columns = ["ebn0_db", "epsilon", "beta1", "beta2", "beta11", "theta12_prime"]
    rows = []
    for db in db_values:
        point = channel.snr_point(db)
        eps = point.epsilon
        a1 = parity_prob.parity_one_prob(s1, eps)
        a2 = parity_prob.parity_one_prob(s2, eps)
        a11 = parity_prob.joint_parity_prob(s1, s2, eps)
        row = dict(zip(columns, (point.ebn0_db, eps, a1, a2, a11, a11 - a1 * a2)))
        rows.append(row)

    def probs_in_range(cols, rws, txt):
        errors = []
        for i, row in enumerate(rws):
            for c in cols[1:5]:
                if not 0.0 <= row[c] <= 1.0:
                    errors.append(f"row {i}: {c} outside [0, 1]")
        return errors

    return columns, rows, [lambda cols, rws, txt: validate_finite(cols, rws),
                           probs_in_range], None


def run_simulate(args):
    code = convcode.load_code(args.code)
    db_values = parse_db_values(args.ebn0_db)
    columns = ["ebn0_db", "branches", "pre_ber", "post_ber",
               "emp_alpha1", "emp_alpha2", "emp_alpha11"]
    rows = []
    checks = []
    for j, db in enumerate(db_values):
        point = channel.snr_point(db)
        res = sstdec.simulate(code, point, args.branches, args.seed, mode=args.mode)
        s1, s2 = covar_mi.code_supports(code, args.mode)
        eps = point.epsilon
        a1 = parity_prob.parity_one_prob(s1, eps)
        a2 = parity_prob.parity_one_prob(s2, eps)
        a11 = parity_prob.joint_parity_prob(s1, s2, eps)
        sig_hat, sig_se = covar_mi.monte_carlo_sigma_r(
            code, point, min(args.branches, 200_000), args.seed + 7919 * j,
            mode=args.mode)
        sig_ref = covar_mi.sigma_r(covar_mi.code_sigma_x(code, eps, args.mode),
                                   point.rho)
        row = {"ebn0_db": res.ebn0_db, "branches": res.branches,
               "pre_ber": res.pre_ber, "post_ber": res.post_ber,
               "emp_alpha1": res.emp_alpha1, "emp_alpha2": res.emp_alpha2,
               "emp_alpha11": res.emp_alpha11,
               "se_alpha1": res.se_alpha1, "se_alpha2": res.se_alpha2,
               "se_alpha11": res.se_alpha11,
               "stride": res.stride, "n_eff": res.n_eff,
               "epsilon": eps, "rho": point.rho,
               "alpha1_ref": a1, "alpha2_ref": a2, "alpha11_ref": a11,
               "sigma_r_hat": sig_hat.tolist(), "sigma_r_se": sig_se.tolist(),
               "sigma_r_ref": sig_ref.tolist()}
        rows.append(row)
        checks.append((row, sig_hat, sig_se, sig_ref))

    def mc_consistency(cols, rws, txt):
        errors = []
        for i, (row, sig_hat, sig_se, sig_ref) in enumerate(checks):
            n = row["n_eff"]
            for name, ref in (("emp_alpha1", row["alpha1_ref"]),
                              ("emp_alpha2", row["alpha2_ref"]),
                              ("emp_alpha11", row["alpha11_ref"])):
                se = max(np.sqrt(ref * (1.0 - ref) / n), 1e-9)
                if abs(row[name] - ref) > 5.0 * se:
                    errors.append(f"row {i}: {name} deviates from model by >5 se")
            dev = np.abs(sig_hat - sig_ref)
            if np.any(dev > 5.0 * sig_se + 1e-9):
                errors.append(f"row {i}: empirical received covariance off model by >5 se")
            if not (0.0 <= row["pre_ber"] <= 1.0 and 0.0 <= row["post_ber"] <= 1.0):
                errors.append(f"row {i}: bit error rate outside [0, 1]")
        return errors

    return columns, rows, [lambda cols, rws, txt: validate_finite(
        cols, rws), mc_consistency], None


def run_kalman_check(args):
    checks = kalman.identity_report(seed=args.seed, states=args.states,
                                    steps=args.steps)
    columns = ["check", "max_dev", "tol", "passed"]
    rows = [{"check": c.name, "max_dev": c.max_dev, "tol": c.tol,
             "passed": c.passed} for c in checks]

    def all_passed(cols, rws, txt):
        return [f"identity failed: {r['check']} (max dev {r['max_dev']:.3e})"
                for r in rws if not r["passed"]]

    return columns, rows, [all_passed], None


def run_search(args):
    entries = qli_search.enumerate_qli(args.nu)
    columns = ["c_bits", "m1a", "m2a", "m1b", "m2b",
               "heuristic_counterexample", "exact_counterexample_snrs"]
    rows = []
    for entry in entries:
        code = convcode.make_qli(entry.gprime)
        snrs = qli_search.exact_counterexample_snrs(code)
        rows.append({"c_bits": "".join(str(b) for b in entry.c_bits),
                     "m1a": entry.m1_alpha, "m2a": entry.m2_alpha,
                     "m1b": entry.m1_beta, "m2b": entry.m2_beta,
                     "heuristic_counterexample": entry.heuristic_counterexample,
                     "indeterminate": entry.indeterminate,
                     "exact_counterexample_snrs": ";".join(
                         format_cell(v) for v in snrs)})

    def heuristic_vs_exact(cols, rws, txt):
        errors = []
        for i, row in enumerate(rws):
            has_exact = bool(row["exact_counterexample_snrs"])
            if row["heuristic_counterexample"] and not has_exact:
                errors.append(f"row {i}: heuristic counterexample with empty exact list")
            if (not row["heuristic_counterexample"] and not row["indeterminate"]
                    and has_exact):
                errors.append(f"row {i}: expected ordering but exact reversals found")
        return errors

    return columns, rows, [heuristic_vs_exact], None


# ------------------------------------------------------------------ entry point

def _emit_and_validate(args, columns, rows, validators, meta=None):
    if columns is None:
        # polynomial payloads are JSON regardless of --format
        text = json.dumps(_jsonable(rows), indent=2) + "\n"
        errors = []
    elif args.format == "csv":
        text = csv_text(columns, rows)
        errors = validate_roundtrip(text)
    else:
        text = json_text(columns, rows, meta)
        errors = []

    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        if not args.quiet:
            count = len(rows) if columns is not None else 1
            print(f"wrote {count} row(s) to {args.out}")
    else:
        sys.stdout.write(text)

    if columns is not None:
        for validator in validators:
            errors.extend(validator(columns, rows, text))
    return errors


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="write output to this path")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="sstkalman",
        description="Innovations view of syndrome-former Viterbi decoding: "
                    "tables, bound curves, simulation, and self checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", parents=[common],
                       help="reproduce one of the reference tables (1..10)")
    p.add_argument("--table", type=int, required=True)

    p = sub.add_parser("curves", parents=[common],
                       help="bound and eigenvalue curves over an SNR grid")
    p.add_argument("--code", default="c1")
    p.add_argument("--mode", choices=("general", "qli"), default="general")
    p.add_argument("--ebn0-db", default="-10..10")

    p = sub.add_parser("alpha", parents=[common],
                       help="parity probabilities (values or exact polynomials)")
    p.add_argument("--code", default="c1")
    p.add_argument("--mode", choices=("general", "qli"), default="general")
    p.add_argument("--emit", choices=("values", "polynomial"), default="values")
    p.add_argument("--ebn0-db", default="-10..10")

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo decoding run with empirical statistics")
    p.add_argument("--code", default="c1")
    p.add_argument("--mode", choices=("general", "qli"), default="general")
    p.add_argument("--ebn0-db", default="4")
    p.add_argument("--branches", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)

    p = sub.add_parser("kalman-check", parents=[common],
                       help="run every filter/smoother identity on a random model")
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--states", type=int, default=3)
    p.add_argument("--steps", type=int, default=8)

    p = sub.add_parser("search", parents=[common],
                       help="exhaustive quick-look-in family scan at one memory")
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--emit", choices=("csv", "json"), default=None,
                   help="alias for --format")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "tables":
            columns, rows, validators = run_tables(args.table)
            meta = None
        elif args.command == "curves":
            columns, rows, validators, meta = run_curves(args)
        elif args.command == "alpha":
            columns, rows, validators, meta = run_alpha(args)
        elif args.command == "simulate":
            if args.branches < 1000:
                raise ValueError("need at least 1000 branches")
            columns, rows, validators, meta = run_simulate(args)
        elif args.command == "kalman-check":
            columns, rows, validators, meta = run_kalman_check(args)
        elif args.command == "search":
            if args.emit:
                args.format = args.emit
            columns, rows, validators, meta = run_search(args)
        else:  # pragma: no cover - argparse enforces the choices
            raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        errors = _emit_and_validate(args, columns, rows, validators, meta)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if errors:
        for e in errors:
            print(f"validation: {e}", file=sys.stderr)
        return 1
    if not args.quiet and args.command == "kalman-check":
        print("all identities passed", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
