"""Command-line harness: ``verify``, ``bracket``, ``darboux``, ``identities``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
3 numerical failure (non-convergence, evaluation on a pole).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .brackets import (
    BracketValue,
    bracket_ah,
    bracket_ansatz,
    bracket_contour,
    bracket_z,
    jacobi_defect_ansatz,
    jacobi_defect_contour,
    residue_decomposition_check,
)
from .contour import FWeight, residue_at_infinity
from .deriv import (
    action_angle_average,
    bracket_n,
    casimirs_n0,
    chart_constancy_report,
    coord_tensor_closed,
    coord_tensor_field,
    coord_tensor_numeric,
    pointwise_jacobi_deriv_hierarchy,
    search_chart_shift,
)
from .errors import PoissonRatError
from .identities import proof_identity_report
from .ratfun import RationalMap, random_instance, sample_external_points
from .tensor import antisymmetry_residual, jacobiator, nullspace, numerical_rank

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
HIERARCHIES = ("contour", "ansatz", "deriv")
CONFIG_KEYS = ("hierarchy", "f_degree", "f_coeffs", "n", "N", "seeds", "tol", "json")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _complex_pair(text: str) -> complex:
    try:
        re, im = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(re, im)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _coeff_list(text: str) -> list[complex]:
    try:
        return [complex(t.replace(" ", "")) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coefficient list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poisson-rat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run an invariant suite over seeds")
    v.add_argument("--config", help="JSON file with the same keys as the flags")
    v.add_argument("--hierarchy", choices=HIERARCHIES)
    v.add_argument("--f-degree", type=int, dest="f_degree")
    v.add_argument("--f-coeffs", type=_coeff_list, dest="f_coeffs",
                   help="ascending coefficients of f, comma separated")
    v.add_argument("--n", type=int)
    v.add_argument("--N", type=int)
    v.add_argument("--seeds", type=_int_list)
    v.add_argument("--tol", type=float,
                   help="tolerance for the vanishing Jacobi checks (default 1e-7)")
    v.add_argument("--json", help="write the report here instead of stdout")

    b = sub.add_parser("bracket", help="evaluate one bracket")
    b.add_argument("--method", required=True,
                   choices=("ah", "z", "contour", "ansatz", "deriv"))
    b.add_argument("--f-degree", type=int, dest="f_degree", default=0)
    b.add_argument("--n", type=int, default=0)
    b.add_argument("--map", required=True, dest="map_path")
    b.add_argument("--p", required=True, type=_complex_pair)
    b.add_argument("--q", required=True, type=_complex_pair)

    d = sub.add_parser("darboux", help="chart constancy, rank and Casimirs")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--N", type=int, required=True)
    d.add_argument("--samples", type=int, default=8)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--json")

    i = sub.add_parser("identities", help="exact check of the proof identities")
    i.add_argument("--perturb", action="store_true",
                   help="break one identity (negative control)")
    i.add_argument("--json")
    return parser


# -- reports --------------------------------------------------------------

def _record(check, seed, measured, tolerance, comparison="<=", status=None):
    measured = float(measured)
    if status is None:
        ok = measured <= tolerance if comparison == "<=" else measured >= tolerance
        status = "pass" if ok else "fail"
    return {"check_name": check, "seed": seed, "status": status,
            "measured": measured, "tolerance": tolerance, "comparison": comparison}


def _overall(records) -> str:
    statuses = {r["status"] for r in records}
    if "error" in statuses:
        return "error"
    return "fail" if "fail" in statuses else "pass"


def _exit_code(status: str) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "error": EXIT_NUMERIC}[status]


def write_report(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2)
    if path is None:
        print(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers(jobs: int) -> int:
    cap = os.environ.get("POISSON_RAT_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(limit, jobs))


# -- verify suites --------------------------------------------------------

def _contour_suite(f: FWeight, N: int, seed: int, tol: float):
    w = random_instance(N, seed)
    p, q, r = sample_external_points(w, 3, seed)
    out, findings = [], []
    b_pq = bracket_contour(f, w, p, q).value
    b_qp = bracket_contour(f, w, q, p).value
    out.append(_record("skew_symmetry", seed, abs(b_pq + b_qp) / (1 + abs(b_pq)), 1e-12))
    if f.degree <= 1:
        ref = bracket_ansatz(f, w, p, q).value
        out.append(_record("closed_form_agreement", seed,
                           abs(b_pq - ref) / (1 + abs(ref)), 1e-9))
    out.append(_record("residue_decomposition", seed,
                       residue_decomposition_check(f, w, p, q), 1e-8))
    res_inf = abs(residue_at_infinity(f, w, p, q).value)
    if f.degree <= 1:
        out.append(_record("residue_at_infinity_vanishes", seed, res_inf, 1e-10))
    else:
        out.append(_record("residue_at_infinity_nonvanishing", seed, res_inf, 1e-6, ">="))
    out.append(_record("jacobi_defect_contour", seed,
                       jacobi_defect_contour(f, w, p, q, r), tol))
    return out, findings


def _ansatz_suite(f: FWeight, N: int, seed: int, tol: float):
    w = random_instance(N, seed)
    p, q, r = sample_external_points(w, 3, seed)
    out = []
    defect = jacobi_defect_ansatz(f, w, p, q, r).max_defect
    if f.degree <= 1:
        out.append(_record("ansatz_jacobiator_vanishes", seed, defect, tol))
    else:
        out.append(_record("ansatz_jacobiator_nonvanishing", seed, defect, 1e-3, ">="))
    out.append(_record("ansatz_contour_gap_is_residue_at_infinity", seed,
                       residue_decomposition_check(f, w, p, q), 1e-8))
    return out, []


def _deriv_suite(n: int, N: int, seed: int, tol: float):
    w = random_instance(N, seed)
    p, q, r = sample_external_points(w, 3, seed)
    out, findings = [], []
    closed = coord_tensor_closed(n, w.poles, w.residues)
    numeric = coord_tensor_numeric(n, w)
    out.append(_record("coord_tensor_numeric_vs_closed", seed,
                       np.max(np.abs(numeric - closed)), 1e-8))
    out.append(_record("coord_tensor_antisymmetry", seed,
                       max(antisymmetry_residual(numeric), antisymmetry_residual(closed)), 1e-12))
    out.append(_record("pointwise_jacobi", seed,
                       pointwise_jacobi_deriv_hierarchy(n, w, p, q, r), 1e-10))
    out.append(_record("closed_tensor_jacobiator", seed,
                       jacobiator(coord_tensor_field(n), w.coordinates()).max_defect, 1e-9))
    if n <= 1:
        rep = chart_constancy_report(n, samples=4, N=N, seed=seed)
        out.append(_record("chart_constancy", seed, rep.max_deviation, 1e-10))
        out.append(_record("chart_ones_block", seed, 0.0 if rep.ones_block_sign() else 1.0,
                           0.0))
    else:
        rep = chart_constancy_report(n, samples=4, N=N, seed=seed)
        shift, fixed = search_chart_shift(n, samples=4, N=N, seed=seed)
        findings.append({"finding": "stated_chart_constancy", "seed": seed,
                         "is_constant": rep.is_constant,
                         "max_deviation": rep.max_deviation,
                         "corrected_shift": [shift.real, shift.imag]})
        out.append(_record("corrected_chart_constancy", seed, fixed.max_deviation, 1e-8))
    return out, findings


def _resolve_verify_config(args) -> dict:
    cfg = {key: None for key in CONFIG_KEYS}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}")
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val

    h = cfg["hierarchy"]
    if h not in HIERARCHIES:
        raise UsageError("--hierarchy must be one of " + ", ".join(HIERARCHIES))
    if cfg["N"] is None or int(cfg["N"]) < 1:
        raise UsageError("--N must be a positive integer")
    cfg["N"] = int(cfg["N"])
    has_f = cfg["f_degree"] is not None or cfg["f_coeffs"] is not None
    if h == "deriv":
        if has_f:
            raise UsageError("--f-degree/--f-coeffs do not apply to the deriv hierarchy")
        if cfg["n"] is None or int(cfg["n"]) < 0:
            raise UsageError("--n must be a nonnegative integer for the deriv hierarchy")
    else:
        if cfg["n"] is not None:
            raise UsageError("--n applies only to the deriv hierarchy")
        if cfg["f_degree"] is not None and cfg["f_coeffs"] is not None:
            raise UsageError("give either --f-degree or --f-coeffs")
        if not has_f:
            cfg["f_degree"] = 0
        if cfg["f_degree"] is not None and int(cfg["f_degree"]) < 0:
            raise UsageError("--f-degree must be >= 0")
    cfg["seeds"] = list(cfg["seeds"]) if cfg["seeds"] is not None else [0]
    if not cfg["seeds"]:
        raise UsageError("--seeds must list at least one seed")
    cfg["tol"] = float(cfg["tol"]) if cfg["tol"] is not None else 1e-7
    if not cfg["tol"] > 0:
        raise UsageError("--tol must be positive")
    if cfg["f_coeffs"] is not None:
        cfg["f_coeffs"] = [[complex(c).real, complex(c).imag] for c in cfg["f_coeffs"]]
    return cfg


def _f_weight(cfg) -> FWeight:
    if cfg["f_coeffs"] is not None:
        return FWeight(tuple(complex(re, im) for re, im in cfg["f_coeffs"]))
    return FWeight.monomial(int(cfg["f_degree"]))


def cmd_verify(args) -> int:
    cfg = _resolve_verify_config(args)
    start = time.perf_counter()
    h, N, tol = cfg["hierarchy"], cfg["N"], cfg["tol"]

    def run(seed):
        try:
            if h == "contour":
                return _contour_suite(_f_weight(cfg), N, seed, tol)
            if h == "ansatz":
                return _ansatz_suite(_f_weight(cfg), N, seed, tol)
            return _deriv_suite(int(cfg["n"]), N, seed, tol)
        except PoissonRatError as exc:
            rec = _record(f"{h}_suite", seed, float("nan"), tol, status="error")
            rec["error"] = f"{type(exc).__name__}: {exc}"
            return [rec], []

    with ThreadPoolExecutor(_workers(len(cfg["seeds"]))) as pool:
        results = list(pool.map(run, cfg["seeds"]))
    records = [r for recs, _ in results for r in recs]
    findings = [f for _, fs in results for f in fs]
    status = _overall(records)
    config_echo = {k: cfg[k] for k in CONFIG_KEYS if k != "json"}
    report = {"schema": SCHEMA, "command": "verify", "config": config_echo,
              "records": records, "findings": findings, "status": status,
              "wall_time": time.perf_counter() - start, "version": __version__}
    write_report(report, cfg["json"])
    return _exit_code(status)


def cmd_bracket(args) -> int:
    try:
        with open(args.map_path) as fh:
            w = RationalMap.from_json(fh.read())
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read map: {exc}")
    p, q = args.p, args.q
    w(np.array([p, q]))  # EvalAtPole before any contour is built
    f = FWeight.monomial(args.f_degree)
    if args.method == "ah":
        value = bracket_ah(w, p, q)
    elif args.method == "z":
        value = bracket_z(w, p, q)
    elif args.method == "contour":
        value = bracket_contour(f, w, p, q)
    elif args.method == "ansatz":
        value = bracket_ansatz(f, w, p, q)
    else:
        value = BracketValue(bracket_n(args.n, w, p, q), "closed_form")
    print(json.dumps(value.to_dict()))
    return EXIT_OK


def cmd_darboux(args) -> int:
    if args.n < 0 or args.N < 1 or args.samples < 2:
        raise UsageError("need --n >= 0, --N >= 1, --samples >= 2")
    start = time.perf_counter()
    rep = chart_constancy_report(args.n, args.samples, args.N, args.seed)
    J = rep.reference
    rank = numerical_rank(J, 1e-10)
    out = {"schema": SCHEMA, "command": "darboux",
           "config": {"n": args.n, "N": args.N, "samples": args.samples, "seed": args.seed},
           "chart": rep.to_dict(), "rank": rank,
           "nullity": len(nullspace(J, 1e-10))}
    if args.n == 0:
        out["casimir_count"] = len(casimirs_n0(args.N)) if args.N >= 2 else 0
        avg = action_angle_average(args.N, args.seed)
        v = avg["bracket_value"]
        out["I_Theta"] = {"value": [v.real, v.imag], "abs": abs(v), "sign": avg["sign"]}
    if not rep.is_constant:
        shift, fixed = search_chart_shift(args.n, args.samples, args.N, args.seed)
        out["corrected_chart"] = {"shift": [shift.real, shift.imag],
                                  "report": fixed.to_dict()}
    out["wall_time"] = time.perf_counter() - start
    out["version"] = __version__
    write_report(out, args.json)
    return EXIT_OK


def cmd_identities(args) -> int:
    report = proof_identity_report(perturb=args.perturb)
    ok = all(report.values())
    out = {"schema": SCHEMA, "command": "identities",
           "identities": [{"name": k, "holds": v} for k, v in report.items()],
           "status": "pass" if ok else "fail", "version": __version__}
    write_report(out, args.json)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "bracket": cmd_bracket,
            "darboux": cmd_darboux, "identities": cmd_identities}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PoissonRatError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
