"""Command line entry point: ``pdmtorus <group> <command> [flags]``.

Exit codes: 0 success, 1 a verification or numerical failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, pdm, quantum, torus, verify
from .errors import DomainError, IntegrationDiverged, PdmTorusError, SolverError
from .numerics import Grid
from .pdm import BranchId, MLParams, QuadraticParams
from .torus import FullState, TorusParams

RESIDUAL_TOL = 1e-10


class UsageError(Exception):
    pass


def finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def nonneg_int(text: str) -> int:
    v = int(text) if text.lstrip("-").isdigit() else -1
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer: {text!r}")
    return v


# ---------------------------------------------------------------- output


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    return v


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".pdmtorus-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(command: str, params: dict, header, rows, footer=()) -> str:
    buf = io.StringIO()
    buf.write(f"# pdmtorus {__version__}\n# command: {command}\n")
    for k, v in params.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    for k, v in footer:
        buf.write(f"# {k},{fmt(v)}\n")
    return buf.getvalue()


def json_text(params, results, residuals, verdicts) -> str:
    doc = {"params": params, "results": results, "residuals": residuals,
           "verdicts": verdicts}
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def _record_csv(command, params, record: dict) -> str:
    rows = []
    for group in ("results", "residuals", "verdicts"):
        for k, v in record[group].items():
            rows.append((f"{group}.{k}", v if isinstance(v, str) else fmt(v)))
    return csv_text(command, params, ("key", "value"), rows)


def _params(args, *names) -> dict:
    # flags that do not apply to the chosen model stay None and are omitted
    return {n: getattr(args, n) for n in names if getattr(args, n) is not None}


# -------------------------------------------------------------- commands

TORUS_FLAGS = ("a", "c", "u0", "v0", "du0", "dv0", "t_end", "dt")


def _torus_run(args):
    p = TorusParams(args.a, args.c)
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    s0 = FullState(args.u0, args.v0, args.du0, args.dv0)
    return torus.integrate_full(s0, p, args.t_end, args.dt)


def cmd_torus_simulate(args) -> int:
    tr = _torus_run(args)
    params = _params(args, *TORUS_FLAGS)
    d = tr.diagnostics
    cols = ("t", "u", "v", "du", "dv", "q1", "q2_energy", "q2_paper", "lagrangian")
    data = np.column_stack((tr.times, tr.states, d["q1"], d["q2_energy"],
                            d["q2_paper"], d["lagrangian"]))
    if args.format == "json":
        text = json_text(params, {c: data[:, i] for i, c in enumerate(cols)},
                         {"q1_drift": torus.relative_drift(d["q1"]),
                          "lagrangian_drift": torus.relative_drift(d["lagrangian"])}, {})
    else:
        text = csv_text("torus simulate", params, cols, data)
    _write(text, args.out)
    return 0


def cmd_torus_audit(args) -> int:
    tr = _torus_run(args)
    verdict = torus.sign_audit(tr)
    params = _params(args, *TORUS_FLAGS)
    record = {
        "results": {"plus_drift": verdict.plus_drift, "minus_drift": verdict.minus_drift},
        "residuals": {"u_equation_residual": verdict.eq9_residual},
        "verdicts": {"conserved": verdict.conserved, "note": verdict.note},
    }
    if args.format == "csv":
        text = _record_csv("torus audit-sign", params, record)
    else:
        text = json_text(params, **record)
    _write(text, args.out)
    if args.out not in (None, "-"):
        print(f"conserved: {verdict.conserved} (plus {verdict.plus_drift:.3e}, "
              f"minus {verdict.minus_drift:.3e})")
    return 1 if verdict.conserved == "inconclusive" else 0


def _pdm_params(args):
    if args.case == "quadratic":
        if args.alpha is None:
            raise UsageError("--alpha is required for --case quadratic")
        return QuadraticParams(args.lam, args.alpha, args.c1, args.c2)
    if args.omega2 is None:
        raise UsageError("--omega2 is required for --case ml")
    return MLParams.from_omega2(args.lam, args.omega2, args.c1, args.c2)


def cmd_pdm_map(args) -> int:
    params = _pdm_params(args)
    if not args.dt > 0:
        raise UsageError("--dt must be positive")
    system = pdm.system_for(args.case, params)
    tr = pdm.integrate_lienard(system, args.x0, args.dx0, args.t_end, args.dt)
    x = tr.states[:, 0]
    tau = pdm.tau_of_t(tr, system.f)
    q = pdm.q_along(system, x)
    try:
        pull = pdm.pullback_residual(tr, system, pdm.potential_in_q(args.case, params))
    except (DomainError, ValueError):
        pull = math.nan
    echo = _params(args, "case", "lam", "alpha", "omega2", "c1", "c2", "x0", "dx0",
                   "t_end", "dt")
    cols = ("t", "x", "dx", "tau", "q", "energy")
    data = np.column_stack((tr.times, tr.states, tau, q, tr.diagnostics["energy"]))
    if args.format == "json":
        text = json_text(echo, {c: data[:, i] for i, c in enumerate(cols)},
                         {"pullback_residual": pull}, {})
    else:
        text = csv_text("pdm map", echo, cols, data, [("pullback_residual", pull)])
    _write(text, args.out)
    return 0


MATCH_COLS = ("x", "branch", "q_re", "q_im", "f_re", "f_im", "m_re", "m_im",
              "identity_residual", "oracle_q", "oracle_f", "potential_residual",
              "q_delta", "oracle_identity_residual", "flag")


def cmd_pdm_match(args) -> int:
    params = _pdm_params(args)
    if args.branch != "all":
        BranchId(args.case, args.branch)
    if args.n < 2 or not args.x_max > args.x_min:
        raise UsageError("need --n >= 2 and --x-max > --x-min")
    xs = np.linspace(args.x_min, args.x_max, args.n)
    rep = pdm.compare_match(args.case, xs, params, TorusParams(args.a, args.c), args.q1)
    rows = [r for r in rep.rows if args.branch in ("all", r.branch)]
    table = [(r.x, r.branch, r.q.real, r.q.imag, r.f.real, r.f.imag, r.m.real, r.m.imag,
              r.identity_residual, r.oracle_q, r.oracle_f, r.potential_residual,
              r.q_delta, r.oracle_identity_residual, r.flag) for r in rows]
    echo = _params(args, "case", "branch", "x_min", "x_max", "n", "lam", "alpha",
                   "omega2", "c1", "c2", "a", "c", "q1")
    if args.format == "json":
        results = {c: [row[i] for row in table] for i, c in enumerate(MATCH_COLS)}
        summary = dict(rep.summary)
        text = json_text(echo, results,
                         {"oracle_max_potential_residual": summary.pop("oracle_max_potential_residual"),
                          "oracle_max_identity_residual": summary.pop("oracle_max_identity_residual")},
                         summary)
    else:
        text = csv_text("pdm match", echo, MATCH_COLS, table)
    _write(text, args.out)
    return 0


def _spectrum_setup(args):
    model = args.model
    if model == "torus":
        for flag in ("a", "c", "q1", "q2"):
            if getattr(args, flag) is None:
                raise UsageError(f"--{flag} is required for --model torus")
        op = quantum.torus_hamiltonian(TorusParams(args.a, args.c), args.q1, args.q2)
        n = args.grid_n or 2000
        return op, Grid.periodic_grid(-math.pi, 2.0 * math.pi, n), {}
    if args.lam is None:
        raise UsageError("--lambda is required")
    if model == "quadratic":
        p = QuadraticParams(args.lam, _need(args.alpha, "alpha"), args.c1, args.c2)
        lo, hi = _domain(args, (-12.0, 12.0))
        op = quantum.quadratic_zeta_hamiltonian(p, (lo, hi))
        variants = ("paper", "audited") if args.formula == "both" else (args.formula,)
        analytic = {v: [quantum.quadratic_energy(k, p, v) for k in range(args.levels)]
                    for v in variants}
    else:
        p = MLParams.from_omega2(args.lam, _need(args.omega2, "omega2"), args.c1, args.c2)
        lo, hi = _domain(args, (-30.0, 30.0))
        op = quantum.ml_hamiltonian(p, (lo, hi))
        analytic = {}
        w = quantum.ml_omega_constraint(p.lam, p.C1)
        if abs(p.real_omega2() - w.omega2) <= 1e-12 * max(1.0, abs(w.omega2)):
            analytic["legendre"] = [quantum.ml_energy(k, p) for k in range(args.levels)]
    n = args.grid_n or 8001
    return op, Grid.uniform(lo, hi, n), analytic


def _need(v, name):
    if v is None:
        raise UsageError(f"--{name} is required for this model")
    return v


def _domain(args, default):
    lo = default[0] if args.domain_lo is None else args.domain_lo
    hi = default[1] if args.domain_hi is None else args.domain_hi
    if not hi > lo:
        raise UsageError("--domain-hi must exceed --domain-lo")
    return lo, hi


def cmd_quantum_spectrum(args) -> int:
    op, grid, analytic = _spectrum_setup(args)
    rep = quantum.solve_spectrum(op, grid, args.levels)
    for name, values in analytic.items():
        rep = rep.with_analytic(name, values)
    echo = _params(args, "model", "levels", "grid_n", "domain_lo", "domain_hi", "a", "c",
                   "q1", "q2", "lam", "alpha", "omega2", "c1", "c2", "formula")
    echo["grid_n"] = grid.size
    residuals = {"eigen_residual": [pr.residual for pr in rep.pairs]}
    residuals.update({f"delta_{k}": v for k, v in rep.deltas.items()})
    verdicts = {}
    if rep.deltas:
        closest = min(rep.deltas, key=lambda k: float(np.max(rep.deltas[k])))
        verdicts["closest_formula"] = closest
    results = {"energies": rep.energies,
               "analytic": {k: v for k, v in rep.analytic.items()},
               "grid": {k: v for k, v in rep.grid.items() if k != "unextrapolated"}}
    if args.format == "csv":
        names = list(rep.analytic)
        header = ["level", "energy", "eigen_residual"]
        header += [f"analytic_{k}" for k in names] + [f"delta_{k}" for k in names]
        rows = []
        for i, pr in enumerate(rep.pairs):
            rows.append([i, pr.energy, pr.residual]
                        + [rep.analytic[k][i] for k in names]
                        + [rep.deltas[k][i] for k in names])
        text = csv_text("quantum spectrum", echo, header, rows)
    else:
        text = json_text(echo, results, residuals, verdicts)
    _write(text, args.out)
    return 0


def cmd_quantum_residual(args) -> int:
    if args.model == "quadratic":
        n = _need(args.n, "n")
        p = QuadraticParams(_need(args.lam, "lambda"), _need(args.alpha, "alpha"),
                            args.c1, args.c2)
        op = quantum.quadratic_zeta_hamiltonian(p, (-12.0, 12.0))
        shift = 0.5 / p.lam
        energy = quantum.quadratic_energy(n, p, "audited")
        xs = np.linspace(-10.0, 10.0, 1001)

        def psi(s):
            return quantum.quadratic_wavefunction(n, s - shift, p)
    else:
        n = _need(args.nu, "nu")
        p = MLParams.from_omega2(_need(args.lam, "lambda"), _need(args.omega2, "omega2"),
                                 args.c1, args.c2)
        lo, hi = (-5.0, 5.0) if p.lam > 0 else (-0.9 / math.sqrt(-p.lam), 0.9 / math.sqrt(-p.lam))
        op = quantum.ml_hamiltonian(p, (lo, hi))
        energy = quantum.ml_energy(n, p)
        xs = np.linspace(lo, hi, 1001)

        def psi(x):
            return quantum.ml_wavefunction(n, x, p.lam)
    r = quantum.residual(op, psi, energy, xs)
    echo = _params(args, "model", "n", "nu", "lam", "alpha", "omega2", "c1", "c2")
    ok = r <= RESIDUAL_TOL
    text = json_text(echo, {"energy": energy}, {"residual": r},
                     {"within_tolerance": ok, "tolerance": RESIDUAL_TOL})
    if args.out not in (None, "-"):
        _write(text, args.out)
    print(f"residual {r:.3e} (energy {energy:.17g})")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _io_flags(p, default_format):
    p.add_argument("--out", default=None, help="output path; stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _torus_flags(p):
    for name in ("a", "c", "u0", "v0", "du0", "dv0", "t-end", "dt"):
        p.add_argument(f"--{name}", type=finite_float, required=True)


def _pdm_flags(p):
    p.add_argument("--case", choices=("quadratic", "ml"), required=True)
    p.add_argument("--lambda", dest="lam", type=finite_float, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=finite_float)
    group.add_argument("--omega2", type=finite_float)
    p.add_argument("--c1", type=finite_float, default=1.0)
    p.add_argument("--c2", type=finite_float, default=0.0)


def _model_flags(p):
    for name in ("a", "c", "q1", "q2", "alpha", "omega2"):
        p.add_argument(f"--{name}", type=finite_float)
    p.add_argument("--lambda", dest="lam", type=finite_float)
    p.add_argument("--c1", type=finite_float, default=1.0)
    p.add_argument("--c2", type=finite_float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="pdmtorus", description=__doc__.splitlines()[0])
    root.add_argument("--version", action="version", version=f"pdmtorus {__version__}")
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    tg = groups.add_parser("torus", help="classical geodesics").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = tg.add_parser("simulate", help="integrate the geodesic equations")
    _torus_flags(p)
    _io_flags(p, "csv")
    p.set_defaults(func=cmd_torus_simulate)
    p = tg.add_parser("audit-sign", help="which radial constant is conserved")
    _torus_flags(p)
    _io_flags(p, "json")
    p.set_defaults(func=cmd_torus_audit)

    pg = groups.add_parser("pdm", help="position-dependent-mass oscillators").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = pg.add_parser("map", help="integrate and pull back to the q variable")
    _pdm_flags(p)
    for name in ("x0", "dx0", "t-end", "dt"):
        p.add_argument(f"--{name}", type=finite_float, required=True)
    _io_flags(p, "csv")
    p.set_defaults(func=cmd_pdm_map)
    p = pg.add_parser("match", help="printed matching branches against the oracle")
    _pdm_flags(p)
    p.add_argument("--branch", default="all")
    p.add_argument("--x-min", type=finite_float, required=True)
    p.add_argument("--x-max", type=finite_float, required=True)
    p.add_argument("--n", type=positive_int, default=101)
    p.add_argument("--a", type=finite_float, default=1.0)
    p.add_argument("--c", type=finite_float, default=2.0)
    p.add_argument("--q1", type=finite_float, default=1.0)
    _io_flags(p, "csv")
    p.set_defaults(func=cmd_pdm_match)

    qg = groups.add_parser("quantum", help="spectra and eigenfunction residuals").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = qg.add_parser("spectrum", help="finite-difference spectrum")
    p.add_argument("--model", choices=("torus", "quadratic", "ml"), required=True)
    p.add_argument("--levels", type=positive_int, default=6)
    p.add_argument("--grid-n", type=positive_int, default=None)
    p.add_argument("--domain-lo", type=finite_float, default=None)
    p.add_argument("--domain-hi", type=finite_float, default=None)
    p.add_argument("--formula", choices=("paper", "audited", "both"), default="both")
    _model_flags(p)
    _io_flags(p, "json")
    p.set_defaults(func=cmd_quantum_spectrum)
    p = qg.add_parser("residual", help="residual of a closed-form eigenpair")
    p.add_argument("--model", choices=("quadratic", "ml"), required=True)
    idx = p.add_mutually_exclusive_group(required=True)
    idx.add_argument("--n", type=nonneg_int)
    idx.add_argument("--nu", type=nonneg_int)
    _model_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_quantum_residual)

    p = groups.add_parser("verify", help="run the reference checks")
    p.add_argument("--suite", choices=("all",) + verify.SUITES, default="all")
    p.set_defaults(func=cmd_verify)
    return root


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError, OverflowError) as exc:
        # DomainError, RangeError and UnsupportedParameter are ValueErrors
        print(f"pdmtorus: error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationDiverged, SolverError, PdmTorusError) as exc:
        print(f"pdmtorus: numerical failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
