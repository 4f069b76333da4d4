"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 solver failure, 64 usage
error. The directory for sweep and verify output may be overridden with the
POISEUILLE_WAVES_OUTDIR environment variable; an explicit --out wins over it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import kernel, ode, wave
from .config import OUTDIR_ENV, ConfigError, RunConfig, from_dict, load_config
from .greens import QuadratureError
from .profile import ProfileError, make_profile

EXIT_OK, EXIT_FAIL, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 64

_USAGE_ERRORS = (ConfigError, ProfileError, kernel.WindowError, wave.AmplitudeError, ode.AdmissibilityError)
_SOLVER_ERRORS = (kernel.DispersionError, ode.SeriesError, ode.SingularSystemError, QuadratureError,
                  wave.InversionError, ArithmeticError, RuntimeError, np.linalg.LinAlgError)

SOLVE_FIELDS = ("epsilon", "mu1", "mu_tilde_star", "mu2_empirical", "lambda_star", "A", "B",
                "residual_integral", "residual_jump", "residual_det", "window_lo", "window_hi")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poiseuille-waves", description="Traveling waves near Poiseuille flow in a channel.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="flat JSON run configuration")
        sp.add_argument("--quad-tol", type=float)
        sp.add_argument("--root-tol", type=float)
        sp.add_argument("--eps-max", type=float)

    s = sub.add_parser("solve", help="dispersion root, amplitudes and speed for one epsilon")
    common(s)
    s.add_argument("--epsilon", type=float)
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")

    s = sub.add_parser("sweep", help="one CSV row per epsilon")
    common(s)
    s.add_argument("--epsilons", type=_float_list)
    s.add_argument("--n-max", type=int)
    s.add_argument("--out", help="output directory")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")

    s = sub.add_parser("verify", help="run the invariant suite and write a JSON report")
    common(s)
    s.add_argument("--out", help="output directory")
    s.add_argument("--groups", type=lambda t: [g for g in t.split(",") if g])
    s.add_argument("--tolerance", type=float, help="override every check tolerance")

    s = sub.add_parser("field", help="export vorticity and stream function on a grid")
    common(s)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--nx", type=int)
    s.add_argument("--ny", type=int)
    s.add_argument("--out", required=True, help="CSV file; a .json sidecar is written next to it")
    return p


def _config(args) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    over = {
        "quad_tol": args.quad_tol,
        "root_tol": args.root_tol,
        "eps_max": args.eps_max,
        "epsilon": getattr(args, "epsilon", None),
        "epsilons": getattr(args, "epsilons", None),
        "n_max": getattr(args, "n_max", None),
        "groups": getattr(args, "groups", None),
        "nx": getattr(args, "nx", None),
        "field_ny": getattr(args, "ny", None),
    }
    if getattr(args, "tolerance", None) is not None:
        over["tolerance"] = args.tolerance
    return from_dict({k: v for k, v in over.items() if v is not None}, base)


def _outdir(args, cfg: RunConfig) -> Path:
    return Path(args.out) if getattr(args, "out", None) else cfg.outdir


# ---------------------------------------------------------------- solve


def solve_record(cfg: RunConfig, epsilon: float) -> dict:
    make_profile(epsilon, cfg.eps_max)
    mode = kernel.assemble_kernel_mode(epsilon, cfg.eps_max, cfg.quad_tol, cfg.root_tol)
    lo, hi = kernel.mu_tilde_window(epsilon)
    jump = kernel.cross_check_jump(1, epsilon, mode.mu_tilde_star, cfg.quad_tol)
    return {
        "epsilon": float(epsilon),
        "mu1": mode.mu1,
        "mu_tilde_star": mode.mu_tilde_star,
        "mu2_empirical": float(mode.mu2),
        "lambda_star": mode.lambda_star,
        "A": mode.A,
        "B": mode.B,
        "residuals": {
            "integral": kernel.integral_residual(mode),
            "jump": abs(jump.diff),
            "det": abs(mode.root.det),
        },
        "window": {"lo": lo, "hi": hi},
    }


def _flatten(rec: dict) -> list:
    r = rec["residuals"]
    w = rec["window"]
    vals = [rec["epsilon"], rec["mu1"], rec["mu_tilde_star"], rec["mu2_empirical"], rec["lambda_star"],
            rec["A"], rec["B"], r["integral"], r["jump"], r["det"], w["lo"], w["hi"]]
    return [repr(float(v)) for v in vals]


def format_solve(rec: dict, fmt: str) -> str:
    if fmt == "csv":
        return ",".join(SOLVE_FIELDS) + "\n" + ",".join(_flatten(rec)) + "\n"
    return json.dumps(rec, indent=2) + "\n"


def cmd_solve(args) -> int:
    cfg = _config(args)
    rec = solve_record(cfg, cfg.epsilon)
    sys.stdout.write(format_solve(rec, args.fmt or "json"))
    return EXIT_OK


# ---------------------------------------------------------------- sweep


def sweep_columns(n_max: int) -> list:
    dets = [f"det{n}" for n in range(2, n_max + 1)]
    return ["epsilon", "mu_tilde", "mu1_scaled", "(mu_tilde-0.5)/eps", "lambda_star", *dets,
            "supd", "supd_ratio", "status"]


def sweep_row(cfg: RunConfig, epsilon: float) -> list:
    """CSV cells for one epsilon; a solver failure yields empty numbers and the error as status."""
    ncol = len(sweep_columns(cfg.n_max))
    try:
        make_profile(epsilon, cfg.eps_max)
        root = kernel.solve_mu_tilde(epsilon, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol)
        m = root.mu_tilde
        lam = make_profile(epsilon, cfg.eps_max).v_varpi - (1.0 - epsilon) ** 2 * m * m
        dets = [kernel.determinant(n, epsilon, m, "quadrature", cfg.quad_tol) for n in range(2, cfg.n_max + 1)]
        dist = ode.difference_to_limit(epsilon, ode.solve_mode_ode("left", 1, epsilon, m))
        nums = [epsilon, m, 0.5 + kernel.solve_mu1(), (m - 0.5) / epsilon, lam, *dets, dist.sup, dist.ratio]
        return [repr(float(v)) for v in nums] + ["ok"]
    except (*_USAGE_ERRORS, *_SOLVER_ERRORS) as exc:
        return [repr(float(epsilon))] + [""] * (ncol - 2) + [f"{type(exc).__name__}: {exc}"]


def _sweep_task(payload):
    cfg_dict, eps = payload
    return sweep_row(from_dict(cfg_dict), eps)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if len(cfg.epsilons) < 2:
        raise UsageError("sweep needs at least two epsilon values")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_task, [(cfg.to_dict(), e) for e in cfg.epsilons]))
    else:
        rows = [sweep_row(cfg, e) for e in cfg.epsilons]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(sweep_columns(cfg.n_max))
    w.writerows(rows)
    out = _outdir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    path.write_text(buf.getvalue(), encoding="utf-8")
    print(path)
    return EXIT_OK if all(r[-1] == "ok" for r in rows) else EXIT_SOLVER


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    from .verification import run_suite

    cfg = _config(args)
    report = run_suite(cfg, cfg.groups)
    path = report.write(_outdir(args, cfg))
    for c in report.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark} {c.group}.{c.name}: {c.value!r} {c.relation} {c.tolerance!r}")
    print(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} checks passed; report: {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- field


def cmd_field(args) -> int:
    cfg = _config(args)
    mode = kernel.assemble_kernel_mode(cfg.epsilon, cfg.eps_max, cfg.quad_tol, cfg.root_tol)
    wave.displacement(mode, args.sigma)
    fld = wave.assemble_wave_field(mode, args.sigma, cfg.nx, cfg.field_ny, cfg.inversion_tol)
    path = Path(args.out)
    if not path.is_absolute() and (env := os.environ.get(OUTDIR_ENV)):
        path = Path(env) / path
    csv_path, side = wave.export_field(fld, path)
    print(csv_path)
    print(side)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify, "field": cmd_field}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, *_USAGE_ERRORS) as exc:
        parser.print_usage(sys.stderr)
        print(f"poiseuille-waves: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _SOLVER_ERRORS as exc:
        sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2) + "\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
