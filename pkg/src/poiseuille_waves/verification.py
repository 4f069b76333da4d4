"""Invariant suite: named numerical checks grouped by the property they test.

Each group function takes a RunConfig and returns a list of Check records.
Values are deterministic for a fixed configuration, so the JSON report is
byte-identical between runs (no timings or timestamps are stored).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from . import kernel, ode, spectra, wave
from .config import ConfigError, RunConfig
from .greens import green, greens_distributional_check
from .profile import make_profile, psi0, psi0_prime, u_velocity

EXPANSION_SWEEP = (1e-2, 3e-3, 1e-3)
GAP_SWEEP = (0.1, 0.05, 0.01)
REPORT_NAME = "verification_report.json"

_RELATIONS = {
    "<=": lambda v, t: v <= t,
    "<": lambda v, t: v < t,
    ">=": lambda v, t: v >= t,
    ">": lambda v, t: v > t,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["passed", "n_checks", "n_failed", "groups", "checks", "config"],
    "properties": {
        "passed": {"type": "boolean"},
        "n_checks": {"type": "integer", "minimum": 0},
        "n_failed": {"type": "integer", "minimum": 0},
        "groups": {"type": "array", "items": {"type": "string"}},
        "config": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["group", "name", "value", "relation", "tolerance", "passed", "anchor"],
                "properties": {
                    "group": {"type": "string"},
                    "name": {"type": "string"},
                    "value": {"type": ["number", "null"]},
                    "relation": {"enum": list(_RELATIONS)},
                    "tolerance": {"type": "number"},
                    "passed": {"type": "boolean"},
                    "anchor": {"type": "string", "minLength": 1},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Check:
    """value <relation> tolerance; NaN or infinite values always fail."""

    group: str
    name: str
    value: float
    relation: str
    tolerance: float
    anchor: str
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = math.isfinite(self.value) and _RELATIONS[self.relation](self.value, self.tolerance)
        object.__setattr__(self, "passed", bool(ok))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = self.value if math.isfinite(self.value) else None
        return d


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple
    groups: tuple
    config: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def group(self, name: str) -> list:
        return [c for c in self.checks if c.group == name]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures),
            "groups": list(self.groups),
            "checks": [c.to_dict() for c in self.checks],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, outdir) -> Path:
        path = Path(outdir) / REPORT_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


class _Collector:
    def __init__(self, cfg: RunConfig, group: str):
        self.cfg, self.group, self.items = cfg, group, []

    def add(self, name: str, value, relation: str, threshold: float, anchor: str):
        full = f"{self.group}.{name}"
        if relation == "<=":
            tol = self.cfg.tol(full, threshold)
        else:
            tol = float(self.cfg.tolerances.get(full, threshold))
        self.items.append(Check(self.group, name, float(value), relation, tol, anchor))


def _mode(cfg: RunConfig, eps: float) -> kernel.KernelMode:
    return kernel.assemble_kernel_mode(eps, cfg.eps_max, cfg.quad_tol, cfg.root_tol)


# ---------------------------------------------------------------- groups


def check_identities(cfg: RunConfig) -> list:
    """Background profile and Green's function identities."""
    c = _Collector(cfg, "identities")
    p = make_profile(cfg.epsilon, cfg.eps_max)
    c.add("psi0_boundary", abs(psi0(p, 0.0)) + abs(psi0(p, 1.0) + 1.0 / 3.0), "<=", 1e-14,
          "background stream function takes 0 at the bottom wall and -1/3 at the top")
    uint = sum(integrate.quad(lambda y: u_velocity(p, y), lo, hi, epsabs=1e-14, epsrel=1e-14)[0]
               for lo, hi in ((0, p.a), (p.a, p.b), (p.b, 1)))
    c.add("v_varpi", abs(p.v_varpi - (-uint - 1.0 / 3.0)), "<=", 1e-13,
          "v_varpi = -int u - 1/3")
    y = np.linspace(0.0, 1.0, 2001)
    h = 1e-5
    yi = y[1:-1]
    fd = (psi0(p, np.minimum(yi + h, 1)) - psi0(p, np.maximum(yi - h, 0))) / (2 * h)
    c.add("psi0_slope", np.max(np.abs(fd - psi0_prime(p, yi))), "<=", 1e-8,
          "psi0' equals u + v_varpi")

    def phi(t):
        return t**2 * (1 - t) ** 2

    def phi_dd(t):
        return 2 * (1 - t) ** 2 - 8 * t * (1 - t) + 2 * t**2

    worst = 0.0
    for n in (0, 1, 3, 10):
        for z in (0.2, 0.5, 0.85):
            worst = max(worst, abs(greens_distributional_check(n, z, phi, phi_dd) + phi(z)))
    c.add("green_distributional", worst, "<=", 1e-12,
          "int G_n (phi'' - n^2 phi) = -phi for test functions vanishing at the walls")
    c.add("green_symmetry", abs(green(3, 0.2, 0.7) - green(3, 0.7, 0.2)), "<=", 1e-16,
          "G_n(y, z) = G_n(z, y)")
    return c.items


def check_dispersion(cfg: RunConfig) -> list:
    c = _Collector(cfg, "dispersion")
    for eps in cfg.epsilons:
        root = kernel.solve_mu_tilde(eps, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol)
        p = kernel.spectral_params(eps, root.mu_tilde)
        lo, hi = make_profile(eps, cfg.eps_max).window
        tag = f"eps={eps!r}"
        c.add(f"det[{tag}]", abs(root.det), "<=", 1e-10, "determinant vanishes at the selected speed")
        c.add(f"mu_tilde_above_half[{tag}]", root.mu_tilde - 0.5, ">", 0.0, "mu_tilde > 1/2")
        c.add(f"nu_tilde_below_half[{tag}]", 0.5 - p.nu_tilde, ">", 0.0, "nu_tilde < 1/2")
        c.add(f"lambda_bar_in_window[{tag}]", min(p.lambda_bar - lo, hi - p.lambda_bar), ">", 0.0,
              "a^2 < lambda_bar < b^2 - eps^2")
        c.add(f"sign_changes[{tag}]", root.sign_changes, "<=", 1,
              "scan of the window finds a single determinant root")
    return c.items


def check_kernel(cfg: RunConfig) -> list:
    c = _Collector(cfg, "kernel")
    mode = _mode(cfg, cfg.epsilon)
    c.add("integral_residual", kernel.integral_residual(mode), "<=", 1e-8,
          "kernel element solves the integral equations on [0, a) and (b, 1]")
    c.add("operator_residual", kernel.kernel_operator_residual(mode), "<=", 1e-7,
          "L h* = 0 at the selected speed")
    c.add("wall_values", abs(mode.h(0.0)) + abs(mode.h(1.0)), "<=", 1e-10, "h(0) = 0 = h(1)")
    I1, I2 = kernel.integrals(1, mode.epsilon, mode.mu_tilde_star, "quadrature", cfg.quad_tol)
    M = kernel.dispersion_matrix(1, mode.epsilon, I1, I2)
    null = np.linalg.norm(M @ np.array([mode.A, mode.B])) / np.linalg.norm(M)
    c.add("null_vector", null, "<=", 1e-9, "(A, B) spans the null space of the dispersion matrix")
    return c.items


def check_expansion(cfg: RunConfig) -> list:
    c = _Collector(cfg, "expansion")
    mus = [kernel.solve_mu_tilde(e, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol).mu_tilde
           for e in EXPANSION_SWEEP]
    target = 0.5 + kernel.solve_mu1()
    limit = kernel.expansion_limit(EXPANSION_SWEEP, mus)
    c.add("extrapolated_slope", abs(limit - target) / abs(target), "<=", 0.05,
          "(mu_tilde - 1/2)/eps tends to 1/2 + mu1")
    return c.items


def check_oracles(cfg: RunConfig) -> list:
    c = _Collector(cfg, "oracles")
    eps = cfg.epsilon
    m = _mode(cfg, eps).mu_tilde_star
    worst = 0.0
    for side in ("left", "right"):
        x = ode.half_grid(side, 400)
        for n in (1, 2, 3):
            f = ode.solve_mode_ode(side, n, eps, m)
            worst = max(worst, float(np.max(np.abs(f(x) - ode.shoot_mode_ode(side, n, eps, m, x)))))
    c.add("shooting", worst, "<=", 1e-8, "series solutions agree with direct integration")
    worst = 0.0
    for e in GAP_SWEEP:
        mt = kernel.solve_mu_tilde(e, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol).mu_tilde
        pair = kernel.mode_pair(1, e, mt)
        for side, f in (("left", pair.left), ("right", pair.right)):
            d = kernel.I_quadrature(side, f, pair.params, cfg.quad_tol) - kernel.I_standoff(side, f, pair.params)
            worst = max(worst, abs(d))
    c.add("pole_standoff", worst, "<=", 1e-7, "split quadrature matches the unsplit integral")
    worst = 0.0
    for e in GAP_SWEEP:
        mt = kernel.solve_mu_tilde(e, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol).mu_tilde
        for n in (1, 2, 3):
            worst = max(worst, abs(kernel.cross_check_jump(n, e, mt, cfg.quad_tol).diff))
    c.add("jump_identity", worst, "<=", 1e-8,
          "(I1 + I2)/C_n equals the derivative jump at 1/2 formula")
    return c.items


def _wronskian_drift(f: ode.ModeSolution, x) -> tuple[float, float]:
    w = ode.wronskian(f, f.g1, x)
    return float(np.max(np.abs(w - w[0]))), float(w[0])


def check_structure(cfg: RunConfig) -> list:
    c = _Collector(cfg, "structure")
    eps = cfg.epsilon
    m = _mode(cfg, eps).mu_tilde_star
    drift, unit = 0.0, 0.0
    for f0 in ode.solve_f0(1):
        x = ode.half_grid(f0.side, 512)
        x = x[x != 0.5]
        d, w0 = _wronskian_drift(f0, x)
        drift, unit = max(drift, d), max(unit, abs(w0 - 1.0))
    for side in ("left", "right"):
        f = ode.solve_mode_ode(side, 1, eps, m)
        drift = max(drift, _wronskian_drift(f, ode.half_grid(side, 512))[0])
    c.add("wronskian_drift", drift, "<=", 1e-9, "Wronskian of two solutions is constant")
    c.add("wronskian_unit", unit, "<=", 1e-9, "W[f0, g1] = 1")

    low = np.inf
    bound = np.inf
    for side in ("left", "right"):
        x = ode.half_grid(side, 512)[1:-1]
        for n in range(1, 6):
            f = ode.solve_mode_ode(side, n, eps, m)
            low = min(low, float(np.min(f(x))))
            bound = min(bound, spectra.positivity_bound(n, eps, f, 0.1).worst_ratio)
    c.add("positivity", low, ">", 0.0, "f_n > 0 inside each half-interval")
    c.add("sinh_lower_bound", bound, ">=", 1.0, "f_n >= 0.1 sinh(k d)/k after unit wall slope")
    mono = spectra.monotonicity_check(eps, m, range(1, 6))
    c.add("monotone_in_n", mono.worst_margin, ">", 0.0, "f_1 > f_2 > ... > f_5 inside each half")
    c.add("derivative_order", float(mono.derivative_ordered), ">=", 1.0, "f_1'(1/2-) < f_2'(1/2-)")
    rep = spectra.one_dim_check(eps, m, cfg.n_max, cfg.quad_tol)
    c.add("det_higher_modes", min(r.det for r in rep.records if r.n >= 2), ">", 0.0,
          "det_n > 0 for n >= 2, so the kernel is one-dimensional")
    c.add("universal_constant", spectra.universal_constant(), ">=", 0.13,
          "1 - log(4/3) - log(16/9) exceeds 0.13")
    xi = min(spectra.xi_inequality(v) for v in (0.5, 1.0, 2.0))
    c.add("xi_inequality", xi, ">", 0.0, "sinh(xi) dominates the convolution integral")
    mode = _mode(cfg, eps)
    c.add("operator_symmetry", kernel.operator_symmetry(mode.lambda_star, mode.profile), "<=", 1e-9,
          "<L h, g> = <h, L g> on the support")
    return c.items


def check_residual_scaling(cfg: RunConfig) -> list:
    c = _Collector(cfg, "residual_scaling")
    mode = _mode(cfg, cfg.epsilon)
    run = wave.residual_slope(mode, cfg.sigmas, cfg.nx, cfg.ny, tol=cfg.inversion_tol)
    c.add("slope", run.slope, ">=", 1.8, "residual vanishes quadratically in sigma at the selected speed")
    ctrl = wave.residual_slope(mode, cfg.sigmas, cfg.nx, cfg.ny, mode.lambda_star + 0.1, cfg.inversion_tol)
    c.add("control_slope", ctrl.slope, "<=", 1.2, "residual is only linear in sigma away from it")
    return c.items


def check_distance(cfg: RunConfig) -> list:
    c = _Collector(cfg, "distance")
    vals = []
    for eps, sigma in cfg.trend:
        fld = wave.assemble_wave_field(_mode(cfg, eps), sigma, cfg.nx, cfg.field_ny, cfg.inversion_tol)
        vals.append(wave.sobolev_distance(fld, cfg.gamma, cfg.slob_grid))
    c.add("trend", max(np.diff(vals)), "<", 0.0, "||omega + 2y||_{H^gamma} shrinks along the sequence")
    eps = cfg.trend[0][0]
    flat = wave.push_forward_vorticity(_mode(cfg, eps), 0.0, cfg.nx, cfg.field_ny, cfg.inversion_tol)
    c.add("l2_flat", abs(wave.l2_deviation(flat) - wave.l2_deviation_exact(eps)), "<=", 1e-6,
          "sigma = 0 deviation matches the closed form")
    return c.items


def check_limit(cfg: RunConfig) -> list:
    c = _Collector(cfg, "limit")
    mu1 = kernel.solve_mu1()
    c.add("mu1_residual", abs(kernel.mu1_equation(mu1)), "<=", 1e-12, "mu1 solves the limit equation")
    c.add("mu1_inside", 0.5 - abs(mu1), ">", 0.0, "mu1 lies in (-1/2, 1/2)")
    mus = [kernel.solve_mu_tilde(e, cfg.quad_tol, eps_max=cfg.eps_max, xtol=cfg.root_tol).mu_tilde
           for e in EXPANSION_SWEEP]
    for side in ("left", "right"):
        sups, ratios = [], []
        for e, mt in zip(EXPANSION_SWEEP, mus):
            dist = ode.difference_to_limit(e, ode.solve_mode_ode(side, 1, e, mt))
            sups.append(dist.sup)
            ratios.append(float(dist.ratio))
        c.add(f"sup_decreasing[{side}]", max(np.diff(sups)), "<", 0.0, "sup |f - f0| shrinks with eps")
        c.add(f"ratio_nonincreasing[{side}]", max(np.diff(ratios)), "<=", 0.0,
              "sup |f - f0| / (eps log(1/eps)) does not grow as eps decreases")
    gaps = [spectra.derivative_gap(e) for e in GAP_SWEEP]
    c.add("gap_left_negative", max(g.gap_left for g in gaps), "<", 0.0, "(f_1 - f_2)'(1/2-) < 0")
    c.add("gap_right_positive", min(g.gap_right for g in gaps), ">", 0.0, "(f_1 - f_2)'(1/2+) > 0")
    err = [abs(g.gap_left - g.limit_left) for g in gaps]
    c.add("gap_left_converges", max(np.diff(err)), "<", 0.0,
          "left gap approaches -3 (1-eps)^2 int f0 f0#")
    err = [abs(g.gap_right - g.limit_right) for g in gaps]
    c.add("gap_right_converges", max(np.diff(err)), "<", 0.0,
          "right gap approaches 3 (1-eps)^2 int f0 f0#")
    return c.items


GROUPS = {
    "identities": check_identities,
    "dispersion": check_dispersion,
    "kernel": check_kernel,
    "expansion": check_expansion,
    "oracles": check_oracles,
    "structure": check_structure,
    "residual_scaling": check_residual_scaling,
    "distance": check_distance,
    "limit": check_limit,
}


def run_suite(cfg: RunConfig | None = None, groups=None) -> VerificationReport:
    cfg = cfg or RunConfig()
    names = list(GROUPS) if groups is None else list(groups)
    unknown = [g for g in names if g not in GROUPS]
    if unknown:
        raise ConfigError(f"unknown check groups: {unknown}")
    checks = []
    for name in names:
        checks.extend(GROUPS[name](cfg))
    return VerificationReport(tuple(checks), tuple(names), cfg.to_dict())
