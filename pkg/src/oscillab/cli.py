"""Command-line experiment runner.

Subcommands mirror the library modules (law, modes, exact, direct, ym,
kinetic, cns) plus the declarative interface: `validate` checks a TOML
experiment file, `run` executes it into an output directory with CSV
artifacts and a manifest (written last), and `compare` diffs two runs.

Exit codes: 0 success, 1 numeric check failure, 2 configuration error.
The output root defaults to ./oscillab-out, overridable by --out or the
OSCILLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:            # python < 3.11
    import tomli as tomllib

from . import __version__
from . import experiments
from .artifacts import (RunManifest, read_kinetic_field_csv, write_csv,
                        write_kinetic_field_csv)
from .constitutive import (ConstitutiveLaw, analytic_cubic_law,
                           build_matched_gas_stress, build_matched_pressure,
                           build_matched_shear_stress, matching_residual)
from .effective_kinetic import (frozen_kinetics, generalized_kinetic_sign_test,
                                solve_effective, tartar_spread)
from .exact_solutions import (CnsShellFamily, EulerianShear1D,
                              LagrangianTwoPhase, TwoPhaseSpec, TwinningSpec,
                              rh_residual, twinning_check, weak_residual)
from .linear_modes import (ElasticTensorSet, LinearParams, acoustic_spectrum,
                           amplitude_roots_1d, fit_decay_rate,
                           isotropic_elasticity, mode_field, thermo_roots)
from .pde_direct import (diagnostics, solve_viscoelastic,
                         solve_viscous_scalar, two_phase_ic)
from .young_measure import (KineticField, cdf_distance, default_xi_grid,
                            empirical_cdf_field, moment_slice, two_point_cdf)
from .cns_kinetic import solve_H_transport_1d, two_phase_H

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2

RUN_KINDS = ("modes", "exact", "direct", "ym", "kinetic", "cns",
             "homogenize-compare")


class ConfigError(Exception):
    pass


def _load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc


def _out_root(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("OSCILLAB_OUT", "oscillab-out"))


def _build_law_from_table(table: dict) -> ConstitutiveLaw:
    kind = table.get("kind")
    if kind is None:
        raise ConfigError("law table needs a 'kind'")
    if kind == "file":
        path = table.get("path")
        if not path or not Path(path).exists():
            raise ConfigError(f"law file not found: {path}")
        return ConstitutiveLaw.from_dict(json.loads(Path(path).read_text()))
    if kind == "cubic":
        return analytic_cubic_law(float(table.get("shift", 0.0)))
    slope = float(table.get("branch_slope", 1.0))
    branch = lambda u: slope * np.asarray(u, dtype=float)
    a, b = table.get("a"), table.get("b")
    if a is None or b is None:
        raise ConfigError(f"law kind {kind!r} needs states 'a' and 'b'")
    knots = int(table.get("knots_per_branch", 64))
    try:
        if kind == "shear-matched":
            return build_matched_shear_stress(a, b, branch,
                                              knots_per_branch=knots)
        if kind == "gas-matched":
            return build_matched_gas_stress(a, b, branch,
                                            knots_per_branch=knots)
        if kind == "pressure-matched":
            d = table.get("d")
            if d is None:
                raise ConfigError("pressure law needs the dimension 'd'")
            return build_matched_pressure(a, b, int(d), branch,
                                          knots_per_branch=knots)
    except ValueError as exc:
        raise ConfigError(f"invalid law parameters: {exc}") from exc
    raise ConfigError(f"unknown law kind {kind!r}")


# -- quick subcommands --------------------------------------------------------


def cmd_law(args) -> int:
    if args.action == "build":
        table = {"kind": args.kind, "a": args.a, "b": args.b, "d": args.d,
                 "shift": args.shift, "branch_slope": args.branch_slope}
        law = _build_law_from_table({k: v for k, v in table.items()
                                     if v is not None})
        out = Path(args.out_file)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(law.to_dict(), indent=1))
        print(f"wrote {out}")
        return EXIT_OK
    law = ConstitutiveLaw.from_dict(json.loads(Path(args.law).read_text()))
    if law.match_spec is None:
        print("law carries no match_spec; nothing to check")
        return EXIT_OK
    res = matching_residual(law, grid_size=args.grid_size)
    print(f"matching residual: {res:.3e}")
    print(f"non-monotone: {law.is_nonmonotone()}")
    return EXIT_OK if res <= args.tol else EXIT_NUMERIC


def cmd_modes(args) -> int:
    out = _out_root(args)
    if args.action == "roots":
        ns = [float(s) for s in args.n.split(",")]
        rows = {"n": [], "root_index": [], "re": [], "im": [],
                "asymptotic": [], "abs_err": []}
        for n in ns:
            if args.kappa is not None:
                p = LinearParams(lam=args.lam, mu=args.mu, m=args.m or 0.0,
                                 kappa=args.kappa, n=int(n))
                roots = thermo_roots(p)
                asym = [-args.lam / args.mu] + [np.nan] * (len(roots) - 1)
            else:
                r = amplitude_roots_1d(args.lam, args.mu, n)
                roots = [r.rho_plus, r.rho_minus]
                asym = [r.asymptotic, np.nan]
            for i, (rt, az) in enumerate(zip(roots, asym)):
                rows["n"].append(n)
                rows["root_index"].append(i)
                rows["re"].append(np.real(rt))
                rows["im"].append(np.imag(rt))
                rows["asymptotic"].append(az)
                rows["abs_err"].append(abs(rt - az) if np.isfinite(az) else np.nan)
        path = write_csv(out / "mode_roots.csv", list(rows),
                         [np.array(v) for v in rows.values()])
        print(f"wrote {path}")
        return EXIT_OK
    if args.action == "spectrum":
        lame = [float(s) for s in args.lame.split(",")]
        nu = np.array([float(s) for s in args.nu.split(",")])
        nu = nu / np.linalg.norm(nu)
        d = len(nu)
        A = isotropic_elasticity(lame[0], lame[1], d)
        M = float(args.coupling) * np.eye(d)
        spec = acoustic_spectrum(ElasticTensorSet(A=A, M=M, nu=nu))
        print("acoustic eigenvalues:", spec.eigenvalues)
        print("rank-one convex:", spec.rank_one_convex,
              f"(min directional eigenvalue {spec.min_directional_eigenvalue:.6g} "
              f"over {spec.directions_sampled} directions)")
        print("modified eigenvalues:", spec.modified_eigenvalues)
        print("coupling per eigenpair:", spec.coupling)
        return EXIT_OK if spec.rank_one_convex else EXIT_NUMERIC
    # field
    p = LinearParams(lam=args.lam, mu=args.mu, m=args.m or 0.0,
                     kappa=args.kappa or 0.0, n=int(float(args.n)))
    t = np.linspace(0.0, args.T, args.nt)
    x = np.linspace(0.0, 2 * np.pi, args.nx, endpoint=False)
    sol = mode_field(p, t, x)
    rate = fit_decay_rate(t, sol.a)
    path = write_csv(_out_root(args) / "mode_amplitudes.csv",
                     ["t", "re_a", "im_a", "re_v", "im_v", "re_b", "im_b"],
                     [t, sol.a.real, sol.a.imag, sol.v.real, sol.v.imag,
                      sol.b.real, sol.b.imag])
    print(f"wrote {path}; fitted strain decay rate {rate:.8g} "
          f"(slow root {sol.roots[0].real:.8g})")
    return EXIT_OK


def _spec_from_table(t: dict) -> TwoPhaseSpec:
    try:
        return TwoPhaseSpec(a=t["a"], b=t["b"], theta=t["theta"],
                            n=int(t.get("n", 1)), d=int(t.get("d", 1)))
    except KeyError as exc:
        raise ConfigError(f"two-phase spec missing field {exc}") from exc


def cmd_exact(args) -> int:
    cfg = _load_config(args.spec)
    out = _out_root(args)
    t_grid = np.linspace(1.0, 2.0, int(cfg.get("t_points", 101)))
    fam_cfg = cfg.get("family", cfg)
    law = _build_law_from_table(cfg["law"]) if "law" in cfg else None

    if args.family == "twinning":
        tw = cfg["twinning"]
        d = int(tw.get("d", 2))
        quad_x = np.linspace(-16.0, 16.0, 129)
        base = ConstitutiveLaw("stress-shear", [quad_x], [quad_x])
        laws = [[base for _ in range(d)] for _ in range(d)]
        laws[0][0] = law
        spec = TwinningSpec(F0=np.zeros((d, d)),
                            a=np.array(tw["a"], dtype=float),
                            b=np.array(tw["b"], dtype=float),
                            nu=np.array(tw["nu"], dtype=float), laws=laws)
        rep = twinning_check(spec, t_grid)
        print(f"condition residual: {rep.condition_residual:.3e}; "
              f"rank-one convexity violated: {rep.roc_violated}; "
              f"witness: {rep.witness}")
        ok = rep.condition_residual <= 1e-10 and rep.roc_violated
        return EXIT_OK if (ok or not args.check) else EXIT_NUMERIC

    spec = _spec_from_table(fam_cfg)
    if args.family == "lagrangian":
        fam = LagrangianTwoPhase(spec, law)
    elif args.family == "euler1d":
        fam = EulerianShear1D(spec, law)
    else:
        fam = CnsShellFamily(spec, law, mu=cfg.get("mu", 1.0),
                             lam=cfg.get("lambda", 0.0))
    rh = rh_residual(fam, t_grid)
    write_csv(out / f"rh_{args.family}.csv",
              ["interface", "mass_flux_jump", "traction_jump", "velocity_jump"],
              [np.array([r.interface for r in rh]),
               np.array([r.mass_flux_jump for r in rh]),
               np.array([r.traction_jump for r in rh]),
               np.array([r.velocity_jump for r in rh])])
    wk = weak_residual(fam)
    print(f"max RH residual: {max(max(r.mass_flux_jump, r.traction_jump) for r in rh):.3e}; "
          f"weak residual: {wk:.3e}")
    if args.check:
        ok = all(max(r.mass_flux_jump, r.traction_jump) <= 1e-10 for r in rh) \
            and wk <= 1e-6
        return EXIT_OK if ok else EXIT_NUMERIC
    return EXIT_OK


def _write_shear_snapshots(out: Path, traj, manifest: RunManifest):
    nt, N = traj.u.shape
    tt = np.repeat(traj.times, N)
    xx = np.tile(traj.x_cells, nt)
    uu = traj.u.ravel()
    # node fields interpolated to cells for one flat table
    vv = 0.5 * (traj.v[:, 1:] + traj.v[:, :-1]).ravel()
    ss = 0.5 * (traj.S[:, 1:] + traj.S[:, :-1]).ravel()
    p = write_csv(out / "snapshots.csv", ["t", "x", "u", "v", "S"],
                  [tt, xx, uu, vv, ss])
    manifest.add_artifact(p)


def cmd_direct(args) -> int:
    cfg = _load_config(args.config)
    out = _out_root(args)
    manifest = RunManifest(config_path=args.config, out_dir=out)
    if args.system == "shear":
        law = _build_law_from_table(cfg["law"])
        spec = _spec_from_table(cfg["data"])
        amp = float(cfg["data"].get("v_amplitude", 0.0))
        ic = two_phase_ic(spec, v_profile=(lambda x: amp * np.sin(2 * np.pi * x))
                          if amp else None,
                          cells_per_wavelength=int(cfg.get("grid", {})
                                                   .get("cells_per_wavelength", 16)))
        run = cfg.get("run", {})
        traj = solve_viscoelastic(ic, law, T=float(run.get("T", 0.5)),
                                  cfl=float(run.get("cfl", 0.4)),
                                  n_outputs=int(run.get("outputs", 11)))
        _write_shear_snapshots(out, traj, manifest)
        rep = diagnostics(traj, law,
                          K_window=cfg.get("diagnostics", {}).get("K_window"))
        manifest.add_check("energy_increase", traj.max_energy_increase, 1e-8)
        manifest.add_check("stress_boundary",
                           float(np.max(np.abs(traj.S[:, [0, -1]]))), 1e-8)
        manifest.add_check("A_bound", rep.A_max, rep.A_bound)
        if rep.K_window is not None:
            manifest.add_check("K_window", float(rep.sup_u.max()), rep.K_window)
        p = write_csv(out / "energy.csv", ["t", "E"],
                      [traj.step_times, traj.energy])
        manifest.add_artifact(p)
    else:
        run = cfg.get("run", {})
        data = cfg["data"]
        N = int(data.get("cells", 512))
        x = (np.arange(N) + 0.5) / N
        if "n" in data:
            u0 = np.where((x * data["n"]) % 1.0 < data["theta"],
                          data["a"], data["b"])
        else:
            u0 = data["amplitude"] * np.sin(2 * np.pi * x)
        traj = solve_viscous_scalar(u0, lambda u: 0.5 * u * u, lambda u: u,
                                    eps=float(run.get("eps", 1e-3)),
                                    T=float(run.get("T", 0.5)),
                                    n_outputs=int(run.get("outputs", 11)))
        nt, N = traj.u.shape
        p = write_csv(out / "snapshots.csv", ["t", "x", "u"],
                      [np.repeat(traj.times, N), np.tile(traj.x_cells, nt),
                       traj.u.ravel()])
        manifest.add_artifact(p)
        manifest.add_check("mass_drift",
                           float(np.max(np.abs(traj.mass - traj.mass[0]))), 1e-12)
        manifest.add_check("max_principle", float(traj.sup_u.max()),
                           float(np.max(np.abs(u0))) + 1e-8)
    mpath = manifest.write()
    print(f"wrote {mpath}")
    return EXIT_OK if manifest.all_passed else EXIT_NUMERIC


def cmd_ym(args) -> int:
    out = _out_root(args)
    if args.action == "extract":
        cfg = _load_config(args.config)
        law = _build_law_from_table(cfg["law"])
        spec = _spec_from_table(cfg["data"])
        amp = float(cfg["data"].get("v_amplitude", 0.0))
        ic = two_phase_ic(spec, v_profile=(lambda x: amp * np.sin(2 * np.pi * x))
                          if amp else None)
        run = cfg.get("run", {})
        traj = solve_viscoelastic(ic, law, T=float(run.get("T", 0.5)),
                                  n_outputs=int(run.get("outputs", 11)))
        ymc = cfg.get("ym", {})
        xi = default_xi_grid(traj.u, int(ymc.get("xi_nodes", 512)))
        w = float(ymc.get("window_factor", 4.0)) / spec.n
        fld = empirical_cdf_field(traj.u, traj.x_cells, traj.times, w, xi)
        fld.validate()
        paths = write_kinetic_field_csv(out / "kinetic_field.csv",
                                        fld.times, fld.x, fld.xi, fld.F,
                                        {"provenance": fld.provenance})
        print(f"wrote {paths[0]}")
        return EXIT_OK
    if args.action == "moment":
        times, x, xi, F = read_kinetic_field_csv(args.field)
        m = moment_slice(F, xi, lambda z: z,
                         lambda z: np.ones_like(np.asarray(z, float)))
        nt, nx = m.shape
        p = write_csv(out / "moment.csv", ["t", "x", "mean"],
                      [np.repeat(times, nx), np.tile(x, nt), m.ravel()])
        print(f"wrote {p}")
        return EXIT_OK
    ta, xa, xia, Fa = read_kinetic_field_csv(args.field)
    tb, xb, xib, Fb = read_kinetic_field_csv(args.other)
    if Fa.shape != Fb.shape or not np.allclose(xia, xib):
        print("error: kinetic fields live on different grids", file=sys.stderr)
        return EXIT_CONFIG
    d = np.trapezoid(np.abs(Fa - Fb), xia, axis=-1)
    nt, nx = d.shape
    p = write_csv(out / "distance.csv", ["t", "x", "cdf_distance"],
                  [np.repeat(ta, nx), np.tile(xa, nt), d.ravel()])
    print(f"wrote {p}")
    return EXIT_OK


def cmd_kinetic(args) -> int:
    out = _out_root(args)
    cfg = _load_config(args.config)
    law = _build_law_from_table(cfg["law"]) if "law" in cfg else analytic_cubic_law()
    if args.action == "frozen":
        fz = cfg.get("frozen", {})
        xi = np.linspace(float(fz.get("xi_min", -1.5)),
                         float(fz.get("xi_max", 1.5)),
                         int(fz.get("xi_nodes", 513)))
        lo, hi = float(fz.get("support_lo", -0.5)), float(fz.get("support_hi", 0.5))
        F0 = np.clip((xi - lo) / (hi - lo), 0.0, 1.0)
        res = frozen_kinetics(F0, xi, law, s0=float(fz.get("s0", 0.0)),
                              T=float(fz.get("T", 20.0)))
        p1 = write_csv(out / "frozen_cdf.csv", ["xi", "F0", "F_T"],
                       [xi, res.F0, res.F_T])
        body = {"roots": res.report.roots.tolist(),
                "stable": res.report.stable.tolist(),
                "weights_predicted": res.weights_predicted.tolist(),
                "weights_measured": res.weights_measured.tolist()}
        (out / "weights.json").write_text(json.dumps(body, indent=1))
        p2 = write_csv(out / "equilibria.csv",
                       ["root", "stable", "sigma_prime", "s0"],
                       [res.report.roots, res.report.stable.astype(float),
                        law.derivative(res.report.roots),
                        np.full_like(res.report.roots, res.report.s0)])
        p3 = write_csv(out / "law_curve.csv", ["xi", "sigma"],
                       [xi, law(xi)])
        print(f"wrote {p1}, {p2}, {p3}, weights.json")
        return EXIT_OK
    if args.action == "effective":
        eff = cfg["effective"]
        xi = np.linspace(float(eff["xi_min"]), float(eff["xi_max"]),
                         int(eff.get("xi_nodes", 512)))
        x = np.linspace(0.0, 1.0, int(eff.get("x_nodes", 49)))
        data = cfg["data"]
        F0 = np.broadcast_to(two_point_cdf(data["theta"], data["a"], data["b"], xi),
                             (len(x), len(xi))).copy()
        amp = float(data.get("v_amplitude", 0.0))
        traj = solve_effective(F0, law, x, xi, T=float(eff.get("T", 0.5)),
                               dt=float(eff.get("dt", 2.5e-3)),
                               v0=amp * np.sin(2 * np.pi * x),
                               form=eff.get("form", "effs1"),
                               n_outputs=int(eff.get("outputs", 11)),
                               strang=bool(eff.get("strang", False)))
        paths = write_kinetic_field_csv(out / "effective_field.csv",
                                        traj.times, x, xi, traj.F,
                                        {"provenance": "kinetic-solver"})
        nt, nx = traj.ubar.shape
        p = write_csv(out / "moments.csv", ["t", "x", "ubar", "sigbar", "macro"],
                      [np.repeat(traj.times, nx), np.tile(x, nt),
                       traj.ubar.ravel(), traj.sigbar.ravel(),
                       traj.macro.ravel()])
        print(f"wrote {paths[0]}, {p}; zeroth drift {traj.zeroth_drift:.2e}")
        return EXIT_OK
    # signtest / tartar operate on an extracted field
    times, x, xi, F = read_kinetic_field_csv(cfg["field"]["path"])
    fld = KineticField(times, x, xi, F)
    if args.action == "signtest":
        vals = generalized_kinetic_sign_test(fld, wave_speed=lambda z: z)
        p = write_csv(out / "sign_test.csv", ["bump", "eta", "value"],
                      [np.repeat(np.arange(vals.shape[0]), vals.shape[1]),
                       np.tile(np.arange(vals.shape[1]), vals.shape[0]),
                       vals.ravel()])
        print(f"wrote {p}; max value {vals.max():.3e}")
        return EXIT_OK if vals.max() <= 1e-3 else EXIT_NUMERIC
    rep = tartar_spread(fld, wave_speed=lambda z: z)
    p = write_csv(out / "spread.csv", ["t", "max_spread"],
                  [fld.times, rep.max_per_time])
    print(f"wrote {p}")
    return EXIT_OK


def cmd_cns(args) -> int:
    out = _out_root(args)
    cfg = _load_config(args.config)
    data = cfg["data"]
    law = _build_law_from_table(cfg["law"])
    if args.action == "h-init":
        xi = np.linspace(0.0, float(data["b"]) * 1.25,
                         int(cfg.get("grid", {}).get("xi_nodes", 1025)))
        H = two_phase_H(data["theta"], data["a"], data["b"], xi)
        p = write_csv(out / "h_init.csv", ["xi", "H"], [xi, H])
        print(f"wrote {p}")
        return EXIT_OK
    if args.action == "h-transport":
        grid = cfg.get("grid", {})
        run = cfg.get("run", {})
        d = int(data.get("d", 1))
        lam2mu = float(cfg.get("lam2mu", 1.5))
        xi = np.linspace(0.0, float(data["b"]) * 1.25,
                         int(grid.get("xi_nodes", 1025)))
        y = np.linspace(0.2, 1.8, int(grid.get("y_nodes", 17)))
        H0 = np.broadcast_to(two_phase_H(data["theta"], data["a"], data["b"], xi),
                             (len(y), len(xi))).copy()
        a = float(data["a"])
        res = solve_H_transport_1d(
            H0, y, xi, u=lambda t, yy: yy / t, u_y=lambda t, yy: 1.0 / t,
            pressure=law, p_bar=lambda t, yy: law(a / t**d), lam2mu=lam2mu,
            t0=1.0, T=float(run.get("T", 2.0)), dt=float(run.get("dt", 0.05)),
            n_outputs=int(run.get("outputs", 6)))
        paths = write_kinetic_field_csv(out / "h_field.csv", res.times, y, xi,
                                        res.H, {"lam2mu": lam2mu})
        print(f"wrote {paths[0]}")
        return EXIT_OK
    # residual
    spec = _spec_from_table(data)
    fam = CnsShellFamily(spec, law, mu=float(cfg.get("mu", 0.5)),
                         lam=float(cfg.get("lambda", 0.5)))
    from .cns_kinetic import renormalized_residual
    rep = renormalized_residual(fam)
    p = write_csv(out / "cns_residuals.csv", ["pairing", "approx", "renorm"],
                  [np.arange(rep.approx.size),
                   rep.approx.ravel(), rep.renorm.ravel()])
    print(f"wrote {p}; max approx {rep.max_approx:.3e} renorm {rep.max_renorm:.3e}")
    return EXIT_OK if max(rep.max_approx, rep.max_renorm) <= 1e-4 else EXIT_NUMERIC


# -- declarative runner -------------------------------------------------------


_PIPELINES = {
    "modes": experiments.modes_asymptotics,
    "exact": experiments.exact_certification,
    "kinetic": experiments.kinetic_study,
    "cns": experiments.cns_residual_study,
    "homogenize-compare": experiments.homogenize_compare,
    "direct": experiments.direct_shear_study,
    "ym": experiments.ym_extraction_study,
}


def _validate_config(cfg: dict, path: str) -> list[str]:
    plan = []
    kind = cfg.get("kind")
    if kind not in RUN_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; "
                          f"expected one of {RUN_KINDS}")
    params = cfg.get("params", {})
    fn = _PIPELINES[kind]
    import inspect
    sig = inspect.signature(fn)
    has_var_kw = any(p.kind == inspect.Parameter.VAR_KEYWORD
                     for p in sig.parameters.values())
    for key in params:
        name = "n_list" if key == "n" and kind in ("homogenize-compare", "ym") \
            else key
        if name not in sig.parameters and not has_var_kw:
            raise ConfigError(f"parameter {key!r} not accepted by kind {kind!r}")
        val = params[key]
        if isinstance(val, list):
            if not val:
                raise ConfigError(f"sweep list {key!r} is empty")
            plan.append(f"sweep {key} = {val} expands to {len(val)} runs")
        if key in ("n_xi", "nx_eff", "n_outputs") and int(val) <= 0:
            raise ConfigError(f"grid size {key!r} must be positive")
    if "law" in cfg:
        _build_law_from_table(cfg["law"])
    plan.append(f"kind {kind} -> pipeline {fn.__name__}")
    return plan


def cmd_validate(args) -> int:
    try:
        cfg = _load_config(args.config)
        plan = _validate_config(cfg, args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for line in plan:
        print(line)
    print("ok")
    return EXIT_OK


def _kwargs_from_params(kind: str, params: dict) -> dict:
    kw = dict(params)
    if "n" in kw and kind in ("homogenize-compare", "ym"):
        kw["n_list"] = kw.pop("n")
    return kw


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
        _validate_config(cfg, args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    kind = cfg["kind"]
    out = _out_root(args) / cfg.get("name", kind)
    manifest = RunManifest(config_path=args.config, out_dir=out)
    kwargs = _kwargs_from_params(kind, cfg.get("params", {}))
    if "law" in cfg and kind == "homogenize-compare":
        kwargs["law"] = _build_law_from_table(cfg["law"])
    import inspect
    if args.jobs > 1 and "jobs" in inspect.signature(_PIPELINES[kind]).parameters:
        kwargs["jobs"] = args.jobs
    try:
        result = _PIPELINES[kind](**kwargs)
    except Exception as exc:
        manifest.write(partial=True)
        print(f"error: run aborted: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    scale = args.tol_scale
    for c in result.checks:
        if scale != 1.0:
            c.threshold = c.threshold * scale if c.comparison == "<=" \
                else c.threshold / scale
        manifest.checks.append(c)
    for name, (header, cols) in sorted(result.tables.items()):
        p = write_csv(out / f"{name}.csv", header, cols)
        manifest.add_artifact(p)
    for name, fld in sorted(result.fields.items()):
        paths = write_kinetic_field_csv(out / f"{name}.csv", fld.times, fld.x,
                                        fld.xi, fld.F)
        manifest.add_artifact(*paths)
    out.mkdir(parents=True, exist_ok=True)
    info_path = out / "info.json"
    info_path.write_text(json.dumps(result.info, indent=1, sort_keys=True,
                                    default=float))
    manifest.add_artifact(info_path)
    mpath = manifest.write()
    status = "PASS" if manifest.all_passed else "FAIL"
    for c in manifest.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g} "
              f"{c.comparison} {c.threshold:.6g}")
    print(f"{status}: manifest at {mpath}")
    return EXIT_OK if manifest.all_passed else EXIT_NUMERIC


def cmd_compare(args) -> int:
    out = _out_root(args)
    fa = Path(args.run_a)
    fb = Path(args.run_b)
    if fa.is_dir():
        cands = sorted(fa.glob("*.csv"))
        cands = [c for c in cands if c.with_suffix(".grid.json").exists()]
        if not cands:
            print("error: no kinetic field CSV in run A", file=sys.stderr)
            return EXIT_CONFIG
        fa = cands[0]
    if fb.is_dir():
        cands = sorted(fb.glob("*.csv"))
        cands = [c for c in cands if c.with_suffix(".grid.json").exists()]
        if not cands:
            print("error: no kinetic field CSV in run B", file=sys.stderr)
            return EXIT_CONFIG
        fb = cands[0]
    ta, xa, xia, Fa = read_kinetic_field_csv(fa)
    tb, xb, xib, Fb = read_kinetic_field_csv(fb)
    if Fa.shape != Fb.shape or not np.allclose(xia, xib):
        print("error: incompatible grids", file=sys.stderr)
        return EXIT_CONFIG
    if args.metric == "cdf_distance":
        d = np.trapezoid(np.abs(Fa - Fb), xia, axis=-1).mean(axis=1)
    else:
        ma = moment_slice(Fa, xia, lambda z: z,
                          lambda z: np.ones_like(np.asarray(z, float)))
        mb = moment_slice(Fb, xib, lambda z: z,
                          lambda z: np.ones_like(np.asarray(z, float)))
        d = np.mean(np.abs(ma - mb), axis=1)
    p = write_csv(out / "compare.csv", ["t", args.metric], [ta, d])
    print(f"wrote {p}; max {d.max():.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oscillab",
                                 description="oscillation laboratory for "
                                 "hyperbolic-parabolic systems")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--out", default=None, help="output directory root "
                    "(default $OSCILLAB_OUT or ./oscillab-out)")
    ap.add_argument("--jobs", type=int, default=1,
                    help="worker pool size for sweeps")
    ap.add_argument("--tol-scale", type=float, default=1.0, dest="tol_scale",
                    help="scale factor applied to check thresholds")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("law", help="build or check constitutive laws")
    p.add_argument("action", choices=["build", "check"])
    p.add_argument("--kind", default="shear-matched")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--shift", type=float)
    p.add_argument("--branch-slope", type=float, dest="branch_slope")
    p.add_argument("--out-file", default="law.json")
    p.add_argument("--law")
    p.add_argument("--grid-size", type=int, default=1001)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(fn=cmd_law)

    p = sub.add_parser("modes", help="linear mode roots, spectra, fields")
    p.add_argument("action", choices=["roots", "spectrum", "field"])
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--m", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--n", default="10,20,40,80")
    p.add_argument("--lame", default="1,1")
    p.add_argument("--coupling", type=float, default=2.0)
    p.add_argument("--nu", default="1,0")
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--nt", type=int, default=201)
    p.add_argument("--nx", type=int, default=64)
    p.set_defaults(fn=cmd_modes)

    p = sub.add_parser("exact", help="evaluate and certify explicit families")
    p.add_argument("family", choices=["lagrangian", "euler1d", "eulermd",
                                      "twinning"])
    p.add_argument("--spec", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(fn=cmd_exact)

    p = sub.add_parser("direct", help="direct fine-scale solvers")
    p.add_argument("system", choices=["shear", "scalar"])
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_direct)

    p = sub.add_parser("ym", help="Young-measure extraction and moments")
    p.add_argument("action", choices=["extract", "moment", "distance"])
    p.add_argument("--config")
    p.add_argument("--field")
    p.add_argument("--other")
    p.set_defaults(fn=cmd_ym)

    p = sub.add_parser("kinetic", help="effective kinetic solves and diagnostics")
    p.add_argument("action", choices=["effective", "frozen", "signtest",
                                      "tartar"])
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_kinetic)

    p = sub.add_parser("cns", help="compressible Navier-Stokes kinetic objects")
    p.add_argument("action", choices=["h-init", "h-transport", "residual"])
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_cns)

    p = sub.add_parser("validate", help="validate an experiment config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("run", help="run a declarative experiment config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="compare two runs")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--metric", choices=["cdf_distance", "moment-L1"],
                   default="cdf_distance")
    p.set_defaults(fn=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
