"""Command-line interface: sweep, complexity, theory-eval, fit, sde-check."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import statistics as efstats
from .complexity import complexity_closed_form, invert_to_parameter
from .ensembles import build_family, sample_state_matrices
from .experiments import PROFILES, SweepConfig, emit_outputs, run_sweep
from .spectra import schmidt_spectra_batch, sde_steady_state_sample
from .theory import (
    TheoryContext,
    moment_ode_s2,
    purity_density_grid,
    variance_ode_r1,
    variance_ode_s2,
    vn_density_grid,
)


def _cmd_sweep(args) -> int:
    if args.config:
        config = SweepConfig.from_file(args.config)
    else:
        config = SweepConfig.from_mapping({"seed": 1234, "profile": args.profile})
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    rs = run_sweep(config)
    formats = set(f for f in args.formats.split(",") if f)
    emit_outputs(rs, formats)
    for c in rs.cells:
        status = "ERROR " + c.error if c.error else "ok"
        print(f"{c.ensemble} Y={c.y_target:.3e} -> {status}")
    print(f"wrote outputs to {config.out_dir} ({rs.n_errors} cell errors)")
    return 1 if rs.n_errors else 0


def _parse_params(items: list[str]) -> dict:
    params = {}
    for item in items:
        key, val = item.split("=", 1)
        params[key.strip()] = float(val)
    return params


def _cmd_complexity(args) -> int:
    gamma, c0 = args.gamma, args.c0
    print("family,params,M,Y,Y_minus_Y0")
    if args.target_y is not None:
        params = invert_to_parameter(args.family, args.target_y, args.n, args.n_nu,
                                     gamma, c0, args.beta)
    else:
        params = _parse_params(args.param)
    point = complexity_closed_form(args.family, params, args.n, args.n_nu, gamma, c0,
                                   args.beta)
    ptxt = ";".join(f"{k}={v!r}" for k, v in sorted(params.items()))
    print(f"{args.family},{ptxt},{point.M},{point.Y!r},{(point.Y - point.Y0)!r}")
    return 0


def _cmd_theory_eval(args) -> int:
    n = args.n
    ctx = TheoryContext(
        N=n, N_nu=args.n_nu, beta=args.beta, gamma=args.gamma,
        omega=args.omega if args.omega else 4.0 * n**2,
        S3_mean=args.s3 if args.s3 is not None else 5.0 / n**2,
        T1_mean=args.t1 if args.t1 is not None else float(np.log(n)) ** 2,
        R0_mean=args.r0 if args.r0 is not None else n * float(np.log(n)),
        coeffs=np.array([float(c) for c in args.coeffs.split(",")]))
    if args.mode == "purity":
        grid = np.linspace(args.lo, args.hi, args.points)
        dens = purity_density_grid(ctx, grid, args.evolution)
        print("s2,density")
        for s, d in zip(grid, dens):
            print(f"{float(s)!r},{float(d)!r}")
    elif args.mode == "vn":
        t_half = ctx.t / 2.0
        grid = np.linspace(t_half + 1e-9, t_half + 3.0 / ctx.omega, args.points)
        dens = vn_density_grid(ctx, grid, args.evolution)
        print("r1,density")
        for r, d in zip(grid, dens):
            print(f"{float(r)!r},{float(d)!r}")
    else:
        y = np.linspace(0.0, args.evolution if args.evolution > 0 else 1.0, args.points)
        if args.mode == "ode-s2":
            mean = moment_ode_s2(y, args.init, b_coef=-args.beta * (args.n + args.n_nu - 1),
                                 eta=4.0 * ctx.omega)
            var = variance_ode_s2(y, 0.0, a_coef=4.0 * (args.s3 or 1.0 / args.n**2),
                                  eta=4.0 * ctx.omega)
            print("Y,mean_S2,var_S2")
            for yy, m, v in zip(y, mean, var):
                print(f"{float(yy)!r},{float(m)!r},{float(v)!r}")
        else:
            var = variance_ode_r1(y, args.init, a_coef=2.0 * ctx.omega)
            print("Y,var_R1")
            for yy, v in zip(y, var):
                print(f"{float(yy)!r},{float(v)!r}")
    return 0


def _cmd_fit(args) -> int:
    import csv as csvmod

    rows = []
    with open(args.csv) as fh:
        reader = csvmod.DictReader(fh)
        for row in reader:
            rows.append(row)
    cells: dict[tuple[str, str], dict[str, list[float]]] = {}
    for row in rows:
        key = (row["ensemble"], row["Y"])
        cell = cells.setdefault(key, {"S2": [], "R1": []})
        cell["S2"].append(float(row["S2"]))
        cell["R1"].append(float(row["R1"]))
    print("ensemble,Y,measure,family,loc,scale,shape1,shape2,rss,n")
    for (ens, y), data in sorted(cells.items()):
        for measure in ("S2", "R1"):
            samples = np.array(data[measure])
            dist = efstats.empirical_distribution(samples, measure=measure)
            fit = efstats.select_best_fit(dist)
            s1 = repr(fit.shape[0]) if len(fit.shape) > 0 else ""
            s2 = repr(fit.shape[1]) if len(fit.shape) > 1 else ""
            print(f"{ens},{y},{measure},{fit.family},{fit.loc!r},{fit.scale!r},"
                  f"{s1},{s2},{fit.rss!r},{samples.size}")
    return 0


def _cmd_sde_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    lam_sde = sde_steady_state_sample(args.n, args.n_nu, args.gamma, args.beta, rng,
                                      n_traj=args.traj, n_samples_per_traj=args.samples)
    lmax_sde = lam_sde[:, :, 0]
    spec = build_family("BE", {"mu": 1e-12}, args.n, args.n_nu, args.beta)
    mats = sample_state_matrices(spec, args.direct, rng)
    lmax_dir = schmidt_spectra_batch(mats)[:, 0]
    print("moment,sde,direct,combined_stderr,z")
    for k in (1, 2, 3):
        traj_means = (lmax_sde**k).mean(axis=1)
        m_sde = traj_means.mean()
        se_sde = traj_means.std(ddof=1) / np.sqrt(traj_means.size)
        m_dir = (lmax_dir**k).mean()
        se_dir = (lmax_dir**k).std(ddof=1) / np.sqrt(lmax_dir.size)
        se = float(np.hypot(se_sde, se_dir))
        z = (m_sde - m_dir) / se
        print(f"{k},{float(m_sde)!r},{float(m_dir)!r},{se!r},{z:+.2f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="entroflow",
                                     description="entanglement-entropy distribution lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a config-driven (ensemble, Y) sweep")
    p.add_argument("config", nargs="?", help="key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--formats", default="csv", help="comma list from: csv,svg")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("complexity", help="evaluate (or invert) the complexity parameter")
    p.add_argument("--family", choices=("BE", "PE", "EE"), required=True)
    p.add_argument("--param", action="append", default=[], help="e.g. --param mu=0.276")
    p.add_argument("--target-y", type=float, help="invert the family parameter instead")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-nu", type=int, required=True)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--c0", type=float, default=0.0)
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("theory-eval", help="tabulate closed-form densities and ODE laws")
    p.add_argument("--mode", choices=("purity", "vn", "ode-s2", "ode-r1"), required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--n-nu", type=int, default=8)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--s3", type=float, default=None)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--r0", type=float, default=None)
    p.add_argument("--coeffs", default="1.0", help="comma list of series coefficients")
    p.add_argument("--evolution", type=float, default=1.0, help="Lambda (or Y horizon)")
    p.add_argument("--lo", type=float, default=1e-4)
    p.add_argument("--hi", type=float, default=0.5)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--init", type=float, default=0.0)
    p.set_defaults(func=_cmd_theory_eval)

    p = sub.add_parser("fit", help="fit candidate families to a samples.csv")
    p.add_argument("csv")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("sde-check", help="compare SDE steady state against direct sampling")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--n-nu", type=int, default=8)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--traj", type=int, default=32)
    p.add_argument("--samples", type=int, default=40)
    p.add_argument("--direct", type=int, default=8000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_sde_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
