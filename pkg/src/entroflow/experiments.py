"""Config-driven sweeps over (ensemble, Y) cells with CSV/plot emission.

A sweep walks a family list and a target-Y grid; each cell inverts the family
parameter to hit its Y, samples the ensemble, computes Schmidt spectra and
entropies, optionally fits candidate distributions and tabulates theory
overlays, and records per-cell standard deviations.  All randomness flows
from one master seed through named sub-streams (one per ensemble x Y cell),
so any cell is reproducible in isolation and repeated runs are bitwise
identical.

Output schemas (CSV, one header line each):

    samples.csv  ensemble,Y,sample_id,S2,R1,R2,R0
    fits.csv     ensemble,N,Y,measure,family,loc,scale,shape1,shape2,rss,n
    curve.csv    ensemble,Y,sigma_S2,sigma_R1,sigma_over_max_S2,sigma_over_max_R1

plus a manifest.json recording the exact inputs and emitted files.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import statistics as efstats
from .complexity import complexity_from_spec, invert_to_parameter
from .ensembles import build_family, sample_state_matrices
from .entropies import batch_entropies
from .errors import InvalidArgumentError
from .spectra import schmidt_spectra_batch
from .theory import (
    TheoryContext,
    calibrate_purity_coeffs,
    purity_density_grid,
    purity_x_of_s2,
    vn_density_grid,
)

PROFILES = {
    "desk": {"N": 64, "N_nu": 64, "samples": 2000},
    "paper": {"N": 1024, "N_nu": 1024, "samples": 100_000},
}


def desk_y_grid(N: int, points: int = 12) -> tuple[float, ...]:
    """Default target-Y grid, scaled so the separable end sits at 1e-2/N.

    The shape crossover happens around Y ~ 1/N, so grid endpoints follow N:
    the lower end keeps the distance to the crossover (two decades below it)
    kept at full scale, the upper end is the ergodic regime Y ~ 1.
    """
    return tuple(float(y) for y in np.geomspace(1e-2 / N, 1.0, points))


@dataclass(frozen=True)
class SweepConfig:
    """Inputs of one sweep; seed is mandatory and fully determines the run."""

    seed: int
    ensembles: tuple[str, ...] = ("BE", "PE", "EE")
    y_grid: tuple[float, ...] | None = None
    N: int = 64
    N_nu: int = 64
    beta: int = 1
    gamma: float = 0.25
    samples: int = 2000
    omega: float | None = None
    out_dir: str = "sweep_out"
    fit: bool = True
    theory_overlay: bool = False
    sde_check: bool = False
    profile: str = "desk"

    def __post_init__(self):
        if self.seed is None:
            raise InvalidArgumentError("seed is mandatory")
        if self.y_grid is None:
            object.__setattr__(self, "y_grid", desk_y_grid(self.N))
        if list(self.y_grid) != sorted(self.y_grid):
            raise InvalidArgumentError("y_grid must be sorted ascending")
        if self.fit and self.samples < 500:
            raise InvalidArgumentError(
                f"fitting runs need samples >= 500, got {self.samples}"
            )
        if self.samples < 1:
            raise InvalidArgumentError("samples must be positive")

    @classmethod
    def from_mapping(cls, m: dict) -> "SweepConfig":
        kwargs = dict(m)
        profile = kwargs.get("profile", "desk")
        if profile not in PROFILES:
            raise InvalidArgumentError(f"unknown profile {profile!r}")
        for key, val in PROFILES[profile].items():
            kwargs.setdefault(key, val)
        if "ensembles" in kwargs and isinstance(kwargs["ensembles"], str):
            kwargs["ensembles"] = tuple(s.strip() for s in kwargs["ensembles"].split(","))
        if "y_grid" in kwargs and isinstance(kwargs["y_grid"], str):
            kwargs["y_grid"] = tuple(float(s) for s in kwargs["y_grid"].split(","))
        if "ensembles" in kwargs:
            kwargs["ensembles"] = tuple(kwargs["ensembles"])
        if "y_grid" in kwargs:
            kwargs["y_grid"] = tuple(float(y) for y in kwargs["y_grid"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "SweepConfig":
        """Parse the plain `key = value` config format (# starts a comment)."""
        raw: dict = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InvalidArgumentError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                raw[key] = val
        return cls.from_mapping(_coerce_config_types(raw))


_CONFIG_TYPES = {
    "seed": int, "N": int, "N_nu": int, "beta": int, "samples": int,
    "gamma": float, "omega": float,
    "fit": None, "theory_overlay": None, "sde_check": None,  # booleans
}


def _coerce_config_types(raw: dict) -> dict:
    out: dict = {}
    for key, val in raw.items():
        if key in _CONFIG_TYPES:
            caster = _CONFIG_TYPES[key]
            if caster is None:
                out[key] = str(val).strip().lower() in ("1", "true", "yes", "on")
            else:
                out[key] = caster(val)
        else:
            out[key] = val
    return out


@dataclass
class CellResult:
    """Everything computed for one (ensemble, Y) cell."""

    ensemble: str
    y_target: float
    y_real: float
    params: dict
    entropies: dict[str, np.ndarray] | None = None
    fits: dict[str, efstats.FitResult] = field(default_factory=dict)
    sigma: dict[str, float] = field(default_factory=dict)
    slow_means: dict[str, float] = field(default_factory=dict)
    overlay: dict[str, np.ndarray] = field(default_factory=dict)
    error: str | None = None


@dataclass
class ResultSet:
    """All cells of a sweep plus the manifest describing its inputs."""

    config: SweepConfig
    cells: list[CellResult]
    manifest: dict

    @property
    def n_errors(self) -> int:
        return sum(1 for c in self.cells if c.error is not None)


def cell_rng(seed: int, ens_index: int, y_index: int) -> np.random.Generator:
    """Named sub-stream for one (ensemble, Y) cell."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(ens_index, y_index))
    return np.random.Generator(np.random.PCG64(ss))


def run_cell(config: SweepConfig, ens: str, ens_index: int, y_index: int) -> CellResult:
    y_target = config.y_grid[y_index]
    params = invert_to_parameter(ens, y_target, config.N, config.N_nu, config.gamma,
                                 beta=config.beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        spec = build_family(ens, params, config.N, config.N_nu, config.beta)
    y_real = complexity_from_spec(spec, config.gamma).Y
    cell = CellResult(ensemble=ens, y_target=y_target, y_real=y_real, params=params)

    rng = cell_rng(config.seed, ens_index, y_index)
    mats = sample_state_matrices(spec, config.samples, rng)
    lams = schmidt_spectra_batch(mats)
    ents = batch_entropies(lams)
    cell.entropies = ents
    cell.sigma = {
        "S2": float(np.std(ents["S2"], ddof=1)),
        "R1": float(np.std(ents["R1"], ddof=1)),
    }
    cell.slow_means = {
        "S3": float(np.mean(ents["S3"])),
        "T1": float(np.mean(ents["T1"])),
        "R0": float(np.mean(ents["R0"])),
        "S2": float(np.mean(ents["S2"])),
        "R1": float(np.mean(ents["R1"])),
    }
    if config.fit:
        for measure in ("S2", "R1"):
            dist = efstats.empirical_distribution(ents[measure], measure=measure)
            cell.fits[measure] = efstats.select_best_fit(dist)
    return cell


def run_sweep(config: SweepConfig) -> ResultSet:
    """Execute every (ensemble, Y) cell; failures become per-cell error records."""
    cells: list[CellResult] = []
    for ei, ens in enumerate(config.ensembles):
        for yi in range(len(config.y_grid)):
            try:
                cell = run_cell(config, ens, ei, yi)
            except Exception as exc:
                cell = CellResult(ensemble=ens, y_target=config.y_grid[yi],
                                  y_real=math.nan, params={},
                                  error=f"{type(exc).__name__}: {exc}")
            cells.append(cell)
    if config.theory_overlay:
        _attach_overlays(config, cells)
    manifest = _build_manifest(config)
    return ResultSet(config=config, cells=cells, manifest=manifest)


def _overlay_omega(config: SweepConfig) -> float:
    # small filter width keeps the eigenmode series numerically light; the
    # overlay compares centered shapes, which do not depend on the absolute
    # x-scale choice
    return 0.5 * config.beta * config.N * config.N_nu + 16.0


def _attach_overlays(config: SweepConfig, cells: list[CellResult]) -> None:
    omega = config.omega if config.omega is not None else _overlay_omega(config)
    by_ens: dict[str, list[CellResult]] = {}
    for c in cells:
        if c.error is None:
            by_ens.setdefault(c.ensemble, []).append(c)
    for ens, group in by_ens.items():
        group.sort(key=lambda c: c.y_real)
        base = group[0]
        try:
            ctx0 = TheoryContext(N=config.N, N_nu=config.N_nu, beta=config.beta,
                                 gamma=config.gamma, omega=omega,
                                 S3_mean=base.slow_means["S3"],
                                 T1_mean=base.slow_means["T1"],
                                 R0_mean=base.slow_means["R0"])
            x0 = np.asarray(purity_x_of_s2(ctx0, base.entropies["S2"]))
            hist, edges = np.histogram(x0, bins=48, density=True)
            centers = 0.5 * (edges[:-1] + edges[1:])
            ctx = calibrate_purity_coeffs(ctx0, centers, hist, m_max=8)
        except Exception as exc:
            base.error = f"overlay calibration failed: {type(exc).__name__}: {exc}"
            continue
        for c in group:
            lam = ctx.d0 * max(c.y_real - base.y_real, 0.0)
            s2_lo = max(1e-9, base.slow_means["S2"] * 1e-4)
            s2_grid = np.linspace(s2_lo, float(np.quantile(base.entropies["S2"], 0.999)), 160)
            try:
                dens = purity_density_grid(ctx, s2_grid, lam)
                mean_theory = np.trapezoid(dens * s2_grid, s2_grid)
                c.overlay["s2_offset"] = s2_grid - mean_theory
                c.overlay["s2_density"] = dens
                t_half = ctx.t / 2.0
                r1_grid = np.linspace(t_half + 1e-9, t_half + 3.0 / omega, 120)
                vals = vn_density_grid(ctx.with_coeffs(np.array([1.0])), r1_grid,
                                       omega**2 * max(c.y_real - base.y_real, 0.0))
                c.overlay["r1_grid"] = r1_grid
                c.overlay["r1_density"] = vals
            except Exception as exc:
                c.error = f"overlay failed: {type(exc).__name__}: {exc}"


def _build_manifest(config: SweepConfig) -> dict:
    cfg = asdict(config)
    canonical = json.dumps(cfg, sort_keys=True)
    return {
        "config": cfg,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "files": [],
    }


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def emit_outputs(rs: ResultSet, formats: set[str] = frozenset({"csv"})) -> dict:
    """Write CSVs (and SVG plots) under the config's out_dir; returns the manifest."""
    out = rs.config.out_dir
    os.makedirs(out, exist_ok=True)
    files: list[str] = []

    if "csv" in formats:
        files += _emit_csvs(rs, out)
    if "svg" in formats:
        files += _emit_plots(rs, out)

    rs.manifest["files"] = sorted(files)
    manifest_path = os.path.join(out, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(rs.manifest, fh, indent=2, sort_keys=True)
    return rs.manifest


def _emit_csvs(rs: ResultSet, out: str) -> list[str]:
    files = []

    path = os.path.join(out, "samples.csv")
    with open(path, "w") as fh:
        fh.write("ensemble,Y,sample_id,S2,R1,R2,R0\n")
        for c in rs.cells:
            if c.error is not None or c.entropies is None:
                continue
            e = c.entropies
            for i in range(e["S2"].size):
                fh.write(f"{c.ensemble},{_fmt(c.y_real)},{i},{_fmt(e['S2'][i])},"
                         f"{_fmt(e['R1'][i])},{_fmt(e['R2'][i])},{_fmt(e['R0'][i])}\n")
    files.append("samples.csv")

    if any(c.fits for c in rs.cells):
        path = os.path.join(out, "fits.csv")
        with open(path, "w") as fh:
            fh.write("ensemble,N,Y,measure,family,loc,scale,shape1,shape2,rss,n\n")
            for c in rs.cells:
                for measure, fit in sorted(c.fits.items()):
                    s1 = _fmt(fit.shape[0]) if len(fit.shape) > 0 else ""
                    s2 = _fmt(fit.shape[1]) if len(fit.shape) > 1 else ""
                    fh.write(f"{c.ensemble},{rs.config.N},{_fmt(c.y_real)},{measure},"
                             f"{fit.family},{_fmt(fit.loc)},{_fmt(fit.scale)},{s1},{s2},"
                             f"{_fmt(fit.rss)},{rs.config.samples}\n")
        files.append("fits.csv")

    path = os.path.join(out, "curve.csv")
    by_ens: dict[str, list[CellResult]] = {}
    for c in rs.cells:
        if c.error is None:
            by_ens.setdefault(c.ensemble, []).append(c)
    with open(path, "w") as fh:
        fh.write("ensemble,Y,sigma_S2,sigma_R1,sigma_over_max_S2,sigma_over_max_R1\n")
        for ens in rs.config.ensembles:
            group = sorted(by_ens.get(ens, []), key=lambda c: c.y_real)
            if not group:
                continue
            max_s2 = max(c.sigma["S2"] for c in group)
            max_r1 = max(c.sigma["R1"] for c in group)
            for c in group:
                fh.write(f"{ens},{_fmt(c.y_real)},{_fmt(c.sigma['S2'])},{_fmt(c.sigma['R1'])},"
                         f"{_fmt(c.sigma['S2'] / max_s2)},{_fmt(c.sigma['R1'] / max_r1)}\n")
    files.append("curve.csv")

    for c in rs.cells:
        if c.overlay and "s2_density" in c.overlay:
            name = f"overlay_{c.ensemble}_{_fmt(c.y_target)}.csv"
            with open(os.path.join(out, name), "w") as fh:
                fh.write("s2_offset,s2_density\n")
                for off, dv in zip(c.overlay["s2_offset"], c.overlay["s2_density"]):
                    fh.write(f"{_fmt(off)},{_fmt(dv)}\n")
            files.append(name)

    if rs.n_errors:
        path = os.path.join(out, "errors.csv")
        with open(path, "w") as fh:
            fh.write("ensemble,Y,error\n")
            for c in rs.cells:
                if c.error is not None:
                    fh.write(f"{c.ensemble},{_fmt(c.y_target)},\"{c.error}\"\n")
        files.append("errors.csv")
    return files


def _emit_plots(rs: ResultSet, out: str) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    files = []
    for c in rs.cells:
        if c.error is not None or not c.fits:
            continue
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
        for ax, measure in zip(axes, ("S2", "R1")):
            data = c.entropies[measure]
            fit = c.fits[measure]
            centered = data - data.mean()
            ax.hist(centered, bins=48, density=True, alpha=0.45, label="samples")
            grid = np.linspace(data.min(), data.max(), 300)
            ax.plot(grid - data.mean(), fit.pdf(grid), lw=1.3,
                    label=f"{fit.family} (rss={fit.rss:.3g})")
            ax.set_yscale("symlog", linthresh=1e-3)
            ax.set_xlabel(f"{measure} - mean")
            ax.legend(fontsize=7, frameon=False)
        fig.suptitle(f"{c.ensemble}  Y={c.y_real:.3g}", fontsize=9)
        fig.tight_layout()
        name = f"dist_{c.ensemble}_{c.y_target:.3e}.svg"
        fig.savefig(os.path.join(out, name))
        plt.close(fig)
        files.append(name)

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    by_ens: dict[str, list[CellResult]] = {}
    for c in rs.cells:
        if c.error is None:
            by_ens.setdefault(c.ensemble, []).append(c)
    for ens, group in sorted(by_ens.items()):
        group = sorted(group, key=lambda c: c.y_real)
        ys = [c.y_real for c in group]
        for ax, measure in zip(axes, ("S2", "R1")):
            sig = np.array([c.sigma[measure] for c in group])
            ax.plot(ys, sig / sig.max(), marker="o", ms=3, lw=1, label=ens)
            ax.set_xscale("log")
            ax.set_xlabel("Y")
            ax.set_ylabel(f"sigma({measure}) / sigma_max")
    for ax in axes:
        ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(os.path.join(out, "sigma_curves.svg"))
    plt.close(fig)
    files.append("sigma_curves.svg")
    return files
