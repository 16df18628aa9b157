"""Schmidt spectra of state matrices and their stochastic evolution.

The reduced density matrix of a bipartite pure state with coefficient grid C
is rho_A = C C^dag / Tr(C C^dag).  Its eigenvalues (the Schmidt spectrum) are
the squared singular values of C, normalized to unit sum; we always go
through the SVD and never form C C^dag.

sde_evolve integrates the Ito process implied by the spectrum's diffusion
equation,

    d lam_n = 4 [ sum_{m != n} beta*lam_n/(lam_n - lam_m)
                  + beta*nu - 2*gamma*lam_n ] dY + sqrt(8*lam_n) dW_n,

with nu = (N_nu - N + 1)/2, projecting every step back onto the simplex
{lam >= 0, sum lam = 1}.  It is the package's independent route to the
spectral statistics otherwise obtained by direct ensemble sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensembles import StateMatrix
from .errors import DegenerateInputError, IntegrationFailureError, InvalidArgumentError

_TRACE_TOL = 1e-12
_GAP_EPS = 1e-10  # pairwise 1/(lam_n - lam_m) clipped at magnitude 1/_GAP_EPS
_MAX_RESAMPLES = 10


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Sorted, unit-trace eigenvalues of the reduced density matrix."""

    lambdas: np.ndarray
    N: int
    nu: float

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size != self.N:
            raise InvalidArgumentError(f"expected {self.N} eigenvalues, got shape {lam.shape}")
        if np.any(lam < 0):
            raise InvalidArgumentError("Schmidt eigenvalues must be non-negative")
        if abs(lam.sum() - 1.0) > _TRACE_TOL:
            raise InvalidArgumentError(f"trace constraint violated: sum = {lam.sum()!r}")
        if np.any(np.diff(lam) > 0):
            raise InvalidArgumentError("eigenvalues must be sorted descending")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)


@dataclass
class SpectrumTrajectory:
    """Recorded states of one SDE realization plus integrator counters."""

    times: np.ndarray
    states: list[SchmidtSpectrum]
    step_stats: dict = field(default_factory=dict)


def _nu_of(N: int, N_nu: int) -> float:
    return (N_nu - N + 1) / 2.0


def schmidt_spectrum(C: StateMatrix | np.ndarray, N_nu: int | None = None) -> SchmidtSpectrum:
    """Normalized squared singular values of one state matrix, sorted descending."""
    if isinstance(C, StateMatrix):
        entries, N_nu = C.entries, C.spec.N_nu
    else:
        entries = np.asarray(C)
        if N_nu is None:
            N_nu = entries.shape[1]
    if not np.any(entries):
        raise DegenerateInputError("state matrix is identically zero")
    s = np.linalg.svd(entries, compute_uv=False)
    lam = s**2
    lam /= lam.sum()
    lam = np.sort(lam)[::-1].copy()
    N = entries.shape[0]
    # pad with exact zeros when rank-deficient SVD returns fewer values
    if lam.size < N:
        lam = np.concatenate([lam, np.zeros(N - lam.size)])
    return SchmidtSpectrum(lambdas=lam, N=N, nu=_nu_of(N, N_nu))


def schmidt_spectra_batch(matrices: np.ndarray, N_nu: int | None = None) -> np.ndarray:
    """Spectra of a (n, N, N_nu) stack, returned as an (n, N) array sorted descending."""
    matrices = np.asarray(matrices)
    norms = np.abs(matrices).sum(axis=(1, 2))
    if np.any(norms == 0):
        raise DegenerateInputError("batch contains an identically zero state matrix")
    s = np.linalg.svd(matrices, compute_uv=False)
    lam = s**2
    lam /= lam.sum(axis=1, keepdims=True)
    return np.sort(lam, axis=1)[:, ::-1]


def _drift(lam: np.ndarray, beta: int, nu: float, gamma: float) -> np.ndarray:
    """Drift field on a (batch, N) stack of spectra, with clipped pair terms."""
    diff = lam[:, :, None] - lam[:, None, :]
    sign = np.sign(diff)
    inv = sign / np.maximum(np.abs(diff), _GAP_EPS)  # diagonal: sign 0 -> term 0
    repulsion = lam * inv.sum(axis=2)
    return 4.0 * (beta * repulsion + beta * nu - 2.0 * gamma * lam)


def _evolve_batch(lam: np.ndarray, Y_span: tuple[float, float], gamma: float, beta: int,
                  nu: float, dY: float, rng: np.random.Generator,
                  record_times: np.ndarray | None = None):
    """Euler-Maruyama on a (batch, N) stack with per-step simplex projection.

    Returns (final state, recorded snapshots, stats).  A step that would push
    an eigenvalue negative is re-drawn up to _MAX_RESAMPLES times, then that
    row falls back to halved sub-steps.
    """
    lam = np.array(lam, dtype=float)
    y0, y1 = Y_span
    if dY <= 0 or y1 <= y0:
        raise InvalidArgumentError("need dY > 0 and Y_end > Y_start")
    n_steps = max(1, int(round((y1 - y0) / dY)))
    dY = (y1 - y0) / n_steps
    stats = {"steps": 0, "resampled": 0, "subdivided": 0}
    snapshots = []
    record_times = np.asarray(record_times) if record_times is not None else np.empty(0)
    next_rec = 0
    y = y0

    def _substep(cur: np.ndarray, h: float) -> np.ndarray:
        """One Euler step on a row subset; re-draws noise per offending row."""
        drift_term = cur + _drift(cur, beta, nu, gamma) * h
        sigma = np.sqrt(8.0 * np.maximum(cur, 0.0) * h)
        new = drift_term + sigma * rng.standard_normal(cur.shape)
        bad = np.any(new < 0.0, axis=1)
        tries = 0
        while np.any(bad) and tries < _MAX_RESAMPLES:
            idx = np.nonzero(bad)[0]
            stats["resampled"] += idx.size
            new[idx] = drift_term[idx] + sigma[idx] * rng.standard_normal((idx.size, cur.shape[1]))
            bad = np.any(new < 0.0, axis=1)
            tries += 1
        if np.any(bad):
            # local step shrink for the stubborn rows: two half steps
            idx = np.nonzero(bad)[0]
            stats["subdivided"] += idx.size
            if h > dY / 8.0:
                mid = _substep(cur[idx], h / 2.0)
                mid /= mid.sum(axis=1, keepdims=True)
                new[idx] = _substep(mid, h / 2.0)
            else:
                new[idx] = np.maximum(drift_term[idx], 0.0)
        return new

    for k in range(n_steps):
        new = _substep(lam, dY)
        new /= new.sum(axis=1, keepdims=True)
        lam = new
        y = y0 + (k + 1) * dY
        stats["steps"] += 1
        while next_rec < record_times.size and y >= record_times[next_rec] - 1e-12:
            snapshots.append((record_times[next_rec], lam.copy()))
            next_rec += 1

    if stats["resampled"] > 0.5 * stats["steps"] * lam.shape[0]:
        raise IntegrationFailureError(
            f"rejection rate {stats['resampled']}/{stats['steps']} exceeds 50%; reduce dY"
        )
    return lam, snapshots, stats


def default_step(N: int) -> float:
    """Default integrator step, 1e-4 / N^2."""
    return 1e-4 / N**2


def trajectory_to_csv(traj: "SpectrumTrajectory", path: str) -> None:
    """Dump one trajectory as rows of (Y, lam_1..lam_N)."""
    n = traj.states[0].N if traj.states else 0
    with open(path, "w") as fh:
        fh.write("Y," + ",".join(f"lam_{i + 1}" for i in range(n)) + "\n")
        for t, st in zip(traj.times, traj.states):
            fh.write(f"{float(t)!r}," + ",".join(repr(float(v)) for v in st.lambdas) + "\n")


def spectra_to_csv(lambdas: np.ndarray, path: str) -> None:
    """Dump a (n, N) batch of spectra, one sample per row."""
    lambdas = np.asarray(lambdas)
    with open(path, "w") as fh:
        fh.write(",".join(f"lam_{i + 1}" for i in range(lambdas.shape[1])) + "\n")
        for row in lambdas:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def sde_evolve(initial: SchmidtSpectrum, Y_span: tuple[float, float], gamma: float,
               beta: int, step: float | None = None, rng: np.random.Generator | None = None,
               n_records: int = 50) -> SpectrumTrajectory:
    """Evolve one spectrum over Y_span; records n_records intermediate states."""
    if rng is None:
        rng = np.random.default_rng()
    if step is None:
        step = default_step(initial.N)
    y0, y1 = Y_span
    record_times = np.linspace(y0, y1, n_records + 1)[1:]
    lam0 = initial.lambdas[None, :]
    if initial.N == 1:
        # trace constraint pins the single eigenvalue
        states = [SchmidtSpectrum(lambdas=np.array([1.0]), N=1, nu=initial.nu)
                  for _ in record_times]
        return SpectrumTrajectory(times=record_times, states=states,
                                  step_stats={"steps": 0, "resampled": 0, "subdivided": 0})
    _, snapshots, stats = _evolve_batch(lam0, Y_span, gamma, beta, initial.nu, step, rng,
                                        record_times)
    times = np.array([t for t, _ in snapshots])
    states = [
        SchmidtSpectrum(lambdas=np.sort(row[0])[::-1].copy(), N=initial.N, nu=initial.nu)
        for _, row in snapshots
    ]
    return SpectrumTrajectory(times=times, states=states, step_stats=stats)


def sde_steady_state_sample(N: int, N_nu: int, gamma: float, beta: int,
                            rng: np.random.Generator, n_traj: int = 64,
                            burn_in: float = 0.75, sample_interval: float = 2e-3,
                            n_samples_per_traj: int = 100,
                            step: float | None = None) -> np.ndarray:
    """Steady-state spectra harvested from a batch of independent trajectories.

    Returns an array of shape (n_traj, n_samples_per_traj, N), sorted
    descending along the last axis.  Trajectories start from the uniform
    spectrum and are thinned every sample_interval in Y after burn_in.
    """
    if step is None:
        step = default_step(N)
    nu = _nu_of(N, N_nu)
    lam = np.full((n_traj, N), 1.0 / N)
    lam, _, _ = _evolve_batch(lam, (0.0, burn_in), gamma, beta, nu, step, rng)
    out = np.empty((n_traj, n_samples_per_traj, N))
    for j in range(n_samples_per_traj):
        lam, _, _ = _evolve_batch(lam, (0.0, sample_interval), gamma, beta, nu, step, rng)
        out[:, j, :] = np.sort(lam, axis=1)[:, ::-1]
    return out
