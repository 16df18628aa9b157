"""Multiparametric Gaussian state-matrix ensembles.

A pure bipartite state is encoded by its N x N_nu coefficient grid C (the
"state matrix").  Each entry is an independent Gaussian with its own variance
h[k, l] and mean b[k, l]; the structure of the variance grid selects the
family:

    BE      first column has unit variance, every later column 1/(1+mu)
    PE      variance decays as a power law across rows and columns,
            h[k, l] = 1/(1 + (k+1)*l/(a*b)) with l the zero-based column
            offset (l = 0 is the special first column, h = 1)
    EE      exponential decay, h[k, l] = exp(-(k+1)*l/(a*b))
    CUSTOM  caller-supplied h and b grids

The first column is the separable "anchor": as mu -> infinity (or a*b -> 0)
only that column survives and a typical state is a product state.  Raw
samples are not trace-normalized; normalization belongs to the spectra stage.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

FAMILIES = ("BE", "PE", "EE", "CUSTOM")


def _pe_variance(row: int, offset: int, a: float, b: float) -> float:
    # row is 1-based, offset 0-based; shared with the closed-form Y evaluator
    # so both code paths see bit-identical floats.
    return 1.0 / (1.0 + row * offset / (a * b))


def _ee_variance(row: int, offset: int, a: float, b: float) -> float:
    return float(np.exp(-row * offset / (a * b)))


def _be_variance(offset: int, mu: float) -> float:
    return 1.0 if offset == 0 else 1.0 / (1.0 + mu)


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameterization of one Gaussian state-matrix ensemble.

    h and b are N x N_nu grids of per-entry variances and means; beta is the
    Dyson index (1 real, 2 complex).  family/params record how the grids were
    built so the complexity module can use closed forms and exact counting.
    """

    N: int
    N_nu: int
    beta: int
    h: np.ndarray
    b: np.ndarray
    family: str = "CUSTOM"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1 or self.N_nu < 1:
            raise InvalidArgumentError(f"dimensions must be positive, got N={self.N}, N_nu={self.N_nu}")
        if self.beta not in (1, 2):
            raise InvalidArgumentError(f"beta must be 1 or 2, got {self.beta}")
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        h = np.asarray(self.h, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if h.shape != (self.N, self.N_nu) or b.shape != (self.N, self.N_nu):
            raise InvalidArgumentError(
                f"h/b grids must both be {self.N}x{self.N_nu}, got {h.shape} and {b.shape}"
            )
        if np.any(h < 0):
            raise InvalidArgumentError("h: all variances must be >= 0")
        h.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "b", b)

    @property
    def has_zero_variance_entries(self) -> bool:
        """True when some entries carry exactly zero variance (separable columns)."""
        return bool(np.any(self.h == 0.0))

    def to_config(self) -> dict:
        """Plain declarative description (family, params, dims, beta)."""
        return {
            "family": self.family,
            "params": dict(self.params),
            "N": self.N,
            "N_nu": self.N_nu,
            "beta": self.beta,
        }


@dataclass(frozen=True)
class StateMatrix:
    """One sampled coefficient grid, real (beta=1) or complex (beta=2)."""

    entries: np.ndarray
    spec: EnsembleSpec
    seed_path: str = ""

    def __post_init__(self):
        if self.entries.shape != (self.spec.N, self.spec.N_nu):
            raise InvalidArgumentError("sample shape does not match its spec")


def build_family(family: str, params: dict, N: int, N_nu: int, beta: int = 1) -> EnsembleSpec:
    """Construct the variance/mean grids for one ensemble family.

    params: {"mu": mu} for BE, {"a": a, "b": b} for PE and EE.
    Raises InvalidArgumentError naming the offending field.
    """
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    if N_nu < N:
        raise InvalidArgumentError(f"N_nu must be >= N, got N_nu={N_nu} < N={N}")
    if beta not in (1, 2):
        raise InvalidArgumentError(f"beta must be 1 or 2, got {beta}")

    h = np.empty((N, N_nu))
    if family == "BE":
        mu = params.get("mu")
        if mu is None or mu <= 0:
            raise InvalidArgumentError(f"mu must be > 0 for BE, got {mu}")
        for l in range(N_nu):
            h[:, l] = _be_variance(l, mu)
    elif family in ("PE", "EE"):
        a, b = params.get("a"), params.get("b")
        if a is None or a <= 0:
            raise InvalidArgumentError(f"a must be > 0 for {family}, got {a}")
        if b is None or b <= 0:
            raise InvalidArgumentError(f"b must be > 0 for {family}, got {b}")
        variance = _pe_variance if family == "PE" else _ee_variance
        for k in range(N):
            for l in range(N_nu):
                h[k, l] = variance(k + 1, l, a, b)
    else:
        raise InvalidArgumentError(f"build_family expects BE/PE/EE, got {family!r}")

    spec = EnsembleSpec(N=N, N_nu=N_nu, beta=beta, h=h, b=np.zeros((N, N_nu)),
                        family=family, params=dict(params))
    if spec.has_zero_variance_entries:
        warnings.warn(f"{family} spec has variance entries that underflow to exactly zero "
                      "(deep separable limit)", RuntimeWarning, stacklevel=2)
    return spec


def custom_spec(h: np.ndarray, b: np.ndarray | None = None, beta: int = 1,
                params: dict | None = None) -> EnsembleSpec:
    """Wrap raw variance/mean grids as a CUSTOM ensemble."""
    h = np.asarray(h, dtype=float)
    N, N_nu = h.shape
    if b is None:
        b = np.zeros_like(h)
    return EnsembleSpec(N=N, N_nu=N_nu, beta=beta, h=h, b=np.asarray(b, dtype=float),
                        family="CUSTOM", params=dict(params or {}))


def sample_state_matrix(spec: EnsembleSpec, rng: np.random.Generator,
                        seed_path: str = "") -> StateMatrix:
    """Draw one state matrix; each entry is Gaussian(b, h).

    For beta=2 the real and imaginary parts are independent Gaussians, each
    with variance h (one per Dyson component).
    """
    return StateMatrix(entries=sample_state_matrices(spec, 1, rng)[0], spec=spec,
                       seed_path=seed_path)


def sample_state_matrices(spec: EnsembleSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a stack of n state matrices, shape (n, N, N_nu)."""
    sigma = np.sqrt(spec.h)
    shape = (n, spec.N, spec.N_nu)
    real = spec.b + sigma * rng.standard_normal(shape)
    if spec.beta == 1:
        return real
    imag = spec.b + sigma * rng.standard_normal(shape)
    return real + 1j * imag


def channel_demo_sample(alpha: float, gamma_c: float, sigmas: tuple[float, float, float, float],
                        rng: np.random.Generator) -> tuple[float, float]:
    """One pass of a normalized qubit (alpha, gamma_c) through a random 2x2 channel.

    The channel entries a, b, c, d are independent zero-mean Gaussians with
    the given variances; the output amplitudes are alpha' = a*alpha + b*gamma
    and gamma' = c*alpha + d*gamma.
    """
    _check_channel_args(alpha, gamma_c, sigmas)
    sa, sb, sc, sd = sigmas
    a, b, c, d = rng.standard_normal(4) * np.array([sa, sb, sc, sd])
    return a * alpha + b * gamma_c, c * alpha + d * gamma_c


def channel_marginal_density(x: np.ndarray, alpha: float, gamma_c: float,
                             sigma_first: float, sigma_second: float) -> np.ndarray:
    """Exact Gaussian marginal of one output amplitude.

    A sum of two independent centered Gaussians is Gaussian, so alpha' has
    variance alpha^2*sigma_a^2 + gamma^2*sigma_b^2 (and likewise for gamma'
    with sigma_c, sigma_d).
    """
    var = alpha**2 * sigma_first**2 + gamma_c**2 * sigma_second**2
    if var <= 0:
        raise InvalidArgumentError("marginal variance must be positive")
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)


def dump_matrices(matrices: np.ndarray, path: str, fmt: str = "csv") -> None:
    """Audit dump of a sampled batch: flat CSV rows or raw binary (.npy)."""
    matrices = np.asarray(matrices)
    if fmt == "npy":
        np.save(path, matrices)
    elif fmt == "csv":
        flat = matrices.reshape(matrices.shape[0], -1)
        if np.iscomplexobj(flat):
            flat = np.column_stack([flat.real, flat.imag])
        np.savetxt(path, flat, delimiter=",")
    else:
        raise InvalidArgumentError(f"fmt must be 'csv' or 'npy', got {fmt!r}")


def _check_channel_args(alpha, gamma_c, sigmas):
    if abs(alpha**2 + gamma_c**2 - 1.0) > 1e-10:
        raise InvalidArgumentError(
            f"input state must be normalized, |alpha|^2+|gamma|^2 = {alpha**2 + gamma_c**2}"
        )
    if len(sigmas) != 4 or any(s < 0 for s in sigmas):
        raise InvalidArgumentError("sigmas must be four non-negative amplitudes")
