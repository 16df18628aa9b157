"""Scalar entanglement functionals of a Schmidt spectrum.

All logarithms are natural; entropy columns elsewhere are in nats.
Conventions for zero eigenvalues: 0*ln(0) = 0 for the von Neumann entropy
and the T_k log-moments; eigenvalues below 1e-300 are excluded from R0
(which would otherwise diverge) with the exclusion count reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .spectra import SchmidtSpectrum

_R0_FLOOR = 1e-300


@dataclass(frozen=True)
class EntropyRecord:
    """All entropy functionals of one spectrum used anywhere in the pipeline."""

    S: dict[int, float]        # k -> sum lam^k
    R: dict[float, float]      # alpha -> Renyi entropy (nats)
    R1: float                  # von Neumann entropy (nats)
    R0: float                  # -sum' ln lam over included eigenvalues
    T: dict[int, float]        # k -> sum lam^k (ln lam)^(k+1)
    n_excluded: int            # eigenvalues below the R0 floor


def moments(spec: SchmidtSpectrum, k_max: int) -> np.ndarray:
    """S_1..S_k_max with compensated summation."""
    if k_max < 2:
        raise InvalidArgumentError(f"k_max must be >= 2, got {k_max}")
    lam = spec.lambdas
    return np.array([math.fsum(lam**k) for k in range(1, k_max + 1)])


def renyi(spec: SchmidtSpectrum, alpha: float) -> float:
    """Renyi entropy ln(S_alpha)/(1-alpha); zero eigenvalues contribute nothing."""
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    if alpha == 1:
        raise InvalidArgumentError("alpha = 1 is the von Neumann entropy; use von_neumann()")
    lam = spec.lambdas[spec.lambdas > 0]
    s_alpha = math.fsum(lam**alpha)
    return math.log(s_alpha) / (1.0 - alpha)


def von_neumann(spec: SchmidtSpectrum) -> float:
    """R_1 = -sum lam*ln(lam) with the 0*ln(0) = 0 convention."""
    lam = spec.lambdas[spec.lambdas > 0]
    return -math.fsum(lam * np.log(lam))


def log_moments(spec: SchmidtSpectrum, k_max: int) -> tuple[float, np.ndarray, int]:
    """(R0, T_1..T_k_max, exclusion count) over eigenvalues above the floor."""
    lam = spec.lambdas
    included = lam[lam >= _R0_FLOOR]
    n_excluded = int(lam.size - included.size)
    if included.size == 0:
        raise DegenerateInputError("all eigenvalues fall below the R0 floor")
    logs = np.log(included)
    r0 = -math.fsum(logs)
    t = np.array([math.fsum(included**k * logs**(k + 1)) for k in range(1, k_max + 1)])
    return r0, t, n_excluded


def entropy_record(spec: SchmidtSpectrum, k_max: int = 3,
                   alphas: tuple[float, ...] = (2.0, 3.0)) -> EntropyRecord:
    """Assemble the full record for one spectrum."""
    s = moments(spec, k_max)
    r0, t, n_exc = log_moments(spec, k_max)
    return EntropyRecord(
        S={k + 1: float(s[k]) for k in range(k_max)},
        R={a: renyi(spec, a) for a in alphas},
        R1=von_neumann(spec),
        R0=r0,
        T={k + 1: float(t[k]) for k in range(k_max)},
        n_excluded=n_exc,
    )


def batch_entropies(lambdas: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized S2, R1, R2, R0 (and S3, T1) over an (n, N) spectrum stack.

    Used by the sweep driver where per-sample records would be wasteful.
    R0 applies the same exclusion floor as log_moments.
    """
    lam = np.asarray(lambdas, dtype=float)
    s2 = (lam**2).sum(axis=1)
    s3 = (lam**3).sum(axis=1)
    safe = np.where(lam > 0, lam, 1.0)
    logs = np.log(safe)
    r1 = -(lam * logs).sum(axis=1)
    included = lam >= _R0_FLOOR
    r0 = -np.where(included, np.log(np.where(included, lam, 1.0)), 0.0).sum(axis=1)
    t1 = (lam * logs**2).sum(axis=1)
    return {
        "S2": s2,
        "S3": s3,
        "R1": r1,
        "R2": -np.log(s2),
        "R0": r0,
        "T1": t1,
    }
