"""Complexity parameter Y of a Gaussian state-matrix ensemble.

Y collapses every ensemble parameter (all entry variances and means) into one
scalar that acts as the pseudo-time of the Schmidt-spectrum diffusion:

    Y = -(1/(2*M*gamma)) * [ sum log|1 - 2*gamma*h| + sum log|b|^2 ] + c0

summed over the mathematically nonzero variances h and nonzero means b, with
M their total count (each Dyson component counts once, so M = beta*N*N_nu
for an all-variance, zero-mean grid).

Convention: entries with exactly unit variance (the fixed first column of
every family) contribute a parameter-independent constant; we absorb it into
c0 and leave it out of the log-sum, which makes the general evaluator agree
bit-for-bit with the family closed forms and keeps c0 = 0 matching the
separable initial condition (mu -> infinity gives Y -> c0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ensembles import EnsembleSpec, _be_variance, _ee_variance, _pe_variance
from .errors import InvalidArgumentError, RangeError, SingularParameterError

_REL_TOL = 1e-8  # inversion target accuracy on Y


@dataclass(frozen=True)
class ComplexityPoint:
    """One evaluated complexity value with its bookkeeping."""

    Y: float
    Y0: float
    gamma: float
    M: int
    c0: float


def _log_factor(h: float, gamma: float) -> float:
    """log|1 - 2*gamma*h|, accurate for small 2*gamma*h via log1p."""
    arg = -2.0 * gamma * h
    if 1.0 + arg == 0.0:
        raise SingularParameterError(f"variance h = {h} sits exactly at 1/(2*gamma)")
    if arg > -1.0:
        return math.log1p(arg)
    return math.log(abs(1.0 + arg))


def complexity_from_spec(spec: EnsembleSpec, gamma: float, c0: float = 0.0) -> ComplexityPoint:
    """Evaluate Y directly from the stored variance/mean grids.

    For family-built specs every entry is mathematically nonzero, so
    M = beta*N*N_nu even when deep-separable variances underflow to zero
    floats (their log factor is exactly 0 either way); CUSTOM specs count
    the entries actually present.
    """
    if gamma <= 0:
        raise InvalidArgumentError(f"gamma must be > 0, got {gamma}")
    h = spec.h
    b = spec.b
    terms = []
    n_h = 0
    for hv in h.ravel():
        if spec.family == "CUSTOM" and hv == 0.0:
            continue
        n_h += 1
        if hv == 1.0 or hv == 0.0:
            continue  # unit variance folds into c0; underflowed h contributes 0
        terms.append(_log_factor(float(hv), gamma))
    if spec.family != "CUSTOM":
        n_h = spec.N * spec.N_nu
    n_b = 0
    for bv in b.ravel():
        if bv != 0.0:
            n_b += 1
            terms.append(2.0 * math.log(abs(float(bv))))
    M = spec.beta * (n_h + n_b)
    if M == 0:
        raise InvalidArgumentError("spec has no contributing parameters (all h and b zero)")
    log_sum = spec.beta * math.fsum(terms)
    Y = -log_sum / (2.0 * M * gamma) + c0
    return ComplexityPoint(Y=Y, Y0=c0, gamma=gamma, M=M, c0=c0)


def complexity_closed_form(family: str, params: dict, N: int, N_nu: int,
                           gamma: float, c0: float = 0.0, beta: int = 1) -> ComplexityPoint:
    """Family closed forms for Y with M = beta*N*N_nu.

    Shares the per-entry variance helpers with the grid builders, so the
    result agrees with complexity_from_spec on the same spec to round-off.
    """
    if not 0.0 < gamma < 0.5:
        raise InvalidArgumentError(f"gamma must lie in (0, 1/2), got {gamma}")
    if N < 1 or N_nu < N:
        raise InvalidArgumentError(f"need 1 <= N <= N_nu, got N={N}, N_nu={N_nu}")
    if beta not in (1, 2):
        raise InvalidArgumentError(f"beta must be 1 or 2, got {beta}")

    if family == "BE":
        mu = params.get("mu")
        if mu is None or mu <= 0:
            raise InvalidArgumentError(f"mu must be > 0 for BE, got {mu}")
        term = _log_factor(_be_variance(1, mu), gamma)
        terms = [term] * (N * (N_nu - 1))
    elif family in ("PE", "EE"):
        a, b = params.get("a"), params.get("b")
        if a is None or a <= 0 or b is None or b <= 0:
            raise InvalidArgumentError(f"a and b must be > 0 for {family}, got a={a}, b={b}")
        variance = _pe_variance if family == "PE" else _ee_variance
        terms = [
            _log_factor(variance(r1, r2, a, b), gamma)
            for r1 in range(1, N + 1)
            for r2 in range(1, N_nu)
        ]
    else:
        raise InvalidArgumentError(f"closed form expects BE/PE/EE, got {family!r}")

    M = beta * N * N_nu
    Y = -beta * math.fsum(terms) / (2.0 * M * gamma) + c0
    return ComplexityPoint(Y=Y, Y0=c0, gamma=gamma, M=M, c0=c0)


def invert_to_parameter(family: str, target_Y: float, N: int, N_nu: int,
                        gamma: float, c0: float = 0.0, beta: int = 1) -> dict:
    """Find the scalar family parameter whose closed-form Y hits target_Y.

    BE inverts mu (Y strictly decreasing in mu); PE and EE invert the single
    scale s with a = b = s (their variances depend on the product a*b only).
    Bisection in log-parameter space; RangeError reports the reachable
    interval when the target cannot be met.
    """
    if target_Y <= c0:
        raise RangeError(f"target_Y must exceed c0 = {c0}, got {target_Y}", c0, None)

    if family == "BE":
        def y_of(t: float) -> float:
            return complexity_closed_form("BE", {"mu": math.exp(t)}, N, N_nu, gamma, c0, beta).Y
        lo, hi, increasing = -36.0, 80.0, False
    elif family in ("PE", "EE"):
        def y_of(t: float) -> float:
            s = math.exp(t)
            return complexity_closed_form(family, {"a": s, "b": s}, N, N_nu, gamma, c0, beta).Y
        lo, hi, increasing = -20.0, 12.0, True
    else:
        raise InvalidArgumentError(f"inversion supports BE/PE/EE, got {family!r}")

    y_lo, y_hi = y_of(lo), y_of(hi)
    y_min, y_max = min(y_lo, y_hi), max(y_lo, y_hi)
    if not y_min <= target_Y <= y_max:
        raise RangeError(
            f"target_Y = {target_Y} outside reachable range [{y_min:.6g}, {y_max:.6g}] "
            f"for {family} at N={N}, N_nu={N_nu}, gamma={gamma}",
            y_min, y_max,
        )

    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        y_mid = y_of(mid)
        if abs(y_mid - target_Y) <= _REL_TOL * abs(target_Y):
            break
        if (y_mid < target_Y) == increasing:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    value = math.exp(mid)
    if family == "BE":
        return {"mu": value}
    return {"a": value, "b": value}
