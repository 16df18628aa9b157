"""Closed-form machinery: Kummer functions, eigenmode series, variance laws.

The distributions of the purity S_2 and the von Neumann entropy R_1 obey
drift-diffusion equations in the pseudo-time Y once the unit-trace delta is
softened to an exponential filter g(S_1) = omega*exp(-omega*(S_1-1)).  Their
solutions separate into eigenmode series built from confluent hypergeometric
functions:

purity, in the rescaled variable x = sqrt(omega/(2*<S_3>)) * S_2:

    Psi(x; Lambda) = exp(-x^2) * sum_m C_m 1F1(-mu_m, 1/2, x^2) exp(-m*Lambda)

with Lambda = d0*(Y-Y0), d0 = (omega/2)*(2*omega - beta*N*N_nu) and
mu_0 = d0/(8*omega) = (2*omega - beta*N*N_nu)/16.  The exact eigenvalue
relation of the separated ODE V'' + 2xV' + (4*mu+2)V = 0 fixes
mu_m = mu_0*(m+1) - 1/2; the -1/2 is the finite-omega sharpening of the
mu_0*(m+1) rule and makes the mode series solve the purity equation

    dPsi/dY = 2*omega*Psi_xx + 4*omega*x*Psi_x + d0*Psi

to round-off, which the finite-difference residual oracle checks.

von Neumann, in x = -omega*(t - 2*R_1) with t = 1 + <T_1>:

    Psi_v(x; Lambda) = (1/(2*omega)) (4x/omega)^(omega*t/2) e^(x(t+1)/t)
                       * sum_m C_1m exp(m*(x - t*Lambda)/t)

(Lambda = omega^2*(Y-Y0)).  That factored form rests on a large-omega
reduction of the exact eigenmodes

    V_m(R_1) = xc^alpha * 1F1(alpha + d_m/a1, alpha+1, xc),
    xc = -a1*(t - 2*R_1)/4,

which solve (t-2R_1)V'' + (a1*R_1 + b1)V' + d_m*V = 0 exactly; vn_psi can
evaluate either form, and the residual oracle uses the exact modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    InvalidContextError,
    OutOfRegimeError,
    PoleError,
)

_SERIES_TOL = 1e-14
_MAX_TERMS = 1_000_000
_ESCALATE_RATIO = 1e4  # cancellation ratio beyond which the series reruns in mpmath
_TAIL_TOL = 1e-12


# ---------------------------------------------------------------------------
# Kummer's confluent hypergeometric function
# ---------------------------------------------------------------------------

def _series_float(a: float, b: float, x: float) -> tuple[float, float]:
    """Compensated power series; returns (sum, max |term| seen)."""
    total = 1.0
    comp = 0.0
    term = 1.0
    peak = 1.0
    small_streak = 0
    for k in range(_MAX_TERMS):
        term *= (a + k) * x / ((b + k) * (k + 1.0))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        mag = abs(term)
        peak = max(peak, mag)
        if term == 0.0:
            return total, peak  # polynomial case terminated exactly
        if mag <= _SERIES_TOL * abs(total):
            small_streak += 1
            if small_streak >= 2:
                return total, peak
        else:
            small_streak = 0
    raise ConvergenceError(f"1F1 series did not converge for a={a}, b={b}, x={x}")


def kummer_1f1(a: float, b: float, x: float) -> float:
    """1F1(a, b, x) by direct power series with compensated summation.

    For x < 0 the Kummer transform 1F1(a,b,x) = e^x 1F1(b-a, b, -x) avoids
    the worst cancellation.  When the running terms still overwhelm the
    result (alternating series with a < 0), the same series is rerun in
    mpmath at a precision sized to the observed cancellation.
    """
    if b <= 0 and b == int(b):
        raise PoleError(f"1F1 pole: b = {b} is a non-positive integer")
    if x == 0.0:
        return 1.0
    prefactor = 1.0
    if x < 0:
        a, x = b - a, -x
        prefactor = math.exp(-x)
    value, peak = _series_float(a, b, x)
    if value == 0.0 or peak / abs(value) > _ESCALATE_RATIO:
        digits = 25 + int(math.log10(peak + 1.0))
        with mpmath.workdps(digits):
            value = float(mpmath.hyp1f1(a, b, x))
    return prefactor * value


# one-based Bernoulli numbers B_1..B_12 used by the asymptotic coefficient
# recurrence (B_1 = -1/2 convention)
_BERNOULLI = (-0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0, -1.0 / 30.0,
              0.0, 5.0 / 66.0, 0.0, -691.0 / 2730.0)


def _asymptotic_c(z: float, b: float, count: int) -> list[float]:
    c = [1.0]
    for k in range(count - 1):
        acc = 0.0
        for s in range(k + 1):
            w = (b * _BERNOULLI[s] / math.factorial(s + 1)
                 + z * (s + 1) * _BERNOULLI[s + 1] / math.factorial(s + 2))
            acc += w * c[k - s]
        c.append(-acc / (k + 1))
    return c


def _poch(a: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


def kummer_1f1_large_order(mu: float, x2: float, n_terms: int = 4) -> float:
    """Large-order Bessel asymptotic for 1F1(-mu, 1/2, x^2).

    Expands around Bessel functions of order -1/2 and 1/2 (cosine and sine):
    the leading behaviour is e^(x^2/2) * cos(2*sqrt(mu*x^2)) with algebraic
    corrections p_s, q_s built from the Bernoulli-number recurrence; keeping
    n_terms of each correction sum gives O(mu^-n_terms) accuracy.  The
    regularized form carries an overall Gamma(1/2): without it the expansion
    misses the series by that constant factor.
    """
    if mu < 10:
        raise OutOfRegimeError(f"large-order expansion needs mu >= 10, got {mu}")
    if x2 < 0:
        raise InvalidArgumentError(f"x2 must be >= 0, got {x2}")
    if x2 == 0.0:
        return 1.0
    b = 0.5
    z = x2
    w = 2.0 * math.sqrt(mu * z)
    c = _asymptotic_c(z, b, 2 * n_terms + 2)
    p_sum = 0.0
    q_sum = 0.0
    for k in range(n_terms):
        p_k = math.fsum(
            math.comb(k, s) * _poch(1.0 - b, k - s) * z**s * c[k + s]
            for s in range(k + 1)
        )
        q_k = math.fsum(
            math.comb(k, s) * _poch(2.0 - b, k - s) * z**s * c[k + s + 1]
            for s in range(k + 1)
        )
        p_sum += p_k / (-mu) ** k
        q_sum += q_k / (-mu) ** k
    # J_{-1/2}(w) = sqrt(2/(pi w)) cos w, J_{1/2}(w) = sqrt(2/(pi w)) sin w
    bessel_part = math.sqrt(2.0 / (math.pi * w)) * (
        math.cos(w) * p_sum - math.sqrt(z / mu) * math.sin(w) * q_sum
    )
    log_pref = (
        math.lgamma(b)
        + 0.25 * math.log(z / mu)
        + 0.5 * z
        + math.lgamma(1.0 + mu)
        - math.lgamma(mu + b)
    )
    return math.exp(log_pref) * bessel_part


# ---------------------------------------------------------------------------
# Theory context
# ---------------------------------------------------------------------------

def default_omega(N: int) -> float:
    """Default filter width, 4*N^2."""
    return 4.0 * N * N


@dataclass(frozen=True)
class TheoryContext:
    """Solution parameters shared by the purity and von Neumann series.

    S3_mean, T1_mean and R0_mean are the slow ensemble averages <S_3>,
    <T_1> and <R_0>, estimated from sampled spectra at the working Y.
    coeffs holds C_m for the purity series or C_1m for the von Neumann one,
    depending on which family the context is calibrated for.
    """

    N: int
    N_nu: int
    beta: int
    gamma: float
    omega: float
    S3_mean: float | None = None
    T1_mean: float | None = None
    R0_mean: float | None = None
    coeffs: np.ndarray | None = None
    Lambda: float | None = None

    def __post_init__(self):
        if self.omega <= 0.5 * self.beta * self.N * self.N_nu:
            raise InvalidContextError(
                f"omega = {self.omega} must exceed (beta/2)*N*N_nu = "
                f"{0.5 * self.beta * self.N * self.N_nu} so that mu0 > 0"
            )
        if self.gamma <= 0:
            raise InvalidContextError(f"gamma must be > 0, got {self.gamma}")
        if self.coeffs is not None:
            c = np.asarray(self.coeffs, dtype=float)
            if c.size == 0:
                raise InvalidContextError("coefficient list must not be empty")
            object.__setattr__(self, "coeffs", c)

    # purity-side constants
    @property
    def nu(self) -> float:
        return (self.N_nu - self.N + 1) / 2.0

    @property
    def d0(self) -> float:
        return 0.5 * self.omega * (2.0 * self.omega - self.beta * self.N * self.N_nu)

    @property
    def mu0(self) -> float:
        return self.d0 / (8.0 * self.omega)

    def mu_m(self, m: int) -> float:
        # exact eigenvalue relation; mu0*(m+1) is its large-omega limit
        return self.mu0 * (m + 1) - 0.5

    # von Neumann-side constants
    @property
    def t(self) -> float:
        if self.T1_mean is None:
            raise InvalidContextError("context lacks T1_mean needed for t = 1 + <T_1>")
        return 1.0 + self.T1_mean

    @property
    def a1(self) -> float:
        return 2.0 * self.gamma + 2.0 * self.omega

    @property
    def b1(self) -> float:
        if self.R0_mean is None:
            raise InvalidContextError("context lacks R0_mean needed for b1")
        return (self.beta * (self.N_nu - self.nu) * self.N
                - 0.5 * self.beta * self.N_nu * self.R0_mean
                + self.N + 2.0 * self.omega - 2.0 * self.gamma - 4.0)

    @property
    def d0_vn(self) -> float:
        return (0.5 * self.beta * self.omega * self.N * self.N_nu
                + self.omega**2 + (2.0 - 2.0 * self.gamma) * self.omega
                - 2.0 * self.gamma)

    @property
    def alpha_vn(self) -> float:
        # solution exponent of the von Neumann modes (distinct from any
        # Renyi order also written alpha elsewhere)
        return 0.25 * (self.a1 * self.t + 2.0 * self.b1 + 4.0)

    def with_coeffs(self, coeffs: np.ndarray) -> "TheoryContext":
        return replace(self, coeffs=np.asarray(coeffs, dtype=float))


def _require_coeffs(ctx: TheoryContext) -> np.ndarray:
    if ctx.coeffs is None or ctx.coeffs.size == 0:
        raise InvalidContextError("context has no series coefficients; calibrate first")
    return ctx.coeffs


# ---------------------------------------------------------------------------
# Purity distribution
# ---------------------------------------------------------------------------

def purity_mode(ctx: TheoryContext, m: int, x: float) -> float:
    """m-th purity eigenmode e^(-x^2) * 1F1(-mu_m, 1/2, x^2)."""
    z = x * x
    return math.exp(-z) * kummer_1f1(-ctx.mu_m(m), 0.5, z)


def purity_psi(ctx: TheoryContext, x: float, Lambda: float) -> float:
    """Eigenmode series for the rescaled purity distribution at Lambda >= 0."""
    coeffs = _require_coeffs(ctx)
    total = 0.0
    small_streak = 0
    for m, c in enumerate(coeffs):
        term = c * purity_mode(ctx, m, x) * math.exp(-m * Lambda)
        total += term
        if abs(term) < _TAIL_TOL * abs(total):
            small_streak += 1
            if small_streak >= 2 and Lambda > 0:
                break
        else:
            small_streak = 0
    return total


def purity_x_of_s2(ctx: TheoryContext, s2: float | np.ndarray):
    """Rescaling x = sqrt(omega/(2*<S_3>)) * S_2."""
    if ctx.S3_mean is None or ctx.S3_mean <= 0:
        raise InvalidContextError("context needs S3_mean > 0 for the purity rescaling")
    return np.sqrt(ctx.omega / (2.0 * ctx.S3_mean)) * np.asarray(s2, dtype=float)


def purity_density(ctx: TheoryContext, s2: float, Lambda: float) -> float:
    """Pointwise density of S_2: Psi(x) * dx/dS_2 (no normalization)."""
    jac = math.sqrt(ctx.omega / (2.0 * ctx.S3_mean))
    return purity_psi(ctx, float(purity_x_of_s2(ctx, s2)), Lambda) * jac


def purity_density_grid(ctx: TheoryContext, s2_grid: np.ndarray, Lambda: float) -> np.ndarray:
    """Density on a grid, negative excursions clipped to zero, renormalized."""
    s2_grid = np.asarray(s2_grid, dtype=float)
    vals = np.array([purity_density(ctx, s, Lambda) for s in s2_grid])
    vals = np.clip(vals, 0.0, None)
    norm = np.trapezoid(vals, s2_grid)
    if norm <= 0:
        raise InvalidContextError("purity density vanished identically on the grid")
    return vals / norm


def calibrate_purity_coeffs(ctx: TheoryContext, x_grid: np.ndarray, psi0: np.ndarray,
                            m_max: int = 32) -> TheoryContext:
    """Project an initial Psi(x; 0) onto the first m_max modes.

    The mode family is not orthogonal, so the projection is a weighted least
    squares on the supplied grid (trapezoid quadrature weights).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    psi0 = np.asarray(psi0, dtype=float)
    design = np.empty((x_grid.size, m_max))
    for m in range(m_max):
        design[:, m] = [purity_mode(ctx, m, x) for x in x_grid]
    w = np.sqrt(_trapezoid_weights(x_grid))
    coeffs, *_ = np.linalg.lstsq(design * w[:, None], psi0 * w, rcond=None)
    return ctx.with_coeffs(coeffs)


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.zeros_like(grid)
    w[1:] += 0.5 * np.diff(grid)
    w[:-1] += 0.5 * np.diff(grid)
    return w


# ---------------------------------------------------------------------------
# Von Neumann distribution
# ---------------------------------------------------------------------------

def vn_x_of_r1(ctx: TheoryContext, r1: float | np.ndarray):
    """Rescaling x = -omega*(t - 2*R_1); positive above the concentration point t/2."""
    return -ctx.omega * (ctx.t - 2.0 * np.asarray(r1, dtype=float))


def vn_log_psi_infinity(ctx: TheoryContext, x: float) -> float:
    t = ctx.t
    if t <= 0:
        raise InvalidContextError(f"t = {t} must be positive")
    if x <= 0:
        return -math.inf
    return (-math.log(2.0 * ctx.omega)
            + 0.5 * ctx.omega * t * math.log(4.0 * x / ctx.omega)
            + x * (t + 1.0) / t)


def vn_psi_infinity(ctx: TheoryContext, x: float) -> float:
    """Lambda -> infinity limit (m = 0 term), up to the C_10 coefficient."""
    lv = vn_log_psi_infinity(ctx, x)
    return 0.0 if lv == -math.inf else math.exp(lv)


def vn_series_factor(ctx: TheoryContext, x: float, Lambda: float) -> float:
    """sum_m C_1m exp(m*(x - t*Lambda)/t), the evolution factor of the series."""
    coeffs = _require_coeffs(ctx)
    t = ctx.t
    return math.fsum(c * math.exp(m * (x - t * Lambda) / t) for m, c in enumerate(coeffs))


def vn_psi(ctx: TheoryContext, x: float, Lambda: float, exact_modes: bool = False) -> float:
    """Von Neumann series Psi_v(x; Lambda) on the support x > 0.

    Default: factored large-omega form (infinity-limit profile times the
    exponential evolution factor).  exact_modes=True sums the exact Kummer
    eigenmodes instead; that form satisfies the generating equation to
    round-off and backs the residual oracle.
    """
    if ctx.t <= 0:
        raise InvalidContextError(f"t = {ctx.t} must be positive")
    if exact_modes:
        r1 = 0.5 * (ctx.t + x / ctx.omega)
        return vn_psi_exact(ctx, r1, Lambda)
    if x <= 0:
        return 0.0
    return vn_psi_infinity(ctx, x) * vn_series_factor(ctx, x, Lambda)


def vn_mode(ctx: TheoryContext, m: int, r1: float) -> float:
    """Exact eigenmode xc^alpha * 1F1(alpha + d_m/a1, alpha+1, xc)."""
    xc = -0.25 * ctx.a1 * (ctx.t - 2.0 * r1)
    if xc <= 0:
        return 0.0
    alpha = ctx.alpha_vn
    d_m = ctx.d0_vn * (m + 1)
    return math.exp(alpha * math.log(xc)) * kummer_1f1(alpha + d_m / ctx.a1, alpha + 1.0, xc)


def vn_psi_exact(ctx: TheoryContext, r1: float, Lambda: float) -> float:
    """Exact-mode series in R_1; Lambda is the rescaled parameter omega^2*(Y-Y0)."""
    coeffs = _require_coeffs(ctx)
    dY = Lambda / ctx.omega**2
    return math.fsum(
        c * vn_mode(ctx, m, r1) * math.exp(-m * ctx.d0_vn * dY)
        for m, c in enumerate(coeffs)
    )


def vn_density_grid(ctx: TheoryContext, r1_grid: np.ndarray, Lambda: float) -> np.ndarray:
    """Normalized density of R_1 on a grid via the factored form (log-space)."""
    r1_grid = np.asarray(r1_grid, dtype=float)
    xs = vn_x_of_r1(ctx, r1_grid)
    logs = np.full(r1_grid.size, -np.inf)
    factors = np.zeros(r1_grid.size)
    for i, x in enumerate(xs):
        if x <= 0:
            continue
        logs[i] = vn_log_psi_infinity(ctx, x)
        factors[i] = vn_series_factor(ctx, x, Lambda)
    peak = np.max(logs[np.isfinite(logs)]) if np.any(np.isfinite(logs)) else 0.0
    vals = np.where(np.isfinite(logs), np.exp(logs - peak) * factors, 0.0)
    vals = np.clip(vals, 0.0, None)
    norm = np.trapezoid(vals, r1_grid)
    if norm <= 0:
        raise InvalidContextError("von Neumann density vanished identically on the grid")
    return vals / norm


def calibrate_vn_coeffs(ctx: TheoryContext, x_grid: np.ndarray, psi0: np.ndarray,
                        m_max: int = 32) -> TheoryContext:
    """Least-squares projection of an initial Psi_v(x; 0) onto the factored basis."""
    x_grid = np.asarray(x_grid, dtype=float)
    psi0 = np.asarray(psi0, dtype=float)
    t = ctx.t
    base = np.array([vn_psi_infinity(ctx, x) for x in x_grid])
    design = np.column_stack([base * np.exp(m * x_grid / t) for m in range(m_max)])
    w = np.sqrt(_trapezoid_weights(x_grid))
    coeffs, *_ = np.linalg.lstsq(design * w[:, None], psi0 * w, rcond=None)
    return ctx.with_coeffs(coeffs)


# ---------------------------------------------------------------------------
# Steady state of the spectrum flow
# ---------------------------------------------------------------------------

def stationary_logdensity(lambdas: np.ndarray, beta: int, nu: float, gamma: float) -> float:
    """Log of the unnormalized steady-state eigenvalue density.

    Zero-flux balance of the spectrum diffusion gives

        sum_{m<n} beta*ln|lam_m - lam_n| + sum_k (beta*nu - 1)*ln(lam_k)
        - 2*gamma*sum_k lam_k,

    the (scaled) Laguerre/Wishart eigenvalue weight.  Coincident or vanishing
    eigenvalues return -inf (hard repulsion / hard wall).
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 0):
        raise InvalidArgumentError("eigenvalues must be positive")
    if np.any(lam == 0.0):
        return -math.inf
    n = lam.size
    log_rep = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(lam[i] - lam[j])
            if gap == 0.0:
                return -math.inf
            log_rep += math.log(gap)
    return (beta * log_rep
            + (beta * nu - 1.0) * float(np.sum(np.log(lam)))
            - 2.0 * gamma * float(np.sum(lam)))


# ---------------------------------------------------------------------------
# Moment and variance relaxation laws
# ---------------------------------------------------------------------------

def moment_ode_s2(Y_grid: np.ndarray, init: float, b_coef: float, eta: float) -> np.ndarray:
    """<S_2>(Y) solving d<S_2>/dY = -b - eta*<S_2> from <S_2>(Y_grid[0]) = init."""
    if eta <= 0:
        raise InvalidArgumentError(f"eta must be > 0, got {eta}")
    Y = np.asarray(Y_grid, dtype=float)
    fixed = -b_coef / eta
    return fixed + (init - fixed) * np.exp(-eta * (Y - Y[0]))


def variance_ode_s2(Y_grid: np.ndarray, init: float, a_coef: float, eta: float) -> np.ndarray:
    """sigma^2(S_2)(Y) = a/eta - A*exp(-2*eta*(Y-Y0)) with A fixed by init."""
    if eta <= 0:
        raise InvalidArgumentError(f"eta must be > 0, got {eta}")
    Y = np.asarray(Y_grid, dtype=float)
    fixed = a_coef / eta
    return fixed - (fixed - init) * np.exp(-2.0 * eta * (Y - Y[0]))


def variance_ode_r1(Y_grid: np.ndarray, init: float, a_coef: float) -> np.ndarray:
    """sigma^2(R_1)(Y) = 1/a - B*exp(-2*a*(Y-Y0)) with B fixed by init."""
    if a_coef <= 0:
        raise InvalidArgumentError(f"a_coef must be > 0, got {a_coef}")
    Y = np.asarray(Y_grid, dtype=float)
    fixed = 1.0 / a_coef
    return fixed - (fixed - init) * np.exp(-2.0 * a_coef * (Y - Y[0]))


# ---------------------------------------------------------------------------
# Finite-difference residual oracles
# ---------------------------------------------------------------------------

_FD5_D1 = (1.0, -8.0, 0.0, 8.0, -1.0)   # / (12 h)
_FD5_D2 = (-1.0, 16.0, -30.0, 16.0, -1.0)  # / (12 h^2)


def _fd5(f, u: float, h: float) -> tuple[float, float]:
    """Fourth-order central first and second derivatives of f at u."""
    vals = [f(u + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = sum(c * v for c, v in zip(_FD5_D1, vals)) / (12.0 * h)
    d2 = sum(c * v for c, v in zip(_FD5_D2, vals)) / (12.0 * h**2)
    return d1, d2


def purity_pde_residual(ctx: TheoryContext, Lambda: float, x_grid: np.ndarray,
                        hx: float = 1e-3) -> float:
    """Scaled max residual of dPsi/dY = 2w Psi_xx + 4w x Psi_x + d0 Psi.

    Y enters through Lambda = d0*(Y - Y0); derivatives are fourth-order
    central differences.  The residual is scaled by max |d0 * Psi|.
    """
    d0 = ctx.d0
    dL = 1e-3  # step in Lambda; dY = dL/d0
    worst = 0.0
    scale = 0.0
    for x in np.asarray(x_grid, dtype=float):
        psi = purity_psi(ctx, x, Lambda)
        dpsi_dY = (purity_psi(ctx, x, Lambda + dL) - purity_psi(ctx, x, Lambda - dL)) / (2.0 * dL) * d0
        d1, d2 = _fd5(lambda u: purity_psi(ctx, u, Lambda), x, hx)
        resid = dpsi_dY - (2.0 * ctx.omega * d2 + 4.0 * ctx.omega * x * d1 + d0 * psi)
        worst = max(worst, abs(resid))
        scale = max(scale, abs(d0 * psi))
    return worst / scale if scale > 0 else math.inf


def vn_pde_residual(ctx: TheoryContext, Lambda: float, r1_grid: np.ndarray,
                    hr: float = 2e-4) -> float:
    """Scaled max residual of df/dY = (t-2R1) f_RR + (a1 R1 + b1) f_R + d0 f.

    Evaluated on the exact-mode series; scaled by max |d0_vn * f|.
    """
    d0 = ctx.d0_vn
    dL = 1e-4 * ctx.omega**2 / d0  # Lambda step corresponding to dY = 1e-4/d0
    worst = 0.0
    scale = 0.0
    for r1 in np.asarray(r1_grid, dtype=float):
        f = vn_psi_exact(ctx, r1, Lambda)
        df_dY = ((vn_psi_exact(ctx, r1, Lambda + dL) - vn_psi_exact(ctx, r1, Lambda - dL))
                 / (2.0 * dL) * ctx.omega**2)
        d1, d2 = _fd5(lambda u: vn_psi_exact(ctx, u, Lambda), r1, hr)
        resid = df_dY - ((ctx.t - 2.0 * r1) * d2 + (ctx.a1 * r1 + ctx.b1) * d1 + d0 * f)
        worst = max(worst, abs(resid))
        scale = max(scale, abs(d0 * f))
    return worst / scale if scale > 0 else math.inf
