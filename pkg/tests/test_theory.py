import math

import mpmath
import numpy as np
import pytest

from entroflow.ensembles import custom_spec, sample_state_matrices
from entroflow.errors import (
    InvalidArgumentError,
    InvalidContextError,
    OutOfRegimeError,
    PoleError,
)
from entroflow.spectra import schmidt_spectra_batch, sde_steady_state_sample
from entroflow.theory import (
    TheoryContext,
    calibrate_purity_coeffs,
    calibrate_vn_coeffs,
    kummer_1f1,
    kummer_1f1_large_order,
    moment_ode_s2,
    purity_density_grid,
    purity_mode,
    purity_pde_residual,
    purity_psi,
    stationary_logdensity,
    variance_ode_r1,
    variance_ode_s2,
    vn_density_grid,
    vn_pde_residual,
    vn_psi,
    vn_psi_infinity,
    vn_series_factor,
)


def mp_1f1(a, b, x):
    with mpmath.workdps(40):
        return float(mpmath.hyp1f1(a, b, x))


# ---------------------------------------------------------------------------
# Kummer function
# ---------------------------------------------------------------------------

def test_kummer_trivials():
    assert kummer_1f1(3.7, 0.4, 0.0) == 1.0
    assert abs(kummer_1f1(1.0, 1.0, 1.0) - math.e) < 1e-14
    assert abs(kummer_1f1(-1.0, 0.5, 1.0) + 1.0) < 1e-14  # 1 - x/b


def test_kummer_pole_error():
    with pytest.raises(PoleError):
        kummer_1f1(1.0, 0.0, 2.0)
    with pytest.raises(PoleError):
        kummer_1f1(1.0, -3.0, 2.0)


def test_kummer_identity_grid():
    # 1F1(a,b,x) = e^x 1F1(b-a, b, -x) to 1e-10 relative away from poles
    for a in np.linspace(-5, 5, 9):
        for b in (-4.5, -1.5, 0.5, 2.0, 5.0):
            for x in np.linspace(-10, 10, 9):
                lhs = kummer_1f1(a, b, x)
                rhs = math.exp(x) * kummer_1f1(b - a, b, -x)
                assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1e-30)


def test_kummer_against_independent_series():
    rng = np.random.default_rng(0)
    for _ in range(40):
        a = rng.uniform(-30, 30)
        b = rng.uniform(0.3, 10)
        x = rng.uniform(-15, 15)
        val = kummer_1f1(a, b, x)
        ref = mp_1f1(a, b, x)
        assert abs(val - ref) <= 1e-11 * max(abs(ref), 1e-12)


def test_kummer_large_cancellation_escalates():
    # alternating series with ~1e20 cancellation still comes out accurate
    val = kummer_1f1(-200.0, 0.5, 4.0)
    ref = mp_1f1(-200.0, 0.5, 4.0)
    assert abs(val - ref) <= 1e-9 * abs(ref)


# ---------------------------------------------------------------------------
# Large-order asymptotic
# ---------------------------------------------------------------------------

def test_asymptotic_at_zero_argument():
    assert abs(kummer_1f1_large_order(50.0, 0.0) - 1.0) == 0.0
    assert abs(kummer_1f1_large_order(50.0, 1e-8) - 1.0) < 1e-3


def test_asymptotic_examples():
    for mu, z in ((50.0, 1e-6), (200.0, 1.0), (50.0, 4.0)):
        ref = mp_1f1(-mu, 0.5, z)
        assert abs(kummer_1f1_large_order(mu, z) - ref) <= 1e-3 * abs(ref)


def test_asymptotic_grid_accuracy():
    for mu in (50.0, 90.0, 200.0, 1000.0):
        for z in np.linspace(0.05, 4.0, 23):
            ref = mp_1f1(-mu, 0.5, z)
            approx = kummer_1f1_large_order(mu, z)
            assert abs(approx - ref) <= 1e-3 * abs(ref)


def test_asymptotic_zero_spacing_halves():
    # oscillation argument 2*sqrt(mu*x^2): quadrupling mu halves the x-spacing
    def first_zeros(mu, n=6):
        xs = np.linspace(1e-4, 1.2, 40000)
        vals = np.array([math.cos(2.0 * math.sqrt(mu) * x) for x in xs])
        sign_flips = np.nonzero(np.diff(np.sign(vals)))[0]
        return xs[sign_flips[:n]]

    z1 = np.diff(first_zeros(100.0)).mean()
    z2 = np.diff(first_zeros(400.0)).mean()
    assert abs(z1 / z2 - 2.0) < 0.05


def test_asymptotic_out_of_regime():
    with pytest.raises(OutOfRegimeError):
        kummer_1f1_large_order(5.0, 1.0)


# ---------------------------------------------------------------------------
# Theory context and purity series
# ---------------------------------------------------------------------------

def small_ctx(seed=0, n_coeffs=6, **overrides):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 5))
    N_nu = N + int(rng.integers(0, 2))
    beta = int(rng.integers(1, 3))
    base = dict(
        N=N, N_nu=N_nu, beta=beta, gamma=0.25,
        omega=0.5 * beta * N * N_nu + rng.uniform(4, 16),
        S3_mean=rng.uniform(0.2, 0.8),
        T1_mean=rng.uniform(0.5, 2.0),
        R0_mean=rng.uniform(1.0, 6.0),
        coeffs=rng.uniform(0.2, 1.0, size=n_coeffs) * 3.0 ** -np.arange(n_coeffs),
    )
    base.update(overrides)
    return TheoryContext(**base)


def test_context_invariants():
    with pytest.raises(InvalidContextError):
        TheoryContext(N=8, N_nu=8, beta=1, gamma=0.25, omega=30.0)  # omega too small
    with pytest.raises(InvalidContextError):
        TheoryContext(N=2, N_nu=2, beta=1, gamma=0.25, omega=20.0, coeffs=np.array([]))
    ctx = TheoryContext(N=8, N_nu=8, beta=1, gamma=0.25, omega=4.0 * 64)
    assert ctx.mu0 == (2 * ctx.omega - 64) / 16.0
    assert ctx.d0 == 8.0 * ctx.omega * ctx.mu0


def test_purity_psi_needs_coeffs():
    ctx = TheoryContext(N=2, N_nu=2, beta=1, gamma=0.25, omega=20.0)
    with pytest.raises(InvalidContextError):
        purity_psi(ctx, 0.5, 0.1)


def test_purity_psi_at_x0_and_infinity():
    ctx = small_ctx(1)
    lam = 0.7
    expect = sum(c * math.exp(-m * lam) for m, c in enumerate(ctx.coeffs))
    assert abs(purity_psi(ctx, 0.0, lam) - expect) < 1e-12 * abs(expect)

    # for large Lambda only the m = 0 mode survives
    for x in (0.3, 0.9, 1.6):
        tail = purity_psi(ctx, x, 40.0)
        head = ctx.coeffs[0] * purity_mode(ctx, 0, x)
        assert abs(tail - head) <= 1e-10 * max(abs(head), 1e-12)


def test_purity_pde_residual_on_random_contexts():
    for seed in (11, 12, 13):
        ctx = small_ctx(seed)
        resid = purity_pde_residual(ctx, Lambda=0.3, x_grid=np.linspace(0.15, 2.0, 9))
        assert resid < 1e-4


def test_purity_density_normalizes():
    ctx = small_ctx(2, n_coeffs=1, coeffs=np.array([1.0]))
    grid = np.linspace(1e-4, 6.0 * math.sqrt(2 * ctx.S3_mean / ctx.omega) * 4, 400)
    dens = purity_density_grid(ctx, grid, Lambda=1.0)
    assert abs(np.trapezoid(dens, grid) - 1.0) < 1e-3
    assert np.all(dens >= 0.0)


def test_purity_calibration_reproduces_initial_density():
    ctx = small_ctx(3, n_coeffs=1, coeffs=np.array([1.0]))
    x_grid = np.linspace(0.02, 3.0, 120)
    # target: a smooth positive profile in the rescaled variable
    target = np.exp(-((x_grid - 0.9) ** 2) / 0.18)
    calibrated = calibrate_purity_coeffs(ctx, x_grid, target, m_max=16)
    fitted = np.array([purity_psi(calibrated, x, 0.0) for x in x_grid])
    rel = np.linalg.norm(fitted - target) / np.linalg.norm(target)
    assert rel < 5e-3


def test_purity_mass_moves_to_small_s2():
    # start from a density bump away from the origin; growing Lambda drags the
    # mass toward the entangled limit S2 -> small
    ctx = small_ctx(4, n_coeffs=1, coeffs=np.array([1.0]))
    x_grid = np.linspace(0.02, 3.0, 160)
    initial = np.exp(-((x_grid - 1.4) ** 2) / 0.08)
    ctx = calibrate_purity_coeffs(ctx, x_grid, initial, m_max=16)
    scale = math.sqrt(2.0 * ctx.S3_mean / ctx.omega)
    grid = x_grid * scale
    early = purity_density_grid(ctx, grid, Lambda=0.02)
    late = purity_density_grid(ctx, grid, Lambda=6.0)
    mean_early = np.trapezoid(early * grid, grid)
    mean_late = np.trapezoid(late * grid, grid)
    assert mean_late < mean_early


# ---------------------------------------------------------------------------
# Von Neumann series
# ---------------------------------------------------------------------------

def test_vn_series_factor_at_x0():
    ctx = small_ctx(5)
    lam = 0.8
    expect = sum(c * math.exp(-m * lam) for m, c in enumerate(ctx.coeffs))
    assert abs(vn_series_factor(ctx, 0.0, lam) - expect) < 1e-12 * abs(expect)
    # factorization: psi(x, lam) = psi_inf(x) * series(x, lam)
    x = 1.3
    val = vn_psi(ctx, x, lam)
    assert abs(val - vn_psi_infinity(ctx, x) * vn_series_factor(ctx, x, lam)) < 1e-12 * abs(val)


def test_vn_infinity_limit_keeps_leading_mode():
    ctx = small_ctx(6)
    x = 1.1
    val = vn_psi(ctx, x, 60.0)
    lead = ctx.coeffs[0] * vn_psi_infinity(ctx, x)
    assert abs(val - lead) <= 1e-10 * abs(lead)


def test_vn_requires_positive_t():
    ctx = small_ctx(7, T1_mean=-3.0)
    with pytest.raises(InvalidContextError):
        vn_psi(ctx, 0.5, 0.1)


def test_vn_outside_support_is_zero():
    ctx = small_ctx(8)
    assert vn_psi(ctx, -0.5, 0.2) == 0.0


def test_vn_pde_residual_on_random_contexts():
    for seed in (3, 5, 9):
        rng = np.random.default_rng(seed)
        ctx = TheoryContext(
            N=2, N_nu=2, beta=1, gamma=0.25,
            omega=rng.uniform(8, 14),
            T1_mean=rng.uniform(0.5, 2.0),
            R0_mean=rng.uniform(1.0, 6.0),
            coeffs=rng.uniform(0.2, 1.0, size=4) * 2.0 ** -np.arange(4),
        )
        xcs = np.linspace(0.8, 2.0, 7)
        r1s = 0.5 * (ctx.t + 4.0 * xcs / ctx.a1)
        resid = vn_pde_residual(ctx, Lambda=0.2 * ctx.omega**2 / ctx.d0_vn, r1_grid=r1s)
        assert resid < 1e-3


def test_vn_delta_concentration_at_inverse_omega_scale():
    # ergodic-limit parameters at N = 64 with omega = 4 N^2
    N = 64
    ctx = TheoryContext(N=N, N_nu=N, beta=1, gamma=0.25, omega=4.0 * N * N,
                        T1_mean=np.log(N) ** 2, R0_mean=N * np.log(N),
                        coeffs=np.array([1.0]))
    t_half = ctx.t / 2.0
    half_window = 1.5 / ctx.omega  # |2 R1 - t| < 3/omega
    grid = np.linspace(t_half + half_window * 1e-4, t_half + 2.0 * half_window, 900)
    dens = vn_density_grid(ctx, grid, Lambda=50.0)
    mass = np.trapezoid(dens, grid)
    inside = np.abs(2.0 * grid - 2.0 * grid[-1]) <= 3.0 / ctx.omega
    assert np.trapezoid(dens[inside], grid[inside]) / mass > 0.99
    # on a window far wider than 1/omega the mass still sits in a 3/omega sliver
    wide = np.linspace(t_half + 1e-7, t_half + 0.01, 4000)
    dens_w = vn_density_grid(ctx, wide, Lambda=50.0)
    sliver = np.abs(2.0 * wide - 2.0 * wide[-1]) < 3.0 / ctx.omega
    frac = np.trapezoid(dens_w[sliver], wide[sliver]) / np.trapezoid(dens_w, wide)
    assert frac > 0.99


def test_vn_calibration_least_squares():
    ctx = small_ctx(10, n_coeffs=1, coeffs=np.array([1.0]))
    x_grid = np.linspace(0.4, 2.2, 90)
    truth = np.array([vn_psi_infinity(ctx, x) * (1.0 + 0.4 * math.exp(x / ctx.t))
                      for x in x_grid])
    calibrated = calibrate_vn_coeffs(ctx, x_grid, truth, m_max=6)
    fitted = np.array([vn_psi(calibrated, x, 0.0) for x in x_grid])
    rel = np.linalg.norm(fitted - truth) / np.linalg.norm(truth)
    assert rel < 1e-6


# ---------------------------------------------------------------------------
# Stationary density
# ---------------------------------------------------------------------------

def test_stationary_symmetry_and_collision():
    lam = np.array([0.5, 0.3, 0.2])
    v1 = stationary_logdensity(lam, 1, 0.5, 0.25)
    v2 = stationary_logdensity(lam[[2, 0, 1]], 1, 0.5, 0.25)
    assert v1 == v2
    assert stationary_logdensity(np.array([0.4, 0.4, 0.2]), 1, 0.5, 0.25) == -math.inf
    assert stationary_logdensity(np.array([1.0, 0.0]), 1, 0.5, 0.25) == -math.inf
    with pytest.raises(InvalidArgumentError):
        stationary_logdensity(np.array([1.2, -0.2]), 1, 0.5, 0.25)


def _two_level_bin_probs(edges):
    # integrate the N=2 stationary weight over each top-eigenvalue bin;
    # substituting lam = 1 - u^2 tames the (1-lam)^(-1/2) edge singularity
    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = np.linspace(math.sqrt(1 - hi), math.sqrt(1 - lo), 600)
        f = []
        for uu in u:
            x = 1.0 - uu * uu
            if x <= 0.0 or x >= 1.0:
                f.append(0.0)
                continue
            f.append(math.exp(stationary_logdensity(np.array([x, 1 - x]), 1, 0.5, 0.25)) * uu)
        probs.append(np.trapezoid(np.array(f)[::-1] * 2.0, u[::-1]))
    p = np.array(probs)
    return p / p.sum()


def test_stationary_two_level_quadrature_vs_sampling():
    edges = np.linspace(0.5, 1.0, 13)
    p_theo = _two_level_bin_probs(edges)
    assert np.isfinite(p_theo).all() and p_theo.sum() > 0  # finite normalizer

    spec = custom_spec(np.ones((2, 2)))
    lam = schmidt_spectra_batch(
        sample_state_matrices(spec, 400_000, np.random.default_rng(8)))
    p_dir = np.histogram(lam[:, 0], bins=edges)[0] / lam.shape[0]
    ratio = p_dir[:11] / p_theo[:11]  # away from the edge-singularity bin
    assert np.all(np.abs(ratio - 1.0) < 0.05)


@pytest.mark.slow
def test_stationary_two_level_quadrature_vs_sde():
    edges = np.linspace(0.5, 1.0, 13)
    p_theo = _two_level_bin_probs(edges)
    rng = np.random.default_rng(5)
    lam = sde_steady_state_sample(2, 2, 0.25, 1, rng, n_traj=4096, burn_in=0.8,
                                  sample_interval=0.1, n_samples_per_traj=10)
    p_sde = np.histogram(lam[:, :, 0].ravel(), bins=edges)[0] / (4096 * 10)
    # skip the collision bin (Euler overshoot region) and the edge singularity
    ratio = p_sde[1:11] / p_theo[1:11]
    assert np.all(np.abs(ratio - 1.0) < 0.08)


# ---------------------------------------------------------------------------
# Moment and variance relaxation laws
# ---------------------------------------------------------------------------

def _fd_derivative(y, f):
    # fourth-order central stencil on a uniform grid
    h = y[1] - y[0]
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12.0 * h)


def test_moment_ode_s2_fixed_point_and_residual():
    eta, b = 40.0, -3.0
    y = np.linspace(0.0, 4.0 / eta, 4001)
    fixed = -b / eta
    np.testing.assert_allclose(moment_ode_s2(y, fixed, b, eta), fixed)

    traj = moment_ode_s2(y, 0.9, b, eta)
    resid = _fd_derivative(y, traj) - (-b - eta * traj[2:-2])
    scale = np.max(np.abs(-b - eta * traj))
    assert np.max(np.abs(resid)) < 1e-8 * scale


def test_variance_ode_s2_fixed_point_and_residual():
    a, eta = 0.004, 40.0
    y = np.linspace(0.0, 4.0 / eta, 4001)
    np.testing.assert_allclose(variance_ode_s2(y, a / eta, a, eta), a / eta)

    traj = variance_ode_s2(y, 0.0, a, eta)
    resid = _fd_derivative(y, traj) - (2.0 * a - 2.0 * eta * traj[2:-2])
    assert np.max(np.abs(resid)) < 1e-8 * 2.0 * a
    assert abs(traj[-1] - a / eta) < 1e-3 * a / eta


def test_variance_s2_stationary_scaling():
    # stationary value a/eta = <S_3>/omega falls like N^-4 when omega ~ N^2
    values = []
    for N in (16, 32, 64):
        s3, omega = 5.0 / N**2, 4.0 * N**2
        values.append(variance_ode_s2(np.array([0.0, 10.0]), 0.0, 4.0 * s3, 4.0 * omega)[-1])
    slope = np.polyfit(np.log([16, 32, 64]), np.log(values), 1)[0]
    assert abs(slope + 4.0) < 1e-6


def test_variance_ode_r1_and_scaling():
    a = 2.0 * 4.0 * 32**2
    y = np.linspace(0.0, 4.0 / a, 4001)
    np.testing.assert_allclose(variance_ode_r1(y, 1.0 / a, a), 1.0 / a)
    traj = variance_ode_r1(y, 0.0, a)
    resid = _fd_derivative(y, traj) - (2.0 - 2.0 * a * traj[2:-2])
    assert np.max(np.abs(resid)) < 1e-8 * 2.0
    values = [variance_ode_r1(np.array([0.0, 10.0]), 0.0, 2.0 * 4.0 * N**2)[-1]
              for N in (16, 32, 64)]
    slope = np.polyfit(np.log([16, 32, 64]), np.log(values), 1)[0]
    assert abs(slope + 2.0) < 1e-6

    with pytest.raises(InvalidArgumentError):
        variance_ode_r1(y, 0.0, -1.0)
