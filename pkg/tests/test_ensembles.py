import numpy as np
import pytest
from scipy import stats as sps

from entroflow.ensembles import (
    build_family,
    channel_demo_sample,
    channel_marginal_density,
    custom_spec,
    sample_state_matrices,
    sample_state_matrix,
)
from entroflow.errors import InvalidArgumentError


def test_be_separable_limit():
    spec = build_family("BE", {"mu": 1e12}, 4, 4)
    assert np.all(spec.h[:, 0] == 1.0)
    assert np.allclose(spec.h[:, 1:], 1e-12, rtol=1e-6)


def test_be_table_variance_value():
    spec = build_family("BE", {"mu": 0.276}, 8, 8)
    assert np.allclose(spec.h[:, 1:], 1.0 / 1.276)
    assert np.all(spec.h[:, 0] == 1.0)


def test_ee_direct_evaluation():
    spec = build_family("EE", {"a": 2.0, "b": 2.0}, 2, 2)
    expected = np.array([[1.0, np.exp(-0.25)], [1.0, np.exp(-0.5)]])
    np.testing.assert_allclose(spec.h, expected, rtol=0, atol=0)


def test_pe_formula():
    spec = build_family("PE", {"a": 3.0, "b": 2.0}, 3, 4)
    for k in range(3):
        for l in range(4):
            assert spec.h[k, l] == 1.0 / (1.0 + (k + 1) * l / 6.0)


@pytest.mark.parametrize("family,params,n,n_nu,beta,field", [
    ("BE", {"mu": -1.0}, 4, 4, 1, "mu"),
    ("BE", {}, 4, 4, 1, "mu"),
    ("PE", {"a": 0.0, "b": 1.0}, 4, 4, 1, "a"),
    ("EE", {"a": 1.0, "b": -2.0}, 4, 4, 1, "b"),
    ("BE", {"mu": 1.0}, 0, 4, 1, "N"),
    ("BE", {"mu": 1.0}, 8, 4, 1, "N_nu"),
    ("BE", {"mu": 1.0}, 4, 4, 3, "beta"),
])
def test_build_rejects_bad_arguments(family, params, n, n_nu, beta, field):
    with pytest.raises(InvalidArgumentError, match=field):
        build_family(family, params, n, n_nu, beta)


def test_family_variance_bounds_and_decay():
    for family, params in (("BE", {"mu": 0.7}), ("PE", {"a": 2.0, "b": 3.0}),
                           ("EE", {"a": 1.5, "b": 1.5})):
        spec = build_family(family, params, 6, 8)
        assert np.all(spec.h >= 0) and np.all(spec.h <= 1)
        assert np.all(spec.h[:, :1] >= spec.h)  # first column maximal per row
        if family in ("PE", "EE"):
            assert np.all(np.diff(spec.h[:, 1:], axis=1) < 0)


def test_be_column_homogeneity():
    spec = build_family("BE", {"mu": 3.3}, 5, 9)
    assert np.all(spec.h[:, 1:] == spec.h[0, 1])


def test_zero_variance_flagging():
    with pytest.warns(RuntimeWarning, match="zero"):
        spec = build_family("EE", {"a": 0.01, "b": 0.01}, 8, 8)
    assert spec.has_zero_variance_entries


def test_sampler_degenerate_cases():
    rng = np.random.default_rng(0)
    spec = custom_spec(np.zeros((3, 3)))
    assert np.all(sample_state_matrix(spec, rng).entries == 0.0)

    b = np.zeros((3, 3))
    b[0, 0] = 3.0
    spec = custom_spec(np.zeros((3, 3)), b=b)
    sampled = sample_state_matrix(spec, rng).entries
    assert sampled[0, 0] == 3.0


def test_sampler_moments():
    # per-entry mean within 5*sqrt(h/n), variance ratio within 1 +- 10/sqrt(n)
    rng = np.random.default_rng(42)
    spec = build_family("BE", {"mu": 1.0}, 16, 16)
    n = 10_000
    mats = sample_state_matrices(spec, n, rng)
    mean = mats.mean(axis=0)
    var = mats.var(axis=0, ddof=1)
    assert np.all(np.abs(mean - spec.b) < 5.0 * np.sqrt(spec.h / n))
    band = 10.0 / np.sqrt(n)
    assert np.all(var / spec.h > 1 - band) and np.all(var / spec.h < 1 + band)
    # higher columns carry variance 1/(1+mu) = 0.5
    assert abs(mats[:, 3, 5].var(ddof=1) - 0.5) < 5 * 0.5 * np.sqrt(2.0 / n)


def test_sampler_complex_beta2():
    rng = np.random.default_rng(1)
    spec = build_family("BE", {"mu": 1.0}, 8, 8, beta=2)
    mats = sample_state_matrices(spec, 4000, rng)
    assert np.iscomplexobj(mats)
    # real and imaginary parts each carry variance h
    v_re = mats[:, 2, 3].real.var(ddof=1)
    v_im = mats[:, 2, 3].imag.var(ddof=1)
    assert abs(v_re - 0.5) < 0.06 and abs(v_im - 0.5) < 0.06


def test_channel_trivial_cases():
    rng = np.random.default_rng(2)
    draws = np.array([channel_demo_sample(1.0, 0.0, (1.0, 5.0, 1.0, 1.0), rng)[0]
                      for _ in range(4000)])
    assert abs(draws.var(ddof=1) - 1.0) < 0.12  # only sigma_a enters

    assert channel_demo_sample(1.0, 0.0, (0.0, 0.0, 0.0, 0.0), rng) == (0.0, 0.0)

    with pytest.raises(InvalidArgumentError, match="normalized"):
        channel_demo_sample(1.0, 1.0, (1.0, 1.0, 1.0, 1.0), rng)


def test_channel_variance_against_analytic():
    rng = np.random.default_rng(3)
    a = g = 1.0 / np.sqrt(2.0)
    n = 100_000
    draws = np.array([channel_demo_sample(a, g, (1.0, 1.0, 1.0, 1.0), rng)[0]
                      for _ in range(n)])
    target = a**2 + g**2  # alpha^2 sigma_a^2 + gamma^2 sigma_b^2 = 1
    tol = 5.0 * target * np.sqrt(2.0 / n)
    assert abs(draws.var(ddof=1) - target) < tol


def test_channel_marginals_are_gaussian():
    rng = np.random.default_rng(4)
    a, g = 0.6, 0.8
    draws = np.array([channel_demo_sample(a, g, (1.0, 0.5, 2.0, 1.0), rng)
                      for _ in range(10_000)])
    for col in (0, 1):
        assert sps.normaltest(draws[:, col]).pvalue > 0.01


def test_dump_matrices(tmp_path):
    rng = np.random.default_rng(6)
    spec = build_family("BE", {"mu": 2.0}, 3, 4)
    mats = sample_state_matrices(spec, 5, rng)
    from entroflow.ensembles import dump_matrices

    path = tmp_path / "mats.csv"
    dump_matrices(mats, str(path))
    loaded = np.loadtxt(path, delimiter=",")
    np.testing.assert_allclose(loaded, mats.reshape(5, -1))

    npy = tmp_path / "mats.npy"
    dump_matrices(mats, str(npy), fmt="npy")
    np.testing.assert_array_equal(np.load(npy), mats)

    with pytest.raises(InvalidArgumentError):
        dump_matrices(mats, str(path), fmt="hdf5")


def test_spec_config_block():
    spec = build_family("PE", {"a": 2.0, "b": 3.0}, 4, 6, beta=2)
    cfg = spec.to_config()
    assert cfg == {"family": "PE", "params": {"a": 2.0, "b": 3.0},
                   "N": 4, "N_nu": 6, "beta": 2}


def test_channel_marginal_density_matches_histogram():
    rng = np.random.default_rng(5)
    a, g = 0.6, 0.8
    draws = np.array([channel_demo_sample(a, g, (1.0, 0.5, 2.0, 1.0), rng)[0]
                      for _ in range(50_000)])
    grid = np.linspace(-3, 3, 25)
    dens = channel_marginal_density(grid, a, g, 1.0, 0.5)
    hist, edges = np.histogram(draws, bins=np.linspace(-3, 3, 25), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    np.testing.assert_allclose(hist, channel_marginal_density(centers, a, g, 1.0, 0.5),
                               atol=0.03)
    total = np.trapezoid(channel_marginal_density(np.linspace(-8, 8, 2001), a, g, 1.0, 0.5),
                         np.linspace(-8, 8, 2001))
    assert abs(total - 1.0) < 1e-6
    assert dens.shape == grid.shape
