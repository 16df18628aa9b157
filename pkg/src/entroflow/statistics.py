"""Empirical distributions, candidate-family fitting, sigma curves.

Fit protocol: parameters come from maximum likelihood (scipy's derivative-free
fitters), model selection from the residual sum of squares between the fitted
pdf and the shared histogram density.  Candidate families and their shapes
follow scipy.stats conventions:

    LogGamma  f(r; c) = exp(c*r - e^r) / Gamma(c)
    Gamma     f(r; v) = r^(v-1) e^(-r) / Gamma(v)
    Beta      f(r; u, v) = r^(u-1) (1-r)^(v-1) / B(u, v)
    Normal    f(r) = exp(-r^2/2) / sqrt(2*pi)

with r = (x - loc)/scale throughout.  Beta is fitted on min-max rescaled data
with a 1% margin and mapped back through the affine transform.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import (
    AggregateFitError,
    DegenerateInputError,
    FitFailureError,
    InsufficientDataError,
    InvalidArgumentError,
)

FAMILY_DISTS = {
    "LogGamma": sps.loggamma,
    "Gamma": sps.gamma,
    "Beta": sps.beta,
    "Normal": sps.norm,
}
N_SHAPE = {"LogGamma": 1, "Gamma": 1, "Beta": 2, "Normal": 0}
DEFAULT_FAMILIES = ("LogGamma", "Gamma", "Beta", "Normal")

_MIN_SAMPLES = 100
_BETA_MARGIN = 0.01


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Histogram of one measure over an ensemble, with the raw samples kept."""

    edges: np.ndarray
    counts: np.ndarray
    n: int
    mean: float
    std: float
    measure: str
    centered: bool
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        return self.counts / (self.n * widths)


@dataclass(frozen=True)
class FitResult:
    """One fitted family with its location/scale/shape and RSS score."""

    family: str
    loc: float
    scale: float
    shape: tuple[float, ...]
    rss: float
    n_bins: int

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return FAMILY_DISTS[self.family].pdf(x, *self.shape, loc=self.loc, scale=self.scale)


def empirical_distribution(samples: np.ndarray, binning: str | int = "fd",
                           center: bool = False, measure: str = "") -> EmpiricalDistribution:
    """Freedman-Diaconis (default) histogram; center subtracts the sample mean."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < _MIN_SAMPLES:
        raise InsufficientDataError(f"need at least {_MIN_SAMPLES} samples, got {samples.size}")
    mean = float(samples.mean())
    data = samples - mean if center else samples
    std = float(samples.std(ddof=1))
    if data.max() == data.min():
        c = float(data[0])
        edges = np.array([c - 0.5, c + 0.5])
        counts = np.array([data.size])
    else:
        edges = np.histogram_bin_edges(data, bins=binning)
        counts, _ = np.histogram(data, bins=edges)
    return EmpiricalDistribution(edges=edges, counts=counts, n=data.size,
                                 mean=mean, std=std, measure=measure,
                                 centered=center, samples=data)


def _mle(family: str, data: np.ndarray):
    """Family MLE returning (loc, scale, shapes) in the original data units."""
    dist = FAMILY_DISTS[family]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if family == "Normal":
            loc, scale = dist.fit(data)
            return loc, scale, ()
        if family == "Beta":
            # shapes are fitted on min-max rescaled data whose support is the
            # data range padded by a 1% margin; the affine map back to data
            # units supplies the unbounded loc/scale reported in the result
            lo, hi = data.min(), data.max()
            span = hi - lo
            z = (data - lo) / span * (1 - 2 * _BETA_MARGIN) + _BETA_MARGIN
            u, v, loc_z, scale_z = dist.fit(z, floc=0.0, fscale=1.0)
            stretch = span / (1 - 2 * _BETA_MARGIN)
            loc = lo + (loc_z - _BETA_MARGIN) * stretch
            scale = scale_z * stretch
            return loc, scale, (u, v)
        shape, loc, scale = dist.fit(data)
        return loc, scale, (shape,)


def fit_family(dist: EmpiricalDistribution, family: str) -> FitResult:
    """MLE parameters plus RSS against the histogram density of `dist`."""
    if family not in FAMILY_DISTS:
        raise InvalidArgumentError(f"unknown family {family!r}; choose from {list(FAMILY_DISTS)}")
    data = dist.samples
    if data is None or data.size == 0:
        raise InvalidArgumentError("distribution carries no samples to fit")
    if data.max() == data.min():
        raise DegenerateInputError("samples are all equal; nothing to fit")
    try:
        loc, scale, shape = _mle(family, data)
    except Exception as exc:  # scipy raises a zoo of error types here
        raise FitFailureError(f"{family} MLE failed: {exc}") from exc
    if not np.isfinite([loc, scale, *shape]).all() or scale <= 0:
        raise FitFailureError(f"{family} MLE produced invalid parameters "
                              f"loc={loc}, scale={scale}, shape={shape}")
    result = FitResult(family=family, loc=float(loc), scale=float(scale),
                       shape=tuple(float(s) for s in shape), rss=0.0,
                       n_bins=dist.counts.size)
    pdf_vals = result.pdf(dist.centers)
    pdf_vals = np.where(np.isfinite(pdf_vals), pdf_vals, 0.0)
    rss = float(np.sum((pdf_vals - dist.density) ** 2))
    if not np.isfinite(rss):
        raise FitFailureError(f"{family} fit produced non-finite RSS")
    return FitResult(family=result.family, loc=result.loc, scale=result.scale,
                     shape=result.shape, rss=rss, n_bins=result.n_bins)


def _rss_difference_z(dist: EmpiricalDistribution, fit_a: FitResult, fit_b: FitResult) -> float:
    """Significance of RSS(a) - RSS(b) under per-bin Poisson histogram noise.

    With observed density e_i, RSS(a) - RSS(b) = sum (b_i - a_i)(2 e_i - a_i - b_i),
    whose variance over the histogram noise is 4 * sum (a_i - b_i)^2 var(e_i)
    with var(e_i) ~ e_i / (n * w_i).
    """
    centers = dist.centers
    a = np.where(np.isfinite(fit_a.pdf(centers)), fit_a.pdf(centers), 0.0)
    b = np.where(np.isfinite(fit_b.pdf(centers)), fit_b.pdf(centers), 0.0)
    widths = np.diff(dist.edges)
    var_e = dist.density / (dist.n * widths)
    sd = 2.0 * float(np.sqrt(np.sum((a - b) ** 2 * var_e)))
    if sd == 0.0:
        return 0.0
    return abs(fit_a.rss - fit_b.rss) / sd


def select_best_fit(dist: EmpiricalDistribution,
                    families: tuple[str, ...] = DEFAULT_FAMILIES,
                    tie_z: float = 2.0) -> FitResult:
    """Minimum-RSS fit over the candidates; ties go to fewer shape parameters.

    RSS values are noisy functionals of the histogram, so exact equality never
    happens; two candidates are tied when their RSS difference is within tie_z
    standard deviations of its own sampling noise.  Among the fits tied with
    the RSS minimizer the one with the fewest shape parameters wins, which
    keeps an extra shape parameter from being rewarded for chasing bin noise.
    """
    if len(families) < 2:
        raise InvalidArgumentError("need at least two candidate families")
    fits: list[FitResult] = []
    diagnostics: dict[str, str] = {}
    for family in families:
        try:
            fits.append(fit_family(dist, family))
        except DegenerateInputError:
            raise
        except Exception as exc:
            diagnostics[family] = str(exc)
    if not fits:
        raise AggregateFitError(diagnostics)
    leader = min(fits, key=lambda f: f.rss)
    tied = [f for f in fits if f is leader or _rss_difference_z(dist, f, leader) <= tie_z]
    return min(tied, key=lambda f: (N_SHAPE[f.family], f.rss))


def sigma_curve(runs: list[tuple[float, dict[str, np.ndarray]]]) -> dict[str, dict[str, np.ndarray]]:
    """Normalized standard-deviation curves sigma(Y)/sigma_max per measure.

    runs: list of (Y, {measure: samples}); needs >= 5 distinct Y spanning at
    least two decades.  Returns {measure: {"Y", "sigma", "normalized"}}.
    """
    ys = np.array([y for y, _ in runs], dtype=float)
    if np.unique(ys).size < 5:
        raise InsufficientDataError(f"need >= 5 distinct Y points, got {np.unique(ys).size}")
    positive = ys[ys > 0]
    if positive.size == 0 or positive.max() / positive.min() < 100.0:
        raise InsufficientDataError("Y grid must span at least two decades")
    order = np.argsort(ys)
    measures = sorted({m for _, d in runs for m in d})
    out: dict[str, dict[str, np.ndarray]] = {}
    for m in measures:
        sig = np.array([float(np.std(runs[i][1][m], ddof=1)) for i in order])
        out[m] = {"Y": ys[order], "sigma": sig, "normalized": sig / sig.max()}
    return out
