"""entroflow: entanglement-entropy distributions of Gaussian state ensembles.

Desk-scale Monte-Carlo plus the closed-form theory for how the purity and
von Neumann entropy distributions of bipartite pure states evolve with the
ensemble complexity parameter Y.
"""

from .complexity import ComplexityPoint, complexity_closed_form, complexity_from_spec, invert_to_parameter
from .ensembles import (
    EnsembleSpec,
    StateMatrix,
    build_family,
    channel_demo_sample,
    channel_marginal_density,
    custom_spec,
    sample_state_matrices,
    sample_state_matrix,
)
from .entropies import EntropyRecord, entropy_record, log_moments, moments, renyi, von_neumann
from .experiments import ResultSet, SweepConfig, emit_outputs, run_sweep
from .spectra import (
    SchmidtSpectrum,
    SpectrumTrajectory,
    schmidt_spectra_batch,
    schmidt_spectrum,
    sde_evolve,
    sde_steady_state_sample,
)
from .statistics import (
    EmpiricalDistribution,
    FitResult,
    empirical_distribution,
    fit_family,
    select_best_fit,
    sigma_curve,
)
from .theory import (
    TheoryContext,
    kummer_1f1,
    kummer_1f1_large_order,
    moment_ode_s2,
    purity_density,
    purity_psi,
    stationary_logdensity,
    variance_ode_r1,
    variance_ode_s2,
    vn_psi,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexityPoint",
    "EmpiricalDistribution",
    "EnsembleSpec",
    "EntropyRecord",
    "FitResult",
    "ResultSet",
    "SchmidtSpectrum",
    "SpectrumTrajectory",
    "StateMatrix",
    "SweepConfig",
    "TheoryContext",
    "build_family",
    "channel_demo_sample",
    "channel_marginal_density",
    "complexity_closed_form",
    "complexity_from_spec",
    "custom_spec",
    "emit_outputs",
    "empirical_distribution",
    "entropy_record",
    "fit_family",
    "invert_to_parameter",
    "kummer_1f1",
    "kummer_1f1_large_order",
    "log_moments",
    "moment_ode_s2",
    "moments",
    "purity_density",
    "purity_psi",
    "renyi",
    "run_sweep",
    "sample_state_matrices",
    "sample_state_matrix",
    "schmidt_spectra_batch",
    "schmidt_spectrum",
    "sde_evolve",
    "sde_steady_state_sample",
    "select_best_fit",
    "sigma_curve",
    "stationary_logdensity",
    "variance_ode_r1",
    "variance_ode_s2",
    "von_neumann",
    "vn_psi",
]
