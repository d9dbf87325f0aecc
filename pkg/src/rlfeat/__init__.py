"""Random linear features under ridge regression, at desk scale.

Closed-form learning curves and their bias/variance decomposition, the
analytic eigenvalue density of the feature Gram matrix, and a seeded Monte
Carlo simulator for checking both — plus a config-driven sweep runner, an
HTTP service, and a command-line client.
"""

from .errors import (
    ConfigParseError,
    ConfigValidationError,
    DegenerateTeacher,
    DimensionOverflow,
    EigenFailure,
    MomentsUnresolved,
    NoAdmissibleRoot,
    NoEdgeFound,
    NoPhysicalRoot,
    NotCentered,
    RlfeatError,
    SingularSystem,
    SolveFailure,
)
from .model import (
    ModelConfig,
    TeacherMoments,
    TEACHERS,
    config_from_snr,
    sigma_y2,
)
from .theory import (
    Regime,
    TheoryResult,
    chi_finite_lambda,
    classify_regime,
    closed_form,
    is_divergent,
    theory_finite_lambda,
)
from .spectrum import (
    SpectrumResult,
    f_zero,
    resolvent_nu,
    spectral_density,
    support_edges,
)
from .simulate import (
    EmpiricalSpectrum,
    SimEstimate,
    Stat,
    TrialResult,
    default_trials,
    empirical_spectrum,
    estimate,
    merge_estimates,
    run_trial,
    sample_instance,
)
from .sweep import SweepResult, SweepSpec, load_config, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "DegenerateTeacher",
    "DimensionOverflow",
    "EigenFailure",
    "EmpiricalSpectrum",
    "ModelConfig",
    "MomentsUnresolved",
    "NoAdmissibleRoot",
    "NoEdgeFound",
    "NoPhysicalRoot",
    "NotCentered",
    "Regime",
    "RlfeatError",
    "SimEstimate",
    "SingularSystem",
    "SolveFailure",
    "SpectrumResult",
    "Stat",
    "SweepResult",
    "SweepSpec",
    "TEACHERS",
    "TeacherMoments",
    "TheoryResult",
    "TrialResult",
    "chi_finite_lambda",
    "classify_regime",
    "closed_form",
    "config_from_snr",
    "default_trials",
    "empirical_spectrum",
    "resolvent_nu",
    "estimate",
    "f_zero",
    "is_divergent",
    "load_config",
    "merge_estimates",
    "run_sweep",
    "run_trial",
    "sample_instance",
    "sigma_y2",
    "spectral_density",
    "support_edges",
    "theory_finite_lambda",
    "__version__",
]
