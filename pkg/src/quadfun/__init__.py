"""Estimation of spectrally weighted quadratic functionals of distributions.

Given i.i.d. samples on the unit torus, this package estimates semi-inner
products, squared seminorms, and squared pseudometrics whose weights live on
the integer frequency lattice; evaluates the matching bias/variance/MSE
bounds and minimax-rate table; constructs the worst-case perturbation
densities behind the lower bounds; and runs deterministic Monte Carlo
studies that check the predicted convergence slopes at desk scale.
"""

from .densities import (
    ReferenceDensity,
    alternating_signs,
    density_eval,
    density_from_dict,
    density_from_json,
    density_to_dict,
    density_to_json,
    exact_product,
    l2_norm_sq,
    make_trig_density,
    make_worst_case,
    random_signs,
    sample,
    spectral_profile,
    uniform_density,
    validate_worst_case,
    weighted_norm_sq,
)
from .errors import (
    ConfigurationError,
    CoverageError,
    DataFormatError,
    DimensionError,
    DomainError,
    EstimationError,
    FitError,
    NonnegativityViolation,
    QuadfunError,
    RateError,
    SolverError,
    SupportError,
)
from .estimators import (
    EstimateReport,
    distance_sq,
    inner_product,
    norm_sq,
    select_zeta_closed_form,
    select_zeta_lecam,
)
from .frequency import Frequency, FrequencySet, lattice_ball
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    ExperimentRow,
    fit_rate,
    run_mse_study,
    run_worst_case_sweep,
    write_study_csv,
    write_study_sidecar,
)
from .spectral import SampleSet, SpectralProfile, basis_eval, empirical_cf, load_samples_csv
from .theory import (
    RatePrediction,
    bias_bound,
    lower_bound_rate,
    minimax_rate,
    mse_bound,
    rates_match_check,
    tv_bound,
    variance_bound,
)
from .weights import (
    WeightFamily,
    custom_weight_family,
    load_weight_table_csv,
    parse_weight_spec,
    strength_sum,
    strength_sums,
    tail_sup_ratio,
    variance_functional,
    weight_at,
    weight_family,
)

__version__ = "0.1.0"
