"""Spiked-model statistics and sensor-network failure diagnosis."""

from .detection import (
    ConfigError,
    DetectionConfig,
    DetectionReport,
    ObservabilityReport,
    detect,
    observability_thresholds,
    scale_largest,
    scale_smallest,
)
from .failure_models import (
    FailureScenario,
    NetworkModel,
    Spike,
    banded_ring_network,
    beta_from_mu_alpha,
    default_failure_variance,
    network_from_spec,
    node_failure_scenario,
    param_change_scenario,
)
from .fluctuations import (
    FluctuationLaw,
    c_matrix_mp,
    d_matrix,
    fluctuation_law,
    gaussian_logpdf,
    r_matrix,
    sample_gue,
    sample_joint_fluctuation,
)
from .localization import (
    LocalizationReport,
    LocalizeOptions,
    SpikeStatistics,
    localize_known,
    localize_unknown_amplitude,
    preselect,
    spike_statistics,
)
from .spectral_law import (
    MarchenkoPastur,
    OffSupportError,
    SpectralLaw,
    mp_edges,
    mp_stieltjes,
)
from .spectrum import SpikeSpectrum
from .spike_algebra import (
    InsideBulkError,
    NotSeparatedError,
    SpikeDescriptor,
    omega_hat_from_lambda,
    rho_of_omega_general,
    rho_of_omega_mp,
    separation_check,
    spike_descriptors,
    zeta_general,
    zeta_mp,
)
from .sim_harness import (
    ExperimentConfig,
    McCell,
    McResult,
    result_to_csv,
    run_detection_localization_sweep,
    run_histogram_experiment,
    sample_observation,
    trial_seed,
    whiten,
)
from .tracy_widom import tw2_cdf, tw2_cdf_quadrature, tw2_quantile

__version__ = "0.1.0"
