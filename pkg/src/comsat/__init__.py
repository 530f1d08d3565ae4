"""Coverage and rate of coordinated multi-satellite joint transmission."""

from .analytic import (
    CoverageResult,
    QuadratureSpec,
    RateResult,
    coverage,
    coverage_probability,
    ergodic_rate,
    interference_laplace,
    laplace_exponent,
    mean_channel_sum,
    rate_report,
    spectral_efficiency,
)
from .geometry import (
    ElevationGeometry,
    SystemParams,
    avg_uts_per_sap,
    cap_area,
    lowest_serving_altitude,
    max_serving_distance,
    serving_distance_cdf,
    serving_distance_pdf,
)
from .montecarlo import (
    Constellation,
    EstimatorResult,
    TrialOutcome,
    classify,
    estimate_coverage,
    estimate_nearest_sat_coverage,
    estimate_rate_and_se,
    run_trial,
    sample_constellation,
)

__version__ = "0.1.0"
