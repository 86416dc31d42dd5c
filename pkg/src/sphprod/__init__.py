"""Simulation and verification lab for spectra of spherical-ensemble products.

Samples eigenvalues of products of independent spherical-ensemble matrices
(A^{-1}B with complex Ginibre A, B) through two interchangeable routes -- the
dense matrix pipeline and the O(n*m) radial decomposition -- and checks the
limiting law of the scaled spectra against its closed forms.
"""

from .distributions import (
    MomentPair,
    RandomStream,
    log_gap,
    log_sample_radius_factor,
    mean_log_gap_mc,
    radius_factor_cdf,
    radius_factor_moments,
    regularized_incomplete_beta,
    sample_radius_factor,
    sample_std_complex_gaussian,
)
from .ensembles import (
    EnsembleConfig,
    MRule,
    ProductSample,
    sample_ginibre,
    sample_product,
    sample_spherical,
    spectral_sample,
    spectral_samples,
)
from .linalg import (
    NoConvergenceError,
    SingularMatrixError,
    Spectrum,
    condition_estimate,
    eigenvalues,
    lu_solve,
    matmul,
)
from .radial import (
    ExactUnavailableError,
    RadialConfig,
    concentration_stat,
    mean_scaled_radius_cdf,
    radial_spectra,
    sample_radial_spectrum,
    sample_scaled_radius,
)
from .stats import (
    EmpiricalCDF,
    KSResult,
    OrderingReport,
    ScaledSpectrum,
    SurrogateAnglesWarning,
    ZeroEigenvalueError,
    angle_uniformity,
    ks_one_sample,
    ks_two_sample,
    ordering_report,
    scaled_spectrum,
)
from .weightfn import (
    FeasibilityError,
    QuadratureError,
    RadiusDensity,
    WeightTable,
    esd_limit_density,
    eval_weight,
    limit_complex_density,
    limit_polar_density,
    limit_radial_cdf,
    polar_to_complex,
    radius_density,
    weight_table,
)

__version__ = "0.1.0"
