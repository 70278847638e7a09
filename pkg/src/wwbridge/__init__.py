"""Simulation and analysis of fractional Wiener-Weierstrass bridges."""

from .covariance import (
    CovCurve,
    covariance_curve,
    covariance_matrix,
    covariance_variation,
    increment_second_moment,
    ww_covariance,
)
from .experiments import EXPERIMENTS, ExperimentConfig, ExperimentResult, run
from .fractal import (
    BaseFunction,
    DeterministicFractal,
    convolve_bridge,
    eval_deterministic,
    holder_scan,
    kernel_base,
    kernel_psi,
    sample_deterministic,
)
from .gaussian import (
    KappaSpec,
    Method,
    SamplerConfig,
    bridge_covariance,
    fgn_autocovariance,
    kappa_eval,
    sample_fbm,
    to_bridge,
)
from .grid import BadicGrid, GridPath, Regime, WWParams, dyadic_refine, frac_index
from .variation import (
    DigitSequence,
    VariationCurve,
    ZMomentEstimate,
    normalized_qv,
    phi_variation,
    pth_variation_curve,
    roughness_estimate,
    validity_check,
    z_moment,
)

__version__ = "0.1.0"
