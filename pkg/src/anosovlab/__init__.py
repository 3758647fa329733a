"""Numerical laboratory for enhanced dissipation in hyperbolic dynamics.

Two engines under one roof:

* an exact Monte Carlo engine for the geodesic flow on a compact hyperbolic
  surface (unit tangent bundle realized as a matrix group quotient), with
  advection-diffusion paths, decay and mixing curves;
* a dense Fourier spectral engine for noisy transfer operators of hyperbolic
  torus maps and for advection-diffusion generators on the 2-torus, with
  spectra, gaps, resonance tracking and a contour-integral semigroup check.

A statistics layer extracts exponential rates, prefactor exponents, envelope
verdicts, equidistribution discrepancies and Lyapunov exponents; the `lab`
command line drives reproducible preset experiments.
"""

__version__ = "0.1.0"

from .geometry import (
    GroupElement,
    FuchsianGroup,
    FundamentalDomain,
    Observable,
    bolza_group,
    geodesic_flow,
    mobius_apply,
    reduce_to_domain,
    sample_uniform,
    smooth_observable,
)
from .flow import (
    DecayCurve,
    DiffusionConfig,
    ParticleEnsemble,
    correlation_curve,
    evolve_ensemble,
    l2_decay_curve,
    pointwise_solution,
    sample_ensemble,
    sample_neighborhood,
    sde_step,
)
from .spectral import (
    TorusMap,
    TruncatedOperator,
    build_advection_diffusion_generator,
    build_transfer_operator,
    gap_sweep,
    resonance_convergence,
    shear_sector_gaps,
    spectrum_and_gap,
)
from .contour import Contour, ContourQuadrature, semigroup_contour_check
from .rates import (
    DecayFit,
    LyapunovEstimate,
    RateSweep,
    build_dictionary,
    discrepancy,
    discrepancy_report,
    envelope_checks,
    fit_exponential,
    lyapunov_estimate,
    prefactor_exponent,
    uniformity_chi_square,
)
from .harness import ConfigError, ExperimentConfig, RunManifest, run_experiment
from .presets import list_presets, preset_config
