"""Causal mediation effects identified from heterogeneous treatment effects.

Subgroup-level treatment effects on a mediator and an outcome are regressed
on each other; the slope, corrected for the sampling noise in the mediator
effects, times the average mediator effect is the average causal mediation
effect (ACME).
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (
    EffectDataset, IndividualDataset, LatentEffects, SubgroupEffect, dataset_from_arrays,
    validate_dataset, weights_from_sizes,
)
from .errors import HetmedError, InputError, NumericalError
from .estimators import (
    SimexConfig, SimexFit, SlopeFit, adjusted_fit, attenuation_corrected, attenuation_lambda,
    bces_bootstrap, bces_estimate, estimate_slope, inter_study_variance, ols_slope, polynomial_fit,
    simex_estimate,
)
from .inference import (
    GammaAggregate, MediationResult, acme, aggregate_gamma, analyze, conservative_ci,
    heterogeneity_stats, iu_test,
)

__all__ = [
    "KERNEL_BACKEND", "EffectDataset", "IndividualDataset", "LatentEffects", "SubgroupEffect",
    "dataset_from_arrays", "validate_dataset", "weights_from_sizes", "HetmedError", "InputError",
    "NumericalError", "SimexConfig", "SimexFit", "SlopeFit", "adjusted_fit", "attenuation_corrected",
    "attenuation_lambda", "bces_bootstrap", "bces_estimate", "estimate_slope", "inter_study_variance",
    "ols_slope", "polynomial_fit", "simex_estimate", "GammaAggregate", "MediationResult", "acme",
    "aggregate_gamma", "analyze", "conservative_ci", "heterogeneity_stats", "iu_test",
]
