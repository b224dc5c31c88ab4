"""Bayesian optimal two-stage warranty lengths from Type-II unified hybrid censored data."""

__version__ = "0.1.0"

from .bayes import (NormalGammaPrior, PosteriorChain, SamplerConfig, fit, log_posterior,
                    mh_sample, predictive_cdf, predictive_quantile)
from .censoring import CensoredSample, UhcsScheme, classify, simulate
from .fisher import InfoMatrix, info_uhcs
from .lifetime import LogNormalParams
from .optimizer import OptimizationResult, optimize, sweep_a
from .warranty import (WarrantyLengths, WarrantyPolicy, benefit, expected_utility,
                       inner_utility, rebate, solve_A1)

__all__ = [
    "CensoredSample", "InfoMatrix", "LogNormalParams", "NormalGammaPrior",
    "OptimizationResult", "PosteriorChain", "SamplerConfig", "UhcsScheme",
    "WarrantyLengths", "WarrantyPolicy", "benefit", "classify", "expected_utility",
    "fit", "info_uhcs", "inner_utility", "log_posterior", "mh_sample", "optimize",
    "predictive_cdf", "predictive_quantile", "rebate", "simulate", "solve_A1", "sweep_a",
]
