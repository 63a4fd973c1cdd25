"""Bayesian inference for GARCH(1,1) volatility models.

Batch stochastic variational Bayes (control-variate and
reparameterization-trick gradient estimators), sequential updating (UVB and
Seq-SVB) and a random-walk Metropolis-Hastings reference sampler, for
Gaussian, Student-t and skew-t innovations.
"""

__version__ = "0.1.0"

from .data import ReturnSeries, Source, load_returns, prices_to_returns, write_returns
from .estimators import GarchMCMC, GarchMLE, GarchVB, SequentialGarchVB
from .evaluation import accuracy, aic_bic, kde, summary_stats
from .exceptions import (ConstraintViolation, DegenerateSeries, DimensionMismatch, GarchVBError,
                         InsufficientSamples, NonFinite, ParseError, ProposalSingular,
                         WrongFactorization)
from .mcmc import McmcConfig, diagnostics, mle, rwmh
from .model import grad_log_likelihood, log_likelihood, skewt_constants, variance_recursion
from .params import GarchParams, InnovationKind, grad_log_prior, log_prior
from .sequential import SequentialMode, UpdateSchedule, run_sequential
from .simulate import SimConfig, simulate_garch
from .variational import Method, OptimizerConfig, VariationalState, fit_svb

__all__ = [
    "ReturnSeries", "Source", "load_returns", "prices_to_returns", "write_returns",
    "GarchMCMC", "GarchMLE", "GarchVB", "SequentialGarchVB",
    "accuracy", "aic_bic", "kde", "summary_stats",
    "ConstraintViolation", "DegenerateSeries", "DimensionMismatch", "GarchVBError",
    "InsufficientSamples", "NonFinite", "ParseError", "ProposalSingular", "WrongFactorization",
    "McmcConfig", "diagnostics", "mle", "rwmh",
    "grad_log_likelihood", "log_likelihood", "skewt_constants", "variance_recursion",
    "GarchParams", "InnovationKind", "grad_log_prior", "log_prior",
    "SequentialMode", "UpdateSchedule", "run_sequential",
    "SimConfig", "simulate_garch",
    "Method", "OptimizerConfig", "VariationalState", "fit_svb",
]
