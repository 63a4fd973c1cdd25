"""scikit-learn style estimators wrapping the functional API.

>>> from garchvb import GarchVB
>>> est = GarchVB(innovation="gaussian", method="rt").fit(y)   # doctest: +SKIP
>>> draws = est.sample(10_000)                                  # doctest: +SKIP
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .mcmc import McmcConfig, diagnostics, mle, rwmh
from .model import loglik_and_grad, _sigma2
from .params import InnovationKind, constrained_array, param_names, to_constrained
from .sequential import SequentialMode, seqsvb_update, uvb_update
from .validation import as_seed, check_returns
from .variational import Method, OptimizerConfig, fit_svb

__all__ = ["GarchVB", "GarchMCMC", "SequentialGarchVB", "GarchMLE"]

_DEFAULT_SAMPLES = {Method.CV: 10, Method.MEAN_FIELD_CV: 10, Method.RT: 5}


class _PosteriorMixin:
    """Shared helpers for estimators exposing a Gaussian ``state_`` in theta-space."""

    def sample(self, n_draws=10_000, random_state=None):
        """Draws of the constrained parameters, shape ``(n_draws, d)``."""
        check_is_fitted(self, "state_")
        rng = np.random.default_rng(as_seed(random_state))
        return constrained_array(self.state_.sample(n_draws, rng), self.kind_)

    def posterior_mean(self, n_draws=10_000, random_state=0):
        return dict(zip(self.param_names_, self.sample(n_draws, random_state).mean(axis=0)))

    def conditional_variance(self, y):
        """Conditional variance path evaluated at the variational mean."""
        check_is_fitted(self, "state_")
        return _sigma2(self.state_.mu, check_returns(y))


class GarchVB(_PosteriorMixin, BaseEstimator):
    """Stochastic variational Bayes for GARCH(1,1).

    Parameters
    ----------
    innovation : {"gaussian", "t", "skewt"}
    method : {"cv", "rt", "mfcv"}
        Control variates (precision factor), reparameterization trick
        (covariance factor) or mean-field control variates.
    n_samples : int, optional
        Monte Carlo draws per iteration; 10 for control variates, 5 for the
        reparameterization trick when omitted.
    beta1, beta2, eta0, tau, t_w, patience, max_iters
        Optimizer settings, see :class:`OptimizerConfig`.
    random_state : int or None
    warm_start : bool
        Reuse the previous ``state_`` as initialization on the next ``fit``.

    Attributes
    ----------
    state_ : VariationalState
    result_ : FitResult
    elbo_trace_ : ndarray
    n_iter_ : int
    """

    def __init__(self, innovation="gaussian", method="rt", n_samples=None, beta1=0.9,
                 beta2=0.9, eta0=0.02, tau=1000.0, t_w=25, patience=100, max_iters=10_000,
                 random_state=None, warm_start=False):
        self.innovation = innovation
        self.method = method
        self.n_samples = n_samples
        self.beta1 = beta1
        self.beta2 = beta2
        self.eta0 = eta0
        self.tau = tau
        self.t_w = t_w
        self.patience = patience
        self.max_iters = max_iters
        self.random_state = random_state
        self.warm_start = warm_start

    def _config(self):
        method = Method.parse(self.method)
        return OptimizerConfig(
            beta1=self.beta1, beta2=self.beta2, eta0=self.eta0, tau=self.tau, t_w=self.t_w,
            patience=self.patience,
            n_samples=self.n_samples or _DEFAULT_SAMPLES[method],
            max_iters=self.max_iters, seed=as_seed(self.random_state),
        )

    def fit(self, y, init=None):
        y = check_returns(y)
        self.kind_ = InnovationKind.parse(self.innovation)
        if init is None and self.warm_start and hasattr(self, "state_"):
            init = self.state_
        self.result_ = fit_svb(y, self.kind_, self.method, self._config(), init=init)
        self.state_ = self.result_.state
        self.elbo_trace_ = self.result_.elbo_trace
        self.n_iter_ = self.result_.iterations
        self.param_names_ = param_names(self.kind_)
        return self

    @property
    def elbo_(self):
        check_is_fitted(self, "result_")
        return self.result_.final_elbo()

    def score(self, y):
        """Log-likelihood of ``y`` at the variational mean."""
        check_is_fitted(self, "state_")
        return loglik_and_grad(self.state_.mu, check_returns(y), self.kind_,
                               need_grad=False)[0]


class GarchMCMC(BaseEstimator):
    """Random-walk Metropolis-Hastings posterior sampler (reference posterior).

    Attributes
    ----------
    samples_ : ndarray, shape (n_iter - burnin, d)
        Constrained draws.
    theta_ : ndarray
        Unconstrained draws.
    acceptance_rate_ : float
    mle_ : MleResult
    """

    def __init__(self, innovation="gaussian", n_iter=50_000, burnin=None,
                 proposal_scale=None, random_state=None):
        self.innovation = innovation
        self.n_iter = n_iter
        self.burnin = burnin
        self.proposal_scale = proposal_scale
        self.random_state = random_state

    def fit(self, y):
        y = check_returns(y)
        self.kind_ = InnovationKind.parse(self.innovation)
        config = McmcConfig(self.n_iter, self.burnin, self.proposal_scale,
                            as_seed(self.random_state))
        self.mle_ = mle(y, self.kind_)
        self.posterior_ = rwmh(y, self.kind_, config, mle_result=self.mle_)
        self.samples_ = self.posterior_.samples
        self.theta_ = self.posterior_.theta
        self.acceptance_rate_ = self.posterior_.acceptance_rate
        self.param_names_ = param_names(self.kind_)
        return self

    def diagnostics(self):
        check_is_fitted(self, "samples_")
        return diagnostics(self.posterior_)

    def posterior_mean(self):
        check_is_fitted(self, "samples_")
        return dict(zip(self.param_names_, self.samples_.mean(axis=0)))


class GarchMLE(BaseEstimator):
    """Maximum likelihood fit with information criteria."""

    def __init__(self, innovation="gaussian"):
        self.innovation = innovation

    def fit(self, y):
        from .evaluation import aic_bic

        y = check_returns(y)
        self.kind_ = InnovationKind.parse(self.innovation)
        self.result_ = mle(y, self.kind_)
        self.theta_ = self.result_.theta
        self.params_ = to_constrained(self.theta_, self.kind_)
        self.loglik_ = self.result_.loglik
        self.aic_, self.bic_ = aic_bic(self.loglik_, self.kind_.dim, y.size)
        return self


class SequentialGarchVB(_PosteriorMixin, BaseEstimator):
    """Streaming posterior updates via UVB or Seq-SVB.

    ``fit`` runs batch SVB on the initial window; each ``partial_fit`` call
    appends a block of new observations and performs one update.
    """

    def __init__(self, innovation="skewt", mode="uvb", n_samples=5, eta0=0.02, t_w=25,
                 patience=100, max_iters=10_000, random_state=None):
        self.innovation = innovation
        self.mode = mode
        self.n_samples = n_samples
        self.eta0 = eta0
        self.t_w = t_w
        self.patience = patience
        self.max_iters = max_iters
        self.random_state = random_state

    def _config(self, k):
        seed = as_seed(self.random_state)
        if seed is not None:
            seed = int(np.random.SeedSequence([seed, k]).generate_state(1, dtype=np.uint32)[0])
        return OptimizerConfig(eta0=self.eta0, t_w=self.t_w, patience=self.patience,
                               n_samples=self.n_samples, max_iters=self.max_iters, seed=seed)

    def fit(self, y):
        y = check_returns(y)
        self.kind_ = InnovationKind.parse(self.innovation)
        self.param_names_ = param_names(self.kind_)
        self.mode_ = SequentialMode.parse(self.mode)
        self.y_ = y.copy()
        first = fit_svb(y, self.kind_, Method.RT, self._config(0))
        self.history_ = [first]
        self.state_ = first.state
        return self

    def partial_fit(self, y_new):
        """Append ``y_new`` and update the posterior once."""
        if not hasattr(self, "state_"):
            return self.fit(y_new)
        y_new = check_returns(y_new, min_length=1)
        start = self.y_.size
        self.y_ = np.concatenate([self.y_, y_new])
        cfg = self._config(len(self.history_))
        if self.mode_ is SequentialMode.UVB:
            res = uvb_update(self.state_, self.y_, (start, self.y_.size), self.kind_, cfg)
        else:
            res = seqsvb_update(self.state_, self.y_, self.y_.size, self.kind_, cfg)
        self.history_.append(res)
        self.state_ = res.state
        return self
