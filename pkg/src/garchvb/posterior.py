"""Unnormalized log-posterior targets shared by the VB and MCMC code."""

import numpy as np

from .model import check_series, loglik_and_grad
from .params import InnovationKind, grad_log_prior, log_prior

__all__ = ["GarchTarget"]


class GarchTarget:
    """``log L(theta; y[window]) + log prior(theta)`` for a GARCH(1,1) model.

    Parameters
    ----------
    y : array_like
        Full observed history.
    kind : InnovationKind or str
    window : tuple (start, stop), optional
        Likelihood terms summed over ``y[start:stop]`` only; the variance
        recursion still runs over ``y[:stop]``.
    prior : VariationalState, optional
        Replace the default prior by this Gaussian density (the UVB
        pseudo-prior).
    include_likelihood : bool
        When False the target is the prior alone.
    """

    def __init__(self, y, kind, window=None, prior=None, include_likelihood=True):
        self.kind = InnovationKind.parse(kind)
        self.y = check_series(y)
        self.window = window
        self.prior = prior
        self.include_likelihood = include_likelihood
        if prior is not None and prior.dim != self.kind.dim:
            raise ValueError(
                f"pseudo-prior has dimension {prior.dim}, model needs {self.kind.dim}"
            )

    @property
    def dim(self):
        return self.kind.dim

    def _prior(self, theta, need_grad):
        if self.prior is None:
            lp = float(log_prior(theta, self.kind))
            return lp, (grad_log_prior(theta, self.kind) if need_grad else None)
        lp = float(self.prior.log_density(theta))
        return lp, (self.prior.grad_theta_log_density(theta) if need_grad else None)

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=float)
        lp, _ = self._prior(theta, False)
        if not self.include_likelihood:
            return lp
        ll, _ = loglik_and_grad(
            theta, self.y, self.kind, self.window, need_grad=False, validate=False
        )
        return ll + lp

    def log_density_and_grad(self, theta):
        theta = np.asarray(theta, dtype=float)
        lp, glp = self._prior(theta, True)
        if not self.include_likelihood:
            return lp, glp
        ll, gll = loglik_and_grad(theta, self.y, self.kind, self.window, validate=False)
        return ll + lp, gll + glp
