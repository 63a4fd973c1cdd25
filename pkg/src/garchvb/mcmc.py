"""Random-walk Metropolis-Hastings reference sampler and chain diagnostics."""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .exceptions import InsufficientSamples, ProposalSingular
from .model import check_series, loglik_and_grad
from .params import InnovationKind, constrained_array, param_names
from .posterior import GarchTarget
from .variational import default_init

__all__ = [
    "McmcConfig",
    "MleResult",
    "PosteriorSamples",
    "Diagnostics",
    "mle",
    "fd_hessian",
    "rwmh",
    "run_chain",
    "diagnostics",
    "effective_sample_size",
    "split_rhat",
]


@dataclass
class McmcConfig:
    iterations: int = 50_000
    burnin: Optional[int] = None
    proposal_scale: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.burnin is None:
            self.burnin = self.iterations // 10
        if self.iterations < 1 or not 0 <= self.burnin < self.iterations:
            raise ValueError("need 0 <= burnin < iterations")
        if self.proposal_scale is not None and self.proposal_scale <= 0:
            raise ValueError("proposal_scale must be positive")

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class MleResult:
    theta: np.ndarray
    hessian: np.ndarray
    loglik: float
    converged: bool
    grad_norm: float


@dataclass
class PosteriorSamples:
    """Post-burn-in draws; ``samples`` is constrained, ``theta`` unconstrained."""

    samples: np.ndarray
    theta: np.ndarray
    acceptance_rate: float
    kind: InnovationKind
    proposal_cov: np.ndarray = None
    proposal_fallback: bool = False

    @property
    def names(self):
        return param_names(self.kind)

    def column(self, name) -> np.ndarray:
        return self.samples[:, self.names.index(name)]


def fd_hessian(grad_fn, theta, step=1e-5) -> np.ndarray:
    """Symmetrized central-difference Jacobian of an analytic gradient."""
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    hess = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        hess[:, j] = (grad_fn(theta + e) - grad_fn(theta - e)) / (2.0 * step)
    return 0.5 * (hess + hess.T)


def mle(y, kind, theta0=None, gtol=1e-5, max_iter=5000) -> MleResult:
    """Maximum likelihood in theta-space with its curvature.

    Quasi-Newton ascent on the analytic gradient followed by a few Newton
    polishing steps with a finite-difference Hessian.
    """
    kind = InnovationKind.parse(kind)
    y = check_series(y)
    if theta0 is None:
        theta0 = default_init(y, kind, "rt").mu

    def negll(th):
        try:
            ll, g = loglik_and_grad(th, y, kind, validate=False)
        except (ValueError, FloatingPointError):
            return np.inf, np.zeros_like(th)
        return -ll, -g

    grad = lambda th: loglik_and_grad(th, y, kind, validate=False)[1]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = minimize(negll, np.asarray(theta0, float), jac=True, method="BFGS",
                       options={"gtol": gtol * 0.1, "maxiter": max_iter})
    theta = res.x
    for _ in range(20):
        g = grad(theta)
        if np.max(np.abs(g)) < gtol * 1e-2:
            break
        hess = fd_hessian(grad, theta)
        try:
            step = np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            break
        candidate = theta - step
        if not np.all(np.isfinite(candidate)) or -negll(candidate)[0] < -negll(theta)[0] - 1e-9:
            break
        theta = candidate
    g = grad(theta)
    hess = fd_hessian(grad, theta)
    gnorm = float(np.max(np.abs(g)))
    ll = -float(negll(theta)[0])
    return MleResult(theta, hess, ll, gnorm < gtol, gnorm)


def _proposal_from_hessian(hess, scale):
    d = hess.shape[0]
    try:
        cov = np.linalg.inv(-hess)
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        warnings.warn("MLE curvature is not negative definite; using 0.01 * I proposal",
                      ProposalSingular, stacklevel=3)
        return 0.01 * np.eye(d), True
    return scale**2 * cov, False


def run_chain(target, theta0, proposal_cov, iterations, burnin, rng):
    """Generic RWMH in theta-space; returns (post-burn-in chain, acceptance rate)."""
    theta = np.array(theta0, dtype=float)
    d = theta.size
    chol = np.linalg.cholesky(proposal_cov)
    increments = rng.standard_normal((iterations, d)) @ chol.T
    log_u = np.log(rng.uniform(size=iterations))
    current = target.log_density(theta)
    if not np.isfinite(current):
        raise ValueError("chain start has zero target density")
    chain = np.empty((iterations - burnin, d))
    accepted = 0
    for i in range(iterations):
        proposal = theta + increments[i]
        try:
            cand = target.log_density(proposal)
        except ValueError:
            cand = -np.inf
        if log_u[i] < cand - current:
            theta = proposal
            current = cand
            accepted += 1
        if i >= burnin:
            chain[i - burnin] = theta
    return chain, accepted / iterations


def rwmh(y, kind, config: McmcConfig = None, mle_result: MleResult = None,
         target: GarchTarget = None, theta0=None, proposal_cov=None) -> PosteriorSamples:
    """Sample the posterior ``log p(theta) + log L(theta)`` by random-walk MH.

    The chain starts at the MLE and uses a Gaussian increment with covariance
    ``proposal_scale**2 * inv(-H)`` where ``H`` is the log-likelihood Hessian
    at the MLE.  ``theta0`` and ``proposal_cov`` override that construction.
    """
    kind = InnovationKind.parse(kind)
    config = config or McmcConfig()
    if target is None:
        target = GarchTarget(y, kind)
    d = kind.dim
    scale = config.proposal_scale or 2.38 / np.sqrt(d)
    fallback = False
    if proposal_cov is None or theta0 is None:
        if mle_result is None:
            mle_result = mle(target.y, kind)
        if theta0 is None:
            theta0 = mle_result.theta
        if proposal_cov is None:
            proposal_cov, fallback = _proposal_from_hessian(mle_result.hessian, scale)
    rng = np.random.default_rng(config.seed)
    chain, acc = run_chain(target, theta0, np.asarray(proposal_cov, float),
                           config.iterations, config.burnin, rng)
    return PosteriorSamples(constrained_array(chain, kind), chain, acc, kind,
                            np.asarray(proposal_cov, float), fallback)


def _autocorr(x):
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n] / n
    return acov / acov[0]


def effective_sample_size(x) -> float:
    """ESS from the autocorrelation sum truncated at the first negative pair."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if np.var(x) == 0:
        return 1.0
    rho = _autocorr(x)
    total = 0.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair < 0:
            break
        total += pair
    tau = -1.0 + 2.0 * total
    return float(n / max(tau, 1.0 / np.log10(max(n, 10))))


def split_rhat(x) -> float:
    """Split-chain potential scale reduction; NaN for zero-variance chains."""
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    chains = np.stack([x[:half], x[half: 2 * half]])
    n = chains.shape[1]
    w = chains.var(axis=1, ddof=1).mean()
    if w == 0:
        return float("nan")
    b = n * chains.mean(axis=1).var(ddof=1)
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


@dataclass
class Diagnostics:
    ess: np.ndarray
    rhat: np.ndarray

    @property
    def rhat_defined(self) -> np.ndarray:
        return np.isfinite(self.rhat)


def diagnostics(samples) -> Diagnostics:
    """Per-column ESS and split R-hat of a draws matrix (or PosteriorSamples)."""
    draws = samples.samples if isinstance(samples, PosteriorSamples) else samples
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.shape[0] < 100:
        raise InsufficientSamples("diagnostics need at least 100 post-burn-in draws")
    ess = np.array([effective_sample_size(c) for c in draws.T])
    rhat = np.array([split_rhat(c) for c in draws.T])
    return Diagnostics(ess, rhat)
