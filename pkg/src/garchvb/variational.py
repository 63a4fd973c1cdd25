"""Gaussian variational family and stochastic variational Bayes (SVB).

Two gradient estimators are provided:

* score-function estimator with per-coordinate control variates, run on a
  Cholesky factor ``C`` of the *precision* matrix whose diagonal is stored on
  the log scale;
* reparameterization-trick estimator, run on a Cholesky factor ``L`` of the
  *covariance* matrix with a free diagonal.

Both feed an adaptive update ``lambda += a_t * gbar / sqrt(vbar)`` with step
``a_t = min(eta0, eta0 * tau / t)`` and stop once the moving-average ELBO has
failed to improve for ``patience`` consecutive iterations.
"""

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional

import numpy as np

from .exceptions import DimensionMismatch, InsufficientSamples, WrongFactorization
from .params import GarchParams, InnovationKind, to_unconstrained
from .posterior import GarchTarget

__all__ = [
    "Factorization",
    "DiagParam",
    "Method",
    "StopReason",
    "VariationalState",
    "OptimizerConfig",
    "FitResult",
    "default_init",
    "log_q",
    "grad_log_q_lambda",
    "h_lambda",
    "control_variates",
    "cv_gradient_estimate",
    "rt_gradient_estimate",
    "adam_step",
    "learning_rate",
    "elbo_estimate",
    "fit_svb",
]

_LOG_2PI = np.log(2.0 * np.pi)


class Factorization(str, Enum):
    PRECISION = "precision"
    COVARIANCE = "covariance"


class DiagParam(str, Enum):
    LOG_SCALE = "log"
    FREE = "free"


class Method(str, Enum):
    CV = "cv"
    RT = "rt"
    MEAN_FIELD_CV = "mfcv"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"cv": cls.CV, "rt": cls.RT, "mfcv": cls.MEAN_FIELD_CV,
                   "meanfield": cls.MEAN_FIELD_CV, "meanfieldcv": cls.MEAN_FIELD_CV,
                   "mf": cls.MEAN_FIELD_CV}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown SVB method {value!r}") from None


class StopReason(str, Enum):
    PATIENCE = "patience"
    MAX_ITERS = "max_iters"


@dataclass
class VariationalState:
    """Multivariate Gaussian ``q_lambda``.

    ``chol`` holds the raw lower-triangular parameters.  With
    ``diag_param=LOG_SCALE`` the effective factor has ``exp(chol[i, i])`` on
    its diagonal.  With ``factorization=PRECISION`` the effective factor
    ``C`` satisfies ``inv(Sigma) = C C^T``; otherwise ``Sigma = L L^T``.
    """

    mu: np.ndarray
    chol: np.ndarray
    factorization: Factorization = Factorization.COVARIANCE
    diag_param: DiagParam = DiagParam.FREE

    def __post_init__(self):
        self.mu = np.array(self.mu, dtype=float).ravel()
        self.chol = np.tril(np.array(self.chol, dtype=float))
        self.factorization = Factorization(self.factorization)
        self.diag_param = DiagParam(self.diag_param)
        if self.chol.shape != (self.mu.size, self.mu.size):
            raise DimensionMismatch(
                f"mu has length {self.mu.size} but chol has shape {self.chol.shape}"
            )

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def n_lambda(self) -> int:
        d = self.dim
        return d + d * (d + 1) // 2

    def factor(self) -> np.ndarray:
        """Effective lower-triangular factor (C or L)."""
        f = self.chol.copy()
        if self.diag_param is DiagParam.LOG_SCALE:
            idx = np.diag_indices(self.dim)
            f[idx] = np.exp(f[idx])
        return f

    def covariance(self) -> np.ndarray:
        f = self.factor()
        if self.factorization is Factorization.COVARIANCE:
            return f @ f.T
        return np.linalg.inv(f @ f.T)

    def precision(self) -> np.ndarray:
        f = self.factor()
        if self.factorization is Factorization.PRECISION:
            return f @ f.T
        return np.linalg.inv(f @ f.T)

    def to_lambda(self) -> np.ndarray:
        return np.concatenate([self.mu, self.chol[np.tril_indices(self.dim)]])

    def with_lambda(self, lam) -> "VariationalState":
        lam = np.asarray(lam, dtype=float)
        d = self.dim
        if lam.size != self.n_lambda:
            raise DimensionMismatch(f"lambda must have length {self.n_lambda}")
        chol = np.zeros((d, d))
        chol[np.tril_indices(d)] = lam[d:]
        return replace(self, mu=lam[:d].copy(), chol=chol)

    def transform(self, eps) -> np.ndarray:
        """Map standard-normal draws ``eps`` (..., d) to draws from q."""
        eps = np.asarray(eps, dtype=float)
        f = self.factor()
        if self.factorization is Factorization.COVARIANCE:
            return self.mu + eps @ f.T
        # theta = mu + C^{-T} eps  has covariance C^{-T} C^{-1} = (C C^T)^{-1}
        z = np.linalg.solve(f.T, np.atleast_2d(eps).T).T
        return self.mu + z.reshape(eps.shape)

    def sample(self, n, rng) -> np.ndarray:
        return self.transform(rng.standard_normal((n, self.dim)))

    def log_density(self, theta):
        return log_q(theta, self)

    def grad_theta_log_density(self, theta) -> np.ndarray:
        """``-inv(Sigma) (theta - mu)``."""
        diff = np.asarray(theta, dtype=float) - self.mu
        return -(diff @ self.precision().T)

    def to_covariance(self) -> "VariationalState":
        """Same Gaussian re-expressed with a free-diagonal covariance factor."""
        cov = self.covariance()
        return VariationalState(self.mu.copy(), np.linalg.cholesky(cov),
                                Factorization.COVARIANCE, DiagParam.FREE)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "chol": self.chol.tolist(),
            "factorization": self.factorization.value,
            "diag_param": self.diag_param.value,
        }

    @classmethod
    def from_dict(cls, doc) -> "VariationalState":
        return cls(np.array(doc["mu"]), np.array(doc["chol"]),
                   Factorization(doc["factorization"]), DiagParam(doc["diag_param"]))


@dataclass
class OptimizerConfig:
    beta1: float = 0.9
    beta2: float = 0.9
    eta0: float = 0.02
    tau: float = 1000.0
    t_w: int = 25
    patience: int = 100
    n_samples: int = 10
    max_iters: int = 10_000
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.eta0 <= 0 or self.tau <= 0:
            raise ValueError("eta0 and tau must be positive")
        if self.t_w < 1 or self.patience < 1 or self.n_samples < 1 or self.max_iters < 1:
            raise ValueError("t_w, patience, n_samples and max_iters must be >= 1")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class FitResult:
    state: VariationalState
    elbo_trace: np.ndarray
    iterations: int
    stopped_by: StopReason
    wall_time: float
    method: Method = Method.RT
    kind: InnovationKind = InnovationKind.GAUSSIAN
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    def final_elbo(self, window=None) -> float:
        """Mean of the last ``window`` (default ``t_w``) ELBO estimates."""
        window = window or self.config.t_w
        return float(np.mean(self.elbo_trace[-window:]))


def default_init(y, kind, method) -> VariationalState:
    """Starting point inside the feasible region with marginal sd 0.1."""
    kind = InnovationKind.parse(kind)
    method = Method.parse(method)
    var_y = float(np.var(np.asarray(y, dtype=float)))
    p = GarchParams(0.05 * var_y if var_y > 0 else 0.05, 0.1, 0.8, 8.0, 1.0)
    mu = to_unconstrained(p, kind)
    d = kind.dim
    if method is Method.RT:
        return VariationalState(mu, 0.1 * np.eye(d), Factorization.COVARIANCE, DiagParam.FREE)
    return VariationalState(mu, np.log(10.0) * np.eye(d), Factorization.PRECISION,
                            DiagParam.LOG_SCALE)


def _check_dims(theta, state):
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != state.dim:
        raise DimensionMismatch(
            f"theta has {theta.shape[-1]} coordinates, state has {state.dim}"
        )
    return theta


def log_q(theta, state: VariationalState):
    """Exact Gaussian log-density; ``theta`` may be a stack of vectors."""
    theta = _check_dims(theta, state)
    f = state.factor()
    diff = theta - state.mu
    logdet_f = np.sum(np.log(np.abs(np.diag(f))))
    if state.factorization is Factorization.PRECISION:
        quad = np.sum((diff @ f) ** 2, axis=-1)
        return -0.5 * state.dim * _LOG_2PI + logdet_f - 0.5 * quad
    z = np.linalg.solve(f, np.atleast_2d(diff).T).T.reshape(diff.shape)
    quad = np.sum(z**2, axis=-1)
    return -0.5 * state.dim * _LOG_2PI - logdet_f - 0.5 * quad


def grad_log_q_lambda(theta, state: VariationalState) -> np.ndarray:
    """Score ``d log q / d lambda`` for the precision factorization.

    ``theta`` may be ``(d,)`` or ``(S, d)``; the result has matching leading
    shape and ``d + d(d+1)/2`` columns.  The diagonal entries are chain-ruled
    through ``exp`` when the diagonal is log-scaled.
    """
    if state.factorization is not Factorization.PRECISION:
        raise WrongFactorization("score-function gradient needs the precision factorization")
    theta = _check_dims(theta, state)
    single = theta.ndim == 1
    diff = np.atleast_2d(theta) - state.mu
    f = state.factor()
    d = state.dim
    g_mu = diff @ (f @ f.T)
    # diag(1/C) - x x^T C, row by row
    g_c = -diff[:, :, None] * (diff @ f)[:, None, :]
    idx = np.diag_indices(d)
    g_c[:, idx[0], idx[1]] += 1.0 / np.diag(f)
    if state.diag_param is DiagParam.LOG_SCALE:
        g_c[:, idx[0], idx[1]] *= np.diag(f)
    rows, cols = np.tril_indices(d)
    out = np.concatenate([g_mu, g_c[:, rows, cols]], axis=1)
    return out[0] if single else out


def h_lambda(theta, state, y=None, kind=None, target: GarchTarget = None) -> float:
    """``log L(theta) + log p(theta) - log q(theta)``."""
    if target is None:
        target = GarchTarget(y, kind)
    return target.log_density(theta) - float(log_q(theta, state))


def control_variates(h, scores) -> np.ndarray:
    """Variance-minimizing constants ``c_j = Cov(s_j, h s_j) / Var(s_j)``."""
    h = np.asarray(h, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if h.size < 2:
        raise InsufficientSamples("control variates need at least two samples")
    hs = h[:, None] * scores
    sc = scores - scores.mean(axis=0)
    cov = (sc * (hs - hs.mean(axis=0))).sum(axis=0) / (h.size - 1)
    var = (sc**2).sum(axis=0) / (h.size - 1)
    c = np.zeros(scores.shape[1])
    ok = var >= 1e-12
    c[ok] = cov[ok] / var[ok]
    return c


def _cv_pass(state, target, n_samples, rng):
    theta = state.sample(n_samples, rng)
    logq = log_q(theta, state)
    h = np.array([target.log_density(t) for t in theta]) - logq
    scores = grad_log_q_lambda(theta, state)
    return theta, h, scores


def cv_gradient_estimate(state, y=None, kind=None, n_samples=10, rng=None, c=None,
                         target=None, return_details=False):
    """Score-function ELBO gradient with control variates ``c``.

    With ``c=None`` (first iteration) this is the plain score-function
    estimator.  When ``return_details`` is true also returns the per-sample
    ``h`` values and scores so the caller can refresh ``c``.
    """
    if state.factorization is not Factorization.PRECISION:
        raise WrongFactorization("control-variate estimator needs the precision factorization")
    if target is None:
        target = GarchTarget(y, kind)
    rng = np.random.default_rng(rng)
    _, h, scores = _cv_pass(state, target, n_samples, rng)
    c_vec = np.zeros(scores.shape[1]) if c is None else np.asarray(c, dtype=float)
    grad = ((h[:, None] - c_vec) * scores).mean(axis=0)
    if return_details:
        return grad, h, scores
    return grad


def rt_gradient_estimate(state, y=None, kind=None, n_samples=5, rng=None, target=None,
                         eps=None, return_details=False):
    """Reparameterization-trick ELBO gradient for the covariance factorization.

    ``eps`` may be passed to fix the standard-normal draws.
    """
    if state.factorization is not Factorization.COVARIANCE:
        raise WrongFactorization("reparameterization estimator needs the covariance factorization")
    if target is None:
        target = GarchTarget(y, kind)
    if eps is None:
        eps = np.random.default_rng(rng).standard_normal((n_samples, state.dim))
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    L = state.factor()
    theta = state.mu + eps @ L.T
    d = state.dim
    # -grad_theta log q = inv(Sigma)(theta - mu) = L^{-T} eps
    minus_grad_logq = np.linalg.solve(L.T, eps.T).T
    logq = log_q(theta, state)
    g_theta = np.empty_like(theta)
    logp = np.empty(theta.shape[0])
    for s in range(theta.shape[0]):
        logp[s], g = target.log_density_and_grad(theta[s])
        g_theta[s] = g + minus_grad_logq[s]
    grad_mu = g_theta.mean(axis=0)
    outer = np.einsum("si,sj->ij", g_theta, eps) / theta.shape[0]
    grad = np.concatenate([grad_mu, outer[np.tril_indices(d)]])
    if return_details:
        return grad, logp - logq
    return grad


def learning_rate(t, config: OptimizerConfig) -> float:
    return min(config.eta0, config.eta0 * config.tau / t)


def adam_step(lam, g, gbar, vbar, t, config: OptimizerConfig, eps=1e-8):
    """One adaptive ascent step; returns ``(lam, gbar, vbar)``."""
    gbar = config.beta1 * gbar + (1.0 - config.beta1) * g
    vbar = config.beta2 * vbar + (1.0 - config.beta2) * g**2
    lam = lam + learning_rate(t, config) * gbar / (np.sqrt(vbar) + eps)
    return lam, gbar, vbar


def elbo_estimate(state, y=None, kind=None, samples=None, target=None) -> float:
    """Monte Carlo ELBO: mean of ``h_lambda`` over ``samples`` drawn from q."""
    if target is None:
        target = GarchTarget(y, kind)
    samples = np.atleast_2d(samples)
    logq = log_q(samples, state)
    return float(np.mean([target.log_density(t) for t in samples] - logq))


def _mean_field_mask(state):
    d = state.dim
    mask = np.ones(state.n_lambda)
    rows, cols = np.tril_indices(d)
    mask[d:] = (rows == cols).astype(float)
    return mask


def fit_svb(y, kind, method="rt", config: OptimizerConfig = None,
            init: VariationalState = None, target: GarchTarget = None,
            rng=None) -> FitResult:
    """Fit a Gaussian variational approximation by stochastic gradient ascent.

    Parameters
    ----------
    y : array_like
        Return series (ignored when ``target`` is given).
    kind : InnovationKind or str
    method : {"cv", "rt", "mfcv"}
        Control variates with full precision factor, reparameterization trick
        with full covariance factor, or control variates with diagonal factor.
    config : OptimizerConfig, optional
    init : VariationalState, optional
        Warm start.  Converted to the factorization the method needs.
    target : GarchTarget, optional
        Custom log-target (used by the sequential updaters).
    rng : numpy Generator, optional
        Overrides ``config.seed``.
    """
    kind = InnovationKind.parse(kind)
    method = Method.parse(method)
    config = config or OptimizerConfig()
    if target is None:
        target = GarchTarget(y, kind)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    state = _prepare_init(init, target.y, kind, method, getattr(target, "dim", kind.dim))
    mask = _mean_field_mask(state) if method is Method.MEAN_FIELD_CV else None
    if mask is not None:
        state = state.with_lambda(state.to_lambda() * mask)

    def estimate(st, c):
        if method is Method.RT:
            g, h = rt_gradient_estimate(st, n_samples=config.n_samples, target=target,
                                        eps=rng.standard_normal((config.n_samples, st.dim)),
                                        return_details=True)
            return g, h, None
        g, h, scores = cv_gradient_estimate(st, n_samples=config.n_samples, rng=rng,
                                            c=c, target=target, return_details=True)
        new_c = control_variates(h, scores) if config.n_samples >= 2 else None
        return g, h, new_c

    start = time.perf_counter()
    lam = state.to_lambda()
    g0, _, c = estimate(state, None)
    if mask is not None:
        g0 = g0 * mask
    gbar, vbar = g0.copy(), g0**2

    trace: List[float] = []
    window_sum = 0.0
    best = -np.inf
    patience = 0
    stopped = StopReason.MAX_ITERS
    t = 0
    while t < config.max_iters:
        t += 1
        g, h, c_next = estimate(state, c)
        if mask is not None:
            g = g * mask
        c = c_next
        lam, gbar, vbar = adam_step(lam, g, gbar, vbar, t, config)
        trace.append(float(np.mean(h)))
        window_sum += trace[-1]
        if t > config.t_w:
            window_sum -= trace[-config.t_w - 1]
        state = state.with_lambda(lam)
        if t >= config.t_w:
            window_mean = window_sum / config.t_w
            if window_mean >= best:
                best = window_mean
                patience = 0
            else:
                patience += 1
        if patience >= config.patience:
            stopped = StopReason.PATIENCE
            break
    return FitResult(state, np.array(trace), t, stopped, time.perf_counter() - start,
                     method, kind, config)


def _prepare_init(init, y, kind, method, dim):
    if init is None:
        return default_init(y, kind, method)
    if init.dim != dim:
        raise DimensionMismatch(f"init has dimension {init.dim}, target needs {dim}")
    if method is Method.RT:
        if init.factorization is Factorization.COVARIANCE and init.diag_param is DiagParam.FREE:
            return init
        return init.to_covariance()
    if init.factorization is Factorization.PRECISION and init.diag_param is DiagParam.LOG_SCALE:
        return init
    prec = init.precision()
    c = np.linalg.cholesky(prec)
    idx = np.diag_indices(init.dim)
    c[idx] = np.log(c[idx])
    return VariationalState(init.mu.copy(), c, Factorization.PRECISION, DiagParam.LOG_SCALE)
