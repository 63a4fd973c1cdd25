"""GARCH(1,1) variance recursion, log-likelihoods and their analytic gradients.

The conditional variance starts at the unconditional level
``omega / (1 - alpha - beta)`` and then follows

    sigma2[t] = omega + alpha * y[t-1]**2 + beta * sigma2[t-1].

Both the recursion and its sensitivities with respect to
``(theta_omega, theta_psi1, theta_psi2)`` are first-order linear filters with
pole ``beta``, so they are evaluated with :func:`scipy.signal.lfilter`.

Every likelihood routine accepts an optional ``window=(start, stop)``.  The
variance recursion always runs from the first observation up to ``stop`` and
only the log-likelihood terms with ``start <= t < stop`` (0-based) are summed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import digamma, expit, gammaln

from .exceptions import ConstraintViolation, DegenerateSeries, NonFinite
from .params import InnovationKind, softplus

__all__ = [
    "VariancePath",
    "SkewTConstants",
    "check_series",
    "variance_recursion",
    "variance_sensitivities",
    "skewt_constants",
    "skewt_logpdf",
    "std_t_logpdf",
    "log_likelihood",
    "grad_log_likelihood",
    "loglik_and_grad",
    "fd_gradient",
]

_LOG_2PI = np.log(2.0 * np.pi)
_LOG_PI = np.log(np.pi)


@dataclass
class VariancePath:
    sigma2: np.ndarray
    sensitivities: np.ndarray = None


@dataclass(frozen=True)
class SkewTConstants:
    """Mean shift ``m`` and scale ``s`` standardizing the skew-t to (0, 1)."""

    m: float
    s: float


def check_series(y, min_length=2) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DegenerateSeries(f"return series must be 1-d, got shape {y.shape}")
    if y.size < min_length:
        raise DegenerateSeries(f"need at least {min_length} observations, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise DegenerateSeries("return series contains non-finite values")
    return y


def _resolve_window(window, n):
    if window is None:
        return 0, n
    start, stop = window
    stop = n if stop is None else int(stop)
    start = int(start)
    if not 0 <= start < stop <= n:
        raise ValueError(f"invalid window {window!r} for series of length {n}")
    return start, stop


def _garch_core(theta):
    if not np.all(np.isfinite(theta[:3])):
        raise NonFinite("unconstrained parameters must be finite")
    omega = np.exp(theta[0])
    psi1 = expit(theta[1])
    one_m_psi1 = expit(-theta[1])
    psi2 = expit(theta[2])
    one_m_psi2 = expit(-theta[2])
    alpha = psi1 * psi2
    beta = psi1 * one_m_psi2
    return omega, alpha, beta, psi1, one_m_psi1, psi2, one_m_psi2


def _sigma2(theta, y):
    omega, alpha, beta, _, one_m_psi1, _, _ = _garch_core(theta)
    forcing = np.empty_like(y)
    forcing[0] = omega / one_m_psi1
    forcing[1:] = omega + alpha * y[:-1] ** 2
    return lfilter([1.0], [1.0, -beta], forcing)


def _sensitivities(theta, y, sigma2):
    omega, alpha, beta, psi1, one_m_psi1, psi2, one_m_psi2 = _garch_core(theta)
    d1 = alpha * one_m_psi1
    d2 = beta * one_m_psi1
    d3 = alpha * one_m_psi2
    d4 = -beta * psi2
    y2 = y[:-1] ** 2
    s2 = sigma2[:-1]
    forcing = np.empty((y.size, 3))
    # first row differentiates the unconditional-variance start
    forcing[0] = (sigma2[0], sigma2[0] * psi1, 0.0)
    forcing[1:, 0] = omega
    forcing[1:, 1] = d1 * y2 + d2 * s2
    forcing[1:, 2] = d3 * y2 + d4 * s2
    return lfilter([1.0], [1.0, -beta], forcing, axis=0)


def variance_recursion(theta, y) -> VariancePath:
    """Conditional variances for an unconstrained parameter vector."""
    y = check_series(y)
    theta = np.asarray(theta, dtype=float)
    return VariancePath(_sigma2(theta, y))


def variance_sensitivities(theta, y) -> np.ndarray:
    """``T x 3`` matrix of d sigma2[t] / d (theta_omega, theta_psi1, theta_psi2)."""
    y = check_series(y)
    theta = np.asarray(theta, dtype=float)
    return _sensitivities(theta, y, _sigma2(theta, y))


def _m_and_derivs(nu, xi):
    """m, s and their partial derivatives in (nu, xi)."""
    log_k = gammaln(0.5 * (nu - 1.0)) - gammaln(0.5 * nu) + 0.5 * (np.log(nu - 2.0) - _LOG_PI)
    k = np.exp(log_k)
    dk_dnu = k * (
        0.5 * digamma(0.5 * (nu - 1.0)) - 0.5 * digamma(0.5 * nu) + 0.5 / (nu - 2.0)
    )
    skew = xi - 1.0 / xi
    m = k * skew
    s2 = xi**2 + xi**-2 - 1.0 - m**2
    s = np.sqrt(s2)
    m_nu = dk_dnu * skew
    m_xi = k * (1.0 + xi**-2)
    s_nu = -m * m_nu / s
    s_xi = (xi - xi**-3 - m * m_xi) / s
    return m, s, m_nu, m_xi, s_nu, s_xi


def skewt_constants(nu, xi) -> SkewTConstants:
    if not (np.isfinite(nu) and np.isfinite(xi)) or nu <= 2 or xi <= 0:
        raise ConstraintViolation(f"need nu > 2 and xi > 0, got nu={nu}, xi={xi}")
    m, s, *_ = _m_and_derivs(float(nu), float(xi))
    return SkewTConstants(float(m), float(s))


def std_t_logpdf(x, nu):
    """Log density of the unit-variance Student-t."""
    x = np.asarray(x, dtype=float)
    return (
        gammaln(0.5 * (nu + 1.0))
        - gammaln(0.5 * nu)
        - 0.5 * (_LOG_PI + np.log(nu - 2.0))
        - 0.5 * (nu + 1.0) * np.log1p(x**2 / (nu - 2.0))
    )


def skewt_logpdf(x, nu, xi):
    """Log density of the standardized (zero mean, unit variance) skew-t."""
    x = np.asarray(x, dtype=float)
    c = skewt_constants(nu, xi)
    w = c.s * x + c.m
    ind = np.where(x >= -c.m / c.s, 1.0, -1.0)
    return (
        np.log(2.0 * c.s / (xi + 1.0 / xi))
        + gammaln(0.5 * (nu + 1.0))
        - gammaln(0.5 * nu)
        - 0.5 * (_LOG_PI + np.log(nu - 2.0))
        - 0.5 * (nu + 1.0) * np.log1p(w**2 * xi ** (-2.0 * ind) / (nu - 2.0))
    )


def loglik_and_grad(theta, y, kind, window=None, need_grad=True, validate=True):
    """Log-likelihood and (optionally) its gradient in theta-space.

    Parameters
    ----------
    theta : array_like, shape (d,)
        Unconstrained parameters.
    y : array_like, shape (T,)
        Return series.
    kind : InnovationKind or str
    window : tuple (start, stop), optional
        Restrict the likelihood sum to ``y[start:stop]``; the variance
        recursion still uses ``y[:stop]``.
    need_grad : bool
        Skip the sensitivity recursion when False (gradient returned as None).

    Returns
    -------
    loglik : float
    grad : ndarray of shape (d,) or None
    """
    kind = InnovationKind.parse(kind)
    theta = np.asarray(theta, dtype=float)
    if validate:
        y = check_series(y)
        if theta.shape != (kind.dim,):
            raise ConstraintViolation(
                f"{kind.value} model expects {kind.dim} parameters, got shape {theta.shape}"
            )
        if not np.all(np.isfinite(theta)):
            raise NonFinite("unconstrained parameters must be finite")
    else:
        y = np.asarray(y, dtype=float)
    start, stop = _resolve_window(window, y.size)
    yy = y[:stop]
    sigma2_full = _sigma2(theta, yy)
    sigma2 = sigma2_full[start:]
    yw = yy[start:]
    n = yw.size
    y2 = yw**2
    log_s2 = np.log(sigma2)

    if kind is InnovationKind.GAUSSIAN:
        ll = -0.5 * (n * _LOG_2PI + log_s2.sum() + (y2 / sigma2).sum())
        if not need_grad:
            return _finite(ll), None
        weight = y2 / sigma2 - 1.0
        grad_phi = _phi_grad(theta, yy, sigma2_full, start, weight)
        return _finite(ll), grad_phi

    nu = softplus(theta[3]) + 2.0
    dnu = expit(theta[3])
    const = gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu) - 0.5 * (_LOG_PI + np.log(nu - 2.0))

    if kind is InnovationKind.STUDENT_T:
        ratio = y2 / ((nu - 2.0) * sigma2)
        log1p_r = np.log1p(ratio)
        ll = n * const - 0.5 * (log_s2.sum() + (nu + 1.0) * log1p_r.sum())
        if not need_grad:
            return _finite(ll), None
        a_term = (nu + 1.0) * sigma2 / ((nu - 2.0) * sigma2 + y2)
        weight = y2 / sigma2 * a_term - 1.0
        grad = np.empty(4)
        grad[:3] = _phi_grad(theta, yy, sigma2_full, start, weight)
        b_term = 0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / (nu - 2.0)
        dl_dnu = n * b_term + np.sum(a_term * y2 / (2.0 * (nu - 2.0) * sigma2) - 0.5 * log1p_r)
        grad[3] = dl_dnu * dnu
        return _finite(ll), grad

    xi = softplus(theta[4])
    dxi = expit(theta[4])
    m, s, m_nu, m_xi, s_nu, s_xi = _m_and_derivs(nu, xi)
    sigma = np.sqrt(sigma2)
    z = yw / sigma
    ind = np.where(z >= -m / s, 1.0, -1.0)
    kfac = xi ** (-2.0 * ind)
    w = s * z + m
    u = w**2 * kfac / (nu - 2.0)
    log1p_u = np.log1p(u)
    ll = n * (const + np.log(2.0 / (xi + 1.0 / xi)) + np.log(s)) - 0.5 * (
        log_s2.sum() + (nu + 1.0) * log1p_u.sum()
    )
    if not need_grad:
        return _finite(ll), None
    one_p_u = 1.0 + u
    c_term = s * (nu + 1.0) * w * z * kfac / ((nu - 2.0) * one_p_u)
    grad = np.empty(5)
    grad[:3] = _phi_grad(theta, yy, sigma2_full, start, c_term - 1.0)

    du_dnu = kfac * (2.0 * w * (z * s_nu + m_nu) / (nu - 2.0) - w**2 / (nu - 2.0) ** 2)
    b_term = 0.5 * digamma(0.5 * (nu + 1.0)) - 0.5 * digamma(0.5 * nu) - 0.5 / (nu - 2.0)
    dl_dnu = n * (b_term + s_nu / s) - 0.5 * np.sum(log1p_u + (nu + 1.0) * du_dnu / one_p_u)
    grad[3] = dl_dnu * dnu

    dk_dxi = -2.0 * ind * xi ** (-2.0 * ind - 1.0)
    du_dxi = (2.0 * w * (z * s_xi + m_xi) * kfac + w**2 * dk_dxi) / (nu - 2.0)
    dl_dxi = n * (-(xi**2 - 1.0) / (xi**3 + xi) + s_xi / s) - 0.5 * (nu + 1.0) * np.sum(
        du_dxi / one_p_u
    )
    grad[4] = dl_dxi * dxi
    return _finite(ll), grad


def _phi_grad(theta, y, sigma2_full, start, weight):
    sens = _sensitivities(theta, y, sigma2_full)[start:]
    return 0.5 * (sens * (weight / sigma2_full[start:])[:, None]).sum(axis=0)


def _finite(value):
    value = float(value)
    if not np.isfinite(value):
        raise NonFinite("log-likelihood evaluated to a non-finite value")
    return value


def log_likelihood(theta, y, kind, window=None) -> float:
    """Log-likelihood of a GARCH(1,1) model with the given innovation law."""
    return loglik_and_grad(theta, y, kind, window=window, need_grad=False)[0]


def grad_log_likelihood(theta, y, kind, window=None) -> np.ndarray:
    """Analytic gradient of :func:`log_likelihood` in theta-space."""
    return loglik_and_grad(theta, y, kind, window=window)[1]


def fd_gradient(fn, theta, step=1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.size)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e.flat[j] = step
        f_plus = fn(theta + e)
        f_minus = fn(theta - e)
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFinite(f"function is not finite around coordinate {j}")
        grad[j] = (f_plus - f_minus) / (2.0 * step)
    return grad
