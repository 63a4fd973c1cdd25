"""Parameter containers, constrained <-> unconstrained transforms and priors.

The unconstrained vector is always ordered

    (theta_omega, theta_psi1, theta_psi2[, theta_nu[, theta_xi]])

with ``omega = exp(theta_omega)``, ``psi1 = alpha + beta = expit(theta_psi1)``,
``psi2 = alpha / (alpha + beta) = expit(theta_psi2)``,
``nu = softplus(theta_nu) + 2`` and ``xi = softplus(theta_xi)``.

Priors are IG(1, 1) on omega and xi, U(0, 1) on psi1 and psi2 and a unit
exponential on nu - 2.  All log densities below are expressed in theta-space,
i.e. they include the log-Jacobian of the transform.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import expit

from .exceptions import ConstraintViolation, NonFinite

__all__ = [
    "InnovationKind",
    "GarchParams",
    "PARAM_NAMES",
    "param_names",
    "softplus",
    "inv_softplus",
    "to_unconstrained",
    "to_constrained",
    "constrained_array",
    "log_prior",
    "grad_log_prior",
]


class InnovationKind(str, Enum):
    """Distribution of the standardized innovation."""

    GAUSSIAN = "gaussian"
    STUDENT_T = "t"
    SKEW_T = "skewt"

    @property
    def dim(self) -> int:
        return {"gaussian": 3, "t": 4, "skewt": 5}[self.value]

    @classmethod
    def parse(cls, value) -> "InnovationKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {
            "gaussian": cls.GAUSSIAN,
            "normal": cls.GAUSSIAN,
            "t": cls.STUDENT_T,
            "studentt": cls.STUDENT_T,
            "student": cls.STUDENT_T,
            "skewt": cls.SKEW_T,
            "skewedt": cls.SKEW_T,
            "sstd": cls.SKEW_T,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown innovation kind {value!r}") from None


PARAM_NAMES = ("omega", "alpha", "beta", "nu", "xi")


def param_names(kind) -> tuple:
    return PARAM_NAMES[: InnovationKind.parse(kind).dim]


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) parameters on their natural scale."""

    omega: float
    alpha: float
    beta: float
    nu: Optional[float] = None
    xi: Optional[float] = None

    def validate(self, kind) -> "GarchParams":
        kind = InnovationKind.parse(kind)
        values = [self.omega, self.alpha, self.beta, self.nu, self.xi][: kind.dim]
        if any(v is None for v in values):
            raise ConstraintViolation(f"{kind.value} model needs {kind.dim} parameters")
        if not np.all(np.isfinite(values)):
            raise ConstraintViolation("parameters must be finite")
        if self.omega <= 0 or self.alpha <= 0 or self.beta <= 0:
            raise ConstraintViolation("omega, alpha and beta must be positive")
        if self.alpha + self.beta >= 1:
            raise ConstraintViolation(
                f"alpha + beta = {self.alpha + self.beta} must be below 1"
            )
        if kind.dim >= 4 and self.nu <= 2:
            raise ConstraintViolation(f"nu = {self.nu} must exceed 2")
        if kind.dim == 5 and self.xi <= 0:
            raise ConstraintViolation(f"xi = {self.xi} must be positive")
        return self

    def as_array(self, kind=None) -> np.ndarray:
        values = [self.omega, self.alpha, self.beta, self.nu, self.xi]
        d = InnovationKind.parse(kind).dim if kind is not None else sum(
            v is not None for v in values
        )
        return np.array(values[:d], dtype=float)

    @classmethod
    def from_array(cls, values) -> "GarchParams":
        values = [float(v) for v in values]
        return cls(*values)


def softplus(x):
    """``log(1 + exp(x))`` without overflow."""
    return np.logaddexp(0.0, x)


def inv_softplus(y):
    """Inverse of :func:`softplus` for ``y > 0``."""
    y = np.asarray(y, dtype=float)
    return y + np.log(-np.expm1(-y))


def _check_theta(theta, kind) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != kind.dim:
        raise ConstraintViolation(
            f"expected {kind.dim} unconstrained coordinates, got {theta.shape[-1]}"
        )
    if not np.all(np.isfinite(theta)):
        raise NonFinite("unconstrained parameters must be finite")
    return theta


def to_unconstrained(params: GarchParams, kind) -> np.ndarray:
    """Map natural-scale parameters to the unconstrained vector."""
    kind = InnovationKind.parse(kind)
    params.validate(kind)
    psi1 = params.alpha + params.beta
    out = [
        np.log(params.omega),
        np.log(psi1) - np.log1p(-psi1),
        np.log(params.alpha) - np.log(params.beta),
    ]
    if kind.dim >= 4:
        out.append(float(inv_softplus(params.nu - 2.0)))
    if kind.dim == 5:
        out.append(float(inv_softplus(params.xi)))
    return np.array(out)


def constrained_array(theta, kind) -> np.ndarray:
    """Vectorised version of :func:`to_constrained` returning ``(..., d)`` arrays.

    Columns follow :data:`PARAM_NAMES`.
    """
    kind = InnovationKind.parse(kind)
    theta = _check_theta(theta, kind)
    out = np.empty_like(theta)
    psi1 = expit(theta[..., 1])
    psi2 = expit(theta[..., 2])
    out[..., 0] = np.exp(theta[..., 0])
    out[..., 1] = psi1 * psi2
    out[..., 2] = psi1 * expit(-theta[..., 2])
    if kind.dim >= 4:
        out[..., 3] = softplus(theta[..., 3]) + 2.0
    if kind.dim == 5:
        out[..., 4] = softplus(theta[..., 4])
    return out


def to_constrained(theta, kind) -> GarchParams:
    """Map an unconstrained vector back to :class:`GarchParams`."""
    return GarchParams.from_array(constrained_array(np.asarray(theta, float).ravel(), kind))


def log_prior(theta, kind) -> float:
    """Log prior density of ``theta`` (Jacobian included).

    Works on a single vector or on a stack of vectors along the last axis.
    """
    kind = InnovationKind.parse(kind)
    theta = _check_theta(theta, kind)
    t_om, t_p1, t_p2 = theta[..., 0], theta[..., 1], theta[..., 2]
    lp = -t_om - np.exp(-t_om)
    lp = lp - t_p1 - 2.0 * softplus(-t_p1)
    lp = lp - t_p2 - 2.0 * softplus(-t_p2)
    if kind.dim >= 4:
        t_nu = theta[..., 3]
        lp = lp - softplus(t_nu) - softplus(-t_nu)
    if kind.dim == 5:
        t_xi = theta[..., 4]
        xi = softplus(t_xi)
        lp = lp - 2.0 * np.log(xi) - 1.0 / xi - softplus(-t_xi)
    return lp


def grad_log_prior(theta, kind) -> np.ndarray:
    """Gradient of :func:`log_prior` with respect to ``theta``."""
    kind = InnovationKind.parse(kind)
    theta = _check_theta(theta, kind)
    g = np.empty_like(theta)
    g[..., 0] = -1.0 + np.exp(-theta[..., 0])
    g[..., 1] = -1.0 + 2.0 * expit(-theta[..., 1])
    g[..., 2] = -1.0 + 2.0 * expit(-theta[..., 2])
    if kind.dim >= 4:
        g[..., 3] = expit(-theta[..., 3]) - expit(theta[..., 3])
    if kind.dim == 5:
        t_xi = theta[..., 4]
        xi = softplus(t_xi)
        dxi = expit(t_xi)
        g[..., 4] = -2.0 * dxi / xi + dxi / xi**2 + expit(-t_xi)
    return g
