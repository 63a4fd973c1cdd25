"""Accuracy metric, information criteria and descriptive statistics."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import DegenerateSeries, InsufficientSamples

__all__ = [
    "DensityGrid",
    "silverman_bandwidth",
    "kde",
    "kde_on_grid",
    "accuracy",
    "aic_bic",
    "summary_stats",
    "SummaryStats",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)
MIN_KDE_SAMPLES = 30


@dataclass
class DensityGrid:
    x: np.ndarray
    f: np.ndarray

    def integral(self) -> float:
        return float(trapezoid(self.f, self.x))

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.x, self.f]), delimiter=",",
                   header="x,density", comments="", fmt="%.17g")


def _check_samples(samples):
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < MIN_KDE_SAMPLES:
        raise InsufficientSamples(
            f"need at least {MIN_KDE_SAMPLES} samples, got {samples.size}"
        )
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    return samples


def silverman_bandwidth(samples) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n**(-1/5)``."""
    samples = _check_samples(samples)
    sd = np.std(samples, ddof=1)
    q75, q25 = np.percentile(samples, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        # IQR collapses for heavily tied samples; fall back to sd
        spread = sd
    bw = 0.9 * spread * samples.size ** (-0.2)
    if not bw > 0:
        raise InsufficientSamples("samples have zero spread; bandwidth undefined")
    return float(bw)


def kde_on_grid(samples, grid, bandwidth=None, chunk=4096) -> np.ndarray:
    """Gaussian-kernel density of ``samples`` evaluated at ``grid``."""
    samples = _check_samples(samples)
    grid = np.asarray(grid, dtype=float)
    h = silverman_bandwidth(samples) if bandwidth is None else float(bandwidth)
    dens = np.zeros(grid.size)
    for lo in range(0, samples.size, chunk):
        z = (grid[:, None] - samples[None, lo: lo + chunk]) / h
        dens += np.exp(-0.5 * z * z).sum(axis=1)
    return dens / (samples.size * h * _SQRT_2PI)


def kde(samples, grid_size=512) -> DensityGrid:
    """KDE on ``grid_size`` points spanning ``[min - 3h, max + 3h]``."""
    samples = _check_samples(samples)
    h = silverman_bandwidth(samples)
    x = np.linspace(samples.min() - 3 * h, samples.max() + 3 * h, grid_size)
    return DensityGrid(x, kde_on_grid(samples, x, h))


def accuracy(q_samples, p_samples, grid_size=512) -> float:
    """``100 * (1 - 0.5 * int |q - p|)`` between two sample-based densities.

    Both densities are Gaussian KDEs evaluated on a shared grid covering the
    union of the two supports widened by three bandwidths each side.
    """
    q_samples = _check_samples(q_samples)
    p_samples = _check_samples(p_samples)
    hq = silverman_bandwidth(q_samples)
    hp = silverman_bandwidth(p_samples)
    lo = min(q_samples.min() - 3 * hq, p_samples.min() - 3 * hp)
    hi = max(q_samples.max() + 3 * hq, p_samples.max() + 3 * hp)
    x = np.linspace(lo, hi, grid_size)
    diff = np.abs(kde_on_grid(q_samples, x, hq) - kde_on_grid(p_samples, x, hp))
    value = 100.0 * (1.0 - 0.5 * trapezoid(diff, x))
    return float(np.clip(value, 0.0, 100.0))


def aic_bic(max_loglik, k, T):
    """Return ``(2k - 2 lnL, k log T - 2 lnL)``."""
    if k < 1 or T < 1:
        raise ValueError("k and T must be positive")
    return 2.0 * k - 2.0 * max_loglik, k * np.log(T) - 2.0 * max_loglik


@dataclass
class SummaryStats:
    min: float
    max: float
    median: float
    skewness: float
    kurtosis: float


def summary_stats(y) -> SummaryStats:
    """Range, median, skewness and (non-excess) kurtosis of a series."""
    y = np.asarray(y, dtype=float)
    if y.size < 4:
        raise DegenerateSeries("summary statistics need at least 4 observations")
    centred = y - y.mean()
    m2 = np.mean(centred**2)
    if m2 == 0:
        raise DegenerateSeries("constant series: skewness and kurtosis undefined")
    return SummaryStats(
        float(y.min()),
        float(y.max()),
        float(np.median(y)),
        float(np.mean(centred**3) / m2**1.5),
        float(np.mean(centred**4) / m2**2),
    )
