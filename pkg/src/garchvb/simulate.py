"""Simulation of GARCH(1,1) paths with standardized innovations."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import ReturnSeries, Source
from .exceptions import ConstraintViolation
from .model import skewt_constants
from .params import GarchParams, InnovationKind

__all__ = ["SimConfig", "sample_innovation", "simulate_garch", "spawn_seeds"]


@dataclass
class SimConfig:
    params: GarchParams
    kind: InnovationKind = InnovationKind.GAUSSIAN
    length: int = 1000
    seed: Optional[int] = None

    def __post_init__(self):
        self.kind = InnovationKind.parse(self.kind)
        self.params.validate(self.kind)
        if self.length < 2:
            raise ConstraintViolation("simulated series needs length >= 2")


def spawn_seeds(seed, n):
    """Independent child seeds for ``n`` replicates of a study."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def sample_innovation(kind, nu=None, xi=None, rng=None, size=None):
    """Draw zero-mean, unit-variance innovations.

    The skew-t uses the two-piece construction: a unit-variance t draw is
    folded, stretched by ``xi`` on the right with probability
    ``xi**2 / (1 + xi**2)`` (shrunk by ``1/xi`` on the left otherwise) and
    then standardized by the constants ``m`` and ``s``.
    """
    kind = InnovationKind.parse(kind)
    rng = np.random.default_rng(rng)
    if kind is InnovationKind.GAUSSIAN:
        return rng.standard_normal(size)
    if nu is None or not nu > 2:
        raise ConstraintViolation(f"nu must exceed 2, got {nu}")
    t_unit = rng.standard_t(nu, size) * np.sqrt((nu - 2.0) / nu)
    if kind is InnovationKind.STUDENT_T:
        return t_unit
    if xi is None or not xi > 0:
        raise ConstraintViolation(f"xi must be positive, got {xi}")
    c = skewt_constants(nu, xi)
    right = rng.uniform(size=size) < xi**2 / (1.0 + xi**2)
    w = np.where(right, xi * np.abs(t_unit), -np.abs(t_unit) / xi)
    return (w - c.m) / c.s


def simulate_garch(config: SimConfig) -> ReturnSeries:
    """Simulate ``y_t = sigma_t * eps_t`` starting from the unconditional variance."""
    p = config.params
    rng = np.random.default_rng(config.seed)
    eps = np.asarray(sample_innovation(config.kind, p.nu, p.xi, rng, config.length))
    y = np.empty(config.length)
    s2 = p.omega / (1.0 - p.alpha - p.beta)
    omega, alpha, beta = p.omega, p.alpha, p.beta
    prev = 0.0
    for t in range(config.length):
        if t:
            s2 = omega + alpha * prev * prev + beta * s2
        prev = np.sqrt(s2) * eps[t]
        y[t] = prev
    label = f"simulated-{config.kind.value}-seed{config.seed}"
    return ReturnSeries(y, Source.SIMULATED, label)
