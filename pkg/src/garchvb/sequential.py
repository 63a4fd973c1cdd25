"""Sequential posterior updating: UVB and Seq-SVB.

UVB treats the previous variational density as the prior and adds only the
likelihood of the newly arrived block.  Seq-SVB re-fits the full posterior on
all data seen so far, warm-started from the previous variational parameters.
Both use the reparameterization-trick estimator.
"""

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List

import numpy as np

from .model import check_series
from .params import InnovationKind
from .posterior import GarchTarget
from .variational import FitResult, Method, OptimizerConfig, VariationalState, fit_svb

__all__ = [
    "SequentialMode",
    "UpdateSchedule",
    "SequentialResult",
    "uvb_update",
    "seqsvb_update",
    "run_sequential",
]


class SequentialMode(str, Enum):
    UVB = "uvb"
    SEQ_SVB = "seqsvb"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        return {"uvb": cls.UVB, "seqsvb": cls.SEQ_SVB}[key]


@dataclass(frozen=True)
class UpdateSchedule:
    """Initial batch of ``initial`` points followed by ``updates`` blocks up to ``total``.

    When ``updates`` does not divide ``total - initial`` the last block
    absorbs the remainder.
    """

    initial: int
    updates: int
    total: int

    def __post_init__(self):
        if not 2 <= self.initial < self.total:
            raise ValueError("need 2 <= initial < total")
        if self.updates < 1 or self.updates > self.total - self.initial:
            raise ValueError("updates must be between 1 and total - initial")

    @property
    def block(self) -> int:
        return (self.total - self.initial) // self.updates

    def windows(self):
        """``(start, stop)`` index pairs (0-based, half-open) of each update block."""
        edges = [self.initial + k * self.block for k in range(self.updates)] + [self.total]
        return list(zip(edges[:-1], edges[1:]))


@dataclass
class SequentialResult:
    initial: FitResult
    updates: List[FitResult]
    wall_times: List[float]
    mode: SequentialMode
    schedule: UpdateSchedule = None

    @property
    def final_state(self) -> VariationalState:
        return self.updates[-1].state


def _config_with_seed(config, seed):
    return replace(config, seed=seed)


def uvb_update(prev_state, y_full, window, kind, config: OptimizerConfig = None) -> FitResult:
    """One UVB step: pseudo-prior ``q_prev`` times the likelihood of ``y[window]``.

    The variance recursion runs over ``y_full[:window[1]]`` while only the
    terms inside the window enter the likelihood sum.
    """
    kind = InnovationKind.parse(kind)
    config = config or OptimizerConfig(n_samples=5)
    target = GarchTarget(y_full, kind, window=tuple(window), prior=prev_state)
    return fit_svb(None, kind, Method.RT, config, init=prev_state, target=target)


def seqsvb_update(prev_state, y_full, upto, kind, config: OptimizerConfig = None) -> FitResult:
    """One Seq-SVB step: batch SVB on ``y_full[:upto]`` warm-started at ``prev_state``."""
    y_full = check_series(y_full)
    if upto > y_full.size:
        raise ValueError(f"upto={upto} exceeds series length {y_full.size}")
    config = config or OptimizerConfig(n_samples=5)
    return fit_svb(y_full[:upto], kind, Method.RT, config, init=prev_state)


def run_sequential(y, kind, mode, schedule: UpdateSchedule,
                   config: OptimizerConfig = None, initial: FitResult = None) -> SequentialResult:
    """Batch fit on the first ``schedule.initial`` points, then ``schedule.updates`` updates.

    Each stage gets its own seed spawned from ``config.seed``.  A precomputed
    ``initial`` fit may be passed to share it between modes.
    """
    y = check_series(y)
    if schedule.total > y.size:
        raise ValueError(f"schedule needs {schedule.total} points, series has {y.size}")
    kind = InnovationKind.parse(kind)
    mode = SequentialMode.parse(mode)
    config = config or OptimizerConfig(n_samples=5)
    seeds = np.random.SeedSequence(config.seed).spawn(schedule.updates + 1)
    stage_seed = lambda k: int(seeds[k].generate_state(1, dtype=np.uint32)[0])
    if initial is None:
        initial = fit_svb(y[: schedule.initial], kind, Method.RT,
                          _config_with_seed(config, stage_seed(0)))
    state = initial.state
    updates, times = [], []
    for k, (start, stop) in enumerate(schedule.windows(), start=1):
        cfg = _config_with_seed(config, stage_seed(k))
        t0 = time.perf_counter()
        if mode is SequentialMode.UVB:
            res = uvb_update(state, y, (start, stop), kind, cfg)
        else:
            res = seqsvb_update(state, y, stop, kind, cfg)
        times.append(time.perf_counter() - t0)
        updates.append(res)
        state = res.state
    return SequentialResult(initial, updates, times, mode, schedule)
